use serde::{Deserialize, Serialize};

use crate::model::{extract_ranges, AnomalyRange};

/// Partition of `[0, n)` into sections whose buffered labels can change
/// with the buffer length (dynamic) and sections where they are always 0
/// (static).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentMap {
    pub dynamic: Vec<AnomalyRange>,
    pub static_: Vec<AnomalyRange>,
}

impl SegmentMap {
    pub fn dynamic_len(&self) -> usize {
        self.dynamic.iter().map(|r| r.len()).sum()
    }
}

/// Inflate every labeled range by `ceil(max_buffer / 2)` per side, clip and
/// merge; the complement is static.
pub fn build_segment_map(labels: &[u8], max_buffer: usize) -> SegmentMap {
    let n = labels.len();
    let pad = max_buffer.div_ceil(2);
    let mut dynamic: Vec<AnomalyRange> = Vec::new();
    for r in extract_ranges(labels) {
        let start = r.start.saturating_sub(pad);
        let end = (r.end + pad).min(n - 1);
        match dynamic.last_mut() {
            // merge overlapping or touching sections
            Some(last) if start <= last.end + 1 => last.end = last.end.max(end),
            _ => dynamic.push(AnomalyRange::new(start, end)),
        }
    }
    let mut static_ = Vec::new();
    let mut cursor = 0;
    for d in &dynamic {
        if d.start > cursor {
            static_.push(AnomalyRange::new(cursor, d.start - 1));
        }
        cursor = d.end + 1;
    }
    if cursor < n {
        static_.push(AnomalyRange::new(cursor, n - 1));
    }
    SegmentMap { dynamic, static_ }
}
