//! A bi-infinite field of independent randomness, indexed by integer time
//! and component slot.
//!
//! The field is a pure function `(time, slot) -> stream`: nothing is ever
//! consumed, so any consumer may read any coordinate any number of times
//! and always sees the same values. This is what lets coupling-from-the-
//! past re-run deeper past horizons against literally the same noise, and
//! what makes the time shift `θ` act on randomness by reindexing alone.
//!
//! An optional audit trail records every `(time, slot)` read, so tests can
//! check non-anticipation: a factor-map run with horizon `n` must never
//! touch times `>= n`.

use std::sync::{Arc, Mutex};

use rand_chacha::ChaCha12Rng;

use crate::renorm::Slot;
use crate::rng::{derive_stream, StreamPart};

/// One recorded read: the time index (after shift) and a printable slot name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldAccess {
    pub time: i64,
    pub slot: String,
}

#[derive(Debug, Clone)]
pub struct RandomnessField {
    master: u64,
    shift: i64,
    audit: Option<Arc<Mutex<Vec<FieldAccess>>>>,
}

impl RandomnessField {
    pub fn new(master: u64) -> Self {
        RandomnessField {
            master,
            shift: 0,
            audit: None,
        }
    }

    pub fn with_audit(master: u64) -> Self {
        RandomnessField {
            master,
            shift: 0,
            audit: Some(Arc::new(Mutex::new(Vec::new()))),
        }
    }

    /// The stream at `(time, slot)`. Pure: every call with equal arguments
    /// returns an identically seeded generator.
    pub fn stream(&self, time: i64, slot: Slot<'_>) -> ChaCha12Rng {
        let t = time + self.shift;
        if let Some(a) = &self.audit {
            a.lock().unwrap().push(FieldAccess {
                time: t,
                slot: slot_name(&slot),
            });
        }
        let mut parts = vec![StreamPart::Tag("field"), StreamPart::Int(t)];
        match slot {
            Slot::First => parts.push(StreamPart::Tag("first")),
            Slot::Index(m) => {
                parts.push(StreamPart::Tag("index"));
                parts.push(StreamPart::Int(m as i64));
            }
            Slot::Cell(key) => {
                parts.push(StreamPart::Tag("cell"));
                parts.push(StreamPart::Bytes(key.as_bytes()));
            }
        }
        derive_stream(self.master, &parts)
    }

    /// The field composed with the time shift: `shifted(d).stream(t, s)`
    /// equals `self.stream(t + d, s)`. Shifts compose additively.
    pub fn shifted(&self, d: i64) -> RandomnessField {
        RandomnessField {
            master: self.master,
            shift: self.shift + d,
            audit: self.audit.clone(),
        }
    }

    /// Reads recorded so far (empty when auditing is off).
    pub fn accesses(&self) -> Vec<FieldAccess> {
        match &self.audit {
            Some(a) => a.lock().unwrap().clone(),
            None => Vec::new(),
        }
    }

    pub fn clear_accesses(&self) {
        if let Some(a) = &self.audit {
            a.lock().unwrap().clear();
        }
    }
}

fn slot_name(slot: &Slot<'_>) -> String {
    match slot {
        Slot::First => "first".to_string(),
        Slot::Index(m) => format!("index:{m}"),
        Slot::Cell(key) => format!("cell:{}", key.short_hex()),
    }
}
