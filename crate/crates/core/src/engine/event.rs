use std::cmp::Ordering;

/// Index of a site in the explored region of one trial.
pub type SiteIndex = u32;

/// Event kinds, declared in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Convert,
    Arrive2,
    Arrive1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub target: SiteIndex,
    /// Equal to `target` for conversions.
    pub source: SiteIndex,
    /// Time at which the attempt was scheduled.
    pub issued: f64,
    /// Set on type-2 attempts redrawn by the resampling construction.
    pub resampled: bool,
}

impl Event {
    fn key(&self) -> (f64, EventKind, SiteIndex, SiteIndex, bool) {
        (
            self.time,
            self.kind,
            self.target,
            self.source,
            self.resampled,
        )
    }
}

impl Eq for Event {}

// Reversed so that `BinaryHeap` pops the earliest event, ties broken by
// kind, then target, then source.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
            .then(b.4.cmp(&a.4))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
