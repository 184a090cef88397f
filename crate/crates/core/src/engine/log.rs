use std::collections::VecDeque;

use super::Event;

/// Bounded log of the most recent events.
///
/// `covered_from..=covered_until` is the time range over which the log is
/// known to hold every event: it starts when logging is switched on, moves
/// forward whenever an old event is evicted, and is extended by the engine
/// up to the time of its next pending event.
#[derive(Debug, Clone)]
pub struct EventLog {
    events: VecDeque<Event>,
    capacity: usize,
    covered_from: f64,
    covered_until: f64,
}

impl EventLog {
    pub fn new(capacity: usize, start: f64) -> Self {
        Self {
            events: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity: capacity.max(1),
            covered_from: start,
            covered_until: start,
        }
    }

    pub fn push(&mut self, event: Event) {
        if self.events.len() == self.capacity {
            if let Some(old) = self.events.pop_front() {
                self.covered_from = old.time;
            }
        }
        self.covered_until = self.covered_until.max(event.time);
        self.events.push_back(event);
    }

    pub(crate) fn extend_coverage(&mut self, until: f64) {
        self.covered_until = self.covered_until.max(until);
    }

    pub fn covered_from(&self) -> f64 {
        self.covered_from
    }

    pub fn covered_until(&self) -> f64 {
        self.covered_until
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Event> + '_ {
        self.events.iter()
    }

    /// Drops events strictly before `time`.
    pub fn discard_before(&mut self, time: f64) {
        while self.events.front().is_some_and(|e| e.time < time) {
            self.events.pop_front();
        }
        self.covered_from = self.covered_from.max(time);
    }
}
