use crate::error::{Error, Result};
use crate::graph::Graph;

use super::EventLog;

/// Influencing vertices over one time slab: every `(y, s)` with
/// `s ∈ [from, to]` and `y = x + k`, `left <= k <= right` (offsets taken
/// around the ring).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slab {
    pub from: f64,
    pub to: f64,
    pub left: i64,
    pub right: i64,
}

impl Slab {
    pub fn width(&self) -> usize {
        (self.right - self.left + 1) as usize
    }
}

/// Space-time points from which an oriented path of arrows reaches `x` or
/// `x + 1` at time `t`, restricted to `[t - depth, t]`. Slabs are listed
/// from time `t` backwards.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceSet {
    pub x: usize,
    pub ring_size: usize,
    pub slabs: Vec<Slab>,
}

impl InfluenceSet {
    /// Width of the influence interval at the bottom of the window.
    pub fn width_at_depth(&self) -> usize {
        self.slabs.last().map_or(2, Slab::width)
    }

    pub fn contains(&self, y: usize, s: f64) -> bool {
        let n = self.ring_size as i64;
        self.slabs.iter().any(|slab| {
            s >= slab.from
                && s <= slab.to
                && (slab.left..=slab.right).any(|k| (self.x as i64 + k).rem_euclid(n) as usize == y)
        })
    }
}

/// Sweeps the logged arrows backwards from `t`. Solid and dashed arrows count
/// whether or not they changed the target; dots and crosses are ignored.
pub fn influence_set(graph: &Graph, log: &EventLog, x: usize, t: f64, depth: f64) -> Result<InfluenceSet> {
    if !graph.is_ring() {
        return Err(Error::NotRing);
    }
    graph.check_vertex(x)?;
    let bottom = t - depth;
    if log.covered_from() > bottom || log.covered_until() < t {
        return Err(Error::LogWindowTooShort {
            covered_from: log.covered_from(),
            covered_until: log.covered_until(),
            needed_from: bottom,
            needed_until: t,
        });
    }
    let n = graph.vertex_count();
    let ni = n as i64;
    let (mut left, mut right) = (0i64, 1i64);
    let mut upper = t;
    let mut slabs = Vec::new();

    for event in log.iter().rev() {
        if event.time > t {
            continue;
        }
        if event.time < bottom {
            break;
        }
        let Some(source) = event.mark.source() else { continue };
        if right - left + 1 >= ni - 1 {
            break;
        }
        let offset = |v: usize| (v as i64 - x as i64 - left).rem_euclid(ni) + left;
        let target = offset(event.vertex);
        if target > right {
            continue;
        }
        let source_offset = if source == (event.vertex + 1) % n { target + 1 } else { target - 1 };
        if source_offset == left - 1 || source_offset == right + 1 {
            slabs.push(Slab { from: event.time, to: upper, left, right });
            upper = event.time;
            if source_offset < left {
                left -= 1;
            } else {
                right += 1;
            }
        }
    }
    slabs.push(Slab { from: bottom, to: upper, left, right });
    Ok(InfluenceSet { x, ring_size: n, slabs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Task;
    use crate::engine::{Event, Mark};

    fn arrow(time: f64, source: usize, target: usize) -> Event {
        Event { time, vertex: target, mark: Mark::Solid { source }, before: Task::One, after: Task::One }
    }

    fn log_of(events: &[Event], until: f64) -> EventLog {
        let mut log = EventLog::new(1000, 0.0);
        for e in events {
            log.push(*e);
        }
        log.extend_coverage(until);
        log
    }

    #[test]
    fn empty_window() {
        let g = Graph::cycle(20).unwrap();
        let log = log_of(&[], 10.0);
        let set = influence_set(&g, &log, 5, 10.0, 4.0).unwrap();
        assert_eq!(set.slabs, vec![Slab { from: 6.0, to: 10.0, left: 0, right: 1 }]);
        assert!(set.contains(5, 7.0) && set.contains(6, 9.0) && !set.contains(4, 7.0));
    }

    #[test]
    fn one_arrow_into_x() {
        let g = Graph::cycle(20).unwrap();
        let log = log_of(&[arrow(8.0, 4, 5)], 10.0);
        let set = influence_set(&g, &log, 5, 10.0, 4.0).unwrap();
        assert_eq!(
            set.slabs,
            vec![Slab { from: 8.0, to: 10.0, left: 0, right: 1 }, Slab { from: 6.0, to: 8.0, left: -1, right: 1 },]
        );
        assert!(set.contains(4, 7.0) && !set.contains(4, 9.0));
        assert_eq!(set.width_at_depth(), 3);
    }

    #[test]
    fn paths_must_respect_time_order() {
        // 3 -> 4 precedes 4 -> 5, so 3 is reached; 8 -> 7 comes after
        // 7 -> 6, so 8 is not.
        let g = Graph::cycle(20).unwrap();
        let events = [arrow(6.5, 3, 4), arrow(7.0, 7, 6), arrow(7.5, 8, 7), arrow(8.0, 4, 5)];
        let set = influence_set(&g, &log_of(&events, 10.0), 5, 10.0, 4.0).unwrap();
        let last = set.slabs.last().unwrap();
        assert_eq!((last.left, last.right), (-2, 2));
    }

    #[test]
    fn wraps_around_vertex_zero() {
        let g = Graph::cycle(10).unwrap();
        let events = [arrow(2.0, 8, 9), arrow(3.0, 9, 0)];
        let set = influence_set(&g, &log_of(&events, 5.0), 0, 5.0, 4.0).unwrap();
        let last = set.slabs.last().unwrap();
        assert_eq!((last.left, last.right), (-2, 1));
        assert!(set.contains(8, 1.5));
    }

    #[test]
    fn window_must_be_covered() {
        let g = Graph::cycle(10).unwrap();
        let log = log_of(&[], 5.0);
        assert!(matches!(influence_set(&g, &log, 0, 6.0, 2.0), Err(Error::LogWindowTooShort { .. })));
        let mut log = EventLog::new(1, 0.0);
        log.push(arrow(1.0, 1, 2));
        log.push(arrow(2.0, 1, 2));
        log.extend_coverage(5.0);
        assert!(influence_set(&g, &log, 0, 5.0, 4.5).is_err());
        assert!(influence_set(&g, &log, 0, 5.0, 2.5).is_ok());
        assert_eq!(influence_set(&Graph::complete(4).unwrap(), &log, 0, 5.0, 1.0), Err(Error::NotRing));
    }
}
