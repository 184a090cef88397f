use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::Exp1;

use crate::dynamics::{Configuration, Params, Task};
use crate::error::Result;
use crate::graph::Graph;

use super::{Event, EventLog, Mark, SimRng, Simulator};

#[derive(Debug, Clone, Copy)]
struct Stream {
    target: usize,
    mark: Mark,
    rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Graphical representation: independent Poisson streams of marks, merged
/// through a priority queue keyed by the next time of each stream.
///
/// For a vertex `x` of degree `d > 0` and each neighbor `y`:
/// solid arrows `y -> x` at rate `(1 - eps) c1 / d`, dashed arrows at rate
/// `(1 - eps)(c2 - c1) / d`; at `x` itself dots at rate `eps c1` and crosses
/// at rate `eps (c2 - c1)`. Isolated vertices always defect, so their dots
/// and crosses run at rates `c1` and `c2 - c1`. Streams with rate zero are
/// never created. Superposing the marks reproduces the switching rates of
/// [`crate::dynamics::flip_rate`].
#[derive(Debug, Clone)]
pub struct GraphicalEngine<'g> {
    graph: &'g Graph,
    params: Params,
    config: Configuration,
    streams: Vec<Stream>,
    queue: BinaryHeap<Reverse<(Key, usize)>>,
    time: f64,
    rng: SimRng,
    log: Option<EventLog>,
}

impl<'g> GraphicalEngine<'g> {
    pub fn new(graph: &'g Graph, params: Params, config: Configuration, mut rng: SimRng) -> Result<Self> {
        config.check_size(graph)?;
        let (c1, c2, eps) = (params.c1(), params.c2(), params.epsilon());
        let mut streams = Vec::new();
        let mut push = |target, mark, rate: f64| {
            if rate > 0.0 {
                streams.push(Stream { target, mark, rate });
            }
        };
        for x in 0..graph.vertex_count() {
            let deg = graph.degree(x);
            if deg == 0 {
                push(x, Mark::Dot, c1);
                push(x, Mark::Cross, c2 - c1);
                continue;
            }
            let d = deg as f64;
            for &y in graph.neighbors(x) {
                push(x, Mark::Solid { source: y }, (1.0 - eps) * c1 / d);
                push(x, Mark::Dashed { source: y }, (1.0 - eps) * (c2 - c1) / d);
            }
            push(x, Mark::Dot, eps * c1);
            push(x, Mark::Cross, eps * (c2 - c1));
        }
        let queue = streams
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let e: f64 = rng.sample(Exp1);
                Reverse((Key(e / s.rate), i))
            })
            .collect();
        Ok(Self { graph, params, config, streams, queue, time: 0.0, rng, log: None })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Number of active Poisson streams.
    pub fn stream_count(&self) -> usize {
        self.streams.len()
    }

    /// Marks of every active stream, in creation order.
    pub fn stream_marks(&self) -> impl Iterator<Item = (usize, Mark, f64)> + '_ {
        self.streams.iter().map(|s| (s.target, s.mark, s.rate))
    }

    /// Starts logging events into a ring buffer holding `capacity` events.
    pub fn enable_log(&mut self, capacity: usize) {
        self.log = Some(EventLog::new(capacity, self.time));
    }

    pub fn log(&self) -> Option<&EventLog> {
        self.log.as_ref()
    }

    pub fn log_mut(&mut self) -> Option<&mut EventLog> {
        self.log.as_mut()
    }

    fn resolve(&self, target: usize, mark: Mark) -> Task {
        let current = self.config.get(target);
        match mark {
            Mark::Solid { source } => self.config.get(source).other(),
            Mark::Dashed { source } if current == Task::Two => self.config.get(source).other(),
            Mark::Dot => current.other(),
            Mark::Cross if current == Task::Two => Task::One,
            _ => current,
        }
    }
}

impl Simulator for GraphicalEngine<'_> {
    fn graph(&self) -> &Graph {
        self.graph
    }

    fn configuration(&self) -> &Configuration {
        &self.config
    }

    fn time(&self) -> f64 {
        self.time
    }

    fn next_event_time(&mut self) -> Option<f64> {
        let t = self.queue.peek().map(|Reverse((Key(t), _))| *t)?;
        if let Some(log) = self.log.as_mut() {
            log.extend_coverage(t);
        }
        Some(t)
    }

    fn apply_next(&mut self) -> Option<Event> {
        let Reverse((Key(time), i)) = self.queue.pop()?;
        debug_assert!(time >= self.time);
        let Stream { target, mark, rate } = self.streams[i];
        let before = self.config.get(target);
        let after = self.resolve(target, mark);
        self.config.set(target, after);
        self.time = time;

        let e: f64 = self.rng.sample(Exp1);
        self.queue.push(Reverse((Key(time + e / rate), i)));

        let event = Event { time, vertex: target, mark, before, after };
        if let Some(log) = self.log.as_mut() {
            log.push(event);
        }
        Some(event)
    }
}
