use rand::Rng;
use rand_distr::Exp1;

use crate::dynamics::{flip_rate, rate_from_counts, Configuration, Params};
use crate::error::Result;
use crate::graph::Graph;

use super::{Event, Mark, SimRng, Simulator, SumTree};

/// Full rebuild of counts, rates and partial sums after this many events.
const REFRESH_INTERVAL: u64 = 1 << 20;

/// Direct stochastic simulation: exponential waiting time at the total rate,
/// switching vertex drawn proportionally to its rate from a [`SumTree`].
///
/// For every vertex the engine keeps the number of neighbors on the other
/// task, so rates are always evaluated from integer counts.
#[derive(Debug, Clone)]
pub struct GillespieEngine<'g> {
    graph: &'g Graph,
    params: Params,
    config: Configuration,
    opposite: Vec<usize>,
    tree: SumTree,
    time: f64,
    pending: Option<f64>,
    rng: SimRng,
    events: u64,
    batch_threshold: usize,
}

impl<'g> GillespieEngine<'g> {
    pub fn new(graph: &'g Graph, params: Params, config: Configuration, rng: SimRng) -> Result<Self> {
        config.check_size(graph)?;
        let n = graph.vertex_count();
        let depth = (usize::BITS - n.max(2).leading_zeros()) as usize;
        let mut engine = Self {
            graph,
            params,
            config,
            opposite: vec![0; n],
            tree: SumTree::new(n),
            time: 0.0,
            pending: None,
            rng,
            events: 0,
            batch_threshold: (n / depth).max(1),
        };
        engine.refresh();
        Ok(engine)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn total_rate(&self) -> f64 {
        self.tree.total()
    }

    pub fn rate(&self, x: usize) -> f64 {
        self.tree.weight(x)
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Recomputes neighbor counts, rates and partial sums from scratch.
    pub fn refresh(&mut self) {
        for x in 0..self.graph.vertex_count() {
            let task = self.config.get(x);
            self.opposite[x] = self.graph.neighbors(x).iter().filter(|&&y| self.config.get(y) != task).count();
            let r = self.compute_rate(x);
            self.tree.set_deferred(x, r);
        }
        self.tree.rebuild();
    }

    /// Largest relative difference between the stored rate table and rates
    /// recomputed from the configuration.
    pub fn rate_table_error(&self) -> f64 {
        (0..self.graph.vertex_count())
            .map(|x| {
                let exact = flip_rate(self.graph, &self.config, &self.params, x).expect("valid vertex");
                let stored = self.tree.weight(x);
                (stored - exact).abs() / exact.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    #[inline]
    fn compute_rate(&self, x: usize) -> f64 {
        rate_from_counts(&self.params, self.config.get(x), self.opposite[x], self.graph.degree(x))
    }
}

impl Simulator for GillespieEngine<'_> {
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
        if let Some(t) = self.pending {
            return Some(t);
        }
        let total = self.tree.total();
        if total <= 0.0 {
            return None;
        }
        let e: f64 = self.rng.sample(Exp1);
        let t = self.time + e / total;
        self.pending = Some(t);
        Some(t)
    }

    fn apply_next(&mut self) -> Option<Event> {
        let time = self.next_event_time()?;
        self.pending = None;
        let u = self.rng.random::<f64>() * self.tree.total();
        let x = self.tree.sample(u);
        let before = self.config.get(x);
        let after = self.config.toggle(x);

        let graph = self.graph;
        let neighbors = graph.neighbors(x);
        self.opposite[x] = neighbors.len() - self.opposite[x];
        for &y in neighbors {
            if self.config.get(y) == after {
                self.opposite[y] -= 1;
            } else {
                self.opposite[y] += 1;
            }
        }
        if neighbors.len() + 1 > self.batch_threshold {
            for &y in neighbors {
                self.tree.set_deferred(y, self.compute_rate(y));
            }
            self.tree.set_deferred(x, self.compute_rate(x));
            self.tree.rebuild();
        } else {
            for &y in neighbors {
                self.tree.set(y, self.compute_rate(y));
            }
            self.tree.set(x, self.compute_rate(x));
        }

        self.time = time;
        self.events += 1;
        if self.events.is_multiple_of(REFRESH_INTERVAL) {
            self.refresh();
        }
        Some(Event { time, vertex: x, mark: Mark::Switch, before, after })
    }
}
