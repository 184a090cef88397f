use crate::dynamics::{Configuration, Task};

use super::{Event, RunSummary};

#[derive(Debug, Clone, Default)]
struct Integrals {
    time: f64,
    task_one: f64,
    residence: Vec<f64>,
    agreement: f64,
    window: f64,
}

#[derive(Debug, Clone)]
struct Agreement {
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
    agreeing: usize,
}

#[derive(Debug, Clone)]
struct Window {
    member: Vec<bool>,
    size: usize,
    task_one: usize,
}

/// Exact time integrals of piecewise-constant observables.
///
/// The accumulator keeps its own copy of the configuration and is advanced
/// to each event time before the event is recorded, so every integral is a
/// finite sum of `value * holding_time` terms.
#[derive(Debug, Clone)]
pub struct ObservableAccumulator {
    config: Configuration,
    start: f64,
    time: f64,
    burnin: Option<f64>,
    task_one: usize,
    events: u64,
    targets: Vec<Configuration>,
    mismatches: Vec<usize>,
    agreement: Option<Agreement>,
    window: Option<Window>,
    total: Integrals,
    post: Integrals,
}

impl ObservableAccumulator {
    pub fn new(initial: &Configuration) -> Self {
        Self::starting_at(initial, 0.0)
    }

    pub fn starting_at(initial: &Configuration, start: f64) -> Self {
        Self {
            task_one: initial.count_task_one(),
            config: initial.clone(),
            start,
            time: start,
            burnin: None,
            events: 0,
            targets: Vec::new(),
            mismatches: Vec::new(),
            agreement: None,
            window: None,
            total: Integrals::default(),
            post: Integrals::default(),
        }
    }

    /// Also integrate over `[start + burnin, end]` separately.
    pub fn with_burnin(mut self, burnin: f64) -> Self {
        self.burnin = Some(self.start + burnin.max(0.0));
        self
    }

    /// Track residence time in each of `targets`.
    pub fn with_targets(mut self, targets: Vec<Configuration>) -> Self {
        self.mismatches = targets
            .iter()
            .map(|t| {
                assert_eq!(t.len(), self.config.len(), "target size mismatch");
                (0..t.len()).filter(|&x| t.get(x) != self.config.get(x)).count()
            })
            .collect();
        self.total.residence = vec![0.0; targets.len()];
        self.post.residence = vec![0.0; targets.len()];
        self.targets = targets;
        self
    }

    /// Track the fraction of `edges` whose endpoints perform the same task.
    pub fn with_agreement(mut self, edges: Vec<(usize, usize)>) -> Self {
        let mut incident = vec![Vec::new(); self.config.len()];
        for (i, &(a, b)) in edges.iter().enumerate() {
            incident[a].push(i);
            incident[b].push(i);
        }
        let agreeing = edges.iter().filter(|&&(a, b)| self.config.get(a) == self.config.get(b)).count();
        self.agreement = Some(Agreement { edges, incident, agreeing });
        self
    }

    /// Track the task-1 fraction inside a set of vertices.
    pub fn with_window(mut self, vertices: impl IntoIterator<Item = usize>) -> Self {
        let mut member = vec![false; self.config.len()];
        for v in vertices {
            member[v] = true;
        }
        let size = member.iter().filter(|&&m| m).count();
        let task_one = (0..member.len()).filter(|&x| member[x] && self.config.get(x) == Task::One).count();
        self.window = Some(Window { member, size, task_one });
        self
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn event_count(&self) -> u64 {
        self.events
    }

    /// Current number of vertices on task 1.
    pub fn task_one_count(&self) -> usize {
        self.task_one
    }

    pub fn configuration(&self) -> &Configuration {
        &self.config
    }

    /// Index of the target the configuration currently equals, if any.
    pub fn current_target(&self) -> Option<usize> {
        self.mismatches.iter().position(|&m| m == 0)
    }

    /// Integrates all observables, frozen at their current values, up to `t`.
    pub fn advance_to(&mut self, t: f64) {
        if t <= self.time {
            return;
        }
        let dt = t - self.time;
        self.add(dt, false);
        if let Some(b) = self.burnin {
            if t > b {
                let from = self.time.max(b);
                self.add(t - from, true);
            }
        }
        self.time = t;
    }

    fn add(&mut self, dt: f64, post: bool) {
        let current = self.current_target();
        let agreeing = self.agreement.as_ref().map(|a| a.agreeing);
        let window = self.window.as_ref().map(|w| w.task_one);
        let acc = if post { &mut self.post } else { &mut self.total };
        acc.time += dt;
        acc.task_one += self.task_one as f64 * dt;
        if let Some(k) = current {
            acc.residence[k] += dt;
        }
        if let Some(a) = agreeing {
            acc.agreement += a as f64 * dt;
        }
        if let Some(w) = window {
            acc.window += w as f64 * dt;
        }
    }

    /// Applies an event at the current time. Events without effect only
    /// count towards the number of updates.
    pub fn record(&mut self, event: &Event) {
        self.events += 1;
        if !event.changed() {
            return;
        }
        let v = event.vertex;
        debug_assert_eq!(self.config.get(v), event.before);
        if let Some(a) = self.agreement.as_mut() {
            for &e in &a.incident[v] {
                let (p, q) = a.edges[e];
                let other = if p == v { q } else { p };
                let before = self.config.get(other) == event.before;
                let after = self.config.get(other) == event.after;
                match (before, after) {
                    (true, false) => a.agreeing -= 1,
                    (false, true) => a.agreeing += 1,
                    _ => {}
                }
            }
        }
        self.config.set(v, event.after);
        match event.after {
            Task::One => self.task_one += 1,
            Task::Two => self.task_one -= 1,
        }
        if let Some(w) = self.window.as_mut() {
            if w.member[v] {
                match event.after {
                    Task::One => w.task_one += 1,
                    Task::Two => w.task_one -= 1,
                }
            }
        }
        for (target, miss) in self.targets.iter().zip(self.mismatches.iter_mut()) {
            if target.get(v) == event.after {
                *miss -= 1;
            } else {
                *miss += 1;
            }
        }
    }

    /// Time average of the task-1 fraction over the whole run. With zero
    /// elapsed time this is the current fraction.
    pub fn phi(&self) -> f64 {
        let n = self.config.len() as f64;
        if self.total.time > 0.0 {
            self.total.task_one / (self.total.time * n)
        } else {
            self.task_one as f64 / n
        }
    }

    pub fn summary(&self, final_config: &Configuration, absorbed_at: Option<f64>) -> RunSummary {
        let n = self.config.len() as f64;
        let ratio = |num: f64, den: f64| if den > 0.0 { Some(num / den) } else { None };
        let has_burnin = self.burnin.is_some();
        let post_time = self.post.time;
        let agreement_edges = self.agreement.as_ref().map(|a| a.edges.len() as f64);
        let window_size = self.window.as_ref().map(|w| w.size as f64);
        RunSummary {
            phi: self.phi(),
            phi_post_burnin: if has_burnin { ratio(self.post.task_one, post_time * n) } else { None },
            residence: self
                .total
                .residence
                .iter()
                .map(|r| if self.total.time > 0.0 { r / self.total.time } else { 0.0 })
                .collect(),
            agreement: agreement_edges.and_then(|m| ratio(self.total.agreement, self.total.time * m)),
            agreement_post_burnin: agreement_edges
                .filter(|_| has_burnin)
                .and_then(|m| ratio(self.post.agreement, post_time * m)),
            window_phi: window_size.and_then(|m| ratio(self.total.window, self.total.time * m)),
            window_phi_post_burnin: window_size
                .filter(|_| has_burnin)
                .and_then(|m| ratio(self.post.window, post_time * m)),
            events: self.events,
            sim_time: self.time - self.start,
            absorbed: absorbed_at.is_some(),
            absorbed_at,
            final_config: final_config.clone(),
        }
    }
}
