//! Continuous-time simulation of the task dynamics.
//!
//! Two interchangeable simulators implement [`Simulator`]:
//! [`GillespieEngine`] samples the next switching vertex directly from the
//! rate table, [`GraphicalEngine`] realizes the process from independent
//! Poisson streams of arrows, dots and crosses. [`run`] drives either one
//! against an [`ObservableAccumulator`].

mod gillespie;
mod graphical;
mod hitting;
mod influence;
mod log;
mod observe;
mod sumtree;

pub use gillespie::GillespieEngine;
pub use graphical::GraphicalEngine;
pub use hitting::{estimate_hitting_times, Estimate, HittingReport};
pub use influence::{influence_set, InfluenceSet, Slab};
pub use log::EventLog;
pub use observe::ObservableAccumulator;
pub use sumtree::SumTree;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{Configuration, Task};
use crate::graph::Graph;

/// Random generator used by every simulator.
pub type SimRng = ChaCha8Rng;

/// Independent generator for replicate `replicate` of an experiment seeded
/// with `seed`: same key, distinct ChaCha stream.
pub fn replicate_rng(seed: u64, replicate: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Which Poisson family produced an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    /// Direct switch drawn from the rate table.
    Switch,
    /// `source -> target`: the target anti-imitates the source.
    Solid { source: usize },
    /// `source ⇢ target`: anti-imitation only if the target performs task 2.
    Dashed { source: usize },
    /// The target switches task.
    Dot,
    /// The target switches task only if it performs task 2.
    Cross,
}

impl Mark {
    pub fn is_arrow(&self) -> bool {
        matches!(self, Mark::Solid { .. } | Mark::Dashed { .. })
    }

    pub fn source(&self) -> Option<usize> {
        match *self {
            Mark::Solid { source } | Mark::Dashed { source } => Some(source),
            _ => None,
        }
    }
}

/// One applied event. `before == after` for marks that had no effect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub vertex: usize,
    pub mark: Mark,
    pub before: Task,
    pub after: Task,
}

impl Event {
    pub fn changed(&self) -> bool {
        self.before != self.after
    }
}

/// Common interface of the two simulators.
pub trait Simulator {
    fn graph(&self) -> &Graph;
    fn configuration(&self) -> &Configuration;
    fn time(&self) -> f64;
    /// Time of the pending event, drawing it if needed; `None` when the
    /// process is absorbed (total rate zero).
    fn next_event_time(&mut self) -> Option<f64>;
    /// Applies the pending event; `None` when absorbed.
    fn apply_next(&mut self) -> Option<Event>;
}

/// Length of a run: a number of applied events or a time horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Updates(u64),
    Time(f64),
}

/// Which simulator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Gillespie,
    Graphical,
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EngineKind::Gillespie => "gillespie",
            EngineKind::Graphical => "graphical",
        })
    }
}

impl std::str::FromStr for EngineKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "gillespie" => Ok(EngineKind::Gillespie),
            "graphical" => Ok(EngineKind::Graphical),
            other => Err(crate::Error::InvalidArgument(format!("unknown engine `{other}`"))),
        }
    }
}

/// Result of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Time average of the fraction of vertices on task 1 over `[0, sim_time]`.
    pub phi: f64,
    /// Same average restricted to `[burnin, sim_time]`, if a burn-in was set.
    pub phi_post_burnin: Option<f64>,
    /// Fraction of time spent in each registered target configuration.
    pub residence: Vec<f64>,
    /// Time-averaged fraction of designated edges whose endpoints agree.
    pub agreement: Option<f64>,
    pub agreement_post_burnin: Option<f64>,
    /// Time average of the task-1 fraction inside the spatial window.
    pub window_phi: Option<f64>,
    pub window_phi_post_burnin: Option<f64>,
    pub events: u64,
    pub sim_time: f64,
    pub absorbed: bool,
    pub absorbed_at: Option<f64>,
    pub final_config: Configuration,
}

/// Runs `sim` until the budget is spent, integrating every observable
/// registered in `acc` exactly between events.
///
/// With a time budget, absorption freezes the configuration and the
/// remaining horizon is integrated analytically. With an update budget the
/// run stops at the absorption time. A `Budget::Time(f64::INFINITY)` run
/// stops only at absorption.
pub fn run<S: Simulator + ?Sized>(sim: &mut S, budget: Budget, acc: &mut ObservableAccumulator) -> RunSummary {
    let mut absorbed_at = None;
    loop {
        if let Budget::Updates(k) = budget {
            if acc.event_count() >= k {
                break;
            }
        }
        match sim.next_event_time() {
            None => {
                absorbed_at = Some(sim.time());
                if let Budget::Time(horizon) = budget {
                    if horizon.is_finite() {
                        acc.advance_to(horizon);
                    }
                }
                break;
            }
            Some(next) => {
                if let Budget::Time(horizon) = budget {
                    if next > horizon {
                        acc.advance_to(horizon);
                        break;
                    }
                }
                acc.advance_to(next);
                let event = sim.apply_next().expect("pending event exists");
                acc.record(&event);
            }
        }
    }
    acc.summary(sim.configuration(), absorbed_at)
}
