use rayon::prelude::*;

use crate::dynamics::{Configuration, InitialLaw, Params, Task};
use crate::error::{Error, Result};
use crate::graph::{find_bipartition, Graph};

use super::{replicate_rng, GillespieEngine, ObservableAccumulator, Simulator};

/// Sample mean and standard error of a set of replicate measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: Vec<f64>,
}

impl Estimate {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var =
            if samples.len() > 1 { samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Self { mean, std_error: (var / n).sqrt(), samples }
    }
}

/// Monte Carlo estimates of the entrance time into `{xi_minus, xi_plus}` and
/// of the exit times out of `xi_plus` and `xi_minus`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingReport {
    pub sizes: (usize, usize),
    pub t_in: Estimate,
    /// `None` when `epsilon = 0` (the checkerboards are absorbing).
    pub t_out_plus: Option<Estimate>,
    pub t_out_minus: Option<Estimate>,
    /// Exit rate from `xi_plus`: `eps (N1 c1 + N2 c2)`.
    pub exit_rate_plus: f64,
    /// Exit rate from `xi_minus`: `eps (N2 c1 + N1 c2)`.
    pub exit_rate_minus: f64,
    /// Lower bound `1 / (eps N c2)` on the mean exit time.
    pub t_out_lower_bound: f64,
}

const MAX_RESAMPLES: usize = 1000;

/// Runs `replicates` independent Gillespie replicates of each hitting time on
/// a connected bipartite graph. Replicate `r` uses stream `3r` for the
/// entrance time and streams `3r + 1`, `3r + 2` for the two exit times.
pub fn estimate_hitting_times(
    graph: &Graph,
    params: &Params,
    init: &InitialLaw,
    replicates: usize,
    seed: u64,
) -> Result<HittingReport> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let bipartition = find_bipartition(graph).ok_or(Error::NotBipartite)?;
    if !graph.is_connected() {
        return Err(Error::NotConnected);
    }
    let plus = Configuration::checkerboard(&bipartition, Task::One);
    let minus = Configuration::checkerboard(&bipartition, Task::Two);
    let targets = vec![plus.clone(), minus.clone()];
    let n = graph.vertex_count();

    let entrance = |r: usize| -> Result<f64> {
        let mut rng = replicate_rng(seed, 3 * r as u64);
        let mut start = init.sample(n, &mut rng)?;
        let mut tries = 0;
        while start == plus || start == minus {
            tries += 1;
            if tries > MAX_RESAMPLES {
                return Err(Error::InvalidInitialLaw(
                    "initial law never produces a configuration outside {xi_minus, xi_plus}".into(),
                ));
            }
            start = init.sample(n, &mut rng)?;
        }
        let mut engine = GillespieEngine::new(graph, *params, start.clone(), rng)?;
        let mut acc = ObservableAccumulator::new(&start).with_targets(targets.clone());
        while acc.current_target().is_none() {
            let event =
                engine.apply_next().expect("a configuration outside the checkerboards always has a positive rate");
            acc.record(&event);
        }
        Ok(engine.time())
    };

    let exit = |r: usize, from: &Configuration, stream: u64| -> Result<f64> {
        let rng = replicate_rng(seed, 3 * r as u64 + stream);
        let mut engine = GillespieEngine::new(graph, *params, from.clone(), rng)?;
        let event = engine.apply_next().expect("epsilon > 0 gives a positive exit rate");
        Ok(event.time)
    };

    let t_in = (0..replicates).into_par_iter().map(entrance).collect::<Result<Vec<_>>>()?;
    let (t_out_plus, t_out_minus) = if params.epsilon() > 0.0 {
        let p = (0..replicates).into_par_iter().map(|r| exit(r, &plus, 1)).collect::<Result<Vec<_>>>()?;
        let m = (0..replicates).into_par_iter().map(|r| exit(r, &minus, 2)).collect::<Result<Vec<_>>>()?;
        (Some(Estimate::from_samples(p)), Some(Estimate::from_samples(m)))
    } else {
        (None, None)
    };

    let (n1, n2) = bipartition.sizes();
    let (c1, c2, eps) = (params.c1(), params.c2(), params.epsilon());
    Ok(HittingReport {
        sizes: (n1, n2),
        t_in: Estimate::from_samples(t_in),
        t_out_plus,
        t_out_minus,
        exit_rate_plus: eps * (n1 as f64 * c1 + n2 as f64 * c2),
        exit_rate_minus: eps * (n2 as f64 * c1 + n1 as f64 * c2),
        t_out_lower_bound: 1.0 / (eps * n as f64 * c2),
    })
}
