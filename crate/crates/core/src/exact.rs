//! Exact analysis: the birth–death chain of the task-1 count on complete
//! graphs, its stationary law, the mean-field fixed point `u1_bar(B)`, and
//! the absorbing states without defection.

use crate::dynamics::{Configuration, Params, Task};
use crate::error::{Error, Result};
use crate::graph::{find_bipartition, Graph};

/// Birth and death rates of `X_t` on `K_N`, indexed by `j = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathChain {
    pub n: usize,
    pub birth: Vec<f64>,
    pub death: Vec<f64>,
}

/// `beta_j = c2 (N - j)(eps + (1 - eps)(N - j - 1)/(N - 1))` and
/// `delta_j = c1 j (eps + (1 - eps)(j - 1)/(N - 1))`.
pub fn build_birth_death(n: usize, params: &Params) -> Result<BirthDeathChain> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("birth-death chain needs N >= 2, got {n}")));
    }
    let (c1, c2, eps) = (params.c1(), params.c2(), params.epsilon());
    let m = (n - 1) as f64;
    let birth = (0..=n)
        .map(|j| {
            let k = (n - j) as f64;
            if j == n {
                0.0
            } else {
                c2 * k * (eps + (1.0 - eps) * ((n - j - 1) as f64 / m))
            }
        })
        .collect();
    let death = (0..=n)
        .map(|j| if j == 0 { 0.0 } else { c1 * j as f64 * (eps + (1.0 - eps) * ((j - 1) as f64 / m)) })
        .collect();
    Ok(BirthDeathChain { n, birth, death })
}

impl BirthDeathChain {
    /// Communicating classes as inclusive index ranges, with a flag telling
    /// whether each one is closed.
    pub fn classes(&self) -> Vec<((usize, usize), bool)> {
        let mut out = Vec::new();
        let mut start = 0;
        for j in 0..=self.n {
            let linked = j < self.n && self.birth[j] > 0.0 && self.death[j + 1] > 0.0;
            if !linked {
                let closed = (j == self.n || self.birth[j] == 0.0) && (start == 0 || self.death[start] == 0.0);
                out.push(((start, j), closed));
                start = j + 1;
            }
        }
        out
    }

    pub fn is_irreducible(&self) -> bool {
        self.classes().len() == 1
    }
}

/// Stationary law of a birth–death chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub probabilities: Vec<f64>,
    /// `E_pi[X / N]`.
    pub mean_fraction: f64,
}

/// Solves detailed balance `pi_j beta_j = pi_{j+1} delta_{j+1}`.
///
/// The log-weights locate the mode; the products are then formed outward
/// from the mode in linear scale, so no weight exceeds one before
/// normalization and each consecutive ratio carries only a few roundings.
pub fn stationary(chain: &BirthDeathChain) -> Result<StationaryDistribution> {
    if !chain.is_irreducible() {
        let closed = chain.classes().into_iter().filter(|(_, c)| *c).map(|(r, _)| r).collect();
        return Err(Error::ReducibleChain(closed));
    }
    let n = chain.n;
    let mut log_weight = Vec::with_capacity(n + 1);
    log_weight.push(0.0f64);
    for j in 1..=n {
        let step = chain.birth[j - 1].ln() - chain.death[j].ln();
        log_weight.push(log_weight[j - 1] + step);
    }
    let mode = log_weight.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(j, _)| j).expect("non-empty");

    let mut weight = vec![0.0f64; n + 1];
    weight[mode] = 1.0;
    for j in mode..n {
        weight[j + 1] = weight[j] * chain.birth[j] / chain.death[j + 1];
    }
    for j in (1..=mode).rev() {
        weight[j - 1] = weight[j] * chain.death[j] / chain.birth[j - 1];
    }
    let z: f64 = weight.iter().sum();
    let probabilities: Vec<f64> = weight.iter().map(|w| w / z).collect();
    let mean_fraction = probabilities.iter().enumerate().map(|(j, p)| j as f64 * p).sum::<f64>() / n as f64;
    Ok(StationaryDistribution { probabilities, mean_fraction })
}

/// Composite parameter `B = (1 - eps) / (1 - 1/N)`.
pub fn b_of(epsilon: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("B needs N >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in [0, 1]")));
    }
    Ok((1.0 - epsilon) / (1.0 - 1.0 / n as f64))
}

fn check_costs(c1: f64, c2: f64) -> Result<()> {
    if !(c1 > 0.0 && c2 >= c1 && c2.is_finite()) {
        return Err(Error::InvalidParams(format!("need 0 < c1 <= c2, got c1={c1}, c2={c2}")));
    }
    Ok(())
}

/// Mean-field fixed point: the root in `(0, 1)` of
/// `Q(u) = c2 - (c1 + c2) u + B (c1 - c2) u (1 - u)`.
///
/// Evaluated as `2 c2 / ((c1 + c2) + B (c2 - c1) + sqrt(D))` with
/// `D = (B - 1)^2 (c1 - c2)^2 + 4 c1 c2`, which is algebraically the closed
/// form but avoids its cancellation for small `B`. Equal costs give `1/2`.
pub fn u1_bar(b: f64, c1: f64, c2: f64) -> Result<f64> {
    check_costs(c1, c2)?;
    if !(b > 0.0 && b <= 2.0) {
        return Err(Error::InvalidArgument(format!("B must lie in (0, 2], got {b}; the B -> 0 limit is v1_bar")));
    }
    if c1 == c2 {
        return Ok(0.5);
    }
    let d = c2 - c1;
    let disc = (b - 1.0).powi(2) * d * d + 4.0 * c1 * c2;
    Ok(2.0 * c2 / ((c1 + c2) + b * d + disc.sqrt()))
}

/// `Q(u, 1 - u)` for the given `B` and costs.
pub fn q_residual(u: f64, b: f64, c1: f64, c2: f64) -> f64 {
    c2 - (c1 + c2) * u + b * (c1 - c2) * u * (1.0 - u)
}

/// Fixed point together with the quadratic it solves.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub b: f64,
    pub u1_bar: f64,
    pub v1_bar: f64,
    /// `[a0, a1, a2]` with `Q(u) = a0 + a1 u + a2 u^2`.
    pub coefficients: [f64; 3],
    pub discriminant: f64,
}

pub fn fixed_point_report(b: f64, c1: f64, c2: f64) -> Result<FixedPointReport> {
    let u = u1_bar(b, c1, c2)?;
    let coefficients = [c2, -(c1 + c2) + b * (c1 - c2), -b * (c1 - c2)];
    Ok(FixedPointReport {
        b,
        u1_bar: u,
        v1_bar: c2 / (c1 + c2),
        coefficients,
        discriminant: (b - 1.0).powi(2) * (c1 - c2).powi(2) + 4.0 * c1 * c2,
    })
}

/// Shape of `B -> u1_bar(B)` over a grid in `(0, 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub values: Vec<f64>,
    pub strictly_decreasing: bool,
    pub first_violation: Option<usize>,
    /// Equal costs: the curve is the constant 1/2.
    pub degenerate: bool,
    pub v1_bar: f64,
    pub limit_near_zero: f64,
    pub at_one: f64,
    pub at_two: f64,
    /// `v1_bar > u1_bar(1) > u1_bar(2) = 1/2`, the last within 1e-12.
    pub ordering_holds: bool,
}

pub fn verify_monotone(c1: f64, c2: f64, grid: &[f64]) -> Result<MonotoneReport> {
    check_costs(c1, c2)?;
    if let Some(bad) = grid.iter().find(|&&b| !(b > 0.0 && b < 2.0)) {
        return Err(Error::InvalidArgument(format!("grid point {bad} outside (0, 2)")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    let values = grid.iter().map(|&b| u1_bar(b, c1, c2)).collect::<Result<Vec<_>>>()?;
    let first_violation = values.windows(2).position(|w| w[1] >= w[0]);
    let v1_bar = c2 / (c1 + c2);
    let at_one = u1_bar(1.0, c1, c2)?;
    let at_two = u1_bar(2.0, c1, c2)?;
    Ok(MonotoneReport {
        strictly_decreasing: first_violation.is_none(),
        first_violation,
        degenerate: c1 == c2,
        v1_bar,
        limit_near_zero: u1_bar(1e-6, c1, c2)?,
        at_one,
        at_two,
        ordering_holds: v1_bar > at_one && at_one > at_two && (at_two - 0.5).abs() <= 1e-12,
        values,
    })
}

const EXHAUSTIVE_LIMIT: usize = 20;
const MAX_COLORING_COMPONENTS: usize = 24;

/// Configurations with zero total rate when `epsilon = 0`: no two neighbors
/// share a task, and no vertex is isolated (isolated vertices always
/// switch). For a connected bipartite graph this is `[xi_plus, xi_minus]`.
pub fn absorbing_states(graph: &Graph, params: &Params) -> Result<Vec<Configuration>> {
    if params.epsilon() > 0.0 {
        return Err(Error::NotAbsorbing);
    }
    let n = graph.vertex_count();
    if (0..n).any(|x| graph.degree(x) == 0) {
        return Ok(Vec::new());
    }
    let bipartition = find_bipartition(graph);
    if let (Some(b), true) = (&bipartition, graph.is_connected()) {
        return Ok(vec![Configuration::checkerboard(b, Task::One), Configuration::checkerboard(b, Task::Two)]);
    }
    if n <= EXHAUSTIVE_LIMIT {
        let nbr: Vec<u32> = (0..n).map(|x| graph.neighbors(x).iter().fold(0u32, |m, &y| m | (1 << y))).collect();
        let found = (0u32..(1u32 << n))
            .filter(|&mask| (0..n).all(|x| if mask >> x & 1 == 1 { mask & nbr[x] == 0 } else { !mask & nbr[x] == 0 }))
            .map(|mask| {
                Configuration::new((0..n).map(|x| if mask >> x & 1 == 1 { Task::Two } else { Task::One }).collect())
            })
            .collect();
        return Ok(found);
    }
    let Some(b) = bipartition else { return Ok(Vec::new()) };
    let (count, label) = graph.components();
    if count > MAX_COLORING_COMPONENTS {
        return Err(Error::InvalidArgument(format!("{count} components give too many absorbing states to enumerate")));
    }
    let base = Configuration::checkerboard(&b, Task::One);
    Ok((0u64..(1u64 << count))
        .map(|flips| {
            let mut c = base.clone();
            for (x, &component) in label.iter().enumerate() {
                if flips >> component & 1 == 1 {
                    c.toggle(x);
                }
            }
            c
        })
        .collect())
}
