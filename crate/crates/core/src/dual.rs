//! Edge dual on a ring: edge `k = (k, k+1 mod N)` carries a particle of
//! type `i` when both endpoints perform task `i`, and is empty otherwise.
//!
//! A vertex switch swaps occupied and empty on both of its incident edges,
//! and new particles carry the vertex's new task. Depending on how many of
//! the two incident edges were occupied this is a jump with a change of
//! type (one), an annihilation (two) or the birth of a pair (none).

use std::fmt;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::dynamics::{rate_from_counts, Configuration, InitialLaw, Params, Task};
use crate::engine::{
    replicate_rng, run, Budget, Estimate, Event, GillespieEngine, GraphicalEngine, Mark, ObservableAccumulator,
    Simulator, SumTree,
};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeState {
    Empty,
    Particle(Task),
}

impl EdgeState {
    pub fn is_occupied(self) -> bool {
        self != EdgeState::Empty
    }

    pub fn label(self) -> u8 {
        match self {
            EdgeState::Empty => 0,
            EdgeState::Particle(t) => t.label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeConfiguration {
    states: Vec<EdgeState>,
}

impl EdgeConfiguration {
    pub fn new(states: Vec<EdgeState>) -> Self {
        Self { states }
    }

    /// Digits `0`, `1`, `2` per edge.
    pub fn from_labels(labels: &[u8]) -> Result<Self> {
        labels
            .iter()
            .map(|&l| match l {
                0 => Ok(EdgeState::Empty),
                l => Task::from_label(l).map(EdgeState::Particle),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, k: usize) -> EdgeState {
        self.states[k]
    }

    pub fn states(&self) -> &[EdgeState] {
        &self.states
    }

    pub fn particle_count(&self) -> usize {
        self.states.iter().filter(|s| s.is_occupied()).count()
    }

    /// Fraction of occupied edges.
    pub fn density(&self) -> f64 {
        self.particle_count() as f64 / self.len() as f64
    }
}

impl fmt::Display for EdgeConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.states {
            write!(f, "{}", s.label())?;
        }
        Ok(())
    }
}

fn edge_state(a: Task, b: Task) -> EdgeState {
    if a == b {
        EdgeState::Particle(a)
    } else {
        EdgeState::Empty
    }
}

/// Edge configuration of a vertex configuration on a ring.
pub fn project(graph: &Graph, config: &Configuration) -> Result<EdgeConfiguration> {
    if !graph.is_ring() {
        return Err(Error::NotRing);
    }
    config.check_size(graph)?;
    let n = config.len();
    Ok(EdgeConfiguration::new((0..n).map(|k| edge_state(config.get(k), config.get((k + 1) % n))).collect()))
}

/// Prefix parities of a bit vector under point toggles.
#[derive(Debug, Clone)]
struct ParityTree {
    tree: Vec<u8>,
}

impl ParityTree {
    fn new(len: usize) -> Self {
        Self { tree: vec![0; len + 1] }
    }

    fn toggle(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] ^= 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Parity of bits `0..end`.
    fn prefix(&self, end: usize) -> u8 {
        let mut i = end;
        let mut p = 0;
        while i > 0 {
            p ^= self.tree[i];
            i &= i - 1;
        }
        p
    }
}

/// Effect of a vertex switch on the two incident edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DualKind {
    /// The particle on the right edge moves to the left edge.
    JumpLeft,
    /// The particle on the left edge moves to the right edge.
    JumpRight,
    BirthPair,
    Annihilation,
}

impl DualKind {
    pub fn particle_change(self) -> i64 {
        match self {
            DualKind::JumpLeft | DualKind::JumpRight => 0,
            DualKind::BirthPair => 2,
            DualKind::Annihilation => -2,
        }
    }
}

impl fmt::Display for DualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DualKind::JumpLeft => "jump-left",
            DualKind::JumpRight => "jump-right",
            DualKind::BirthPair => "birth-pair",
            DualKind::Annihilation => "annihilation",
        })
    }
}

/// Edge configuration plus the task of vertex 0. Vertex tasks are recovered
/// from the reference and the parity of empty edges to the left.
#[derive(Debug, Clone)]
pub struct DualState {
    edges: EdgeConfiguration,
    reference: Task,
    empty_parity: ParityTree,
    particles: usize,
}

impl DualState {
    /// Fails on rings of odd size, on an odd particle count, and on
    /// particle types that contradict the reconstructed tasks.
    pub fn new(edges: EdgeConfiguration, reference: Task) -> Result<Self> {
        let n = edges.len();
        if n < 3 {
            return Err(Error::InvalidArgument(format!("ring needs at least 3 edges, got {n}")));
        }
        if n % 2 == 1 {
            return Err(Error::InvalidArgument(format!("dual needs an even ring, got N = {n}")));
        }
        let particles = edges.particle_count();
        if particles % 2 == 1 {
            return Err(Error::OddParticleCount(particles));
        }
        let mut empty_parity = ParityTree::new(n);
        for k in 0..n {
            if !edges.get(k).is_occupied() {
                empty_parity.toggle(k);
            }
        }
        let state = Self { edges, reference, empty_parity, particles };
        for k in 0..n {
            if let EdgeState::Particle(t) = state.edges.get(k) {
                if state.task(k) != t {
                    return Err(Error::InvalidArgument(format!(
                        "edge {k} carries type {} but its endpoints perform task {}",
                        t.label(),
                        state.task(k).label()
                    )));
                }
            }
        }
        Ok(state)
    }

    pub fn from_configuration(graph: &Graph, config: &Configuration) -> Result<Self> {
        Self::new(project(graph, config)?, config.get(0))
    }

    pub fn ring_size(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &EdgeConfiguration {
        &self.edges
    }

    pub fn reference(&self) -> Task {
        self.reference
    }

    pub fn particle_count(&self) -> usize {
        self.particles
    }

    pub fn task(&self, x: usize) -> Task {
        if self.empty_parity.prefix(x) == 1 {
            self.reference.other()
        } else {
            self.reference
        }
    }

    pub fn tasks(&self) -> Configuration {
        Configuration::new((0..self.ring_size()).map(|x| self.task(x)).collect())
    }

    fn incident(&self, x: usize) -> (usize, usize) {
        let n = self.ring_size();
        ((x + n - 1) % n, x)
    }

    /// Number of empty incident edges, i.e. neighbors on the other task.
    pub fn empty_incident(&self, x: usize) -> usize {
        let (l, r) = self.incident(x);
        usize::from(!self.edges.get(l).is_occupied()) + usize::from(!self.edges.get(r).is_occupied())
    }

    /// Whether `mark` at `x` switches `x`, decided from the dual state.
    /// An arrow acts only if the edge it crosses is occupied, and a dashed
    /// arrow only if that particle has type 2.
    pub fn mark_acts(&self, x: usize, mark: Mark) -> bool {
        let n = self.ring_size();
        let crossed = |source: usize| {
            if source == (x + 1) % n {
                self.edges.get(x)
            } else {
                self.edges.get((x + n - 1) % n)
            }
        };
        match mark {
            Mark::Switch | Mark::Dot => true,
            Mark::Solid { source } => crossed(source).is_occupied(),
            Mark::Dashed { source } => crossed(source) == EdgeState::Particle(Task::Two),
            Mark::Cross => self.task(x) == Task::Two,
        }
    }

    /// Switches vertex `x` and returns what happened on the edges.
    pub fn flip_vertex(&mut self, x: usize) -> DualKind {
        let new_task = self.task(x).other();
        let (l, r) = self.incident(x);
        let (lo, ro) = (self.edges.get(l).is_occupied(), self.edges.get(r).is_occupied());
        let swap = |occupied: bool| if occupied { EdgeState::Empty } else { EdgeState::Particle(new_task) };
        self.edges.states[l] = swap(lo);
        self.edges.states[r] = swap(ro);
        self.empty_parity.toggle(l);
        self.empty_parity.toggle(r);
        if x == 0 {
            self.reference = self.reference.other();
        }
        match (lo, ro) {
            (true, false) => DualKind::JumpRight,
            (false, true) => DualKind::JumpLeft,
            (true, true) => {
                self.particles -= 2;
                DualKind::Annihilation
            }
            (false, false) => {
                self.particles += 2;
                DualKind::BirthPair
            }
        }
    }
}

/// First disagreement between the projected vertex process and the dual.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMismatch {
    pub event_index: u64,
    pub event: Event,
    /// `project` of the vertex configuration after the event.
    pub expected: EdgeConfiguration,
    /// Dual state evolved by the particle rules.
    pub got: EdgeConfiguration,
    pub expected_reference: Task,
    pub got_reference: Task,
    /// Whether the dual rules said the mark acts.
    pub dual_switched: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CouplingReport {
    pub events: u64,
    pub switches: u64,
    pub jumps: u64,
    pub births: u64,
    pub annihilations: u64,
    pub first_mismatch: Option<CouplingMismatch>,
}

impl CouplingReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Runs the graphical engine on a ring and evolves a dual state alongside,
/// using only the dual's own information to decide whether each mark acts.
/// After every event the dual must equal the projection of the vertex
/// configuration. Stops at the first mismatch.
pub fn couple_and_verify(
    n: usize,
    params: &Params,
    init: &InitialLaw,
    budget: Budget,
    seed: u64,
) -> Result<CouplingReport> {
    let graph = Graph::cycle(n)?;
    let mut rng = replicate_rng(seed, 0);
    let config = init.sample(n, &mut rng)?;
    let mut dual = DualState::from_configuration(&graph, &config)?;
    let mut engine = GraphicalEngine::new(&graph, *params, config, rng)?;
    let mut report = CouplingReport::default();
    while let Some(next) = engine.next_event_time() {
        match budget {
            Budget::Updates(k) if report.events >= k => break,
            Budget::Time(h) if next > h => break,
            _ => {}
        }
        let event = engine.apply_next().expect("pending event");
        report.events += 1;
        let acts = dual.mark_acts(event.vertex, event.mark);
        if acts {
            report.switches += 1;
            match dual.flip_vertex(event.vertex) {
                DualKind::BirthPair => report.births += 1,
                DualKind::Annihilation => report.annihilations += 1,
                _ => report.jumps += 1,
            }
        }
        let expected = project(&graph, engine.configuration())?;
        let expected_reference = engine.configuration().get(0);
        if acts != event.changed() || expected != *dual.edges() || expected_reference != dual.reference() {
            report.first_mismatch = Some(CouplingMismatch {
                event_index: report.events - 1,
                event,
                expected,
                got: dual.edges().clone(),
                expected_reference,
                got_reference: dual.reference(),
                dual_switched: acts,
            });
            break;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualEvent {
    pub time: f64,
    pub vertex: usize,
    /// Left and right incident edges of `vertex`.
    pub edges: (usize, usize),
    pub kind: DualKind,
    /// Particle count after the event.
    pub particles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualTrajectory {
    pub initial_particles: usize,
    pub events: Vec<DualEvent>,
    pub final_edges: EdgeConfiguration,
    pub final_reference: Task,
    pub time: f64,
    /// Time at which the total rate hit zero, if it did.
    pub absorbed_at: Option<f64>,
}

impl DualTrajectory {
    pub fn count(&self, kind: DualKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn final_particles(&self) -> usize {
        self.events.last().map_or(self.initial_particles, |e| e.particles)
    }
}

/// Simulates the particle system on its own. Each vertex switches at the
/// rate given by its reconstructed task and its number of empty incident
/// edges; the random draws follow the same order as [`GillespieEngine`], so
/// starting from `project(xi)` with reference `xi(0)` and the same generator
/// reproduces that engine's switching sequence.
pub fn simulate_dual_native(
    params: &Params,
    edges: EdgeConfiguration,
    reference: Task,
    budget: Budget,
    mut rng: crate::engine::SimRng,
) -> Result<DualTrajectory> {
    let mut state = DualState::new(edges, reference)?;
    let n = state.ring_size();
    let rate = |s: &DualState, x: usize| rate_from_counts(params, s.task(x), s.empty_incident(x), 2);
    let weights: Vec<f64> = (0..n).map(|x| rate(&state, x)).collect();
    let mut tree = SumTree::from_weights(&weights);
    let initial_particles = state.particle_count();
    let mut events = Vec::new();
    let mut time = 0.0;
    let mut absorbed_at = None;
    loop {
        if let Budget::Updates(k) = budget {
            if events.len() as u64 >= k {
                break;
            }
        }
        let total = tree.total();
        if total <= 0.0 {
            absorbed_at = Some(time);
            break;
        }
        let e: f64 = rng.sample(Exp1);
        let next = time + e / total;
        if let Budget::Time(h) = budget {
            if next > h {
                time = h;
                break;
            }
        }
        let x = tree.sample(rng.random::<f64>() * total);
        let kind = state.flip_vertex(x);
        time = next;
        for y in [(x + n - 1) % n, x, (x + 1) % n] {
            tree.set(y, rate(&state, y));
        }
        events.push(DualEvent { time, vertex: x, edges: state.incident(x), kind, particles: state.particle_count() });
    }
    Ok(DualTrajectory {
        initial_particles,
        events,
        final_edges: state.edges().clone(),
        final_reference: state.reference(),
        time,
        absorbed_at,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementEstimate {
    /// Post-burn-in fraction of edges whose endpoints agree.
    pub density: Estimate,
    /// Post-burn-in fraction of vertices on task 1.
    pub phi: Estimate,
    pub burnin: f64,
    pub horizon: f64,
}

/// Time and space averaged density of occupied edges on a ring started from
/// i.i.d. Bernoulli(`p`) tasks, after a burn-in (half the horizon unless
/// given). Replicate `r` uses stream `r` of `seed`.
pub fn agreement_probability(
    n: usize,
    params: &Params,
    p: f64,
    horizon: f64,
    burnin: Option<f64>,
    replicates: usize,
    seed: u64,
) -> Result<AgreementEstimate> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive and finite, got {horizon}")));
    }
    let burnin = burnin.unwrap_or(horizon / 2.0);
    if !(0.0..horizon).contains(&burnin) {
        return Err(Error::InvalidArgument(format!("burn-in {burnin} not in [0, {horizon})")));
    }
    let graph = Graph::cycle(n)?;
    let law = InitialLaw::Bernoulli(p);
    let edges: Vec<(usize, usize)> = (0..n).map(|k| (k, (k + 1) % n)).collect();
    let runs = (0..replicates)
        .into_par_iter()
        .map(|r| -> Result<(f64, f64)> {
            let mut rng = replicate_rng(seed, r as u64);
            let config = law.sample(n, &mut rng)?;
            let mut engine = GillespieEngine::new(&graph, *params, config.clone(), rng)?;
            let mut acc = ObservableAccumulator::new(&config).with_burnin(burnin).with_agreement(edges.clone());
            let s = run(&mut engine, Budget::Time(horizon), &mut acc);
            Ok((s.agreement_post_burnin.expect("agreement registered"), s.phi_post_burnin.expect("burn-in registered")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (density, phi): (Vec<f64>, Vec<f64>) = runs.into_iter().unzip();
    Ok(AgreementEstimate {
        density: Estimate::from_samples(density),
        phi: Estimate::from_samples(phi),
        burnin,
        horizon,
    })
}
