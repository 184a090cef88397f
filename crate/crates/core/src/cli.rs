//! Command-line experiment runner. Every subcommand writes CSV: one
//! `#`-prefixed metadata line, a header row, then data rows.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{agreement_probability, couple_and_verify, project, simulate_dual_native, DualKind};
use crate::dynamics::{Configuration, InitialLaw, Params, Task};
use crate::engine::{
    estimate_hitting_times, replicate_rng, run, Budget, EngineKind, GillespieEngine, GraphicalEngine,
    ObservableAccumulator, RunSummary, Simulator,
};
use crate::error::{Error, Result};
use crate::exact::{b_of, build_birth_death, stationary, u1_bar};
use crate::graph::{find_bipartition, Graph, GraphSpec};

#[derive(Debug, Parser)]
#[command(name = "antivoter", version, about = "Two-task anti-voter dynamics: simulation and exact analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate on a graph, sweeping epsilon, one row per (epsilon, replicate).
    Simulate(SimulateArgs),
    /// Exact complete-graph chain against the mean-field fixed point.
    Exact(ExactArgs),
    /// Edge dual on a ring.
    Dual(DualArgs),
    /// Entrance and exit times of the checkerboard pair on a bipartite graph.
    Hitting(HittingArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c2: f64,
}

#[derive(Debug, Clone, Args)]
#[group(id = "eps", required = true, multiple = false)]
pub struct EpsilonArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Linear sweep `start:end:steps`.
    #[arg(long, value_name = "START:END:STEPS")]
    pub epsilon_sweep: Option<String>,
}

impl EpsilonArgs {
    pub fn values(&self) -> Result<Vec<f64>> {
        match (&self.epsilon, &self.epsilon_sweep) {
            (Some(e), None) => {
                check_epsilon(*e)?;
                Ok(vec![*e])
            }
            (None, Some(s)) => parse_sweep(s),
            _ => Err(Error::Usage("give exactly one of --epsilon and --epsilon-sweep".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
#[group(id = "budget", required = true, multiple = false)]
pub struct BudgetArgs {
    /// Number of applied events.
    #[arg(long)]
    pub updates: Option<u64>,
    /// Time horizon; `inf` runs until absorption.
    #[arg(long)]
    pub time: Option<f64>,
}

impl BudgetArgs {
    pub fn budget(&self) -> Result<Budget> {
        match (self.updates, self.time) {
            (Some(k), None) => Ok(Budget::Updates(k)),
            (None, Some(t)) if t > 0.0 => Ok(Budget::Time(t)),
            (None, Some(t)) => Err(Error::Usage(format!("--time must be positive, got {t}"))),
            _ => Err(Error::Usage("give exactly one of --updates and --time".into())),
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "simulate")]
pub struct SimulateArgs {
    /// complete:N, cycle:N, torus2d:LxH, grid:LxH, edgeless:N or complete-bipartite:N1,N2.
    #[arg(long)]
    pub graph: GraphSpec,
    #[command(flatten)]
    pub costs: CostArgs,
    #[command(flatten)]
    pub epsilon: EpsilonArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Also report the average over `[burnin, end]`.
    #[arg(long)]
    pub burnin: Option<f64>,
    #[arg(long, default_value = "gillespie")]
    pub engine: EngineKind,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// all1, all2, bernoulli:p or an explicit string of 1/2 labels.
    #[arg(long, default_value = "bernoulli:0.5")]
    pub init: InitialLaw,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Validated `simulate` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub graph: GraphSpec,
    pub c1: f64,
    pub c2: f64,
    pub epsilons: Vec<f64>,
    pub engine: EngineKind,
    pub budget: Budget,
    pub burnin: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub init: InitialLaw,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Single-line echo of the spec for the metadata line.
    pub fn echo(&self) -> String {
        let budget = match self.budget {
            Budget::Updates(k) => format!("updates={k}"),
            Budget::Time(t) => format!("time={t}"),
        };
        let eps: Vec<String> = self.epsilons.iter().map(|e| e.to_string()).collect();
        format!(
            "graph={} c1={} c2={} epsilon=[{}] {budget} burnin={} engine={} replicates={} seed={} init={}",
            self.graph,
            self.c1,
            self.c2,
            eps.join(" "),
            self.burnin.map_or("none".into(), |b| b.to_string()),
            self.engine,
            self.replicates,
            self.seed,
            self.init,
        )
    }
}

fn usage(e: clap::Error) -> Error {
    Error::Usage(e.render().to_string())
}

fn check_epsilon(e: f64) -> Result<()> {
    if (0.0..=1.0).contains(&e) {
        Ok(())
    } else {
        Err(Error::Usage(format!("epsilon {e} not in [0, 1]")))
    }
}

/// `start:end:steps`, linearly spaced, endpoints included.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Usage(format!("malformed sweep `{s}`: {why}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, k] = parts[..] else { return Err(bad("expected START:END:STEPS")) };
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad(&format!("`{t}` is not a number")));
    let (a, b) = (num(a)?, num(b)?);
    let steps: usize = k.parse().map_err(|_| bad(&format!("`{k}` is not a step count")))?;
    if steps == 0 {
        return Err(bad("steps must be at least 1"));
    }
    for e in [a, b] {
        check_epsilon(e).map_err(|_| bad(&format!("{e} not in [0, 1]")))?;
    }
    if steps == 1 {
        return Ok(vec![a]);
    }
    Ok((0..steps).map(|i| if i + 1 == steps { b } else { a + (b - a) * i as f64 / (steps - 1) as f64 }).collect())
}

impl SimulateArgs {
    pub fn into_spec(self) -> Result<ExperimentSpec> {
        Params::new(self.costs.c1, self.costs.c2, 0.0)?;
        if self.replicates == 0 {
            return Err(Error::Usage("--replicates must be at least 1".into()));
        }
        Ok(ExperimentSpec {
            graph: self.graph,
            c1: self.costs.c1,
            c2: self.costs.c2,
            epsilons: self.epsilon.values()?,
            engine: self.engine,
            budget: self.budget.budget()?,
            burnin: self.burnin,
            replicates: self.replicates,
            seed: self.seed,
            init: self.init,
            out: self.out,
        })
    }
}

/// Parses `simulate` flags (the first item is the program name).
pub fn parse_spec<I, T>(argv: I) -> Result<ExperimentSpec>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    SimulateArgs::try_parse_from(argv).map_err(usage)?.into_spec()
}

/// One simulation replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub graph_spec: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub engine: String,
    pub seed: u64,
    pub replicate: usize,
    pub updates: u64,
    pub sim_time: f64,
    pub phi: f64,
    pub phi_post_burnin: Option<f64>,
    pub residence_xi_plus: Option<f64>,
    pub residence_xi_minus: Option<f64>,
    pub absorbed: bool,
}

fn simulate_one(
    graph: &Graph,
    params: Params,
    spec: &ExperimentSpec,
    targets: &Option<Vec<Configuration>>,
    stream: u64,
) -> Result<RunSummary> {
    let mut rng = replicate_rng(spec.seed, stream);
    let config = spec.init.sample(graph.vertex_count(), &mut rng)?;
    let mut acc = ObservableAccumulator::new(&config);
    if let Some(b) = spec.burnin {
        acc = acc.with_burnin(b);
    }
    if let Some(t) = targets {
        acc = acc.with_targets(t.clone());
    }
    let summary = match spec.engine {
        EngineKind::Gillespie => {
            let mut e = GillespieEngine::new(graph, params, config, rng)?;
            run(&mut e, spec.budget, &mut acc)
        }
        EngineKind::Graphical => {
            let mut e = GraphicalEngine::new(graph, params, config, rng)?;
            run(&mut e as &mut dyn Simulator, spec.budget, &mut acc)
        }
    };
    Ok(summary)
}

/// Runs every (epsilon, replicate) pair. Pair `(i, r)` uses generator
/// stream `(i << 32) | r`; rows come back in (epsilon, replicate) order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepRow>> {
    let graph = spec.graph.build()?;
    let targets = find_bipartition(&graph)
        .filter(|_| graph.is_connected())
        .map(|b| vec![Configuration::checkerboard(&b, Task::One), Configuration::checkerboard(&b, Task::Two)]);
    let jobs: Vec<(usize, usize)> =
        (0..spec.epsilons.len()).flat_map(|i| (0..spec.replicates).map(move |r| (i, r))).collect();
    jobs.into_par_iter()
        .map(|(i, r)| {
            let eps = spec.epsilons[i];
            let params = Params::new(spec.c1, spec.c2, eps)?;
            let s = simulate_one(&graph, params, spec, &targets, ((i as u64) << 32) | r as u64)?;
            Ok(SweepRow {
                graph_spec: spec.graph.to_string(),
                n: graph.vertex_count(),
                c1: spec.c1,
                c2: spec.c2,
                epsilon: eps,
                engine: spec.engine.to_string(),
                seed: spec.seed,
                replicate: r,
                updates: s.events,
                sim_time: s.sim_time,
                phi: s.phi,
                phi_post_burnin: s.phi_post_burnin,
                residence_xi_plus: targets.as_ref().map(|_| s.residence[0]),
                residence_xi_minus: targets.as_ref().map(|_| s.residence[1]),
                absorbed: s.absorbed,
            })
        })
        .collect()
}

/// Writes the metadata line, the header and `rows`.
pub fn write_csv<W: Write, R: Serialize>(mut out: W, metadata: &str, rows: &[R]) -> Result<()> {
    let io = |e: io::Error| Error::Io(e.to_string());
    writeln!(out, "# antivoter {} {}", env!("CARGO_PKG_VERSION"), metadata).map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(io)
}

/// Reads rows written by [`write_csv`], skipping the metadata line.
pub fn read_csv<R: io::Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| Error::Io(e.to_string())))
        .collect()
}

fn emit<R: Serialize>(out: &Option<PathBuf>, metadata: &str, rows: &[R]) -> Result<()> {
    match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            write_csv(io::BufWriter::new(f), metadata, rows)
        }
        None => write_csv(io::stdout().lock(), metadata, rows),
    }
}

#[derive(Debug, Clone, Parser)]
pub struct ExactArgs {
    /// Comma-separated population sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[command(flatten)]
    pub costs: CostArgs,
    #[command(flatten)]
    pub epsilon: EpsilonArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub u1_bar: f64,
    pub v1_bar: f64,
    /// Empty when `epsilon = 0` (reducible chain).
    pub stationary_mean: Option<f64>,
    pub gap: Option<f64>,
}

/// One row per (N, epsilon). `u1_bar` at `B = 0` is its limit `v1_bar`.
pub fn run_exact_report(sizes: &[usize], c1: f64, c2: f64, epsilons: &[f64]) -> Result<Vec<ExactRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        for &eps in epsilons {
            let params = Params::new(c1, c2, eps)?;
            let b = b_of(eps, n)?;
            let u = if b == 0.0 { params.v1_bar() } else { u1_bar(b, c1, c2)? };
            let stationary_mean =
                if eps > 0.0 { Some(stationary(&build_birth_death(n, &params)?)?.mean_fraction) } else { None };
            rows.push(ExactRow {
                n,
                c1,
                c2,
                epsilon: eps,
                b,
                u1_bar: u,
                v1_bar: params.v1_bar(),
                stationary_mean,
                gap: stationary_mean.map(|m| m - u),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Parser)]
#[command(group(ArgGroup::new("mode").required(true).args(["verify_coupling", "native", "agreement"])))]
pub struct DualArgs {
    /// Check the vertex process against the particle rules event by event.
    #[arg(long)]
    pub verify_coupling: bool,
    /// Simulate the particle system on its own.
    #[arg(long)]
    pub native: bool,
    /// Estimate the density of agreeing neighbors.
    #[arg(long)]
    pub agreement: bool,
    /// Ring size (even).
    #[arg(long, default_value_t = 1000)]
    pub ring: usize,
    #[command(flatten)]
    pub costs: CostArgs,
    #[arg(long)]
    pub epsilon: f64,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Burn-in for --agreement; half the horizon by default.
    #[arg(long)]
    pub burnin: Option<f64>,
    /// Initial tasks are i.i.d. with probability `p` of task 1.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRow {
    pub replicate: usize,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub events: u64,
    pub switches: u64,
    pub jumps: u64,
    pub births: u64,
    pub annihilations: u64,
    pub passed: bool,
    pub first_mismatch_event: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NativeRow {
    pub replicate: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub events: usize,
    pub final_time: f64,
    pub initial_particles: usize,
    pub final_particles: usize,
    pub jumps_left: usize,
    pub jumps_right: usize,
    pub births: usize,
    pub annihilations: usize,
    pub absorbed_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub horizon: f64,
    pub burnin: f64,
    pub replicates: usize,
    pub density_mean: f64,
    pub density_se: f64,
    pub phi_mean: f64,
    pub phi_se: f64,
}

fn run_dual(args: &DualArgs) -> Result<()> {
    let params = Params::new(args.costs.c1, args.costs.c2, args.epsilon)?;
    let budget = args.budget.budget()?;
    let n = args.ring;
    let law = InitialLaw::Bernoulli(args.p);
    let meta = format!(
        "dual ring={n} (periodic boundary) c1={} c2={} epsilon={} p={} seed={} replicates={}",
        args.costs.c1, args.costs.c2, args.epsilon, args.p, args.seed, args.replicates
    );
    if args.verify_coupling {
        // replicate r is seeded with seed + r
        let rows = (0..args.replicates)
            .into_par_iter()
            .map(|r| {
                let seed = args.seed.wrapping_add(r as u64);
                let rep = couple_and_verify(n, &params, &law, budget, seed)?;
                Ok(CouplingRow {
                    replicate: r,
                    seed,
                    n,
                    epsilon: args.epsilon,
                    events: rep.events,
                    switches: rep.switches,
                    jumps: rep.jumps,
                    births: rep.births,
                    annihilations: rep.annihilations,
                    passed: rep.passed(),
                    first_mismatch_event: rep.first_mismatch.as_ref().map(|m| m.event_index),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        emit(&args.out, &meta, &rows)
    } else if args.native {
        let graph = Graph::cycle(n)?;
        let rows = (0..args.replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(args.seed, r as u64);
                let config = law.sample(n, &mut rng)?;
                let traj = simulate_dual_native(&params, project(&graph, &config)?, config.get(0), budget, rng)?;
                Ok(NativeRow {
                    replicate: r,
                    n,
                    epsilon: args.epsilon,
                    events: traj.events.len(),
                    final_time: traj.time,
                    initial_particles: traj.initial_particles,
                    final_particles: traj.final_particles(),
                    jumps_left: traj.count(DualKind::JumpLeft),
                    jumps_right: traj.count(DualKind::JumpRight),
                    births: traj.count(DualKind::BirthPair),
                    annihilations: traj.count(DualKind::Annihilation),
                    absorbed_at: traj.absorbed_at,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        emit(&args.out, &meta, &rows)
    } else {
        let Budget::Time(horizon) = budget else {
            return Err(Error::Usage("--agreement needs --time".into()));
        };
        let est = agreement_probability(n, &params, args.p, horizon, args.burnin, args.replicates, args.seed)?;
        let row = AgreementRow {
            n,
            c1: args.costs.c1,
            c2: args.costs.c2,
            epsilon: args.epsilon,
            horizon,
            burnin: est.burnin,
            replicates: args.replicates,
            density_mean: est.density.mean,
            density_se: est.density.std_error,
            phi_mean: est.phi.mean,
            phi_se: est.phi.std_error,
        };
        emit(&args.out, &meta, &[row])
    }
}

#[derive(Debug, Clone, Parser)]
pub struct HittingArgs {
    #[arg(long)]
    pub graph: GraphSpec,
    #[command(flatten)]
    pub costs: CostArgs,
    #[arg(long)]
    pub epsilon: f64,
    /// Law of the start for the entrance time.
    #[arg(long, default_value = "bernoulli:0.5")]
    pub init: InitialLaw,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingRow {
    pub graph_spec: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    pub c1: f64,
    pub c2: f64,
    pub epsilon: f64,
    pub replicates: usize,
    pub t_in_mean: f64,
    pub t_in_se: f64,
    pub t_out_plus_mean: Option<f64>,
    pub t_out_plus_se: Option<f64>,
    pub t_out_minus_mean: Option<f64>,
    pub t_out_minus_se: Option<f64>,
    pub exit_rate_plus: f64,
    pub exit_rate_minus: f64,
    pub t_out_lower_bound: f64,
}

fn run_hitting(args: &HittingArgs) -> Result<()> {
    let params = Params::new(args.costs.c1, args.costs.c2, args.epsilon)?;
    let graph = args.graph.build()?;
    let r = estimate_hitting_times(&graph, &params, &args.init, args.replicates, args.seed)?;
    let row = HittingRow {
        graph_spec: args.graph.to_string(),
        n: graph.vertex_count(),
        n1: r.sizes.0,
        n2: r.sizes.1,
        c1: args.costs.c1,
        c2: args.costs.c2,
        epsilon: args.epsilon,
        replicates: args.replicates,
        t_in_mean: r.t_in.mean,
        t_in_se: r.t_in.std_error,
        t_out_plus_mean: r.t_out_plus.as_ref().map(|e| e.mean),
        t_out_plus_se: r.t_out_plus.as_ref().map(|e| e.std_error),
        t_out_minus_mean: r.t_out_minus.as_ref().map(|e| e.mean),
        t_out_minus_se: r.t_out_minus.as_ref().map(|e| e.std_error),
        exit_rate_plus: r.exit_rate_plus,
        exit_rate_minus: r.exit_rate_minus,
        t_out_lower_bound: r.t_out_lower_bound,
    };
    let meta = format!("hitting graph={} init={} seed={}", args.graph, args.init, args.seed);
    emit(&args.out, &meta, &[row])
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let spec = args.into_spec()?;
            let rows = run_sweep(&spec)?;
            emit(&spec.out, &format!("simulate {}", spec.echo()), &rows)
        }
        Command::Exact(args) => {
            let eps = args.epsilon.values()?;
            let rows = run_exact_report(&args.sizes, args.costs.c1, args.costs.c2, &eps)?;
            let meta = format!("exact c1={} c2={}", args.costs.c1, args.costs.c2);
            emit(&args.out, &meta, &rows)
        }
        Command::Dual(args) => run_dual(&args),
        Command::Hitting(args) => run_hitting(&args),
    }
}
