//! Configurations and the per-vertex switching rates of the two-task model.
//!
//! A vertex performing task `i` switches at rate
//! `c_i * (eps + (1 - eps) * (1 - f_j))` where `f_j` is the fraction of its
//! neighbors performing the other task `j`. Isolated vertices use `f_j = 0`
//! and therefore switch at rate `c_i`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Bipartition, Graph, Side};

/// One of the two tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    One,
    Two,
}

impl Task {
    #[inline]
    pub fn other(self) -> Self {
        match self {
            Task::One => Task::Two,
            Task::Two => Task::One,
        }
    }

    pub fn label(self) -> u8 {
        match self {
            Task::One => 1,
            Task::Two => 2,
        }
    }

    pub fn from_label(label: u8) -> Result<Self> {
        match label {
            1 => Ok(Task::One),
            2 => Ok(Task::Two),
            other => Err(Error::InvalidTask(other)),
        }
    }
}

/// Task costs and defection probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    c1: f64,
    c2: f64,
    epsilon: f64,
}

impl Params {
    /// Requires `0 < c1 <= c2` (task 1 is the cheaper one) and `0 <= epsilon <= 1`.
    pub fn new(c1: f64, c2: f64, epsilon: f64) -> Result<Self> {
        if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0) {
            return Err(Error::InvalidParams(format!("costs must be positive and finite, got c1={c1}, c2={c2}")));
        }
        if c1 > c2 {
            return Err(Error::InvalidParams(format!(
                "task 1 is the less costly task by convention (c1 <= c2), got c1={c1} > c2={c2}"
            )));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidParams(format!("epsilon must lie in [0, 1], got {epsilon}")));
        }
        Ok(Self { c1, c2, epsilon })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn cost(&self, task: Task) -> f64 {
        match task {
            Task::One => self.c1,
            Task::Two => self.c2,
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.c1, self.c2, epsilon)
    }

    /// Long-run fraction of task 1 without communication, `c2 / (c1 + c2)`.
    pub fn v1_bar(&self) -> f64 {
        self.c2 / (self.c1 + self.c2)
    }
}

/// Assignment of a task to every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    tasks: Vec<Task>,
}

impl Configuration {
    pub fn new(tasks: Vec<Task>) -> Self {
        Self { tasks }
    }

    pub fn uniform(n: usize, task: Task) -> Self {
        Self { tasks: vec![task; n] }
    }

    /// Parses labels `1`/`2`.
    pub fn from_labels(labels: &[u8]) -> Result<Self> {
        labels.iter().map(|&l| Task::from_label(l)).collect::<Result<Vec<_>>>().map(Self::new)
    }

    /// `task_on_first` on the first bipartite set and the other task on the
    /// second one. With `Task::One` this is the configuration `xi_plus`.
    pub fn checkerboard(bipartition: &Bipartition, task_on_first: Task) -> Self {
        let tasks = bipartition
            .sides()
            .iter()
            .map(|s| match s {
                Side::First => task_on_first,
                Side::Second => task_on_first.other(),
            })
            .collect();
        Self { tasks }
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize) -> Task {
        self.tasks[x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, task: Task) {
        self.tasks[x] = task;
    }

    #[inline]
    pub fn toggle(&mut self, x: usize) -> Task {
        let t = self.tasks[x].other();
        self.tasks[x] = t;
        t
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    /// Number of vertices performing task 1, the process `X_t`.
    pub fn count_task_one(&self) -> usize {
        self.tasks.iter().filter(|&&t| t == Task::One).count()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.tasks.iter().map(|t| t.label()).collect()
    }

    pub fn check_size(&self, graph: &Graph) -> Result<()> {
        if self.len() == graph.vertex_count() {
            Ok(())
        } else {
            Err(Error::ConfigurationSize { expected: graph.vertex_count(), got: self.len() })
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tasks {
            write!(f, "{}", t.label())?;
        }
        Ok(())
    }
}

/// Law of the initial configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialLaw {
    AllOne,
    AllTwo,
    /// Independent vertices, each on task 1 with probability `p`.
    Bernoulli(f64),
    Explicit(Configuration),
}

impl InitialLaw {
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Configuration> {
        match self {
            InitialLaw::AllOne => Ok(Configuration::uniform(n, Task::One)),
            InitialLaw::AllTwo => Ok(Configuration::uniform(n, Task::Two)),
            InitialLaw::Bernoulli(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidInitialLaw(format!("p = {p} not in [0, 1]")));
                }
                let tasks = (0..n).map(|_| if rng.random::<f64>() < *p { Task::One } else { Task::Two }).collect();
                Ok(Configuration::new(tasks))
            }
            InitialLaw::Explicit(c) => {
                if c.len() != n {
                    return Err(Error::ConfigurationSize { expected: n, got: c.len() });
                }
                Ok(c.clone())
            }
        }
    }
}

impl FromStr for InitialLaw {
    type Err = Error;

    /// `all1`, `all2`, `bernoulli:p`, or an explicit string of `1`/`2` labels.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all1" => Ok(InitialLaw::AllOne),
            "all2" => Ok(InitialLaw::AllTwo),
            _ => {
                if let Some(p) = s.strip_prefix("bernoulli:") {
                    let p: f64 = p.parse().map_err(|_| Error::InvalidInitialLaw(format!("bad probability `{p}`")))?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidInitialLaw(format!("p = {p} not in [0, 1]")));
                    }
                    Ok(InitialLaw::Bernoulli(p))
                } else if !s.is_empty() && s.bytes().all(|b| b == b'1' || b == b'2') {
                    let labels: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
                    Ok(InitialLaw::Explicit(Configuration::from_labels(&labels)?))
                } else {
                    Err(Error::InvalidInitialLaw(format!("`{s}` (expected all1, all2, bernoulli:p or a 1/2 string)")))
                }
            }
        }
    }
}

impl fmt::Display for InitialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialLaw::AllOne => write!(f, "all1"),
            InitialLaw::AllTwo => write!(f, "all2"),
            InitialLaw::Bernoulli(p) => write!(f, "bernoulli:{p}"),
            InitialLaw::Explicit(c) => write!(f, "{c}"),
        }
    }
}

/// Fraction of the neighbors of `x` performing `task`; zero for isolated `x`.
pub fn neighbor_fraction(graph: &Graph, config: &Configuration, x: usize, task: Task) -> Result<f64> {
    graph.check_vertex(x)?;
    config.check_size(graph)?;
    let deg = graph.degree(x);
    if deg == 0 {
        return Ok(0.0);
    }
    let count = graph.neighbors(x).iter().filter(|&&y| config.get(y) == task).count();
    Ok(count as f64 / deg as f64)
}

/// Switching rate of a vertex on `task` with `opposite` of its `degree`
/// neighbors on the other task. Every simulator evaluates rates through
/// this function so that all of them agree bit for bit.
#[inline]
pub fn rate_from_counts(params: &Params, task: Task, opposite: usize, degree: usize) -> f64 {
    let f_other = if degree == 0 { 0.0 } else { opposite as f64 / degree as f64 };
    let eps = params.epsilon;
    params.cost(task) * (eps + (1.0 - eps) * (1.0 - f_other))
}

/// Rate at which vertex `x` switches task in configuration `config`.
pub fn flip_rate(graph: &Graph, config: &Configuration, params: &Params, x: usize) -> Result<f64> {
    graph.check_vertex(x)?;
    config.check_size(graph)?;
    let task = config.get(x);
    let opposite = graph.neighbors(x).iter().filter(|&&y| config.get(y) != task).count();
    Ok(rate_from_counts(params, task, opposite, graph.degree(x)))
}

/// Sum of the switching rates over all vertices.
pub fn total_rate(graph: &Graph, config: &Configuration, params: &Params) -> Result<f64> {
    config.check_size(graph)?;
    (0..graph.vertex_count()).map(|x| flip_rate(graph, config, params, x)).sum()
}
