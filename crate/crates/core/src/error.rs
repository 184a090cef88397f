use thiserror::Error;

/// Errors produced by graph construction, model evaluation and the simulators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("cannot parse graph spec `{0}`: {1}")]
    GraphSpec(String, String),

    #[error("vertex {vertex} out of range for a graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },

    #[error("invalid task label {0}, expected 1 or 2")]
    InvalidTask(u8),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("configuration has {got} entries but the graph has {expected} vertices")]
    ConfigurationSize { expected: usize, got: usize },

    #[error("invalid initial law: {0}")]
    InvalidInitialLaw(String),

    #[error("graph is not bipartite")]
    NotBipartite,

    #[error("graph is not connected")]
    NotConnected,

    #[error("graph is not a ring with vertices labelled in cyclic order")]
    NotRing,

    #[error("reducible chain, closed classes: {0:?}")]
    ReducibleChain(Vec<(usize, usize)>),

    #[error("no absorbing states when epsilon > 0")]
    NotAbsorbing,

    #[error("event log covers [{covered_from}, {covered_until}] but [{needed_from}, {needed_until}] was requested")]
    LogWindowTooShort { covered_from: f64, covered_until: f64, needed_from: f64, needed_until: f64 },

    #[error("odd number of particles ({0}) on a ring")]
    OddParticleCount(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
