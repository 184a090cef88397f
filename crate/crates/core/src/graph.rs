//! Static communication networks.
//!
//! Vertices are dense ids `0..n`. Adjacency lists are kept sorted so that
//! neighbor scans, and therefore seeded simulations, iterate in a fixed order.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Undirected simple graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an undirected edge list, rejecting self-loops,
    /// duplicate edges and out-of-range endpoints.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph("a graph needs at least one vertex".into()));
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: v, vertex_count });
                }
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(Self { adjacency })
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("complete graph needs n >= 1".into()));
        }
        let adjacency = (0..n).map(|x| (0..n).filter(|&y| y != x).collect()).collect();
        Ok(Self { adjacency })
    }

    /// Ring on `n >= 3` vertices, vertex `i` adjacent to `i ± 1 mod n`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(format!("cycle needs n >= 3, got {n}")));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges)
    }

    /// Periodic `l × h` lattice; vertex `(x, y)` has id `y * l + x`.
    pub fn torus2d(l: usize, h: usize) -> Result<Self> {
        if l < 3 || h < 3 {
            return Err(Error::InvalidGraph(format!("torus needs both sides >= 3, got {l}x{h}")));
        }
        let id = |x: usize, y: usize| y * l + x;
        let mut edges = Vec::with_capacity(2 * l * h);
        for y in 0..h {
            for x in 0..l {
                edges.push((id(x, y), id((x + 1) % l, y)));
                edges.push((id(x, y), id(x, (y + 1) % h)));
            }
        }
        Self::from_edges(l * h, &edges)
    }

    /// Closed lattice box `Z² ∩ [0, l] × [0, h]` with nearest-neighbor
    /// edges; `(l + 1)(h + 1)` vertices, `(x, y)` has id `y * (l + 1) + x`.
    pub fn grid(l: usize, h: usize) -> Result<Self> {
        if l < 1 || h < 1 {
            return Err(Error::InvalidGraph(format!("grid needs both sides >= 1, got {l}x{h}")));
        }
        let width = l + 1;
        let id = |x: usize, y: usize| y * width + x;
        let mut edges = Vec::new();
        for y in 0..=h {
            for x in 0..=l {
                if x < l {
                    edges.push((id(x, y), id(x + 1, y)));
                }
                if y < h {
                    edges.push((id(x, y), id(x, y + 1)));
                }
            }
        }
        Self::from_edges(width * (h + 1), &edges)
    }

    /// `n` isolated vertices.
    pub fn edgeless(n: usize) -> Result<Self> {
        Self::from_edges(n, &[])
    }

    /// Complete bipartite graph; the first `n1` ids form one side.
    pub fn complete_bipartite(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidGraph("complete bipartite graph needs both sides non-empty".into()));
        }
        let edges: Vec<_> = (0..n1).flat_map(|a| (0..n2).map(move |b| (a, n1 + b))).collect();
        Self::from_edges(n1 + n2, &edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    #[inline]
    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    #[inline]
    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        x < self.vertex_count() && self.adjacency[x].binary_search(&y).is_ok()
    }

    /// Each undirected edge once, as `(low, high)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(x, list)| list.iter().filter(move |&&y| x < y).map(move |&y| (x, y)))
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: x, vertex_count: self.vertex_count() })
        }
    }

    /// Component label of every vertex, components numbered by their
    /// lowest vertex id.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.vertex_count();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for root in 0..n {
            if label[root] != usize::MAX {
                continue;
            }
            label[root] = count;
            queue.push_back(root);
            while let Some(x) = queue.pop_front() {
                for &y in self.neighbors(x) {
                    if label[y] == usize::MAX {
                        label[y] = count;
                        queue.push_back(y);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    pub fn is_connected(&self) -> bool {
        self.components().0 == 1
    }

    /// True when vertex `i` is adjacent exactly to `i ± 1 mod n` for all `i`.
    pub fn is_ring(&self) -> bool {
        let n = self.vertex_count();
        n >= 3
            && (0..n).all(|i| {
                let mut expected = [(i + n - 1) % n, (i + 1) % n];
                expected.sort_unstable();
                self.neighbors(i) == expected
            })
    }
}

/// Side label of a vertex in a bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::First => Side::Second,
            Side::Second => Side::First,
        }
    }
}

/// A partition `{V1, V2}` with every edge crossing sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    side: Vec<Side>,
    first: usize,
    second: usize,
}

impl Bipartition {
    pub fn side(&self, x: usize) -> Side {
        self.side[x]
    }

    pub fn sides(&self) -> &[Side] {
        &self.side
    }

    /// `(N1, N2)`.
    pub fn sizes(&self) -> (usize, usize) {
        (self.first, self.second)
    }

    /// Checks that every edge of `graph` joins opposite sides.
    pub fn is_valid_for(&self, graph: &Graph) -> bool {
        self.side.len() == graph.vertex_count() && graph.edges().all(|(a, b)| self.side[a] != self.side[b])
    }
}

/// Two-colors the graph by breadth-first layering, one component at a time.
/// The lowest-id vertex of each component goes to the first side. Returns
/// `None` if some component contains an odd cycle.
pub fn find_bipartition(graph: &Graph) -> Option<Bipartition> {
    let n = graph.vertex_count();
    let mut side: Vec<Option<Side>> = vec![None; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if side[root].is_some() {
            continue;
        }
        side[root] = Some(Side::First);
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            let sx = side[x].expect("queued vertices are colored");
            for &y in graph.neighbors(x) {
                match side[y] {
                    None => {
                        side[y] = Some(sx.other());
                        queue.push_back(y);
                    }
                    Some(sy) if sy == sx => return None,
                    Some(_) => {}
                }
            }
        }
    }
    let side: Vec<Side> = side.into_iter().map(|s| s.expect("all colored")).collect();
    let first = side.iter().filter(|&&s| s == Side::First).count();
    Some(Bipartition { second: n - first, first, side })
}

/// Textual graph description accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSpec {
    Complete(usize),
    Cycle(usize),
    Torus2d(usize, usize),
    Grid(usize, usize),
    Edgeless(usize),
    CompleteBipartite(usize, usize),
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match *self {
            GraphSpec::Complete(n) => Graph::complete(n),
            GraphSpec::Cycle(n) => Graph::cycle(n),
            GraphSpec::Torus2d(l, h) => Graph::torus2d(l, h),
            GraphSpec::Grid(l, h) => Graph::grid(l, h),
            GraphSpec::Edgeless(n) => Graph::edgeless(n),
            GraphSpec::CompleteBipartite(a, b) => Graph::complete_bipartite(a, b),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |msg: &str| Error::GraphSpec(s.to_string(), msg.to_string());
        let (kind, args) = s.split_once(':').ok_or_else(|| err("expected `kind:args`"))?;
        let int = |t: &str| -> Result<usize> {
            t.trim().parse::<usize>().map_err(|_| err(&format!("`{t}` is not a non-negative integer")))
        };
        let pair = |sep: char| -> Result<(usize, usize)> {
            let (a, b) =
                args.split_once(sep).ok_or_else(|| err(&format!("expected two sizes separated by `{sep}`")))?;
            Ok((int(a)?, int(b)?))
        };
        let spec = match kind {
            "complete" => GraphSpec::Complete(int(args)?),
            "cycle" => GraphSpec::Cycle(int(args)?),
            "edgeless" => GraphSpec::Edgeless(int(args)?),
            "torus2d" => {
                let (l, h) = pair('x')?;
                GraphSpec::Torus2d(l, h)
            }
            "grid" => {
                let (l, h) = pair('x')?;
                GraphSpec::Grid(l, h)
            }
            "complete-bipartite" => {
                let (a, b) = pair(',')?;
                GraphSpec::CompleteBipartite(a, b)
            }
            other => return Err(err(&format!("unknown graph kind `{other}`"))),
        };
        Ok(spec)
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::Cycle(n) => write!(f, "cycle:{n}"),
            GraphSpec::Torus2d(l, h) => write!(f, "torus2d:{l}x{h}"),
            GraphSpec::Grid(l, h) => write!(f, "grid:{l}x{h}"),
            GraphSpec::Edgeless(n) => write!(f, "edgeless:{n}"),
            GraphSpec::CompleteBipartite(a, b) => write!(f, "complete-bipartite:{a},{b}"),
        }
    }
}
