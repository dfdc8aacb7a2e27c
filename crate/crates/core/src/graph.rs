//! Directed communication graphs, their column-stochastic mixing matrices,
//! and time-varying topology schedules.
//!
//! Edges are stored as `(sender, receiver)`. In the mixing matrix the row
//! index is the receiver, so column `j` holds everything node `j` pushes out:
//! `W[i][j] = 1 / (d_j_out + 1)` for every out-neighbour `i` of `j` and for
//! `i == j`.

use std::borrow::Cow;
use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

/// Tolerance on column sums of an emitted mixing matrix.
pub const COLUMN_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("a directed graph needs at least 2 nodes, got {0}")]
    InvalidSize(usize),
    #[error("edge probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("self-loop on node {0}; self weights are implicit")]
    SelfLoop(usize),
    #[error("edge ({from}, {to}) references a node outside 0..{n}")]
    NodeOutOfRange { from: usize, to: usize, n: usize },
    #[error("graph is not strongly connected")]
    NotStronglyConnected,
    #[error("mixing matrix of size {expected}x{expected} expected, got {got} entries")]
    MatrixShape { expected: usize, got: usize },
    #[error("column {column} sums to {sum}, not 1")]
    NotColumnStochastic { column: usize, sum: f64 },
    #[error("entry ({row}, {column}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { row: usize, column: usize, value: f64 },
    #[error("cyclic schedule needs at least one graph")]
    EmptySchedule,
    #[error("schedule graph has {got} nodes, schedule expects {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("malformed graph dump: {0}")]
    Dump(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    // out_neighbors[j] is sorted and duplicate free.
    out_neighbors: Vec<Vec<usize>>,
}

/// JSON adjacency dump: `{"n": 3, "edges": [[0,1],[1,2],[2,0]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDump {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl DirectedGraph {
    /// Builds a graph from `(sender, receiver)` pairs. Duplicates collapse;
    /// self-loops and out-of-range endpoints are rejected. Strong
    /// connectivity is not required here, see [`is_strongly_connected`].
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::InvalidSize(n));
        }
        let mut sets = vec![BTreeSet::new(); n];
        for (from, to) in edges {
            if from >= n || to >= n {
                return Err(GraphError::NodeOutOfRange { from, to, n });
            }
            if from == to {
                return Err(GraphError::SelfLoop(from));
            }
            sets[from].insert(to);
        }
        Ok(Self {
            n,
            out_neighbors: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_neighbors[node].len()
    }

    pub fn out_neighbors(&self, node: usize) -> &[usize] {
        &self.out_neighbors[node]
    }

    pub fn edge_count(&self) -> usize {
        self.out_neighbors.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out_neighbors
            .get(from)
            .is_some_and(|out| out.binary_search(&to).is_ok())
    }

    /// All edges in lexicographic `(sender, receiver)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_neighbors
            .iter()
            .enumerate()
            .flat_map(|(from, out)| out.iter().map(move |&to| (from, to)))
    }

    /// The same graph with every edge reversed.
    pub fn flipped(&self) -> Self {
        Self::from_edges(self.n, self.edges().map(|(a, b)| (b, a)))
            .expect("flipping preserves validity")
    }

    /// Adds the edges of another graph on the same node set.
    pub fn union(&self, other: &Self) -> Result<Self, GraphError> {
        if other.n != self.n {
            return Err(GraphError::SizeMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Self::from_edges(self.n, self.edges().chain(other.edges()))
    }

    pub fn to_dump(&self) -> GraphDump {
        GraphDump {
            n: self.n,
            edges: self.edges().map(|(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_dump(dump: &GraphDump) -> Result<Self, GraphError> {
        Self::from_edges(dump.n, dump.edges.iter().map(|e| (e[0], e[1])))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_dump()).expect("dump serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let dump: GraphDump =
            serde_json::from_str(text).map_err(|e| GraphError::Dump(e.to_string()))?;
        Self::from_dump(&dump)
    }

    fn reaches_all(&self, adjacency: &[Vec<usize>]) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }
}

/// Directed ring `i -> (i + 1) mod n`.
pub fn directed_ring(n: usize) -> Result<DirectedGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidSize(n));
    }
    DirectedGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Reversed ring `i -> (i - 1) mod n`.
pub fn reversed_ring(n: usize) -> Result<DirectedGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidSize(n));
    }
    DirectedGraph::from_edges(n, (0..n).map(|i| (i, (i + n - 1) % n)))
}

/// Complete digraph on `n` nodes.
pub fn complete(n: usize) -> Result<DirectedGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidSize(n));
    }
    DirectedGraph::from_edges(
        n,
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))),
    )
}

/// Erdős–Rényi digraph: every ordered pair `(i, j)`, `i != j`, is kept
/// independently with probability `p`. When the draw is not strongly
/// connected the directed ring is overlaid on top of it.
pub fn er_directed<R: Rng + ?Sized>(
    n: usize,
    p: f64,
    rng: &mut R,
) -> Result<DirectedGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidSize(n));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let g = DirectedGraph::from_edges(n, edges)?;
    if is_strongly_connected(&g) {
        Ok(g)
    } else {
        g.union(&directed_ring(n)?)
    }
}

/// True iff one strongly connected component spans every node. Runs a
/// forward and a backward breadth-first search from node 0, `O(n + |E|)`.
pub fn is_strongly_connected(g: &DirectedGraph) -> bool {
    if g.n == 1 {
        return true;
    }
    let mut reverse = vec![Vec::new(); g.n];
    for (a, b) in g.edges() {
        reverse[b].push(a);
    }
    g.reaches_all(&g.out_neighbors) && g.reaches_all(&reverse)
}

/// Dense column-stochastic matrix with a per-column sparse view used for
/// mixing.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    n: usize,
    // Row-major.
    dense: Vec<f64>,
    // columns[j] = nonzero (row, weight) pairs of column j, ascending row.
    columns: Vec<Vec<(usize, f64)>>,
}

impl MixingMatrix {
    /// `W[i][j] = 1/(d_j_out + 1)` when `j` sends to `i` or `i == j`.
    pub fn from_graph(g: &DirectedGraph) -> Self {
        let n = g.n();
        let mut dense = vec![0.0; n * n];
        for j in 0..n {
            let w = 1.0 / (g.out_degree(j) as f64 + 1.0);
            dense[j * n + j] = w;
            for &i in g.out_neighbors(j) {
                dense[i * n + j] = w;
            }
        }
        Self::from_parts(n, dense)
    }

    /// Wraps an arbitrary row-major matrix without checking stochasticity;
    /// use [`MixingMatrix::validate`] for that.
    pub fn from_dense(n: usize, dense: Vec<f64>) -> Result<Self, GraphError> {
        if n == 0 || dense.len() != n * n {
            return Err(GraphError::MatrixShape {
                expected: n,
                got: dense.len(),
            });
        }
        Ok(Self::from_parts(n, dense))
    }

    fn from_parts(n: usize, dense: Vec<f64>) -> Self {
        let columns = (0..n)
            .map(|j| {
                (0..n)
                    .filter_map(|i| {
                        let w = dense[i * n + j];
                        (w != 0.0).then_some((i, w))
                    })
                    .collect()
            })
            .collect();
        Self { n, dense, columns }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, column: usize) -> f64 {
        self.dense[row * self.n + column]
    }

    pub fn as_dense(&self) -> &[f64] {
        &self.dense
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| c.iter().map(|&(_, w)| w).sum())
            .collect()
    }

    /// Checks entries in `[0, 1]` and column sums within [`COLUMN_SUM_TOL`].
    pub fn validate(&self) -> Result<(), GraphError> {
        for (k, &value) in self.dense.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(GraphError::EntryOutOfRange {
                    row: k / self.n,
                    column: k % self.n,
                    value,
                });
            }
        }
        for (column, sum) in self.column_sums().into_iter().enumerate() {
            if (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(GraphError::NotColumnStochastic { column, sum });
            }
        }
        Ok(())
    }

    /// `out = W · input` where `input` and `out` are row-major `n × d`.
    /// `out` is overwritten.
    pub fn apply(&self, input: &[f64], d: usize, out: &mut [f64]) {
        debug_assert_eq!(input.len(), self.n * d);
        debug_assert_eq!(out.len(), self.n * d);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, column) in self.columns.iter().enumerate() {
            let src = &input[j * d..(j + 1) * d];
            for &(i, w) in column {
                let dst = &mut out[i * d..(i + 1) * d];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
    }
}

/// How the graph changes from round to round.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleMode {
    Static(DirectedGraph),
    /// Round `t` uses `graphs[t mod len]`.
    Cyclic(Vec<DirectedGraph>),
    /// A fresh [`er_directed`] draw each round, seeded by
    /// `derive(base_seed, [TAG_TOPOLOGY, t])`.
    ErRandom { p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologySchedule {
    n: usize,
    base_seed: u64,
    mode: ScheduleMode,
    // Precomputed for static and cyclic modes.
    cached: Vec<MixingMatrix>,
}

impl TopologySchedule {
    pub fn new(n: usize, base_seed: u64, mode: ScheduleMode) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::InvalidSize(n));
        }
        let graphs: &[DirectedGraph] = match &mode {
            ScheduleMode::Static(g) => std::slice::from_ref(g),
            ScheduleMode::Cyclic(gs) if gs.is_empty() => return Err(GraphError::EmptySchedule),
            ScheduleMode::Cyclic(gs) => gs,
            ScheduleMode::ErRandom { p } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(GraphError::InvalidProbability(*p));
                }
                &[]
            }
        };
        for g in graphs {
            if g.n() != n {
                return Err(GraphError::SizeMismatch {
                    expected: n,
                    got: g.n(),
                });
            }
            if !is_strongly_connected(g) {
                return Err(GraphError::NotStronglyConnected);
            }
        }
        let cached = graphs.iter().map(MixingMatrix::from_graph).collect();
        Ok(Self {
            n,
            base_seed,
            mode,
            cached,
        })
    }

    pub fn fixed(g: DirectedGraph) -> Result<Self, GraphError> {
        Self::new(g.n(), 0, ScheduleMode::Static(g))
    }

    /// The switching topology used in the experiments: one Erdős–Rényi
    /// draw (seeded by `seed`), the directed ring and the reversed ring,
    /// visited in that order.
    pub fn er_ring_cycle(n: usize, p: f64, seed: u64) -> Result<Self, GraphError> {
        let mut rng = rng::derived_stream(seed, &[rng::TAG_TOPOLOGY]);
        let er = er_directed(n, p, &mut rng)?;
        Self::new(
            n,
            seed,
            ScheduleMode::Cyclic(vec![er, directed_ring(n)?, reversed_ring(n)?]),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> &ScheduleMode {
        &self.mode
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn graph_at(&self, t: usize) -> Cow<'_, DirectedGraph> {
        match &self.mode {
            ScheduleMode::Static(g) => Cow::Borrowed(g),
            ScheduleMode::Cyclic(gs) => Cow::Borrowed(&gs[t % gs.len()]),
            ScheduleMode::ErRandom { p } => Cow::Owned(self.er_draw(*p, t)),
        }
    }

    pub fn mixing_at(&self, t: usize) -> Cow<'_, MixingMatrix> {
        match &self.mode {
            ScheduleMode::Static(_) => Cow::Borrowed(&self.cached[0]),
            ScheduleMode::Cyclic(_) => Cow::Borrowed(&self.cached[t % self.cached.len()]),
            ScheduleMode::ErRandom { p } => {
                Cow::Owned(MixingMatrix::from_graph(&self.er_draw(*p, t)))
            }
        }
    }

    /// Graph and mixing matrix of round `t`; a pure function of
    /// `(self, t)`.
    pub fn at(&self, t: usize) -> (DirectedGraph, MixingMatrix) {
        let g = self.graph_at(t).into_owned();
        let w = match &self.mode {
            ScheduleMode::ErRandom { .. } => MixingMatrix::from_graph(&g),
            _ => self.mixing_at(t).into_owned(),
        };
        (g, w)
    }

    fn er_draw(&self, p: f64, t: usize) -> DirectedGraph {
        let mut rng = rng::derived_stream(self.base_seed, &[rng::TAG_TOPOLOGY, t as u64]);
        er_directed(self.n, p, &mut rng).expect("parameters validated at construction")
    }
}
