//! Dense simple graphs over `0..n-1` with bit-matrix adjacency, vertex-set
//! bitsets, labellings, equitable size grids, generators, and the two file
//! formats (edge list, adjacency JSON). External ids are 1-based.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Simple undirected graph, adjacency stored as one bit row per vertex.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    m: usize,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.m)
    }
}

/// Serialized as an edge list so JSON reports stay readable.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr { n: self.n, edges: self.edges() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(d)?;
        Graph::from_edges(repr.n, &repr.edges).map_err(serde::de::Error::custom)
    }
}

impl Graph {
    pub fn new(n: usize) -> Self {
        let words = words_for(n);
        Graph { n, words, bits: vec![0; n * words], m: 0 }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.try_add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.words..(v + 1) * self.words]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.bits[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    /// Adds an edge; duplicates collapse silently. Panics on bad ids.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.try_add_edge(u, v).unwrap();
    }

    pub fn try_add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::pre(format!(
                "edge ({}, {}) out of range for n = {}",
                u + 1,
                v + 1,
                self.n
            )));
        }
        if u == v {
            return Err(Error::pre(format!("self-loop at vertex {}", u + 1)));
        }
        if !self.has_edge(u, v) {
            self.bits[u * self.words + v / WORD] |= 1 << (v % WORD);
            self.bits[v * self.words + u / WORD] |= 1 << (u % WORD);
            self.m += 1;
        }
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        if self.has_edge(u, v) {
            self.bits[u * self.words + v / WORD] &= !(1 << (v % WORD));
            self.bits[v * self.words + u / WORD] &= !(1 << (u % WORD));
            self.m -= 1;
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree(v));
        for (wi, &w) in self.row(v).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * WORD + b);
                w &= w - 1;
            }
        }
        out
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for v in self.neighbors(u) {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Number of neighbours of `v` inside `set`.
    pub fn degree_into(&self, v: usize, set: &VertexSet) -> usize {
        self.row(v)
            .iter()
            .zip(set.words())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// True iff every edge of `self` is an edge of `other` (same vertex count).
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n
            && self
                .bits
                .iter()
                .zip(other.bits.iter())
                .all(|(a, b)| a & !b == 0)
    }
}

/// True iff no edge joins two equal colour values (colour 0 included).
pub fn is_proper_colouring(g: &Graph, colours: &[u32]) -> bool {
    debug_assert_eq!(colours.len(), g.n());
    g.edges().iter().all(|&(u, v)| colours[u] != colours[v])
}

/// Subset of `0..n-1` as a bitset.
#[derive(Clone, PartialEq, Eq)]
pub struct VertexSet {
    n: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VertexSet({:?})", self.iter().collect::<Vec<_>>())
    }
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet { n, bits: vec![0; words_for(n)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = VertexSet::empty(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn from_members(n: usize, members: &[usize]) -> Self {
        let mut s = VertexSet::empty(n);
        for &v in members {
            s.insert(v);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.n);
        self.bits[v / WORD] |= 1 << (v % WORD);
    }

    pub fn remove(&mut self, v: usize) {
        self.bits[v / WORD] &= !(1 << (v % WORD));
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.bits[v / WORD] >> (v % WORD) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + b)
                }
            })
        })
    }

    /// Intersects in place with a raw bit row (e.g. a graph adjacency row).
    pub fn intersect_row(&mut self, row: &[u64]) {
        for (a, b) in self.bits.iter_mut().zip(row) {
            *a &= b;
        }
    }

    pub fn intersect(&mut self, other: &VertexSet) {
        self.intersect_row(&other.bits);
    }

    pub fn union(&mut self, other: &VertexSet) {
        self.union_row(&other.bits);
    }

    pub fn union_row(&mut self, row: &[u64]) {
        for (a, b) in self.bits.iter_mut().zip(row) {
            *a |= b;
        }
    }

    pub fn count_intersection_row(&self, row: &[u64]) -> usize {
        self.bits
            .iter()
            .zip(row)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }
}

/// Bijection between vertices and positions `0..n-1`. Position order is the
/// interval order every bandwidth/block argument runs over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labelling {
    pos: Vec<usize>,   // pos[v] = position of vertex v
    order: Vec<usize>, // order[p] = vertex at position p
}

impl Labelling {
    pub fn identity(n: usize) -> Self {
        Labelling { pos: (0..n).collect(), order: (0..n).collect() }
    }

    /// `order[p]` is the vertex at position `p`; must be a permutation.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut pos = vec![usize::MAX; n];
        for (p, &v) in order.iter().enumerate() {
            if v >= n || pos[v] != usize::MAX {
                return Err(Error::pre("labelling is not a permutation of the vertices"));
            }
            pos[v] = p;
        }
        Ok(Labelling { pos, order })
    }

    pub fn n(&self) -> usize {
        self.pos.len()
    }

    pub fn pos(&self, v: usize) -> usize {
        self.pos[v]
    }

    pub fn vertex_at(&self, p: usize) -> usize {
        self.order[p]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Grid of integer class sizes over `[k] x [r]`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeGrid {
    pub k: usize,
    pub r: usize,
    pub sizes: Vec<usize>,
}

impl SizeGrid {
    /// Splits `n` into k*r cells, all within one of each other; in row-major
    /// order the floor cells come first, so the grid is also equitable within
    /// every row.
    pub fn equitable(n: usize, k: usize, r: usize) -> Result<Self> {
        if k == 0 || r == 0 {
            return Err(Error::pre("size grid needs k >= 1 and r >= 1"));
        }
        let cells = k * r;
        let base = n / cells;
        let extra = n % cells;
        let sizes = (0..cells)
            .map(|c| if c < cells - extra { base } else { base + 1 })
            .collect();
        Ok(SizeGrid { k, r, sizes })
    }

    pub fn from_sizes(k: usize, r: usize, sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() != k * r {
            return Err(Error::pre("size grid length mismatch"));
        }
        Ok(SizeGrid { k, r, sizes })
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.sizes[i * self.r + j]
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn min(&self) -> usize {
        *self.sizes.iter().min().unwrap()
    }

    pub fn max(&self) -> usize {
        *self.sizes.iter().max().unwrap()
    }

    /// Row sums M_i.
    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.k)
            .map(|i| self.sizes[i * self.r..(i + 1) * self.r].iter().sum())
            .collect()
    }

    /// Within every row, all cells within one of each other.
    pub fn is_row_equitable(&self) -> bool {
        (0..self.k).all(|i| {
            let row = &self.sizes[i * self.r..(i + 1) * self.r];
            row.iter().max().unwrap() - row.iter().min().unwrap() <= 1
        })
    }
}

// ---- generators ----

/// Path power: vertices 0..n-1, edge iff 1 <= |u - v| <= r.
pub fn path_power(n: usize, r: usize) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for d in 1..=r {
            if u + d < n {
                g.add_edge(u, u + d);
            }
        }
    }
    g
}

/// Cycle power: edge iff cyclic distance is between 1 and r.
pub fn cycle_power(n: usize, r: usize) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for d in 1..=r {
            let v = (u + d) % n;
            if v != u && !g.has_edge(u, v) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

pub fn complete(n: usize) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(u, v);
        }
    }
    g
}

/// Complement on the same vertex set.
pub fn complement(g: &Graph) -> Graph {
    let n = g.n();
    let mut c = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) {
                c.add_edge(u, v);
            }
        }
    }
    c
}

/// Erdos-Renyi graph: each pair independently with probability p.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::pre("edge probability must be in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// Random graph with guaranteed minimum degree >= ceil(frac * n). Sampled at
/// p = (1 + frac)/2, then deficient vertices are topped up with edges to
/// uniformly chosen non-neighbours.
pub fn random_min_degree(n: usize, frac: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&frac) {
        return Err(Error::pre("min-degree fraction must be in [0, 1]"));
    }
    let floor = (frac * n as f64).ceil() as usize;
    if floor > n.saturating_sub(1) {
        return Err(Error::pre(format!(
            "minimum degree {} impossible on {} vertices",
            floor, n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = (1.0 + frac) / 2.0;
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    for v in 0..n {
        while g.degree(v) < floor {
            let mut non: Vec<usize> = (0..n).filter(|&u| u != v && !g.has_edge(u, v)).collect();
            if non.is_empty() {
                break;
            }
            let pick = non.swap_remove(rng.random_range(0..non.len()));
            g.add_edge(v, pick);
        }
    }
    Ok(g)
}

/// Random graph whose natural labelling has bandwidth <= b: each pair at
/// distance 1..=b gets an edge independently with probability p.
pub fn random_bandwidth(n: usize, b: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::pre("edge probability must be in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::new(n);
    for u in 0..n {
        for d in 1..=b {
            if u + d < n && rng.random_bool(p) {
                g.add_edge(u, u + d);
            }
        }
    }
    Ok(g)
}

// ---- file formats ----

/// Parses the edge-list format: an optional first line `n <count>` declaring
/// the vertex count, then one `u v` pair per line, 1-based. Without the header
/// the vertex count is the largest id seen.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut declared: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut max_id = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let first = it.next().unwrap();
        if first == "n" {
            if declared.is_some() || !edges.is_empty() {
                return Err(Error::Parse(format!(
                    "line {}: header must be the first line",
                    lineno + 1
                )));
            }
            let count = it
                .next()
                .ok_or_else(|| Error::Parse("header missing vertex count".into()))?;
            declared = Some(count.parse().map_err(|_| {
                Error::Parse(format!("line {}: bad vertex count '{}'", lineno + 1, count))
            })?);
            continue;
        }
        let u: usize = first
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad vertex id '{}'", lineno + 1, first)))?;
        let v: usize = it
            .next()
            .ok_or_else(|| Error::Parse(format!("line {}: missing second endpoint", lineno + 1)))?
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: bad vertex id", lineno + 1)))?;
        if it.next().is_some() {
            return Err(Error::Parse(format!("line {}: trailing tokens", lineno + 1)));
        }
        if u == 0 || v == 0 {
            return Err(Error::Parse(format!("line {}: vertex ids are 1-based", lineno + 1)));
        }
        max_id = max_id.max(u).max(v);
        edges.push((u, v));
    }
    let n = match declared {
        Some(n) => {
            if max_id > n {
                return Err(Error::Parse(format!(
                    "vertex id {} exceeds declared count {}",
                    max_id, n
                )));
            }
            n
        }
        None => max_id,
    };
    let mut g = Graph::new(n);
    for (u, v) in edges {
        g.try_add_edge(u - 1, v - 1)
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(g)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct AdjacencyJson {
    n: usize,
    edges: Vec<(usize, usize)>,
}

/// Parses `{"n": ..., "edges": [[u, v], ...]}` with 1-based ids.
pub fn parse_adjacency_json(text: &str) -> Result<Graph> {
    let adj: AdjacencyJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut g = Graph::new(adj.n);
    for (u, v) in adj.edges {
        if u == 0 || v == 0 || u > adj.n || v > adj.n {
            return Err(Error::Parse(format!("edge ({}, {}) out of range", u, v)));
        }
        g.try_add_edge(u - 1, v - 1)
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(g)
}

pub fn format_adjacency_json(g: &Graph) -> String {
    let adj = AdjacencyJson {
        n: g.n(),
        edges: g.edges().iter().map(|&(u, v)| (u + 1, v + 1)).collect(),
    };
    serde_json::to_string(&adj).unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    AdjacencyJson,
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(text),
        GraphFormat::AdjacencyJson => parse_adjacency_json(text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let g = path_power(5, 2);
        let text = format_edge_list(&g);
        let h = parse_edge_list(&text).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn edge_list_header_only() {
        let g = parse_edge_list("n 5\n").unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn edge_list_without_header_takes_max_id() {
        let g = parse_edge_list("1 2\n2 3\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn edge_list_rejects_out_of_range_and_loops() {
        assert!(parse_edge_list("n 3\n1 4\n").is_err());
        assert!(parse_edge_list("2 2\n").is_err());
        assert!(parse_edge_list("0 1\n").is_err());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = parse_edge_list("1 2\n2 1\n1 2\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn adjacency_json_round_trip() {
        let g = cycle_power(7, 2);
        let h = parse_adjacency_json(&format_adjacency_json(&g)).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn path_and_cycle_power_counts() {
        assert_eq!(path_power(5, 1).edge_count(), 4);
        assert_eq!(path_power(5, 2).edge_count(), 7);
        assert_eq!(cycle_power(6, 1).edge_count(), 6);
        // C_5^2 is K_5.
        assert_eq!(cycle_power(5, 2), complete(5));
    }

    #[test]
    fn random_bandwidth_respects_band() {
        let g = random_bandwidth(40, 3, 0.5, 7).unwrap();
        for (u, v) in g.edges() {
            assert!(v - u <= 3);
        }
    }

    #[test]
    fn random_min_degree_floor_holds() {
        let g = random_min_degree(30, 0.7, 11).unwrap();
        assert!(g.min_degree() >= 21);
    }

    #[test]
    fn random_min_degree_infeasible() {
        assert!(random_min_degree(10, 1.0, 0).is_err());
    }

    #[test]
    fn generators_deterministic_in_seed() {
        assert_eq!(
            random_min_degree(20, 0.6, 5).unwrap(),
            random_min_degree(20, 0.6, 5).unwrap()
        );
        assert_ne!(
            random_bandwidth(40, 2, 0.5, 1).unwrap(),
            random_bandwidth(40, 2, 0.5, 2).unwrap()
        );
    }

    #[test]
    fn proper_colouring_counts_zero_as_a_colour() {
        let g = path_power(3, 1);
        assert!(is_proper_colouring(&g, &[0, 1, 0]));
        assert!(!is_proper_colouring(&g, &[0, 0, 1]));
    }

    #[test]
    fn size_grid_equitable() {
        let grid = SizeGrid::equitable(10, 2, 3).unwrap();
        assert_eq!(grid.total(), 10);
        assert!(grid.is_row_equitable());
        assert_eq!(grid.sizes, vec![1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn vertex_set_ops() {
        let mut s = VertexSet::from_members(10, &[1, 3, 5]);
        assert_eq!(s.len(), 3);
        s.remove(3);
        assert!(!s.contains(3));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 5]);
        let g = path_power(10, 1);
        assert_eq!(g.degree_into(2, &VertexSet::from_members(10, &[1, 3, 5])), 2);
    }

    #[test]
    fn labelling_round_trip() {
        let l = Labelling::from_order(vec![2, 0, 1]).unwrap();
        assert_eq!(l.pos(2), 0);
        assert_eq!(l.vertex_at(2), 1);
        assert!(Labelling::from_order(vec![0, 0, 1]).is_err());
    }
}
