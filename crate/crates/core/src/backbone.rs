//! Template graphs on the vertex grid [k]x[r] and the surface constants.
//!
//! Grid cells are addressed 1-based as (i, j) with i the column index; the
//! linear vertex id is (i-1)r + (j-1). Column i models the i-th cluster
//! group, the r cells inside a column model the colour classes mapped there.

use crate::error::{Error, Result};
use crate::graph::Graph;
use serde::{Deserialize, Serialize};

/// Graph on the vertex set [k]x[r].
#[derive(Clone, Debug)]
pub struct GridGraph {
    pub k: usize,
    pub r: usize,
    graph: Graph,
}

impl GridGraph {
    pub fn new(k: usize, r: usize) -> Result<Self> {
        if k < 1 || r < 1 {
            return Err(Error::pre("grid needs k, r >= 1"));
        }
        Ok(GridGraph { k, r, graph: Graph::new(k * r) })
    }

    pub fn from_graph(k: usize, r: usize, graph: Graph) -> Result<Self> {
        if graph.n() != k * r {
            return Err(Error::pre("graph order does not match k*r"));
        }
        Ok(GridGraph { k, r, graph })
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(1 <= i && i <= self.k && 1 <= j && j <= self.r);
        (i - 1) * self.r + (j - 1)
    }

    pub fn cell(&self, v: usize) -> (usize, usize) {
        (v / self.r + 1, v % self.r + 1)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn add_edge_cells(&mut self, a: (usize, usize), b: (usize, usize)) {
        let u = self.index(a.0, a.1);
        let v = self.index(b.0, b.1);
        self.graph.add_edge(u, v);
    }

    pub fn has_edge_cells(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        self.graph.has_edge(self.index(a.0, a.1), self.index(b.0, b.1))
    }

    pub fn edges_cells(&self) -> Vec<((usize, usize), (usize, usize))> {
        self.graph
            .edges()
            .into_iter()
            .map(|(u, v)| (self.cell(u), self.cell(v)))
            .collect()
    }
}

/// Backbone template: columns are complete, consecutive columns are joined
/// between distinct rows. Edge rule: i = i' (j != j'), or |i - i'| = 1 and
/// j != j'.
pub fn build_bkr(k: usize, r: usize) -> Result<GridGraph> {
    let mut g = GridGraph::new(k, r)?;
    for i in 1..=k {
        for j in 1..=r {
            for jp in j + 1..=r {
                g.add_edge_cells((i, j), (i, jp));
            }
            if i < k {
                for jp in 1..=r {
                    if jp != j {
                        g.add_edge_cells((i, j), (i + 1, jp));
                    }
                }
            }
        }
    }
    Ok(g)
}

/// k disjoint complete graphs, one per column.
pub fn build_kkr(k: usize, r: usize) -> Result<GridGraph> {
    let mut g = GridGraph::new(k, r)?;
    for i in 1..=k {
        for j in 1..=r {
            for jp in j + 1..=r {
                g.add_edge_cells((i, j), (i, jp));
            }
        }
    }
    Ok(g)
}

/// Backbone plus the vertical edges {(i,j),(i+1,j)} with i - j divisible by
/// r. The verticals give every column a neighbour that sees all of it, which
/// is what the partitioning of a cycle-power homomorphism needs.
pub fn build_rkr_path_augmented(k: usize, r: usize) -> Result<GridGraph> {
    if k < 2 {
        return Err(Error::pre("path-augmented template needs k >= 2"));
    }
    let mut g = build_bkr(k, r)?;
    for i in 1..k {
        for j in 1..=r {
            if (i as i64 - j as i64).rem_euclid(r as i64) == 0 {
                g.add_edge_cells((i, j), (i + 1, j));
            }
        }
    }
    let _ = column_covers(&g)?;
    Ok(g)
}

/// For each column i, the lexicographically least cell outside the column
/// adjacent to every cell of the column. Errors if some column has none.
pub fn column_covers(g: &GridGraph) -> Result<Vec<(usize, usize)>> {
    let mut covers = Vec::with_capacity(g.k);
    for i in 1..=g.k {
        let found = (1..=g.k)
            .flat_map(|ci| (1..=g.r).map(move |cj| (ci, cj)))
            .find(|&(ci, cj)| {
                ci != i && (1..=g.r).all(|j| g.has_edge_cells((ci, cj), (i, j)))
            });
        match found {
            Some(c) => covers.push(c),
            None => {
                return Err(Error::pre(format!(
                    "no vertex outside column {} is adjacent to all of it",
                    i
                )))
            }
        }
    }
    Ok(covers)
}

/// Containment and cover conditions a partition target must satisfy:
/// K ⊆ B ⊆ R on the same grid, and every column covered from outside.
/// Returns the per-column cover witnesses.
pub fn verify_grid_target(r_grid: &GridGraph) -> Result<Vec<(usize, usize)>> {
    let b = build_bkr(r_grid.k, r_grid.r)?;
    if !b.graph().is_subgraph_of(r_grid.graph()) {
        return Err(Error::pre("target does not contain the backbone template"));
    }
    column_covers(r_grid)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AugmentReport {
    /// Chosen covering vertex per column, 1-based cells.
    pub covers: Vec<(usize, usize)>,
    pub max_degree: usize,
    pub degree_bound: f64,
}

/// Thins a dense reduced graph to a bounded-degree partition target: keeps
/// the backbone edges and, per column, the edges of one covering vertex,
/// chosen to spread reuse and then lexicographically. The input must contain
/// the backbone and have minimum degree at least ((r-1)/r + gamma/2)kr.
pub fn augment_reduced_graph(r_tilde: &GridGraph, gamma: f64) -> Result<(GridGraph, AugmentReport)> {
    let (k, r) = (r_tilde.k, r_tilde.r);
    let kr = (k * r) as f64;
    if gamma <= 0.0 {
        return Err(Error::pre("gamma must be positive"));
    }
    let need = ((r as f64 - 1.0) / r as f64 + gamma / 2.0) * kr;
    let min_deg = r_tilde.graph().min_degree();
    if (min_deg as f64) < need {
        return Err(Error::pre(format!(
            "minimum degree {} below the required {:.2}",
            min_deg, need
        )));
    }
    let b = build_bkr(k, r)?;
    if !b.graph().is_subgraph_of(r_tilde.graph()) {
        return Err(Error::pre("input does not contain the backbone template"));
    }

    let mut out = b;
    let mut reuse = vec![0usize; k * r];
    let mut covers = Vec::with_capacity(k);
    for i in 1..=k {
        let mut candidates: Vec<(usize, usize)> = (1..=k)
            .flat_map(|ci| (1..=r).map(move |cj| (ci, cj)))
            .filter(|&(ci, cj)| {
                ci != i
                    && (1..=r).all(|j| r_tilde.has_edge_cells((ci, cj), (i, j)))
            })
            .collect();
        if candidates.is_empty() {
            return Err(Error::pre(format!("column {} has no covering vertex", i)));
        }
        candidates.sort_by_key(|&(ci, cj)| (reuse[(ci - 1) * r + (cj - 1)], ci, cj));
        let v = candidates[0];
        reuse[(v.0 - 1) * r + (v.1 - 1)] += 1;
        covers.push(v);
        for j in 1..=r {
            out.add_edge_cells(v, (i, j));
        }
    }
    let max_degree = out.graph().max_degree();
    let degree_bound = 3.0 * r as f64 + 2.0 / gamma;
    if max_degree as f64 > degree_bound {
        return Err(Error::invariant(format!(
            "thinned target has degree {} above the bound {:.2}",
            max_degree, degree_bound
        )));
    }
    Ok((out, AugmentReport { covers, max_degree, degree_bound }))
}

/// Constants attached to a surface of Euler genus g, with the bandwidth
/// bound evaluated at (n, max_degree).
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceConstants {
    pub genus: u64,
    pub r: u64,
    pub a: u64,
    pub n: usize,
    pub max_degree: usize,
    pub bw_bound: f64,
    /// True when the genus-0 denominator had its degenerate log-term
    /// dropped.
    pub clamped: bool,
}

/// r = floor((7 + sqrt(1+48g)) / 2), a = (r+1)^8, and the bandwidth bound
/// 15 n log(max_degree) / (log n - log min(1, g)). The integer square root
/// is exact: the outer floor cannot move across an integer between sqrt's
/// floor and its true value. For g = 0 the subtracted log term is dropped
/// and the result flagged.
pub fn surface_constants(genus: u64, n: usize, max_degree: usize) -> Result<SurfaceConstants> {
    if n < 2 || max_degree < 2 {
        return Err(Error::pre("need n >= 2 and max degree >= 2"));
    }
    let r = (7 + (1 + 48 * genus).isqrt()) / 2;
    let a = (r + 1).pow(8);
    let clamped = genus == 0;
    let denom = (n as f64).ln();
    let bw_bound = 15.0 * n as f64 * (max_degree as f64).ln() / denom;
    Ok(SurfaceConstants { genus, r, a, n, max_degree, bw_bound, clamped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bkr_small_cases() {
        let b = build_bkr(2, 2).unwrap();
        let mut edges = b.edges_cells();
        edges.sort();
        assert_eq!(
            edges,
            vec![
                ((1, 1), (1, 2)),
                ((1, 1), (2, 2)),
                ((1, 2), (2, 1)),
                ((2, 1), (2, 2)),
            ]
        );
        assert_eq!(build_bkr(5, 1).unwrap().graph().edge_count(), 0);
        assert_eq!(build_bkr(3, 3).unwrap().graph().edge_count(), 21);
    }

    #[test]
    fn kkr_counts_and_containment() {
        assert_eq!(build_kkr(2, 3).unwrap().graph().edge_count(), 6);
        assert_eq!(build_kkr(4, 1).unwrap().graph().edge_count(), 0);
        for k in 1..6 {
            for r in 1..5 {
                let kk = build_kkr(k, r).unwrap();
                let b = build_bkr(k, r).unwrap();
                assert!(kk.graph().is_subgraph_of(b.graph()));
            }
        }
    }

    #[test]
    fn path_augmented_verticals() {
        let g = build_rkr_path_augmented(4, 3).unwrap();
        assert!(g.has_edge_cells((1, 1), (2, 1)));
        assert!(!g.has_edge_cells((2, 1), (3, 1)));
        assert!(g.has_edge_cells((2, 2), (3, 2)));
        assert!(g.has_edge_cells((3, 3), (4, 3)));
        let b = build_bkr(4, 3).unwrap();
        assert!(b.graph().is_subgraph_of(g.graph()));
    }

    #[test]
    fn path_augmented_covers_every_column() {
        for k in 2..=20 {
            for r in 1..=5 {
                let g = build_rkr_path_augmented(k, r).unwrap();
                let covers = column_covers(&g).unwrap();
                assert_eq!(covers.len(), k);
                for (i, &(ci, _)) in covers.iter().enumerate() {
                    assert_eq!((ci as i64 - (i + 1) as i64).abs(), 1);
                }
            }
        }
    }

    #[test]
    fn augment_complete_grid_spreads_reuse() {
        let (k, r) = (6, 2);
        let mut complete = GridGraph::new(k, r).unwrap();
        for u in 0..k * r {
            for v in u + 1..k * r {
                let (cu, cv) = (complete.cell(u), complete.cell(v));
                complete.add_edge_cells(cu, cv);
            }
        }
        let (out, report) = augment_reduced_graph(&complete, 0.4).unwrap();
        let mut uses = std::collections::BTreeMap::new();
        for &c in &report.covers {
            *uses.entry(c).or_insert(0usize) += 1;
        }
        assert!(uses.values().all(|&u| u <= 1));
        assert!(report.max_degree as f64 <= report.degree_bound);
        let b = build_bkr(k, r).unwrap();
        assert!(b.graph().is_subgraph_of(out.graph()));
        assert!(verify_grid_target(&out).is_ok());
    }

    #[test]
    fn augment_randomized_degree_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for &(k, r, gamma) in &[(8usize, 2usize, 0.3f64), (12, 4, 0.2), (10, 3, 0.25)] {
            let need = ((r as f64 - 1.0) / r as f64 + gamma / 2.0) * (k * r) as f64;
            let mut g = GridGraph::new(k, r).unwrap();
            for u in 0..k * r {
                for v in u + 1..k * r {
                    g.add_edge_cells(g.cell(u), g.cell(v));
                }
            }
            // Random thinning that respects the minimum-degree hypothesis.
            let mut graph = g.graph().clone();
            for _ in 0..3 * k * r {
                let u = rng.random_range(0..k * r);
                let v = rng.random_range(0..k * r);
                if u != v
                    && graph.has_edge(u, v)
                    && graph.degree(u) as f64 - 1.0 >= need
                    && graph.degree(v) as f64 - 1.0 >= need
                {
                    graph.remove_edge(u, v);
                }
            }
            let b = build_bkr(k, r).unwrap();
            for (u, v) in b.graph().edges() {
                graph.add_edge(u, v);
            }
            let r_tilde = GridGraph::from_graph(k, r, graph).unwrap();
            let (out, report) = augment_reduced_graph(&r_tilde, gamma).unwrap();
            assert!(out.graph().max_degree() as f64 <= 3.0 * r as f64 + 2.0 / gamma);
            assert!(report.covers.len() == k);
            assert!(verify_grid_target(&out).is_ok());
        }
    }

    #[test]
    fn augment_rejects_low_degree() {
        let b = build_bkr(6, 3).unwrap();
        assert!(augment_reduced_graph(&b, 0.3).is_err());
    }

    #[test]
    fn surface_constant_values() {
        let s = surface_constants(0, 1000, 4).unwrap();
        assert_eq!((s.r, s.a), (4, 390625));
        assert!(s.clamped);
        let s = surface_constants(1, 1000, 4).unwrap();
        assert_eq!((s.r, s.a), (7, 8u64.pow(8)));
        assert!(!s.clamped);
        let s2 = surface_constants(2, 1000, 4).unwrap();
        assert_eq!(s2.r, (7 + 97u64.isqrt()) / 2);
    }

    #[test]
    fn surface_bw_bound_value() {
        let s = surface_constants(0, 1024, 8).unwrap();
        let expect = 15.0 * 1024.0 * (8f64).ln() / (1024f64).ln();
        assert!((s.bw_bound - expect).abs() < 1e-9);
    }
}
