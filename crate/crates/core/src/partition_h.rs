//! Partitioning a banded guest graph to match a grid-shaped target.
//!
//! A proper colouring with a sparse spare colour is turned into a vertex map
//! f onto the cells of a k x r grid target: position order is cut into k
//! column intervals, the colour gives the row, and spare-coloured vertices
//! are parked on their column's covering cell. An exceptional set X collects
//! everything that may not respect the clean grid structure (spare vertices
//! with their neighbourhoods, plus a bandwidth-wide margin around every
//! cut), and four audit clauses verify the map is usable downstream.

use serde::{Deserialize, Serialize};

use crate::backbone::{build_rkr_path_augmented, verify_grid_target, GridGraph};
use crate::colouring::{
    balance_colouring, greedy_colouring, is_zero_free_positions, window_width, BlockStructure,
    Colouring,
};
use crate::error::{Error, Result};
use crate::graph::{cycle_power, Graph, Labelling, SizeGrid, VertexSet};
use crate::structure::bandwidth_of_labelling;

/// Granularity of the column cuts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutMode {
    /// Cuts on block boundaries, preceded by a balancing sweep when the
    /// instance admits one. Matches the asymptotic construction.
    Block,
    /// Cuts on arbitrary positions whose surrounding corridor is free of
    /// the spare colour. For instances too small to carry whole blocks
    /// per column.
    Fine,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionHParams {
    pub beta: f64,
    pub xi: f64,
    pub mode: CutMode,
    /// Check beta against the worst-case ceiling xi^2/(1200 r). Off for
    /// desk-scale runs where beta is chosen directly; the audit still
    /// gates the output.
    pub enforce_constant_chain: bool,
}

/// Worst offenders per audit clause, kept for reporting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionAudit {
    /// Slack bound used by the clauses: xi * n.
    pub xi_n: f64,
    /// Largest |X intersect W_ij|.
    pub h1_class_max: usize,
    /// Largest |N(X intersect W_ij) intersect W_i'j'|.
    pub h1_nbhd_max: usize,
    /// Largest deviation of a class size from its target cell size.
    pub h2_max_dev: usize,
    /// Edges whose images miss the target graph.
    pub h3_violations: usize,
    /// Edges outside X whose images are not a same-column row change.
    pub h4_violations: usize,
}

/// Vertex map onto the cells of a grid target, with its exceptional set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomomorphismMap {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub mode: CutMode,
    /// Window half-width actually used: max of floor(beta n), 1 and the
    /// labelling bandwidth.
    pub w: usize,
    /// Whether the balancing sweep ran before cutting.
    pub balanced: bool,
    /// Cut block indices t_0 = 0 < t_1 < ... < t_k = block count. Empty
    /// in fine mode.
    pub cut_blocks: Vec<usize>,
    /// Cut positions as 1-based prefix ends, 0 first and n last.
    pub cut_positions: Vec<usize>,
    /// Covering cell per column, 1-based (i, j).
    pub covers: Vec<(usize, usize)>,
    /// Image cell per vertex, 1-based (i, j).
    pub f: Vec<(usize, usize)>,
    /// Exceptional vertices, sorted.
    pub x: Vec<usize>,
    /// Vertices within w of an interior cut, sorted.
    pub boundary: Vec<usize>,
    /// |f^{-1}(i, j)| as a grid.
    pub class_sizes: SizeGrid,
    pub audit: PartitionAudit,
}

impl HomomorphismMap {
    /// Column interval (1-based prefix ends) of column i (1-based).
    pub fn column_range(&self, i: usize) -> std::ops::Range<usize> {
        self.cut_positions[i - 1]..self.cut_positions[i]
    }
}

/// Picks cut blocks t_1 < ... < t_{k-1} so that the blocks up to t_i hold
/// almost exactly the first i column sums: the prefix is at most the sum
/// and misses it by less than three blocks. Both blocks flanking a cut
/// must be free of the spare colour; the scan walks down from the largest
/// admissible block until that holds.
pub fn choose_cuts(
    blocks: &BlockStructure,
    pos_col: &[u32],
    m_cols: &[usize],
) -> Result<Vec<usize>> {
    let n = blocks.n;
    let count = blocks.count;
    let len = blocks.len;
    let k = m_cols.len();
    if pos_col.len() != n {
        return Err(Error::pre("colour sequence length does not match the blocks"));
    }
    if k == 0 {
        return Err(Error::pre("need at least one column"));
    }
    if m_cols.iter().sum::<usize>() != n {
        return Err(Error::pre("column sums must add up to n"));
    }
    let mut zero_free = vec![true; count];
    for t in blocks.zero_blocks(pos_col) {
        zero_free[t] = false;
    }
    let prefix = |t: usize| if t == count { n } else { t * len };
    let slack = 3 * len;
    let mut cuts = vec![0usize];
    let mut col_sum = 0usize;
    for i in 1..k {
        col_sum += m_cols[i - 1];
        let mut t = (col_sum / len).min(count - 1);
        let mut found = None;
        while t > cuts[i - 1] && prefix(t) + slack > col_sum {
            // cut after 1-based block t: flanking blocks are t-1 and t 0-based
            if zero_free[t - 1] && zero_free[t] {
                found = Some(t);
                break;
            }
            t -= 1;
        }
        match found {
            Some(t) => cuts.push(t),
            None => {
                return Err(Error::stage(format!(
                    "no zero-free adjacent block pair for cut {} within {} positions below {}",
                    i, slack, col_sum
                )))
            }
        }
    }
    cuts.push(count);
    Ok(cuts)
}

/// Position-granular cuts: cut i lands at the largest position at most the
/// running column sum whose corridor of w positions on both sides avoids
/// the spare colour, staying within `slack` of the sum and at least 2w+1
/// past the previous cut. Returned as 1-based prefix ends with 0 and n.
pub fn choose_cuts_fine(
    pos_col: &[u32],
    m_cols: &[usize],
    w: usize,
    slack: usize,
) -> Result<Vec<usize>> {
    let n = pos_col.len();
    let k = m_cols.len();
    if k == 0 {
        return Err(Error::pre("need at least one column"));
    }
    if m_cols.iter().sum::<usize>() != n {
        return Err(Error::pre("column sums must add up to n"));
    }
    let mut cuts = vec![0usize];
    let mut col_sum = 0usize;
    for i in 1..k {
        col_sum += m_cols[i - 1];
        let hi = col_sum.min(n - 1);
        let lo = (cuts[i - 1] + 2 * w + 1).max(col_sum.saturating_sub(slack).max(1));
        let mut found = None;
        let mut c = hi;
        while c >= lo {
            let a = c.saturating_sub(w);
            let b = (c + w).min(n);
            if pos_col[a..b].iter().all(|&x| x != 0) {
                found = Some(c);
                break;
            }
            if c == lo {
                break;
            }
            c -= 1;
        }
        match found {
            Some(c) => cuts.push(c),
            None => {
                return Err(Error::stage(format!(
                    "no zero-free cut corridor for column {} in positions {}..={}",
                    i, lo, hi
                )))
            }
        }
    }
    cuts.push(n);
    Ok(cuts)
}

/// Maps the vertices of a banded guest onto the cells of a grid target.
///
/// The colouring must be proper with colours 0..=r where r matches the
/// target's rows and 0 is the sparse spare. In block mode a balancing
/// sweep runs first whenever its own preconditions hold; the cuts then
/// fall on block boundaries. The returned map sends a vertex in column i
/// to (i, colour), spare vertices to the column's covering cell, and the
/// audit clauses are all re-verified before returning:
/// (H1) X and each of its per-cell neighbourhoods touch every cell in at
///      most xi n vertices,
/// (H2) every class size is within xi n of its target cell size,
/// (H3) every edge maps to an edge of the target,
/// (H4) every edge not inside X maps to a same-column row change.
pub fn partition_h(
    h: &Graph,
    labelling: &Labelling,
    sigma: &Colouring,
    r_grid: &GridGraph,
    m: &SizeGrid,
    params: &PartitionHParams,
) -> Result<HomomorphismMap> {
    let n = h.n();
    let k = r_grid.k;
    let r = r_grid.r;
    if labelling.n() != n || sigma.n() != n {
        return Err(Error::pre("labelling and colouring must cover the graph"));
    }
    if k < 2 {
        return Err(Error::pre("grid target needs at least two columns"));
    }
    if m.k != k || m.r != r || sigma.r() as usize != r {
        return Err(Error::pre("target, cell sizes and colouring disagree on k or r"));
    }
    if m.total() != n {
        return Err(Error::pre("cell sizes must add up to n"));
    }
    if !m.is_row_equitable() {
        return Err(Error::pre("cell sizes must be equitable within each column"));
    }
    if !(params.xi > 0.0) || !(params.beta > 0.0) {
        return Err(Error::pre("xi and beta must be positive"));
    }
    if params.enforce_constant_chain
        && params.beta > params.xi * params.xi / (1200.0 * r as f64) + 1e-12
    {
        return Err(Error::pre(format!(
            "beta {} exceeds the partition ceiling {}",
            params.beta,
            params.xi * params.xi / (1200.0 * r as f64)
        )));
    }
    if !sigma.is_proper_on(h) {
        return Err(Error::pre("input colouring is not proper"));
    }
    let covers = verify_grid_target(r_grid)?;
    let bw = bandwidth_of_labelling(h, labelling);
    let w = window_width(n, params.beta).max(bw);
    let mut pos_col = sigma.by_position(labelling);
    let m_cols = m.row_sums();

    let mut balanced = false;
    let (cut_blocks, cut_positions) = match params.mode {
        CutMode::Block => {
            let ell = (10.0 / params.xi).floor() as usize;
            if ell < 2 {
                return Err(Error::pre("xi too large for the zero-free window"));
            }
            if (m.min() as f64) + 1e-9 < 12.0 * params.beta * n as f64 {
                return Err(Error::pre(format!(
                    "smallest cell {} is below 12 beta n = {:.3}",
                    m.min(),
                    12.0 * params.beta * n as f64
                )));
            }
            let blocks = BlockStructure::for_switching_with(n, sigma.r(), params.beta, w)?;
            let xi_prime = 1.0 / ell as f64;
            let can_balance =
                params.beta <= xi_prime * xi_prime / (12.0 * r as f64) + 1e-12;
            if can_balance && is_zero_free_positions(&pos_col, &blocks, 2 * ell) {
                let out = balance_colouring(h, labelling, sigma, ell, params.beta)?;
                pos_col = out.colouring.by_position(labelling);
                balanced = true;
            }
            if !is_zero_free_positions(&pos_col, &blocks, ell) {
                return Err(Error::pre(format!(
                    "colouring is not ({},{})-zero free",
                    ell, params.beta
                )));
            }
            let cuts = choose_cuts(&blocks, &pos_col, &m_cols)?;
            let prefix = |t: usize| if t == blocks.count { n } else { t * blocks.len };
            let cp = cuts.iter().map(|&t| prefix(t)).collect();
            (cuts, cp)
        }
        CutMode::Fine => {
            let cp = choose_cuts_fine(&pos_col, &m_cols, w, 12 * r * w)?;
            (Vec::new(), cp)
        }
    };

    // column of each position
    let mut col_of_pos = vec![0usize; n];
    {
        let mut i = 1;
        for p in 0..n {
            while p + 1 > cut_positions[i] {
                i += 1;
            }
            col_of_pos[p] = i;
        }
    }

    let mut f = vec![(0usize, 0usize); n];
    for p in 0..n {
        let v = labelling.vertex_at(p);
        let i = col_of_pos[p];
        f[v] = if pos_col[p] == 0 { covers[i - 1] } else { (i, pos_col[p] as usize) };
    }

    // margin of w positions on both sides of every interior cut
    let mut boundary_pos: Vec<usize> = Vec::new();
    for q in 1..k {
        let c = cut_positions[q];
        for p in c.saturating_sub(w)..(c + w).min(n) {
            boundary_pos.push(p);
        }
    }
    boundary_pos.dedup();
    for &p in &boundary_pos {
        if pos_col[p] == 0 {
            return Err(Error::invariant(format!(
                "cut margin position {} carries the spare colour",
                p + 1
            )));
        }
    }
    let mut boundary: Vec<usize> = boundary_pos.iter().map(|&p| labelling.vertex_at(p)).collect();
    boundary.sort_unstable();

    // exceptional set: spare vertices with neighbourhoods, plus the margins
    let mut x_set = VertexSet::empty(n);
    for p in 0..n {
        if pos_col[p] == 0 {
            let v = labelling.vertex_at(p);
            x_set.insert(v);
            x_set.union_row(h.row(v));
        }
    }
    for &v in &boundary {
        x_set.insert(v);
    }

    let cells = k * r;
    let mut class_sets = vec![VertexSet::empty(n); cells];
    for (v, &(i, j)) in f.iter().enumerate() {
        class_sets[(i - 1) * r + (j - 1)].insert(v);
    }
    let class_sizes =
        SizeGrid::from_sizes(k, r, class_sets.iter().map(|s| s.len()).collect())?;

    // audit
    let xi_n = params.xi * n as f64;
    let mut violations: Vec<String> = Vec::new();
    let mut h1_class_max = 0usize;
    let mut h1_nbhd_max = 0usize;
    for (c, set) in class_sets.iter().enumerate() {
        let mut inter = x_set.clone();
        inter.intersect(set);
        let a = inter.len();
        h1_class_max = h1_class_max.max(a);
        if a as f64 > xi_n + 1e-9 {
            violations.push(format!(
                "H1: |X ∩ W_({},{})| = {} exceeds {:.3}",
                c / r + 1,
                c % r + 1,
                a,
                xi_n
            ));
        }
        let mut nbhd = VertexSet::empty(n);
        for v in inter.iter() {
            nbhd.union_row(h.row(v));
        }
        for (cp, setp) in class_sets.iter().enumerate() {
            let b = nbhd.count_intersection_row(setp.words());
            h1_nbhd_max = h1_nbhd_max.max(b);
            if b as f64 > xi_n + 1e-9 {
                violations.push(format!(
                    "H1: |N(X ∩ W_({},{})) ∩ W_({},{})| = {} exceeds {:.3}",
                    c / r + 1,
                    c % r + 1,
                    cp / r + 1,
                    cp % r + 1,
                    b,
                    xi_n
                ));
            }
        }
    }
    let mut h2_max_dev = 0usize;
    for i in 1..=k {
        for j in 1..=r {
            let have = class_sizes.get(i - 1, j - 1);
            let want = m.get(i - 1, j - 1);
            let dev = have.abs_diff(want);
            h2_max_dev = h2_max_dev.max(dev);
            if dev as f64 > xi_n + 1e-9 {
                violations.push(format!(
                    "H2: |W_({},{})| = {} is off target {} by {} > {:.3}",
                    i, j, have, want, dev, xi_n
                ));
            }
        }
    }
    let mut h3_violations = 0usize;
    let mut h4_violations = 0usize;
    for (u, v) in h.edges() {
        let a = r_grid.index(f[u].0, f[u].1);
        let b = r_grid.index(f[v].0, f[v].1);
        if !r_grid.graph().has_edge(a, b) {
            h3_violations += 1;
            if h3_violations <= 3 {
                violations.push(format!(
                    "H3: edge ({},{}) maps to ({:?},{:?}) outside the target",
                    u, v, f[u], f[v]
                ));
            }
        }
        if !(x_set.contains(u) && x_set.contains(v))
            && !(f[u].0 == f[v].0 && f[u].1 != f[v].1)
        {
            h4_violations += 1;
            if h4_violations <= 3 {
                violations.push(format!(
                    "H4: edge ({},{}) outside X maps to ({:?},{:?})",
                    u, v, f[u], f[v]
                ));
            }
        }
    }
    if h3_violations > 3 || h4_violations > 3 {
        violations.push(format!(
            "... {} H3 and {} H4 violations in total",
            h3_violations, h4_violations
        ));
    }
    if !violations.is_empty() {
        return Err(Error::stage(format!(
            "partition audit failed: {}",
            violations.join("; ")
        )));
    }

    let mut x: Vec<usize> = x_set.iter().collect();
    x.sort_unstable();
    Ok(HomomorphismMap {
        n,
        k,
        r,
        mode: params.mode,
        w,
        balanced,
        cut_blocks,
        cut_positions,
        covers,
        f,
        x,
        boundary,
        class_sizes,
        audit: PartitionAudit {
            xi_n,
            h1_class_max,
            h1_nbhd_max,
            h2_max_dev,
            h3_violations,
            h4_violations,
        },
    })
}

/// Collapses the path-augmented grid onto a path power: cell (i, j) goes
/// to y = r l + j for the unique l >= 0 and x in [r] with i = rl + x - (r - j),
/// so the image advances by one full step every r columns and every path
/// vertex y pulls at most r cells, all with the same row index j.
pub fn f_star(i: usize, j: usize, r: usize) -> usize {
    debug_assert!(j >= 1 && j <= r && i >= 1);
    let l = (i + r - j - 1) / r;
    r * l + j
}

/// Wraps path vertices onto a cycle of length m: y goes to (y mod m) + 1.
pub fn f_double_star(y: usize, m: usize) -> usize {
    (y % m) + 1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CyclePowerParams {
    /// Cycle length; needs m >= 2r.
    pub m: usize,
    /// Class-size slack: every class stays below (1 + xi) n / m.
    pub xi: f64,
    /// Grid columns for the inner partition. Default: smallest k' of the
    /// right residue with k' >= 3 (r - 1) / xi.
    pub k_prime: Option<usize>,
    /// Bandwidth fraction for the inner partition. Default: the labelling
    /// bandwidth over n.
    pub beta: Option<f64>,
    /// Audit slack for the inner partition. Default: xi / 3.
    pub xi_partition: Option<f64>,
}

/// Homomorphism from a banded guest onto the r-th power of a cycle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycleHomomorphism {
    pub m: usize,
    pub r: usize,
    pub k_prime: usize,
    /// Image cycle vertex per guest vertex, 1-based.
    pub f: Vec<usize>,
    pub class_sizes: Vec<usize>,
    /// The verified ceiling (1 + xi) n / m.
    pub class_bound: f64,
    pub inner: HomomorphismMap,
}

/// Maps a banded guest onto C_m^r by partitioning it against the
/// path-augmented grid with k' columns and collapsing columns onto the
/// cycle. The composite is checked edge by edge and every class size is
/// checked against (1 + xi) n / m; either failure is a hard error.
///
/// Needs a proper colouring with colours 0..=r; when none is supplied a
/// greedy colouring along the labelling is used, with its rarest class
/// demoted to the spare colour if it needs r + 1 colours.
pub fn homomorphism_to_cycle_power(
    h: &Graph,
    labelling: &Labelling,
    r: usize,
    params: &CyclePowerParams,
    sigma: Option<&Colouring>,
) -> Result<CycleHomomorphism> {
    let n = h.n();
    let m = params.m;
    if n == 0 || r < 1 {
        return Err(Error::pre("need a nonempty guest and r >= 1"));
    }
    if m < 2 * r {
        return Err(Error::pre(format!("cycle power needs m >= 2r, got m = {}, r = {}", m, r)));
    }
    if !(params.xi > 0.0) {
        return Err(Error::pre("xi must be positive"));
    }
    let k_prime = match params.k_prime {
        Some(kp) => kp,
        None => {
            let floor = ((3.0 * (r as f64 - 1.0) / params.xi).ceil() as usize).max(2);
            let mut kp = floor;
            while (kp + r - 1) % m != 0 {
                kp += 1;
            }
            kp
        }
    };
    if k_prime < 2 {
        return Err(Error::pre("need at least two grid columns"));
    }
    if (k_prime + r - 1) % m != 0 {
        return Err(Error::pre(format!(
            "k' + r - 1 = {} must be a multiple of m = {}",
            k_prime + r - 1,
            m
        )));
    }
    let bw = bandwidth_of_labelling(h, labelling);
    let beta = params.beta.unwrap_or(bw.max(1) as f64 / n as f64);
    let own_sigma;
    let sigma = match sigma {
        Some(s) => s,
        None => {
            own_sigma = spare_colouring(h, labelling, r)?;
            &own_sigma
        }
    };
    if sigma.r() as usize != r {
        return Err(Error::pre("colouring palette does not match r"));
    }
    let r_grid = build_rkr_path_augmented(k_prime, r)?;
    let m_grid = SizeGrid::equitable(n, k_prime, r)?;
    let inner_params = PartitionHParams {
        beta,
        xi: params.xi_partition.unwrap_or(params.xi / 3.0),
        mode: CutMode::Fine,
        enforce_constant_chain: false,
    };
    let inner = partition_h(h, labelling, sigma, &r_grid, &m_grid, &inner_params)?;

    let f: Vec<usize> =
        inner.f.iter().map(|&(i, j)| f_double_star(f_star(i, j, r), m)).collect();
    let mut class_sizes = vec![0usize; m];
    for &c in &f {
        class_sizes[c - 1] += 1;
    }
    let class_bound = (1.0 + params.xi) * n as f64 / m as f64;
    for (c, &size) in class_sizes.iter().enumerate() {
        if size as f64 > class_bound + 1e-9 {
            return Err(Error::stage(format!(
                "class {} holds {} vertices, above the ceiling {:.3}",
                c + 1,
                size,
                class_bound
            )));
        }
    }
    let c_graph = cycle_power(m, r);
    let mut bad = 0usize;
    for (u, v) in h.edges() {
        if f[u] == f[v] || !c_graph.has_edge(f[u] - 1, f[v] - 1) {
            bad += 1;
        }
    }
    if bad > 0 {
        return Err(Error::stage(format!(
            "{} edges do not land on cycle power edges",
            bad
        )));
    }
    Ok(CycleHomomorphism { m, r, k_prime, f, class_sizes, class_bound, inner })
}

/// Greedy colouring along the labelling, demoted to a spare colouring:
/// r colours pass through, r + 1 colours demote the rarest class to 0,
/// more is an error.
pub fn spare_colouring(h: &Graph, labelling: &Labelling, r: usize) -> Result<Colouring> {
    let (colours, chi) = greedy_colouring(h, labelling.order())?;
    if (chi as usize) <= r {
        return Colouring::new(colours, r as u32);
    }
    if chi as usize != r + 1 {
        return Err(Error::pre(format!(
            "greedy colouring needs {} colours, more than r + 1 = {}",
            chi,
            r + 1
        )));
    }
    let mut counts = vec![0usize; chi as usize + 1];
    for &c in &colours {
        counts[c as usize] += 1;
    }
    let rare = (1..=chi).min_by_key(|&c| (counts[c as usize], c)).unwrap();
    let remapped = colours
        .into_iter()
        .map(|c| {
            if c == rare {
                0
            } else if c > rare {
                c - 1
            } else {
                c
            }
        })
        .collect();
    Colouring::new(remapped, r as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path_power;

    fn alternating(n: usize, r: u32) -> Vec<u32> {
        (0..n).map(|p| (p % r as usize) as u32 + 1).collect()
    }

    #[test]
    fn cuts_land_on_block_three_for_even_halves() {
        // n = 48, two columns of 24, blocks of width 8: the first cut sits
        // exactly on block 3 and the final cut is the block count.
        let blocks = BlockStructure::for_switching_with(48, 2, 1.0 / 48.0, 1).unwrap();
        assert_eq!(blocks.len, 8);
        assert_eq!(blocks.count, 6);
        let pos_col = alternating(48, 2);
        let cuts = choose_cuts(&blocks, &pos_col, &[24, 24]).unwrap();
        assert_eq!(cuts, vec![0, 3, 6]);
    }

    #[test]
    fn single_column_cuts_are_trivial() {
        let blocks = BlockStructure::for_switching_with(48, 2, 1.0 / 48.0, 1).unwrap();
        let pos_col = alternating(48, 2);
        let cuts = choose_cuts(&blocks, &pos_col, &[48]).unwrap();
        assert_eq!(cuts, vec![0, 6]);
    }

    #[test]
    fn cuts_fail_when_every_block_has_spares() {
        let blocks = BlockStructure::for_switching_with(48, 2, 1.0 / 48.0, 1).unwrap();
        let mut pos_col = alternating(48, 2);
        for t in 0..blocks.count {
            let p = blocks.range(t).start;
            pos_col[p] = 0;
        }
        let err = choose_cuts(&blocks, &pos_col, &[24, 24]).unwrap_err();
        assert!(err.to_string().contains("zero-free"), "{}", err);
    }

    #[test]
    fn cuts_step_down_past_a_spare_block() {
        let blocks = BlockStructure::for_switching_with(48, 2, 1.0 / 48.0, 1).unwrap();
        let mut pos_col = alternating(48, 2);
        // a spare in block 3 (0-based) blocks the pair (3,4); (2,3) works
        pos_col[blocks.range(3).start] = 0;
        let cuts = choose_cuts(&blocks, &pos_col, &[24, 24]).unwrap();
        assert_eq!(cuts, vec![0, 2, 6]);
    }

    #[test]
    fn fine_cuts_dodge_spares() {
        let mut pos_col = alternating(60, 2);
        pos_col[11] = 0;
        pos_col[23] = 0;
        let cuts = choose_cuts_fine(&pos_col, &[12, 12, 12, 12, 12], 2, 24).unwrap();
        assert_eq!(cuts, vec![0, 9, 21, 36, 48, 60]);
    }

    #[test]
    fn fine_cuts_fail_on_dense_spares() {
        let pos_col: Vec<u32> = (0..40).map(|p| if p % 2 == 0 { 0 } else { 1 }).collect();
        assert!(choose_cuts_fine(&pos_col, &[20, 20], 1, 8).is_err());
    }

    fn grid_2x2() -> GridGraph {
        build_rkr_path_augmented(2, 2).unwrap()
    }

    #[test]
    fn path_split_into_two_clean_columns() {
        let h = path_power(48, 1);
        let labelling = Labelling::identity(48);
        let sigma = Colouring::new(alternating(48, 2), 2).unwrap();
        let m = SizeGrid::equitable(48, 2, 2).unwrap();
        let params = PartitionHParams {
            beta: 1.0 / 48.0,
            xi: 0.5,
            mode: CutMode::Block,
            enforce_constant_chain: false,
        };
        let map = partition_h(&h, &labelling, &sigma, &grid_2x2(), &m, &params).unwrap();
        assert_eq!(map.cut_blocks, vec![0, 3, 6]);
        assert_eq!(map.cut_positions, vec![0, 24, 48]);
        assert_eq!(map.w, 1);
        assert_eq!(map.boundary, vec![23, 24]);
        assert_eq!(map.x, vec![23, 24]);
        assert_eq!(map.class_sizes.sizes, vec![12, 12, 12, 12]);
        assert_eq!(map.audit.h2_max_dev, 0);
        for v in 0..48 {
            let col = if v < 24 { 1 } else { 2 };
            assert_eq!(map.f[v], (col, (v % 2) + 1));
        }
    }

    #[test]
    fn spare_vertices_park_on_the_cover() {
        let h = path_power(48, 1);
        let labelling = Labelling::identity(48);
        let mut cols = alternating(48, 2);
        cols[10] = 0;
        let sigma = Colouring::new(cols, 2).unwrap();
        let m = SizeGrid::equitable(48, 2, 2).unwrap();
        let params = PartitionHParams {
            beta: 1.0 / 48.0,
            xi: 0.5,
            mode: CutMode::Block,
            enforce_constant_chain: false,
        };
        let map = partition_h(&h, &labelling, &sigma, &grid_2x2(), &m, &params).unwrap();
        assert_eq!(map.f[10], map.covers[0]);
        for v in [9, 10, 11, 23, 24] {
            assert!(map.x.contains(&v), "vertex {} missing from X", v);
        }
        assert_eq!(map.x.len(), 5);
        assert!(!map.balanced);
    }

    #[test]
    fn audit_rejects_a_lopsided_colouring() {
        // all of colour 1: properness holds on the edgeless graph but the
        // class sizes are twice their targets
        let h = Graph::new(48);
        let labelling = Labelling::identity(48);
        let sigma = Colouring::new(vec![1; 48], 2).unwrap();
        let m = SizeGrid::equitable(48, 2, 2).unwrap();
        let params = PartitionHParams {
            beta: 1.0 / 48.0,
            xi: 0.1,
            mode: CutMode::Block,
            enforce_constant_chain: false,
        };
        let err = partition_h(&h, &labelling, &sigma, &grid_2x2(), &m, &params).unwrap_err();
        assert!(err.to_string().contains("H2"), "{}", err);
    }

    #[test]
    fn square_of_a_long_path_passes_all_clauses() {
        // worst-case parameter chain: beta = xi^2 / (1200 r) with xi = 0.1;
        // the window is the labelling bandwidth 2 and the balancing sweep
        // runs as a no-op on the cyclic colouring
        let h = path_power(1200, 2);
        let labelling = Labelling::identity(1200);
        let sigma = Colouring::new(alternating(1200, 3), 3).unwrap();
        let r_grid = build_rkr_path_augmented(2, 3).unwrap();
        let m = SizeGrid::equitable(1200, 2, 3).unwrap();
        let params = PartitionHParams {
            beta: 0.1 * 0.1 / 3600.0,
            xi: 0.1,
            mode: CutMode::Block,
            enforce_constant_chain: true,
        };
        let map = partition_h(&h, &labelling, &sigma, &r_grid, &m, &params).unwrap();
        assert!(map.balanced);
        assert_eq!(map.w, 2);
        assert_eq!(map.cut_positions, vec![0, 600, 1200]);
        assert_eq!(map.x.len(), 4);
        assert_eq!(map.audit.h2_max_dev, 0);
        assert_eq!(map.audit.h3_violations, 0);
        assert_eq!(map.audit.h4_violations, 0);
    }

    #[test]
    fn path_collapse_frozen_values() {
        // r = 3 grid: first column cells stay below r, interior columns
        // advance by one every r columns
        assert_eq!(f_star(1, 1, 3), 1);
        assert_eq!(f_star(1, 2, 3), 2);
        assert_eq!(f_star(2, 2, 3), 2);
        assert_eq!(f_star(2, 1, 3), 4);
        assert_eq!(f_star(4, 2, 3), 5);
        assert_eq!(f_star(5, 2, 3), 5);
        assert_eq!(f_star(7, 3, 3), 9);
    }

    #[test]
    fn path_collapse_preimages_are_row_pure_and_short() {
        for r in 1..=5usize {
            for k in 2..=20usize {
                let mut pre: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k + r];
                for i in 1..=k {
                    for j in 1..=r {
                        let y = f_star(i, j, r);
                        assert!(y >= 1 && y <= k + r - 1, "value {} out of range", y);
                        pre[y].push((i, j));
                    }
                }
                let mut small = Vec::new();
                for y in 1..=(k + r - 1) {
                    let cells = &pre[y];
                    assert!(!cells.is_empty());
                    assert!(cells.len() <= r);
                    assert!(cells.iter().all(|&(_, j)| j == cells[0].1), "mixed rows at {}", y);
                    if cells.len() < r {
                        small.push(y);
                    }
                }
                // interior values [r, k] pull a full r cells; the ends fall
                // short, giving 2(r-1) exceptions once k >= r
                let expect: Vec<usize> =
                    (1..=(k + r - 1)).filter(|&y| y < r || y > k).collect();
                assert_eq!(small, expect, "k = {}, r = {}", k, r);
            }
        }
    }

    #[test]
    fn path_collapse_respects_grid_edges() {
        for (k, r) in [(5usize, 2usize), (8, 3), (7, 4)] {
            let g = build_rkr_path_augmented(k, r).unwrap();
            for ((i, j), (ip, jp)) in g.edges_cells() {
                let y = f_star(i, j, r);
                let yp = f_star(ip, jp, r);
                assert!(y != yp, "edge ({},{})-({},{}) collapses", i, j, ip, jp);
                assert!(y.abs_diff(yp) <= r);
            }
        }
    }

    #[test]
    fn cycle_wrap_frozen_values() {
        assert_eq!(f_double_star(4, 4), 1);
        assert_eq!(f_double_star(1, 4), 2);
        assert_eq!(f_double_star(7, 4), 4);
    }

    #[test]
    fn collapse_classes_stay_near_even() {
        // with k' + r - 1 divisible by m the composed collapse sends
        // k'r/m cells to each cycle vertex, up to r on either side
        for (k, r, m) in [(17usize, 2usize, 6usize), (22, 3, 12), (11, 2, 6)] {
            assert_eq!((k + r - 1) % m, 0);
            let mut cells = vec![0usize; m];
            for i in 1..=k {
                for j in 1..=r {
                    cells[f_double_star(f_star(i, j, r), m) - 1] += 1;
                }
            }
            let target = (k * r) as f64 / m as f64;
            for &c in &cells {
                assert!(
                    (c as f64 - target).abs() <= r as f64 + 1e-9,
                    "cells {:?} vs target {}",
                    cells,
                    target
                );
            }
        }
    }

    #[test]
    fn long_cycle_maps_onto_small_cycle_power() {
        let h = cycle_power(900, 1);
        let (labelling, bw) = crate::structure::heuristic_bandwidth_labelling(&h, 7);
        assert_eq!(bw, 2);
        let params = CyclePowerParams {
            m: 6,
            xi: 0.2,
            k_prime: None,
            beta: None,
            xi_partition: None,
        };
        let hom = homomorphism_to_cycle_power(&h, &labelling, 2, &params, None).unwrap();
        assert_eq!(hom.k_prime, 17);
        assert_eq!(hom.class_sizes.iter().sum::<usize>(), 900);
        let max = *hom.class_sizes.iter().max().unwrap();
        assert!((max as f64) <= hom.class_bound);
    }

    #[test]
    fn squared_path_maps_onto_cycle_power() {
        let h = path_power(2400, 2);
        let labelling = Labelling::identity(2400);
        let params = CyclePowerParams {
            m: 12,
            xi: 0.15,
            k_prime: Some(22),
            beta: None,
            xi_partition: None,
        };
        let hom = homomorphism_to_cycle_power(&h, &labelling, 3, &params, None).unwrap();
        assert_eq!(hom.class_sizes.iter().sum::<usize>(), 2400);
    }

    #[test]
    fn cycle_power_rejects_short_cycles() {
        let h = path_power(60, 1);
        let labelling = Labelling::identity(60);
        let params = CyclePowerParams {
            m: 3,
            xi: 0.2,
            k_prime: None,
            beta: None,
            xi_partition: None,
        };
        let err = homomorphism_to_cycle_power(&h, &labelling, 2, &params, None).unwrap_err();
        assert!(err.to_string().contains("m >= 2r"), "{}", err);
    }

    #[test]
    fn tight_class_ceiling_is_a_hard_error() {
        // k' = 5 funnels two grid cells into most cycle vertices, so a
        // 1 percent ceiling cannot hold
        let h = path_power(60, 1);
        let labelling = Labelling::identity(60);
        let params = CyclePowerParams {
            m: 6,
            xi: 0.01,
            k_prime: Some(5),
            beta: None,
            xi_partition: Some(0.3),
        };
        let err = homomorphism_to_cycle_power(&h, &labelling, 2, &params, None).unwrap_err();
        assert!(err.to_string().contains("ceiling"), "{}", err);
    }

    #[test]
    fn spare_colouring_demotes_the_rarest_class() {
        // the square of a path greedily needs three colours; with r = 2
        // the third class becomes the spare
        let h = path_power(30, 2);
        let labelling = Labelling::identity(30);
        let sigma = spare_colouring(&h, &labelling, 2).unwrap();
        assert!(sigma.is_proper_on(&h));
        let zeros = (0..30).filter(|&v| sigma.get(v) == 0).count();
        assert_eq!(zeros, 10);
        let sigma2 = spare_colouring(&path_power(30, 1), &labelling, 2).unwrap();
        assert_eq!((0..30).filter(|&v| sigma2.get(v) == 0).count(), 0);
    }
}
