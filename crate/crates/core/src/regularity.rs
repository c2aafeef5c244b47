//! Density and regularity certification, and desk-scale partitioning of a
//! dense host into clusters that match a grid target.
//!
//! Exact regularity checking is exponential, so verdicts carry their mode:
//! `exact` enumerates one side and pairs each subset with its extremal
//! partner (ground truth, capped size), `codegree` certifies through the
//! codegree concentration criterion (sufficient-condition heuristic), and
//! `sampled` draws random qualifying subset pairs. The host partitioner
//! shuffles, repairs min-degree by local swaps, and certifies; the verifier
//! carries the contract, not the constructor.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backbone::GridGraph;
use crate::error::{Error, Result};
use crate::graph::{Graph, SizeGrid, VertexSet};

/// How a regularity clause is checked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegularMode {
    /// Enumerate every qualifying subset pair. Ground truth; both sides
    /// must be at most `cap` vertices.
    Exact { cap: usize },
    /// Codegree concentration: pass iff at least 1 - eps/2 of the vertex
    /// pairs on the A side have codegree within eps |B| of d^2 |B|.
    Codegree,
    /// Random qualifying subset pairs with a seeded generator.
    Sampled { samples: usize, seed: u64 },
}

impl RegularMode {
    pub fn exact_default() -> Self {
        RegularMode::Exact { cap: 14 }
    }

    fn label(&self) -> &'static str {
        match self {
            RegularMode::Exact { .. } => "exact",
            RegularMode::Codegree => "codegree",
            RegularMode::Sampled { .. } => "sampled",
        }
    }
}

/// A subset pair witnessing an irregularity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityWitness {
    pub a_sub: Vec<usize>,
    pub b_sub: Vec<usize>,
    pub density: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityVerdict {
    /// Cluster ids when checked inside a partition.
    pub pair: Option<(usize, usize)>,
    pub density: f64,
    pub mode: String,
    pub regular: bool,
    /// Present for super-regularity checks: both min-degree clauses hold.
    pub min_degree_ok: Option<bool>,
    /// Fraction of passed samples in sampled mode.
    pub confidence: Option<f64>,
    pub witness: Option<RegularityWitness>,
}

fn set_of(n: usize, members: &[usize]) -> VertexSet {
    let mut s = VertexSet::empty(n);
    for &v in members {
        s.insert(v);
    }
    s
}

fn edges_between(g: &Graph, a: &[usize], b_set: &VertexSet) -> usize {
    a.iter().map(|&v| b_set.count_intersection_row(g.row(v))).sum()
}

/// Edge density e(A,B) / (|A| |B|) between disjoint nonempty sets.
pub fn density(g: &Graph, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::pre("density needs nonempty sets"));
    }
    let a_set = set_of(g.n(), a);
    let b_set = set_of(g.n(), b);
    if a_set.len() != a.len() || b_set.len() != b.len() {
        return Err(Error::pre("sets contain repeated vertices"));
    }
    let mut inter = a_set.clone();
    inter.intersect(&b_set);
    if !inter.is_empty() {
        return Err(Error::pre("density needs disjoint sets"));
    }
    Ok(edges_between(g, a, &b_set) as f64 / (a.len() * b.len()) as f64)
}

/// Smallest qualifying subset size: |A'| >= eps |A| as an integer bound.
fn min_sub(eps: f64, len: usize) -> usize {
    ((eps * len as f64 - 1e-9).ceil() as usize).clamp(1, len)
}

/// Max (and min) density over subsets B' of size >= s_min against a fixed
/// A': both extrema are attained on prefixes of B sorted by degree into A'.
fn extremal_prefix(
    degs: &mut Vec<(usize, usize)>,
    a_len: usize,
    s_min: usize,
    largest: bool,
) -> (f64, usize) {
    if largest {
        degs.sort_unstable_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    } else {
        degs.sort_unstable_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
    }
    let mut sum = 0usize;
    let mut best = if largest { f64::MIN } else { f64::MAX };
    let mut best_len = s_min;
    for (idx, &(d, _)) in degs.iter().enumerate() {
        sum += d;
        let s = idx + 1;
        if s < s_min {
            continue;
        }
        let val = sum as f64 / (s * a_len) as f64;
        if (largest && val > best) || (!largest && val < best) {
            best = val;
            best_len = s;
        }
    }
    (best, best_len)
}

fn check_exact(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    eps: f64,
    cap: usize,
    d: f64,
) -> (bool, Option<RegularityWitness>) {
    let s_min_a = min_sub(eps, a.len());
    let s_min_b = min_sub(eps, b.len());
    debug_assert!(a.len() <= cap && b.len() <= cap);
    let _ = cap;
    for mask in 1u32..(1 << a.len()) {
        let size = mask.count_ones() as usize;
        if size < s_min_a {
            continue;
        }
        let a_sub: Vec<usize> =
            (0..a.len()).filter(|&i| mask >> i & 1 == 1).map(|i| a[i]).collect();
        let a_set = set_of(g.n(), &a_sub);
        let mut degs: Vec<(usize, usize)> = b
            .iter()
            .map(|&v| (a_set.count_intersection_row(g.row(v)), v))
            .collect();
        for largest in [true, false] {
            let (val, len) = extremal_prefix(&mut degs, a_sub.len(), s_min_b, largest);
            if (val - d).abs() > eps + 1e-9 {
                let b_sub: Vec<usize> = degs[..len].iter().map(|&(_, v)| v).collect();
                return (
                    false,
                    Some(RegularityWitness { a_sub, b_sub, density: val }),
                );
            }
        }
    }
    (true, None)
}

fn check_codegree(g: &Graph, a: &[usize], b: &[usize], eps: f64, d: f64) -> bool {
    if a.len() < 2 {
        return true;
    }
    let b_set = set_of(g.n(), b);
    let rows: Vec<VertexSet> = a
        .iter()
        .map(|&v| {
            let mut s = b_set.clone();
            s.intersect_row(g.row(v));
            s
        })
        .collect();
    let target = d * d * b.len() as f64;
    let tol = eps * b.len() as f64;
    let mut bad = 0usize;
    let mut total = 0usize;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let co = rows[i].count_intersection_row(rows[j].words());
            total += 1;
            if (co as f64 - target).abs() > tol {
                bad += 1;
            }
        }
    }
    (bad as f64) <= (eps / 2.0) * total as f64 + 1e-9
}

fn check_sampled(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    eps: f64,
    samples: usize,
    seed: u64,
    d: f64,
) -> (bool, f64, Option<RegularityWitness>) {
    let s_min_a = min_sub(eps, a.len());
    let s_min_b = min_sub(eps, b.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a_pool: Vec<usize> = a.to_vec();
    let mut b_pool: Vec<usize> = b.to_vec();
    let mut passed = 0usize;
    let mut witness = None;
    for _ in 0..samples {
        a_pool.shuffle(&mut rng);
        b_pool.shuffle(&mut rng);
        let sa = rng.random_range(s_min_a..=a.len());
        let sb = rng.random_range(s_min_b..=b.len());
        let a_sub = &a_pool[..sa];
        let b_sub = &b_pool[..sb];
        let b_set = set_of(g.n(), b_sub);
        let val = edges_between(g, a_sub, &b_set) as f64 / (sa * sb) as f64;
        if (val - d).abs() > eps + 1e-9 {
            if witness.is_none() {
                witness = Some(RegularityWitness {
                    a_sub: a_sub.to_vec(),
                    b_sub: b_sub.to_vec(),
                    density: val,
                });
            }
        } else {
            passed += 1;
        }
    }
    (witness.is_none(), passed as f64 / samples.max(1) as f64, witness)
}

/// Checks |d(A',B') - d(A,B)| <= eps over qualifying subset pairs, by the
/// chosen mode. Exact mode pairs every A-side subset with its extremal
/// B-side partner, which is equivalent to enumerating both sides.
pub fn check_regular_pair(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    eps: f64,
    mode: RegularMode,
) -> Result<RegularityVerdict> {
    if !(eps > 0.0) {
        return Err(Error::pre("eps must be positive"));
    }
    let d = density(g, a, b)?;
    let (regular, confidence, witness) = match mode {
        RegularMode::Exact { cap } => {
            if a.len() > cap || b.len() > cap {
                return Err(Error::pre(format!(
                    "exact check capped at {} vertices per side, got {} and {}",
                    cap,
                    a.len(),
                    b.len()
                )));
            }
            let (ok, w) = check_exact(g, a, b, eps, cap, d);
            (ok, None, w)
        }
        RegularMode::Codegree => (check_codegree(g, a, b, eps, d), None, None),
        RegularMode::Sampled { samples, seed } => {
            let (ok, conf, w) = check_sampled(g, a, b, eps, samples, seed, d);
            (ok, Some(conf), w)
        }
    };
    Ok(RegularityVerdict {
        pair: None,
        density: d,
        mode: mode.label().to_string(),
        regular,
        min_degree_ok: None,
        confidence,
        witness,
    })
}

/// Super-regularity: the regularity clause per mode, plus exact min-degree
/// clauses deg(v, B) >= delta |B| for all v in A and symmetrically.
pub fn check_super_regular(
    g: &Graph,
    a: &[usize],
    b: &[usize],
    eps: f64,
    delta: f64,
    mode: RegularMode,
) -> Result<RegularityVerdict> {
    let mut verdict = check_regular_pair(g, a, b, eps, mode)?;
    let a_set = set_of(g.n(), a);
    let b_set = set_of(g.n(), b);
    let need_b = delta * b.len() as f64 - 1e-9;
    let need_a = delta * a.len() as f64 - 1e-9;
    let deg_ok = a
        .iter()
        .all(|&v| b_set.count_intersection_row(g.row(v)) as f64 >= need_b)
        && b
            .iter()
            .all(|&v| a_set.count_intersection_row(g.row(v)) as f64 >= need_a);
    verdict.min_degree_ok = Some(deg_ok);
    verdict.regular = verdict.regular && deg_ok;
    Ok(verdict)
}

/// One checked pair inside a partition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairVerdict {
    /// 1-based cells of the two clusters.
    pub cells: ((usize, usize), (usize, usize)),
    /// Whether the pair lies on the super-regular spine.
    pub spine: bool,
    pub verdict: RegularityVerdict,
}

/// Host clusters matching a grid target, with the certification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterPartition {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub eps: f64,
    pub delta: f64,
    /// Vertex lists, cell-major: cluster of cell (i, j) at (i-1) r + (j-1).
    pub clusters: Vec<Vec<usize>>,
    /// Swaps applied by the min-degree repair, as vertex pairs.
    pub swaps: Vec<(usize, usize)>,
    pub seed: u64,
    /// Reshuffles taken before certification passed.
    pub retries: u32,
    pub verdicts: Vec<PairVerdict>,
}

fn min_degree_deficiencies(
    g: &Graph,
    clusters: &[Vec<usize>],
    sets: &[VertexSet],
    spine: &Graph,
    delta: f64,
) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (c1, c2) in spine.edges() {
        for (from, to) in [(c1, c2), (c2, c1)] {
            let need = delta * clusters[to].len() as f64 - 1e-9;
            for &v in &clusters[from] {
                if (sets[to].count_intersection_row(g.row(v)) as f64) < need {
                    out.push((v, from, to));
                }
            }
        }
    }
    out.sort_unstable_by_key(|&(v, from, _)| (from, v));
    out.dedup_by_key(|e| (e.0, e.1));
    out
}

/// Splits the host into clusters of exactly the target sizes, cell-major,
/// repairing spine min-degree by swaps and certifying every target edge:
/// spine pairs super-regular, other target pairs regular with density at
/// least delta. Reshuffles with successor seeds (up to two retries) when
/// certification fails; min-degree deficiencies surviving the swap budget
/// are an error.
pub fn build_host_partition(
    g: &Graph,
    targets: &SizeGrid,
    r_grid: &GridGraph,
    k_grid: &GridGraph,
    eps: f64,
    delta: f64,
    mode: RegularMode,
    seed: u64,
    swap_budget: usize,
) -> Result<ClusterPartition> {
    let n = g.n();
    let k = targets.k;
    let r = targets.r;
    if r_grid.k != k || r_grid.r != r || k_grid.k != k || k_grid.r != r {
        return Err(Error::pre("target grids disagree on k or r"));
    }
    if targets.total() != n {
        return Err(Error::pre(format!(
            "cluster targets sum to {}, host has {} vertices",
            targets.total(),
            n
        )));
    }
    if !k_grid.graph().is_subgraph_of(r_grid.graph()) {
        return Err(Error::pre("spine must be a subgraph of the target"));
    }
    let cells = k * r;
    let mut last_err: Option<Error> = None;
    for attempt in 0u32..3 {
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        order.shuffle(&mut rng);
        let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(cells);
        let mut at = 0usize;
        for c in 0..cells {
            let size = targets.sizes[c];
            let mut members = order[at..at + size].to_vec();
            members.sort_unstable();
            clusters.push(members);
            at += size;
        }
        let mut sets: Vec<VertexSet> =
            clusters.iter().map(|c| set_of(n, c)).collect();
        let mut swaps: Vec<(usize, usize)> = Vec::new();

        // spine min-degree repair by pairwise swaps
        loop {
            let defs =
                min_degree_deficiencies(g, &clusters, &sets, k_grid.graph(), delta);
            if defs.is_empty() {
                break;
            }
            if swaps.len() >= swap_budget {
                last_err = Some(Error::stage(format!(
                    "swap budget {} exhausted with {} min-degree deficiencies, first: vertex {} in cell {:?} toward {:?}",
                    swap_budget,
                    defs.len(),
                    defs[0].0,
                    r_grid.cell(defs[0].1),
                    r_grid.cell(defs[0].2),
                )));
                break;
            }
            let (v, home, _) = defs[0];
            let fit = |vertex: usize, cell: usize, sets: &[VertexSet]| -> f64 {
                let mut worst = f64::MAX;
                for u in k_grid.graph().neighbors(cell) {
                    let need = delta * clusters[u].len() as f64;
                    let have = sets[u].count_intersection_row(g.row(vertex)) as f64;
                    worst = worst.min(have - need);
                }
                worst
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for dest in 0..cells {
                if dest == home {
                    continue;
                }
                let fit_v = fit(v, dest, &sets);
                for &u in &clusters[dest] {
                    let score = fit_v.min(fit(u, home, &sets));
                    if best.map_or(true, |(b, _, _)| score > b + 1e-12) {
                        best = Some((score, dest, u));
                    }
                }
            }
            let Some((_, dest, u)) = best else {
                last_err = Some(Error::stage("no swap candidate for a deficient vertex"));
                break;
            };
            let vi = clusters[home].iter().position(|&x| x == v).unwrap();
            let ui = clusters[dest].iter().position(|&x| x == u).unwrap();
            clusters[home][vi] = u;
            clusters[dest][ui] = v;
            clusters[home].sort_unstable();
            clusters[dest].sort_unstable();
            sets[home] = set_of(n, &clusters[home]);
            sets[dest] = set_of(n, &clusters[dest]);
            swaps.push((v, u));
        }
        if !min_degree_deficiencies(g, &clusters, &sets, k_grid.graph(), delta)
            .is_empty()
        {
            continue;
        }

        // certification over target edges
        let mut verdicts = Vec::new();
        let mut all_ok = true;
        for (c1, c2) in r_grid.graph().edges() {
            let spine = k_grid.graph().has_edge(c1, c2);
            let mut verdict = if spine {
                check_super_regular(g, &clusters[c1], &clusters[c2], eps, delta, mode)?
            } else {
                check_regular_pair(g, &clusters[c1], &clusters[c2], eps, mode)?
            };
            verdict.pair = Some((c1, c2));
            if verdict.density < delta - 1e-9 {
                verdict.regular = false;
            }
            all_ok &= verdict.regular;
            verdicts.push(PairVerdict {
                cells: (r_grid.cell(c1), r_grid.cell(c2)),
                spine,
                verdict,
            });
        }
        if all_ok {
            return Ok(ClusterPartition {
                n,
                k,
                r,
                eps,
                delta,
                clusters,
                swaps,
                seed: seed.wrapping_add(attempt as u64),
                retries: attempt,
                verdicts,
            });
        }
        let failing: Vec<String> = verdicts
            .iter()
            .filter(|p| !p.verdict.regular)
            .take(4)
            .map(|p| format!("{:?}-{:?}", p.cells.0, p.cells.1))
            .collect();
        last_err = Some(Error::stage(format!(
            "certification failed on pairs {}",
            failing.join(", ")
        )));
    }
    Err(last_err.unwrap_or_else(|| Error::stage("partition attempts exhausted")))
}

/// One cluster pair of a two-coloured complete host.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColouredPair {
    pub i: usize,
    pub j: usize,
    pub red_density: f64,
    pub majority_red: bool,
    /// Density exactly one half, broken toward red.
    pub tie: bool,
    pub regular: bool,
}

/// Equipartition of a red/blue-coloured complete graph with its coloured
/// reduced graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColouredPartition {
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub mode: String,
    pub clusters: Vec<Vec<usize>>,
    pub pairs: Vec<ColouredPair>,
    /// Reduced edges on [k] by majority colour; regular pairs only.
    pub red_reduced: Graph,
    pub blue_reduced: Graph,
    pub irregular: usize,
    /// Allowed irregular pairs: eps * C(k, 2).
    pub budget: f64,
    pub within_budget: bool,
    pub ties: usize,
}

/// Randomly equipartitions the vertex set of a red/blue-coloured complete
/// graph (red edges given, blue is the complement) into k near-equal
/// clusters with sizes ascending, then certifies every pair in red. A pair
/// regular in red is regular in blue at the complementary density, so the
/// reduced graph carries one verdict per pair and the majority colour.
pub fn coloured_regular_partition(
    red: &Graph,
    k: usize,
    eps: f64,
    mode: RegularMode,
    seed: u64,
) -> Result<ColouredPartition> {
    let n = red.n();
    if k < 1 || k > n {
        return Err(Error::pre("need 1 <= k <= n clusters"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / k;
    let extra = n % k;
    let mut clusters: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut at = 0usize;
    for c in 0..k {
        let size = if c < k - extra { base } else { base + 1 };
        let mut members = order[at..at + size].to_vec();
        members.sort_unstable();
        clusters.push(members);
        at += size;
    }
    let mut pairs = Vec::new();
    let mut red_reduced = Graph::new(k);
    let mut blue_reduced = Graph::new(k);
    let mut irregular = 0usize;
    let mut ties = 0usize;
    for i in 0..k {
        for j in i + 1..k {
            let verdict = check_regular_pair(red, &clusters[i], &clusters[j], eps, mode)?;
            let tie = (verdict.density - 0.5).abs() < 1e-12;
            let majority_red = verdict.density >= 0.5;
            if tie {
                ties += 1;
            }
            if !verdict.regular {
                irregular += 1;
            } else if majority_red {
                red_reduced.add_edge(i, j);
            } else {
                blue_reduced.add_edge(i, j);
            }
            pairs.push(ColouredPair {
                i,
                j,
                red_density: verdict.density,
                majority_red,
                tie,
                regular: verdict.regular,
            });
        }
    }
    let budget = eps * (k * (k - 1) / 2) as f64;
    Ok(ColouredPartition {
        n,
        k,
        eps,
        mode: mode.label().to_string(),
        clusters,
        pairs,
        red_reduced,
        blue_reduced,
        irregular,
        budget,
        within_budget: (irregular as f64) <= budget + 1e-9,
        ties,
    })
}

/// A verified monochromatic cycle power in a reduced graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonoCycle {
    pub red: bool,
    /// m distinct vertices; cyclically, vertices within distance r are
    /// adjacent in the carrying colour.
    pub vertices: Vec<usize>,
}

fn cycle_power_witness_ok(g: &Graph, vs: &[usize], r: usize) -> bool {
    let m = vs.len();
    let mut seen = std::collections::BTreeSet::new();
    for &v in vs {
        if !seen.insert(v) {
            return false;
        }
    }
    for p in 0..m {
        for d in 1..=r {
            let q = (p + d) % m;
            if q != p && !g.has_edge(vs[p], vs[q]) {
                return false;
            }
        }
    }
    true
}

fn dfs_cycle_power(
    g: &Graph,
    m: usize,
    r: usize,
    picked: &mut Vec<usize>,
    used: &mut Vec<bool>,
    budget: &mut usize,
) -> bool {
    let p = picked.len();
    if p == m {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    for v in 0..g.n() {
        if used[v] {
            continue;
        }
        // earlier partners within cyclic distance r of position p
        let ok = (0..p).all(|q| {
            let dist = (p - q).min(m - (p - q));
            dist > r || g.has_edge(picked[q], v)
        });
        if !ok {
            continue;
        }
        *budget -= 1;
        picked.push(v);
        used[v] = true;
        if dfs_cycle_power(g, m, r, picked, used, budget) {
            return true;
        }
        picked.pop();
        used[v] = false;
        if *budget == 0 {
            return false;
        }
    }
    false
}

/// Searches both colour classes of a reduced graph for the r-th power of
/// an m-cycle, red first. Backtracking with a node budget: `None` means
/// the search found nothing within budget, not that no copy exists. Any
/// returned witness is re-verified.
pub fn find_mono_cycle_power(
    red_reduced: &Graph,
    blue_reduced: &Graph,
    m: usize,
    r: usize,
    budget: usize,
) -> Result<Option<MonoCycle>> {
    if r < 1 || m < 2 * r + 1 {
        return Err(Error::pre(format!(
            "cycle power needs m >= 2r + 1, got m = {}, r = {}",
            m, r
        )));
    }
    if red_reduced.n() != blue_reduced.n() {
        return Err(Error::pre("colour classes disagree on the vertex count"));
    }
    if m > red_reduced.n() {
        return Ok(None);
    }
    for (is_red, g) in [(true, red_reduced), (false, blue_reduced)] {
        let mut picked = Vec::with_capacity(m);
        let mut used = vec![false; g.n()];
        let mut b = budget;
        if dfs_cycle_power(g, m, r, &mut picked, &mut used, &mut b) {
            if !cycle_power_witness_ok(g, &picked, r) {
                return Err(Error::invariant("cycle power witness failed verification"));
            }
            return Ok(Some(MonoCycle { red: is_red, vertices: picked }));
        }
    }
    Ok(None)
}

/// Clusters after a trim, with what was removed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrimOutcome {
    pub clusters: Vec<Vec<usize>>,
    pub removed: Vec<Vec<usize>>,
}

/// Removes vertices with deficient degree toward a required partner until
/// every listed pair meets the min-degree clause on both sides. Each
/// cluster may lose at most `max_frac` of its original size; more is an
/// error carrying the cluster id.
pub fn trim_to_super_regular(
    g: &Graph,
    clusters: &[Vec<usize>],
    pairs: &[(usize, usize)],
    delta: f64,
    max_frac: f64,
) -> Result<TrimOutcome> {
    let n = g.n();
    let mut clusters: Vec<Vec<usize>> = clusters.to_vec();
    let orig: Vec<usize> = clusters.iter().map(|c| c.len()).collect();
    let mut removed: Vec<Vec<usize>> = vec![Vec::new(); clusters.len()];
    let mut sets: Vec<VertexSet> = clusters.iter().map(|c| set_of(n, c)).collect();
    loop {
        let mut worst: Option<(f64, usize, usize)> = None;
        for &(i, j) in pairs {
            for (from, to) in [(i, j), (j, i)] {
                let need = delta * clusters[to].len() as f64 - 1e-9;
                for &v in &clusters[from] {
                    let have = sets[to].count_intersection_row(g.row(v)) as f64;
                    if have < need {
                        let gap = have - need;
                        if worst.map_or(true, |(w, _, _)| gap < w) {
                            worst = Some((gap, from, v));
                        }
                    }
                }
            }
        }
        let Some((_, cell, v)) = worst else { break };
        clusters[cell].retain(|&x| x != v);
        sets[cell].remove(v);
        removed[cell].push(v);
        if (removed[cell].len() as f64) > max_frac * orig[cell] as f64 + 1e-9 {
            return Err(Error::stage(format!(
                "trimming removed more than {:.0}% of cluster {}",
                max_frac * 100.0,
                cell
            )));
        }
        if clusters[cell].is_empty() {
            return Err(Error::stage(format!("cluster {} trimmed to nothing", cell)));
        }
    }
    for r in removed.iter_mut() {
        r.sort_unstable();
    }
    Ok(TrimOutcome { clusters, removed })
}
