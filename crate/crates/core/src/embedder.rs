//! Embedding the partitioned guest into the certified host clusters:
//! image restrictions, host augmentation on non-spine pairs, a randomized
//! greedy embedder with a final per-cluster matching phase, and the
//! certification oracle.
//!
//! The engine works over arbitrary cluster adjacency so both the grid
//! pipeline and the cycle-power pipeline drive the same code. Success is
//! probabilistic: attempts restart with successor seeds and every returned
//! embedding is re-verified, including that it uses no augmented edge.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backbone::GridGraph;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::partition_h::HomomorphismMap;
use crate::regularity::ClusterPartition;
use crate::structure::ArrangeCertificate;

/// Per-cluster sets of well-connected hosts, and which guests they bind.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImageRestrictionSet {
    pub delta: f64,
    pub eps: f64,
    /// Max degree of the reduced adjacency the sets were computed against.
    pub target_degree: usize,
    /// U_i per cluster: hosts with degree >= (delta - eps) n_j into every
    /// cluster j adjacent to i in the target.
    pub u_sets: Vec<Vec<usize>>,
    /// (guest, cluster) pairs for restricted guests; see `assign`.
    pub assignments: Vec<(usize, usize)>,
}

/// Restriction sets over an arbitrary reduced adjacency on cluster ids.
pub fn restrictions_for_clusters(
    g: &Graph,
    clusters: &[Vec<usize>],
    target: &Graph,
    delta: f64,
    eps: f64,
) -> Result<ImageRestrictionSet> {
    if target.n() != clusters.len() {
        return Err(Error::pre("reduced adjacency order must match cluster count"));
    }
    let sets: Vec<VertexSet> = clusters
        .iter()
        .map(|c| {
            let mut s = VertexSet::empty(g.n());
            for &v in c {
                s.insert(v);
            }
            s
        })
        .collect();
    let target_degree = (0..target.n()).map(|c| target.degree(c)).max().unwrap_or(0);
    let mut u_sets = Vec::with_capacity(clusters.len());
    for (i, members) in clusters.iter().enumerate() {
        let nbrs = target.neighbors(i);
        let keep: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&v| {
                nbrs.iter().all(|&j| {
                    sets[j].count_intersection_row(g.row(v)) as f64
                        >= (delta - eps) * clusters[j].len() as f64 - 1e-9
                })
            })
            .collect();
        // regularity of every incident pair forbids more than eps n_i
        // exclusions per neighbour
        let bound = members.len() as f64 * (1.0 - target_degree as f64 * eps);
        if (keep.len() as f64) < bound - 1e-9 {
            return Err(Error::stage(format!(
                "restriction set of cluster {} has {} of {} members, below {:.1}: the pair is not as regular as claimed",
                i,
                keep.len(),
                members.len(),
                bound
            )));
        }
        u_sets.push(keep);
    }
    Ok(ImageRestrictionSet { delta, eps, target_degree, u_sets, assignments: Vec::new() })
}

/// Restriction sets for a grid-certified partition.
pub fn compute_image_restrictions(
    part: &ClusterPartition,
    r_grid: &GridGraph,
    g: &Graph,
    delta: f64,
    eps: f64,
) -> Result<ImageRestrictionSet> {
    if r_grid.k != part.k || r_grid.r != part.r {
        return Err(Error::pre("grid dimensions disagree with the partition"));
    }
    restrictions_for_clusters(g, &part.clusters, r_grid.graph(), delta, eps)
}

impl ImageRestrictionSet {
    /// Binds each restricted guest to the restriction set of its cluster.
    /// Only guests of X may carry a restriction.
    pub fn assign(&mut self, map: &HomomorphismMap) -> Result<()> {
        self.assignments.clear();
        for &v in &map.x {
            let (i, j) = map.f[v];
            let cell = (i - 1) * map.r + (j - 1);
            if cell >= self.u_sets.len() {
                return Err(Error::pre(format!("guest {} maps to unknown cell {:?}", v, (i, j))));
            }
            self.assignments.push((v, cell));
        }
        Ok(())
    }
}

/// Augmented host with the audit trail of what was added.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HostAugmentation {
    pub graph: Graph,
    pub added_edges: usize,
    /// Vertices topped up, with their cluster and the cluster they were
    /// deficient toward.
    pub deficient: Vec<(usize, usize, usize)>,
    pub seed: u64,
    pub attempts: u32,
}

fn cluster_bitsets(n: usize, clusters: &[Vec<usize>]) -> Vec<VertexSet> {
    clusters
        .iter()
        .map(|c| {
            let mut s = VertexSet::empty(n);
            for &v in c {
                s.insert(v);
            }
            s
        })
        .collect()
}

/// Adds edges on target-minus-spine pairs so every target pair meets the
/// min-degree clause at delta - eps: each deficient vertex gets edges to
/// ceil(delta n_j) randomly chosen vertices of the paired cluster. The
/// thresholds come from the restriction set, which makes every topped-up
/// vertex lie outside its restriction set, so spine pairs and
/// restriction-set pairs are untouched (asserted).
pub fn augment_between_clusters(
    g: &Graph,
    clusters: &[Vec<usize>],
    target: &Graph,
    spine: &Graph,
    restrictions: &ImageRestrictionSet,
    seed: u64,
    retries: u32,
) -> Result<HostAugmentation> {
    let delta = restrictions.delta;
    let eps = restrictions.eps;
    if !spine.is_subgraph_of(target) {
        return Err(Error::pre("spine must be a subgraph of the target"));
    }
    if restrictions.u_sets.len() != clusters.len() {
        return Err(Error::pre("restriction sets disagree with cluster count"));
    }
    let n = g.n();
    let sets = cluster_bitsets(n, clusters);
    let mut last_err = None;
    for attempt in 0..=retries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let mut out = g.clone();
        let mut added = 0usize;
        let mut deficient = Vec::new();
        for (c1, c2) in target.edges() {
            if spine.has_edge(c1, c2) {
                continue;
            }
            for (from, to) in [(c1, c2), (c2, c1)] {
                let need = (delta - eps) * clusters[to].len() as f64 - 1e-9;
                let top_up = (delta * clusters[to].len() as f64).ceil() as usize;
                for &v in &clusters[from] {
                    if (sets[to].count_intersection_row(g.row(v)) as f64) >= need {
                        continue;
                    }
                    deficient.push((v, from, to));
                    let mut pool = clusters[to].clone();
                    pool.shuffle(&mut rng);
                    for &w in pool.iter().take(top_up.min(pool.len())) {
                        if !out.has_edge(v, w) {
                            out.add_edge(v, w);
                            added += 1;
                        }
                    }
                }
            }
        }
        // post: every target pair passes min-degree at delta - eps
        let out_ok = target.edges().iter().all(|&(c1, c2)| {
            [(c1, c2), (c2, c1)].iter().all(|&(from, to)| {
                let need = (delta - eps) * clusters[to].len() as f64 - 1e-9;
                clusters[from]
                    .iter()
                    .all(|&v| sets[to].count_intersection_row(out.row(v)) as f64 >= need)
            })
        });
        if !out_ok {
            last_err = Some(Error::stage(format!(
                "augmentation left a deficient target pair (attempt {})",
                attempt
            )));
            continue;
        }
        // spine pairs untouched
        for (c1, c2) in spine.edges() {
            for &v in &clusters[c1] {
                let before = sets[c2].count_intersection_row(g.row(v));
                let after = sets[c2].count_intersection_row(out.row(v));
                if before != after {
                    return Err(Error::invariant("augmentation touched a spine pair"));
                }
            }
        }
        // restriction-set pairs agree with the original host
        for (c1, c2) in target.edges() {
            let u2 = {
                let mut s = VertexSet::empty(n);
                for &v in &restrictions.u_sets[c2] {
                    s.insert(v);
                }
                s
            };
            for &v in &restrictions.u_sets[c1] {
                if u2.count_intersection_row(g.row(v))
                    != u2.count_intersection_row(out.row(v))
                {
                    return Err(Error::invariant(
                        "augmentation changed a restriction-set pair",
                    ));
                }
            }
        }
        return Ok(HostAugmentation {
            graph: out,
            added_edges: added,
            deficient,
            seed: seed.wrapping_add(attempt as u64),
            attempts: attempt,
        });
    }
    Err(last_err.unwrap_or_else(|| Error::stage("augmentation retries exhausted")))
}

/// Grid wrapper: augment on target-minus-spine pairs of a certified
/// partition.
pub fn augment_host(
    g: &Graph,
    part: &ClusterPartition,
    r_grid: &GridGraph,
    k_grid: &GridGraph,
    restrictions: &ImageRestrictionSet,
    seed: u64,
    retries: u32,
) -> Result<HostAugmentation> {
    augment_between_clusters(
        g,
        &part.clusters,
        r_grid.graph(),
        k_grid.graph(),
        restrictions,
        seed,
        retries,
    )
}

/// Knobs of the randomized greedy phase.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EmbedParams {
    /// Candidate floor as a fraction of the remaining free hosts of a
    /// cluster; `None` takes delta / 2.
    pub floor_frac: Option<f64>,
    /// Fraction of each cluster's guests reserved for the matching phase.
    pub reserve_frac: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams { floor_frac: None, reserve_frac: 0.05 }
    }
}

/// How a guest received its image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Greedy,
    Matching,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedAudit {
    /// Every restricted guest landed in its restriction set.
    pub restriction_ok: bool,
    /// Every guest edge outside the restricted set rides a spine pair.
    pub discipline_ok: bool,
    /// Every guest edge maps to an edge of the original host.
    pub purity_ok: bool,
    pub greedy: usize,
    pub matched: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Embedding {
    /// Image of each guest vertex.
    pub phi: Vec<usize>,
    pub provenance: Vec<Phase>,
    /// Attempts consumed before success (0 = first try).
    pub attempt: u32,
    pub seed: u64,
    pub audit: EmbedAudit,
}

/// Certification oracle: injectivity plus edge preservation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub injective: bool,
    /// Guest pairs sharing an image.
    pub duplicates: Vec<(usize, usize)>,
    /// Guest edges not mapped to host edges.
    pub violations: Vec<(usize, usize)>,
}

pub fn verify_embedding(h: &Graph, g: &Graph, phi: &[usize]) -> Result<VerifyReport> {
    if phi.len() != h.n() {
        return Err(Error::pre("embedding must cover every guest vertex"));
    }
    if let Some(&img) = phi.iter().find(|&&img| img >= g.n()) {
        return Err(Error::pre(format!("image {} outside the host", img)));
    }
    let mut owner: Vec<Option<usize>> = vec![None; g.n()];
    let mut duplicates = Vec::new();
    for (v, &img) in phi.iter().enumerate() {
        if let Some(prev) = owner[img] {
            duplicates.push((prev, v));
        } else {
            owner[img] = Some(v);
        }
    }
    let violations: Vec<(usize, usize)> = h
        .edges()
        .into_iter()
        .filter(|&(u, v)| !g.has_edge(phi[u], phi[v]))
        .collect();
    Ok(VerifyReport {
        ok: duplicates.is_empty() && violations.is_empty(),
        injective: duplicates.is_empty(),
        duplicates,
        violations,
    })
}

struct EngineInput<'a> {
    h: &'a Graph,
    host: &'a Graph,
    original: &'a Graph,
    clusters: &'a [Vec<usize>],
    target: &'a Graph,
    spine: &'a Graph,
    cell_of: &'a [usize],
    x_list: &'a [usize],
    u_sets: &'a [Vec<usize>],
    order: &'a [usize],
}

/// General engine: embeds a guest whose vertices are pre-assigned to
/// clusters, into a host whose cluster pairs follow `target` (regular) and
/// `spine` (super-regular, untouched by augmentation).
pub fn embed_into_clusters(
    h: &Graph,
    host: &Graph,
    original: &Graph,
    clusters: &[Vec<usize>],
    target: &Graph,
    spine: &Graph,
    cell_of: &[usize],
    x_list: &[usize],
    restrictions: &ImageRestrictionSet,
    order: &[usize],
    seed: u64,
    restart_budget: u32,
    params: EmbedParams,
) -> Result<Embedding> {
    let input = EngineInput {
        h,
        host,
        original,
        clusters,
        target,
        spine,
        cell_of,
        x_list,
        u_sets: &restrictions.u_sets,
        order,
    };
    let floor_frac = params.floor_frac.unwrap_or(restrictions.delta / 2.0);
    run_engine(&input, floor_frac, params.reserve_frac, seed, restart_budget)
}

fn run_engine(
    input: &EngineInput,
    floor_frac: f64,
    reserve_frac: f64,
    seed: u64,
    restart_budget: u32,
) -> Result<Embedding> {
    let h = input.h;
    let n_guest = h.n();
    let n_host = input.host.n();
    let cells = input.clusters.len();
    if input.original.n() != n_host {
        return Err(Error::pre("augmented and original host disagree on order"));
    }
    if input.cell_of.len() != n_guest {
        return Err(Error::pre("cluster assignment must cover every guest"));
    }
    if input.target.n() != cells || input.spine.n() != cells {
        return Err(Error::pre("reduced graphs disagree with the cluster count"));
    }
    if !input.spine.is_subgraph_of(input.target) {
        return Err(Error::pre("spine must be a subgraph of the target"));
    }
    if input.u_sets.len() != cells {
        return Err(Error::pre("restriction sets disagree with the cluster count"));
    }
    {
        let mut sorted = input.order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..n_guest).collect::<Vec<_>>() {
            return Err(Error::pre("processing order must permute the guest vertices"));
        }
    }
    let mut load = vec![0usize; cells];
    for &c in input.cell_of {
        if c >= cells {
            return Err(Error::pre("guest assigned to an unknown cluster"));
        }
        load[c] += 1;
    }
    for (c, &l) in load.iter().enumerate() {
        if l > input.clusters[c].len() {
            return Err(Error::pre(format!(
                "cluster {} must host {} guests but has {} vertices",
                c,
                l,
                input.clusters[c].len()
            )));
        }
    }
    let mut in_x = vec![false; n_guest];
    for &v in input.x_list {
        in_x[v] = true;
    }
    // edge discipline: every guest edge rides a target pair, and pairs off
    // the spine carry only restricted-restricted edges
    for (u, v) in h.edges() {
        let (cu, cv) = (input.cell_of[u], input.cell_of[v]);
        if cu == cv {
            return Err(Error::pre(format!(
                "guest edge ({}, {}) maps inside cluster {}",
                u, v, cu
            )));
        }
        if !input.target.has_edge(cu, cv) {
            return Err(Error::pre(format!(
                "guest edge ({}, {}) maps to non-adjacent clusters {} and {}",
                u, v, cu, cv
            )));
        }
        if !input.spine.has_edge(cu, cv) && !(in_x[u] && in_x[v]) {
            return Err(Error::pre(format!(
                "guest edge ({}, {}) rides a non-spine pair without restrictions",
                u, v
            )));
        }
    }
    let mut warnings = Vec::new();
    let advisory = (n_host as f64).sqrt() / (n_host.max(3) as f64).ln();
    if h.max_degree() as f64 > advisory {
        warnings.push(format!(
            "guest max degree {} exceeds the advisory bound {:.1}",
            h.max_degree(),
            advisory
        ));
    }

    let cluster_sets = cluster_bitsets(n_host, input.clusters);
    let u_bitsets: Vec<VertexSet> = input
        .u_sets
        .iter()
        .map(|u| {
            let mut s = VertexSet::empty(n_host);
            for &v in u {
                s.insert(v);
            }
            s
        })
        .collect();
    // processing sequence: restricted guests first, then the rest, both in
    // the arrangeable order
    let sequence: Vec<usize> = input
        .order
        .iter()
        .copied()
        .filter(|&v| in_x[v])
        .chain(input.order.iter().copied().filter(|&v| !in_x[v]))
        .collect();
    // reserve a tail per cluster for the matching phase, pairwise
    // non-adjacent within the cluster so the bipartite model is exact
    let mut reserved = vec![false; n_guest];
    for c in 0..cells {
        let members: Vec<usize> =
            sequence.iter().copied().filter(|&v| input.cell_of[v] == c).collect();
        if members.is_empty() {
            continue;
        }
        let quota = ((reserve_frac * members.len() as f64).ceil() as usize).min(members.len());
        let mut taken: Vec<usize> = Vec::new();
        for &v in members.iter().rev() {
            if taken.len() >= quota {
                break;
            }
            if taken.iter().any(|&t| h.has_edge(t, v)) {
                continue;
            }
            taken.push(v);
        }
        for v in taken {
            reserved[v] = true;
        }
    }

    let mut last_failure = String::from("no attempt ran");
    for attempt in 0..restart_budget.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        match run_attempt(
            input,
            &cluster_sets,
            &u_bitsets,
            &in_x,
            &sequence,
            &reserved,
            floor_frac,
            &mut rng,
        ) {
            Ok((phi, provenance)) => {
                let report = verify_embedding(h, input.host, &phi)?;
                if !report.ok {
                    last_failure = format!(
                        "attempt {}: post-check found {} duplicate images and {} broken edges",
                        attempt,
                        report.duplicates.len(),
                        report.violations.len()
                    );
                    continue;
                }
                let restriction_ok = input
                    .x_list
                    .iter()
                    .all(|&v| u_bitsets[input.cell_of[v]].contains(phi[v]));
                let discipline_ok = h.edges().iter().all(|&(u, v)| {
                    input.spine.has_edge(input.cell_of[u], input.cell_of[v])
                        || (in_x[u] && in_x[v])
                });
                if !restriction_ok || !discipline_ok {
                    return Err(Error::invariant(
                        "embedding broke the restriction discipline",
                    ));
                }
                let purity = verify_embedding(h, input.original, &phi)?;
                if !purity.ok {
                    return Err(Error::invariant(format!(
                        "embedding uses {} augmented edges; the discipline should make that impossible",
                        purity.violations.len()
                    )));
                }
                let matched = provenance.iter().filter(|&&p| p == Phase::Matching).count();
                return Ok(Embedding {
                    phi,
                    provenance,
                    attempt,
                    seed: seed.wrapping_add(attempt as u64),
                    audit: EmbedAudit {
                        restriction_ok,
                        discipline_ok,
                        purity_ok: true,
                        greedy: n_guest - matched,
                        matched,
                        warnings: warnings.clone(),
                    },
                });
            }
            Err(msg) => last_failure = format!("attempt {}: {}", attempt, msg),
        }
    }
    Err(Error::Exhausted(format!(
        "no embedding in {} attempts; {}",
        restart_budget.max(1),
        last_failure
    )))
}

/// One seeded attempt. String errors are attempt failures (restartable).
#[allow(clippy::too_many_arguments)]
fn run_attempt(
    input: &EngineInput,
    cluster_sets: &[VertexSet],
    u_bitsets: &[VertexSet],
    in_x: &[bool],
    sequence: &[usize],
    reserved: &[bool],
    floor_frac: f64,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<(Vec<usize>, Vec<Phase>), String> {
    let h = input.h;
    let host = input.host;
    let n_guest = h.n();
    let n_host = host.n();
    let cells = input.clusters.len();
    let mut phi: Vec<Option<usize>> = vec![None; n_guest];
    let mut provenance = vec![Phase::Greedy; n_guest];
    let mut free: Vec<VertexSet> = cluster_sets.to_vec();
    let mut free_count: Vec<usize> = input.clusters.iter().map(|c| c.len()).collect();

    let candidate = |x: usize, phi: &[Option<usize>], free: &[VertexSet]| -> VertexSet {
        let c = input.cell_of[x];
        let mut set = free[c].clone();
        if in_x[x] {
            set.intersect(&u_bitsets[c]);
        }
        for y in h.neighbors(x) {
            if let Some(img) = phi[y] {
                set.intersect_row(host.row(img));
            }
        }
        set
    };

    // greedy phase
    for &x in sequence {
        if reserved[x] {
            continue;
        }
        let cand = candidate(x, &phi, &free);
        if cand.is_empty() {
            return Err(format!("guest {} has no candidate image", x));
        }
        // protect unembedded neighbours from starvation
        let mut guards: Vec<(VertexSet, usize)> = Vec::new();
        for y in h.neighbors(x) {
            if phi[y].is_some() {
                continue;
            }
            let cy = input.cell_of[y];
            let remaining = free_count[cy] - usize::from(cy == input.cell_of[x]);
            let floor = ((floor_frac * remaining as f64).ceil() as usize).max(1);
            guards.push((candidate(y, &phi, &free), floor));
        }
        let safe: Vec<usize> = cand
            .iter()
            .filter(|&v| {
                guards
                    .iter()
                    .all(|(cy, floor)| cy.count_intersection_row(host.row(v)) >= *floor)
            })
            .collect();
        if safe.is_empty() {
            return Err(format!(
                "guest {} has {} candidates but all starve a neighbour",
                x,
                cand.len()
            ));
        }
        let img = safe[rng.random_range(0..safe.len())];
        phi[x] = Some(img);
        let c = input.cell_of[x];
        free[c].remove(img);
        free_count[c] -= 1;
    }

    // matching phase, cluster by cluster
    for c in 0..cells {
        let locals: Vec<usize> =
            sequence.iter().copied().filter(|&v| input.cell_of[v] == c).collect();
        if locals.iter().all(|&v| !reserved[v]) {
            continue;
        }
        let compat: Vec<VertexSet> = locals
            .iter()
            .map(|&x| {
                let mut set = cluster_sets[c].clone();
                if in_x[x] {
                    set.intersect(&u_bitsets[c]);
                }
                for y in h.neighbors(x) {
                    if let Some(img) = phi[y] {
                        set.intersect_row(host.row(img));
                    }
                }
                set
            })
            .collect();
        let mut match_of: Vec<Option<usize>> = vec![None; n_host];
        for (li, &x) in locals.iter().enumerate() {
            if let Some(img) = phi[x] {
                match_of[img] = Some(li);
            }
        }
        for (li, &x) in locals.iter().enumerate() {
            if !reserved[x] {
                continue;
            }
            let mut visited = VertexSet::empty(n_host);
            if !kuhn(li, &compat, &mut match_of, &mut visited) {
                let seen = visited.len();
                return Err(format!(
                    "cluster {}: guest {} unmatchable, {} hosts reachable for {} contending guests",
                    c,
                    x,
                    seen,
                    seen + 1
                ));
            }
        }
        let mut new_phi = phi.clone();
        for v in 0..n_host {
            if let Some(li) = match_of[v] {
                new_phi[locals[li]] = Some(v);
            }
        }
        // reassignments may break within-cluster guest edges the bipartite
        // model cannot see; validate and fail the attempt if so
        for &x in &locals {
            if new_phi[x] != phi[x] || reserved[x] {
                provenance[x] = Phase::Matching;
                for y in h.neighbors(x) {
                    if let Some(img_y) = new_phi[y] {
                        if !host.has_edge(new_phi[x].unwrap(), img_y) {
                            return Err(format!(
                                "cluster {}: matching broke guest edge ({}, {})",
                                c, x, y
                            ));
                        }
                    }
                }
            }
        }
        phi = new_phi;
    }

    let phi: Vec<usize> = phi
        .into_iter()
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| "a guest was left unembedded".to_string())?;
    Ok((phi, provenance))
}

fn kuhn(
    li: usize,
    compat: &[VertexSet],
    match_of: &mut [Option<usize>],
    visited: &mut VertexSet,
) -> bool {
    let hosts: Vec<usize> = compat[li].iter().collect();
    for v in hosts {
        if visited.contains(v) {
            continue;
        }
        visited.insert(v);
        match match_of[v] {
            None => {
                match_of[v] = Some(li);
                return true;
            }
            Some(owner) => {
                if kuhn(owner, compat, match_of, visited) {
                    match_of[v] = Some(li);
                    return true;
                }
            }
        }
    }
    false
}

/// Grid wrapper over the engine: guests placed by the homomorphism map,
/// clusters from the certified partition, discipline from the grid pair.
#[allow(clippy::too_many_arguments)]
pub fn embed(
    h: &Graph,
    map: &HomomorphismMap,
    part: &ClusterPartition,
    r_grid: &GridGraph,
    k_grid: &GridGraph,
    restrictions: &ImageRestrictionSet,
    order: &ArrangeCertificate,
    host: &Graph,
    original: &Graph,
    seed: u64,
    restart_budget: u32,
    params: EmbedParams,
) -> Result<Embedding> {
    if map.n != h.n() {
        return Err(Error::pre("map and guest disagree on the vertex count"));
    }
    if map.k != part.k || map.r != part.r {
        return Err(Error::pre("map and partition disagree on the grid"));
    }
    let cell_of: Vec<usize> =
        map.f.iter().map(|&(i, j)| (i - 1) * map.r + (j - 1)).collect();
    embed_into_clusters(
        h,
        host,
        original,
        &part.clusters,
        r_grid.graph(),
        k_grid.graph(),
        &cell_of,
        &map.x,
        restrictions,
        &order.order,
        seed,
        restart_budget,
        params,
    )
}
