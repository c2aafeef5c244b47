//! End-to-end drivers. `run_bandwidth_pipeline` chains labelling,
//! colouring, guest partition, host partition, restrictions, augmentation
//! and embedding for a dense host; `run_ramsey_pipeline` runs the
//! two-colour variant through a monochromatic cycle power. The constant
//! chain calculator connects the asymptotic parameter regime to these
//! desk-scale runs: paper mode derives the chain and stops with a
//! feasibility verdict instead of embedding.
//!
//! Stages are sequential. Each randomized stage draws its seed from the
//! master seed through a splitmix64 step keyed by the stage index, so
//! reports are reproducible stage by stage.

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::backbone::{augment_reduced_graph, build_kkr, AugmentReport, GridGraph};
use crate::embedder::{
    augment_host, compute_image_restrictions, embed, embed_into_clusters, verify_embedding,
    EmbedParams, Embedding, ImageRestrictionSet,
};
use crate::error::{Error, Result};
use crate::graph::{complement, complete, cycle_power, Graph, Labelling, SizeGrid};
use crate::partition_h::{
    homomorphism_to_cycle_power, partition_h, spare_colouring, CutMode, CyclePowerParams,
    HomomorphismMap, PartitionHParams,
};
use crate::regularity::{
    build_host_partition, check_super_regular, coloured_regular_partition, find_mono_cycle_power,
    trim_to_super_regular, ClusterPartition, RegularMode, RegularityVerdict,
};
use crate::structure::{arrangeability_of_order, heuristic_bandwidth_labelling};

/// Chains demanding more vertices than this are flagged impractical.
const DESK_N: u64 = 10_000;

/// Splitmix64 finalizer keyed by the stage index.
pub fn stage_seed(master: u64, stage: u64) -> u64 {
    let mut z = master ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn tag(stage: &str, e: Error) -> Error {
    match e {
        Error::Precondition(m) => Error::Precondition(format!("{}: {}", stage, m)),
        Error::Invariant(m) => Error::Invariant(format!("{}: {}", stage, m)),
        Error::Stage(m) => Error::Stage(format!("{}: {}", stage, m)),
        Error::Exhausted(m) => Error::Exhausted(format!("{}: {}", stage, m)),
        other => other,
    }
}

struct Clock {
    t: Instant,
    laps: Vec<(String, u64)>,
}

impl Clock {
    fn start() -> Self {
        Clock { t: Instant::now(), laps: Vec::new() }
    }

    fn lap(&mut self, name: &str) {
        self.laps.push((name.to_string(), self.t.elapsed().as_millis() as u64));
        self.t = Instant::now();
    }
}

/// How one value of the chain was fixed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainNote {
    pub name: String,
    pub note: String,
}

/// A defect or caveat the chain carries, as a stable code plus detail.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainWarning {
    pub code: String,
    pub detail: String,
}

/// The full parameter chain. Values that only exist as existence claims
/// (density floor, regularity thresholds, cluster bound) stay `None`
/// unless supplied; everything computable from (r, a, gamma) and the
/// supplied values is filled in.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantChain {
    pub r: usize,
    pub a: usize,
    pub gamma: f64,
    /// Reduced-degree bound as printed: 3r + 1/gamma + 1.
    pub delta_r: f64,
    /// Bound the cover augmentation actually needs: 3r + 2/gamma + 1.
    pub delta_r_effective: f64,
    /// Cluster size ratio cap.
    pub kappa: f64,
    /// Density floor d of the host partition.
    pub delta: Option<f64>,
    /// Regularity threshold of the host partition step.
    pub eps0: Option<f64>,
    /// Regularity demand of the embedding step.
    pub eps_blowup: Option<f64>,
    /// Image-restriction allowance of the embedding step.
    pub alpha: Option<f64>,
    /// min of eps0, 1/4 and the embedding demand; opaque entries drop out.
    pub eps: f64,
    /// Cluster count bound.
    pub k0: Option<u64>,
    pub xi0: Option<f64>,
    pub xi: Option<f64>,
    pub beta: Option<f64>,
    /// Smallest guest the chain supports: the window machinery needs
    /// beta * n >= 1.
    pub min_n: Option<u64>,
    pub impractical: bool,
    pub notes: Vec<ChainNote>,
    pub warnings: Vec<ChainWarning>,
}

/// Values the chain cannot derive, supplied from outside.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct ChainOverrides {
    pub delta: Option<f64>,
    pub eps0: Option<f64>,
    pub eps_blowup: Option<f64>,
    pub alpha: Option<f64>,
    pub eps: Option<f64>,
    pub k0: Option<u64>,
    pub xi0: Option<f64>,
    pub xi: Option<f64>,
    pub beta: Option<f64>,
}

fn check_unit(name: &str, v: Option<f64>) -> Result<()> {
    if let Some(x) = v {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::pre(format!("override breaks 0 < {} <= 1 ({} = {})", name, name, x)));
        }
    }
    Ok(())
}

/// Derives every computable constant of the chain from (r, a, gamma) and
/// the overrides. Pure: no randomness, same inputs give the same chain.
/// An override violating one of the chain inequalities is an error naming
/// that inequality.
pub fn derive_constant_chain(
    r: usize,
    a: usize,
    gamma: f64,
    ov: &ChainOverrides,
) -> Result<ConstantChain> {
    if r < 2 {
        return Err(Error::pre("need r >= 2"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::pre("need 0 < gamma < 1"));
    }
    for (name, v) in [
        ("delta", ov.delta),
        ("eps0", ov.eps0),
        ("eps_blowup", ov.eps_blowup),
        ("alpha", ov.alpha),
        ("eps", ov.eps),
        ("xi0", ov.xi0),
        ("xi", ov.xi),
        ("beta", ov.beta),
    ] {
        check_unit(name, v)?;
    }
    let mut notes = Vec::new();
    let mut warnings = Vec::new();
    let mut note = |name: &str, text: String| notes.push(ChainNote { name: name.into(), note: text });

    let rf = r as f64;
    let delta_r = 3.0 * rf + 1.0 / gamma + 1.0;
    let delta_r_effective = 3.0 * rf + 2.0 / gamma + 1.0;
    note("delta_r", "3 r + 1 / gamma + 1".into());
    note("delta_r_effective", "3 r + 2 / gamma + 1; see the degree_bound warning".into());
    // cover augmentation reaches degree 3r + 2/gamma, which exceeds the
    // printed bound whenever gamma < 1
    warnings.push(ChainWarning {
        code: "degree_bound".into(),
        detail: format!(
            "the printed bound 3r + 1/gamma + 1 = {:.3} sits below the degree 3r + 2/gamma = {:.3} that cover augmentation can reach when gamma < 1; downstream checks use {:.3}",
            delta_r,
            3.0 * rf + 2.0 / gamma,
            delta_r_effective
        ),
    });
    note("kappa", "fixed at 2".into());

    let opaque = "existence-only; supply an override to make it concrete";
    let delta = ov.delta;
    note("delta", if delta.is_some() { "supplied".into() } else { opaque.into() });
    note("eps0", if ov.eps0.is_some() { "supplied".into() } else { opaque.into() });
    note("eps_blowup", if ov.eps_blowup.is_some() { "supplied".into() } else { opaque.into() });
    note("alpha", if ov.alpha.is_some() { "supplied".into() } else { opaque.into() });
    note("k0", if ov.k0.is_some() { "supplied".into() } else { opaque.into() });

    let mut eps = 0.25_f64;
    if let Some(e0) = ov.eps0 {
        eps = eps.min(e0);
    }
    if let Some(eb) = ov.eps_blowup {
        eps = eps.min(eb);
    }
    if let Some(e) = ov.eps {
        if e > 0.25 + 1e-12 {
            return Err(Error::pre(format!("override breaks eps <= 1/4 (eps = {})", e)));
        }
        if let Some(e0) = ov.eps0 {
            if e > e0 + 1e-12 {
                return Err(Error::pre(format!("override breaks eps <= eps0 ({} > {})", e, e0)));
            }
        }
        if let Some(eb) = ov.eps_blowup {
            if e > eb + 1e-12 {
                return Err(Error::pre(format!(
                    "override breaks eps <= eps_blowup ({} > {})",
                    e, eb
                )));
            }
        }
        eps = e;
        note("eps", "supplied; within the min rule".into());
    } else {
        note("eps", "min of eps0, 1/4 and eps_blowup; opaque entries drop out".into());
    }

    let xi0_cap = match (ov.alpha, ov.k0) {
        (Some(al), Some(k0)) if k0 > 0 => Some(al / (2.0 * rf * k0 as f64)),
        _ => None,
    };
    let xi0 = match (ov.xi0, xi0_cap) {
        (Some(x), Some(cap)) => {
            if x > cap + 1e-12 {
                return Err(Error::pre(format!(
                    "override breaks xi0 <= alpha / (2 r K0) ({} > {:.6})",
                    x, cap
                )));
            }
            note("xi0", "supplied; within alpha / (2 r K0)".into());
            Some(x)
        }
        (Some(x), None) => {
            note("xi0", "supplied; alpha / (2 r K0) not checkable without alpha and K0".into());
            Some(x)
        }
        (None, Some(cap)) => {
            note("xi0", "alpha / (2 r K0)".into());
            Some(cap)
        }
        (None, None) => {
            note("xi0", opaque.into());
            None
        }
    };

    let xi = match (ov.xi, xi0) {
        (Some(x), Some(x0)) => {
            if x > x0 + 1e-12 {
                return Err(Error::pre(format!("override breaks xi <= xi0 ({} > {})", x, x0)));
            }
            note("xi", "supplied; within xi0".into());
            Some(x)
        }
        (Some(x), None) => {
            note("xi", "supplied; xi0 opaque, bound not checkable".into());
            Some(x)
        }
        (None, Some(x0)) => {
            note("xi", "chosen at its cap xi0".into());
            Some(x0)
        }
        (None, None) => {
            note("xi", opaque.into());
            None
        }
    };

    let beta_cap = xi.map(|x| x * x / (1200.0 * rf));
    let beta = match (ov.beta, beta_cap) {
        (Some(b), Some(cap)) => {
            if b > cap + 1e-15 {
                return Err(Error::pre(format!(
                    "override breaks beta <= xi^2 / (1200 r) ({} > {:.3e})",
                    b, cap
                )));
            }
            note("beta", "supplied; within xi^2 / (1200 r)".into());
            Some(b)
        }
        (Some(b), None) => {
            note("beta", "supplied; xi opaque, bound not checkable".into());
            Some(b)
        }
        (None, Some(cap)) => {
            note("beta", "chosen at its cap xi^2 / (1200 r)".into());
            Some(cap)
        }
        (None, None) => {
            note("beta", opaque.into());
            None
        }
    };

    let min_n = beta.map(|b| (1.0 / b).ceil() as u64);
    let impractical = min_n.map(|m| m > DESK_N).unwrap_or(false);
    if let Some(m) = min_n {
        note("min_n", format!("window machinery needs beta * n >= 1, so n >= {}", m));
        if impractical {
            warnings.push(ChainWarning {
                code: "impractical".into(),
                detail: format!(
                    "the chain only takes effect from n >= {}; desk-scale runs need the practical regime",
                    m
                ),
            });
        }
    }

    Ok(ConstantChain {
        r,
        a,
        gamma,
        delta_r,
        delta_r_effective,
        kappa: 2.0,
        delta,
        eps0: ov.eps0,
        eps_blowup: ov.eps_blowup,
        alpha: ov.alpha,
        eps,
        k0: ov.k0,
        xi0,
        xi,
        beta,
        min_n,
        impractical,
        notes,
        warnings,
    })
}

/// Which parameter regime a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PipelineMode {
    /// Derive the chain, report feasibility, stop before partitioning.
    Paper,
    /// Run every stage with the supplied desk-scale parameters.
    Practical,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineParams {
    pub mode: PipelineMode,
    /// Regularity slack for host certification.
    pub eps: f64,
    /// Density floor for host certification and the embedding engine.
    pub delta: f64,
    /// Class-size slack for the guest partition audit.
    pub xi: f64,
    /// Bandwidth fraction; `None` takes the labelling bandwidth over n.
    pub beta: Option<f64>,
    /// Grid columns; `None` sizes clusters to about fifty vertices.
    pub k: Option<usize>,
    /// Cut placement; `None` tries Block and falls back to Fine.
    pub cut_mode: Option<CutMode>,
    pub check: RegularMode,
    /// Fail instead of warn when the host misses the min-degree bound.
    pub strict_min_degree: bool,
    pub swap_budget: usize,
    pub augment_retries: u32,
    pub restart_budget: u32,
    pub embed: EmbedParams,
    /// Extra knowns for the paper-mode chain.
    pub overrides: ChainOverrides,
}

impl PipelineParams {
    pub fn practical(eps: f64, delta: f64, xi: f64) -> Self {
        PipelineParams {
            mode: PipelineMode::Practical,
            eps,
            delta,
            xi,
            beta: None,
            k: None,
            cut_mode: None,
            check: RegularMode::Codegree,
            strict_min_degree: false,
            swap_budget: 400,
            augment_retries: 5,
            restart_budget: 20,
            embed: EmbedParams::default(),
            overrides: ChainOverrides::default(),
        }
    }

    pub fn paper(overrides: ChainOverrides) -> Self {
        let mut p = PipelineParams::practical(0.25, 0.25, 0.1);
        p.mode = PipelineMode::Paper;
        p.overrides = overrides;
        p
    }
}

/// Everything a run found, stage by stage. Fields past the failing stage
/// stay `None`; `timings_ms` is the only nondeterministic field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineReport {
    pub mode: String,
    pub seed: u64,
    pub stage_seeds: Vec<(String, u64)>,
    pub n: usize,
    pub r: usize,
    pub gamma: f64,
    pub host_min_degree: usize,
    pub min_degree_bound: f64,
    pub min_degree_ok: bool,
    pub warnings: Vec<String>,
    pub bandwidth: Option<usize>,
    pub beta: Option<f64>,
    pub arrangeability: Option<usize>,
    pub chain: Option<ConstantChain>,
    /// Paper mode: whether n clears the chain's minimum size.
    pub feasible: Option<bool>,
    pub zeros: Option<usize>,
    pub k: Option<usize>,
    pub cut_mode: Option<String>,
    pub covers: Option<AugmentReport>,
    pub guest_map: Option<HomomorphismMap>,
    pub host_partition: Option<ClusterPartition>,
    pub restriction_sizes: Option<Vec<usize>>,
    pub restricted_guests: Option<usize>,
    pub added_edges: Option<usize>,
    pub augment_attempts: Option<u32>,
    pub embedding: Option<Embedding>,
    pub certified: bool,
    pub timings_ms: Vec<(String, u64)>,
}

/// Embeds a low-bandwidth guest into a dense host of the same order.
///
/// The host partition targets come from the guest map: the equitable
/// sizes are chosen first, the guest is cut against them, and the class
/// sizes the cut actually produced are what the host partitioner must
/// realize. Paper mode stops after the constant chain with a feasibility
/// verdict; practical mode runs to a certified embedding or fails with a
/// stage-tagged error.
pub fn run_bandwidth_pipeline(
    h: &Graph,
    g: &Graph,
    r: usize,
    gamma: f64,
    params: &PipelineParams,
    seed: u64,
) -> Result<PipelineReport> {
    let n = h.n();
    if n == 0 {
        return Err(Error::pre("guest must be nonempty"));
    }
    if g.n() != n {
        return Err(Error::pre(format!(
            "guest has {} vertices but host has {}; spanning embedding needs equal orders",
            n,
            g.n()
        )));
    }
    if r < 2 {
        return Err(Error::pre("need r >= 2"));
    }
    if !(gamma > 0.0) {
        return Err(Error::pre("gamma must be positive"));
    }
    if params.mode == PipelineMode::Practical
        && !(params.eps > 0.0 && params.delta > 0.0 && params.delta <= 1.0 && params.xi > 0.0)
    {
        return Err(Error::pre("practical mode needs eps > 0, 0 < delta <= 1 and xi > 0"));
    }

    let mut clock = Clock::start();
    let mut warnings = Vec::new();
    let bound = ((r - 1) as f64 / r as f64 + gamma) * n as f64;
    let host_min_degree = g.min_degree();
    let min_degree_ok = host_min_degree as f64 >= bound - 1e-9;
    if !min_degree_ok {
        let msg = format!(
            "host min degree {} is below ((r - 1)/r + gamma) n = {:.1}",
            host_min_degree, bound
        );
        if params.strict_min_degree {
            return Err(Error::pre(msg));
        }
        warnings.push(msg);
    }
    clock.lap("preflight");

    let seed_label = stage_seed(seed, 0);
    let (labelling, bw) = heuristic_bandwidth_labelling(h, seed_label);
    clock.lap("labelling");
    let cert =
        arrangeability_of_order(h, labelling.order()).map_err(|e| tag("arrangeability", e))?;
    clock.lap("arrangeability");

    let mut report = PipelineReport {
        mode: match params.mode {
            PipelineMode::Paper => "paper".into(),
            PipelineMode::Practical => "practical".into(),
        },
        seed,
        stage_seeds: vec![("labelling".into(), seed_label)],
        n,
        r,
        gamma,
        host_min_degree,
        min_degree_bound: bound,
        min_degree_ok,
        warnings,
        bandwidth: Some(bw),
        beta: None,
        arrangeability: Some(cert.a),
        chain: None,
        feasible: None,
        zeros: None,
        k: None,
        cut_mode: None,
        covers: None,
        guest_map: None,
        host_partition: None,
        restriction_sizes: None,
        restricted_guests: None,
        added_edges: None,
        augment_attempts: None,
        embedding: None,
        certified: false,
        timings_ms: Vec::new(),
    };

    if params.mode == PipelineMode::Paper {
        let chain = derive_constant_chain(r, cert.a, gamma, &params.overrides)
            .map_err(|e| tag("constants", e))?;
        report.feasible = chain.min_n.map(|m| n as u64 >= m);
        match report.feasible {
            Some(false) => report.warnings.push(format!(
                "chain needs n >= {}, run has {}; switch to practical mode",
                chain.min_n.unwrap(),
                n
            )),
            None => report
                .warnings
                .push("chain leaves beta opaque; no feasibility verdict".into()),
            Some(true) => {}
        }
        report.chain = Some(chain);
        clock.lap("constants");
        report.timings_ms = clock.laps;
        return Ok(report);
    }

    let sigma = spare_colouring(h, &labelling, r).map_err(|e| tag("colouring", e))?;
    report.zeros = Some(sigma.class_sizes()[0]);
    clock.lap("colouring");

    let k = params
        .k
        .unwrap_or_else(|| ((n as f64 / (50.0 * r as f64)).round() as usize).max(2));
    report.k = Some(k);
    let m_grid = SizeGrid::equitable(n, k, r).map_err(|e| tag("partition-h", e))?;
    let complete_grid = GridGraph::from_graph(k, r, complete(k * r))
        .map_err(|e| tag("reduced graph", e))?;
    let (r_grid, covers) =
        augment_reduced_graph(&complete_grid, gamma).map_err(|e| tag("reduced graph", e))?;
    let k_grid = build_kkr(k, r).map_err(|e| tag("reduced graph", e))?;
    report.covers = Some(covers);
    clock.lap("reduced graph");

    let beta = params.beta.unwrap_or(bw.max(1) as f64 / n as f64);
    report.beta = Some(beta);
    let modes: Vec<CutMode> = match params.cut_mode {
        Some(m) => vec![m],
        None => vec![CutMode::Block, CutMode::Fine],
    };
    let mut map = None;
    let mut last = None;
    for (i, mode) in modes.iter().enumerate() {
        let p = PartitionHParams {
            beta,
            xi: params.xi,
            mode: *mode,
            enforce_constant_chain: false,
        };
        match partition_h(h, &labelling, &sigma, &r_grid, &m_grid, &p) {
            Ok(m2) => {
                if i > 0 {
                    report.warnings.push("block cuts failed; fine cuts used".into());
                }
                report.cut_mode = Some(format!("{:?}", mode));
                map = Some(m2);
                break;
            }
            Err(e) => last = Some(e),
        }
    }
    let map = match map {
        Some(m) => m,
        None => return Err(tag("partition-h", last.unwrap())),
    };
    clock.lap("partition-h");

    let seed_part = stage_seed(seed, 1);
    report.stage_seeds.push(("partition-g".into(), seed_part));
    let part = build_host_partition(
        g,
        &map.class_sizes,
        &r_grid,
        &k_grid,
        params.eps,
        params.delta,
        params.check,
        seed_part,
        params.swap_budget,
    )
    .map_err(|e| tag("partition-g", e))?;
    clock.lap("partition-g");

    let mut restrictions = compute_image_restrictions(&part, &r_grid, g, params.delta, params.eps)
        .map_err(|e| tag("restrict", e))?;
    restrictions.assign(&map).map_err(|e| tag("restrict", e))?;
    report.restriction_sizes = Some(restrictions.u_sets.iter().map(|u| u.len()).collect());
    report.restricted_guests = Some(restrictions.assignments.len());
    clock.lap("restrict");

    let seed_aug = stage_seed(seed, 2);
    report.stage_seeds.push(("augment".into(), seed_aug));
    let aug = augment_host(g, &part, &r_grid, &k_grid, &restrictions, seed_aug, params.augment_retries)
        .map_err(|e| tag("augment", e))?;
    report.added_edges = Some(aug.added_edges);
    report.augment_attempts = Some(aug.attempts);
    clock.lap("augment");

    let seed_embed = stage_seed(seed, 3);
    report.stage_seeds.push(("embed".into(), seed_embed));
    let embedding = embed(
        h,
        &map,
        &part,
        &r_grid,
        &k_grid,
        &restrictions,
        &cert,
        &aug.graph,
        g,
        seed_embed,
        params.restart_budget,
        params.embed,
    )
    .map_err(|e| tag("embed", e))?;
    clock.lap("embed");

    let verify = verify_embedding(h, g, &embedding.phi)?;
    if !verify.ok {
        return Err(Error::invariant("certify: embedding fails re-verification against the host"));
    }
    report.certified = embedding.audit.purity_ok;
    clock.lap("certify");

    report.guest_map = Some(map);
    report.host_partition = Some(part);
    report.embedding = Some(embedding);
    report.timings_ms = clock.laps;
    Ok(report)
}

/// Largest multiple of r + 1 with (2r + 3) m <= k. The cycle search needs
/// m >= 2r + 1, so k below (2r + 3) 2 (r + 1) is rejected with that
/// minimum.
pub fn select_cycle_length(k: usize, r: usize) -> Result<usize> {
    if r < 1 {
        return Err(Error::pre("need r >= 1"));
    }
    let step = r + 1;
    let m = k / (2 * r + 3) / step * step;
    if m < 2 * r + 1 {
        return Err(Error::pre(format!(
            "k = {} clusters cannot host a cycle power: need k >= {}",
            k,
            (2 * r + 3) * 2 * (r + 1)
        )));
    }
    Ok(m)
}

/// Unordered position pairs of a cycle on m vertices at cyclic distance
/// at most r.
pub fn cyclic_pairs(m: usize, r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let d = (j - i).min(m - (j - i));
            if d >= 1 && d <= r {
                out.push((i, j));
            }
        }
    }
    out
}

/// Guest-to-cycle map with the route that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycleMap {
    pub m: usize,
    pub r: usize,
    /// "grid" for the partition route, "wrap" for the position wrap.
    pub route: String,
    pub k_prime: Option<usize>,
    /// Image cycle vertex per guest vertex, 1-based.
    pub f: Vec<usize>,
    pub class_sizes: Vec<usize>,
    pub class_bound: f64,
}

/// Wraps labelling positions onto the cycle: v goes to (pos(v) mod m) + 1.
/// Valid whenever every guest edge lands at cyclic distance 1..=r; checked
/// edge by edge, with the same class ceiling as the grid route.
fn wrap_onto_cycle(
    h: &Graph,
    labelling: &Labelling,
    m: usize,
    r: usize,
    xi: f64,
) -> Result<CycleMap> {
    let n = h.n();
    let f: Vec<usize> = (0..n).map(|v| labelling.pos(v) % m + 1).collect();
    for (u, v) in h.edges() {
        let (a, b) = (f[u] - 1, f[v] - 1);
        let diff = a.abs_diff(b);
        let d = diff.min(m - diff);
        if d == 0 || d > r {
            return Err(Error::stage(format!(
                "position wrap sends edge {{{}, {}}} to cyclic distance {}",
                u, v, d
            )));
        }
    }
    let mut class_sizes = vec![0usize; m];
    for &c in &f {
        class_sizes[c - 1] += 1;
    }
    let class_bound = (1.0 + xi) * n as f64 / m as f64;
    for (c, &size) in class_sizes.iter().enumerate() {
        if size as f64 > class_bound + 1e-9 {
            return Err(Error::stage(format!(
                "position wrap puts {} vertices on cycle vertex {}, above the ceiling {:.3}",
                size,
                c + 1,
                class_bound
            )));
        }
    }
    Ok(CycleMap {
        m,
        r,
        route: "wrap".into(),
        k_prime: None,
        f,
        class_sizes,
        class_bound,
    })
}

/// Grid route first; the verified position wrap as fallback when the
/// guest is too small for the grid. Both routes check the class ceiling.
fn cycle_map(
    h: &Graph,
    labelling: &Labelling,
    m: usize,
    r: usize,
    xi: f64,
    k_prime: Option<usize>,
) -> Result<CycleMap> {
    let params = CyclePowerParams { m, xi, k_prime, beta: None, xi_partition: None };
    let grid_err = match homomorphism_to_cycle_power(h, labelling, r, &params, None) {
        Ok(hom) => {
            return Ok(CycleMap {
                m,
                r,
                route: "grid".into(),
                k_prime: Some(hom.k_prime),
                f: hom.f,
                class_sizes: hom.class_sizes,
                class_bound: hom.class_bound,
            })
        }
        Err(e) => e,
    };
    match wrap_onto_cycle(h, labelling, m, r, xi) {
        Ok(map) => Ok(map),
        Err(wrap_err) => Err(Error::stage(format!(
            "grid construction failed ({}); position wrap failed ({})",
            grid_err, wrap_err
        ))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RamseyParams {
    /// Clusters for the coloured partition.
    pub k: usize,
    pub eps: f64,
    /// Class-size slack of the guest-to-cycle map.
    pub xi: f64,
    /// Grid columns for the grid route; `None` uses its default rule.
    pub k_prime: Option<usize>,
    pub check: RegularMode,
    /// Node budget of the monochromatic cycle search.
    pub search_budget: usize,
    pub restart_budget: u32,
    pub embed: EmbedParams,
    /// Fail instead of warn below the (2r + 4) |V(H)| host size.
    pub strict_size: bool,
    /// Per-cluster trim allowance; `None` takes 2 r eps.
    pub max_trim_frac: Option<f64>,
}

impl RamseyParams {
    pub fn desk(k: usize) -> Self {
        RamseyParams {
            k,
            eps: 0.25,
            xi: 0.3,
            k_prime: None,
            check: RegularMode::Codegree,
            search_budget: 200_000,
            restart_budget: 20,
            embed: EmbedParams::default(),
            strict_size: true,
            max_trim_frac: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RamseyReport {
    pub seed: u64,
    pub stage_seeds: Vec<(String, u64)>,
    pub host_n: usize,
    pub guest_n: usize,
    pub r: usize,
    /// (2r + 4) |V(H)|.
    pub size_bound: usize,
    pub size_ok: bool,
    pub warnings: Vec<String>,
    pub k: usize,
    pub m: usize,
    pub irregular: usize,
    pub colour: Option<String>,
    pub cycle_clusters: Option<Vec<usize>>,
    pub trimmed_sizes: Option<Vec<usize>>,
    pub removed: Option<Vec<usize>>,
    pub pair_checks: Option<Vec<RegularityVerdict>>,
    pub guest_bandwidth: Option<usize>,
    pub map: Option<CycleMap>,
    pub embedding: Option<Embedding>,
    pub certified: bool,
    pub timings_ms: Vec<(String, u64)>,
}

/// Finds a monochromatic copy of the guest inside a two-coloured complete
/// host. `red` carries the red edges; blue is its complement. The run
/// partitions the host, finds a monochromatic cycle power in the reduced
/// graph, trims its clusters to super-regularity at density 1/4, maps the
/// guest onto the cycle and embeds into the majority colour. A failed
/// cycle search is reported as inconclusive, not a refutation.
pub fn run_ramsey_pipeline(
    red: &Graph,
    h: &Graph,
    r: usize,
    params: &RamseyParams,
    seed: u64,
) -> Result<RamseyReport> {
    let host_n = red.n();
    let guest_n = h.n();
    if guest_n == 0 || host_n == 0 {
        return Err(Error::pre("need a nonempty guest and host"));
    }
    if r < 1 {
        return Err(Error::pre("need r >= 1"));
    }
    if !(params.eps > 0.0 && params.xi > 0.0) {
        return Err(Error::pre("need eps > 0 and xi > 0"));
    }
    let mut warnings = Vec::new();
    let size_bound = (2 * r + 4) * guest_n;
    let size_ok = host_n >= size_bound;
    if !size_ok {
        let msg = format!(
            "host has {} vertices; the two-colour bound needs (2r + 4) |V(H)| = {}",
            host_n, size_bound
        );
        if params.strict_size {
            return Err(Error::pre(msg));
        }
        warnings.push(msg);
    }
    let m = select_cycle_length(params.k, r).map_err(|e| tag("cycle length", e))?;

    let mut clock = Clock::start();
    let seed_part = stage_seed(seed, 0);
    let part = coloured_regular_partition(red, params.k, params.eps, params.check, seed_part)
        .map_err(|e| tag("partition", e))?;
    if !part.within_budget {
        return Err(Error::stage(format!(
            "partition: {} irregular pairs exceed the budget {:.1}",
            part.irregular, part.budget
        )));
    }
    clock.lap("partition");

    let cycle = find_mono_cycle_power(&part.red_reduced, &part.blue_reduced, m, r, params.search_budget)
        .map_err(|e| tag("cycle search", e))?
        .ok_or_else(|| {
            Error::stage(format!(
                "cycle search: no monochromatic order-{} power of C_{} within {} nodes; inconclusive",
                r, m, params.search_budget
            ))
        })?;
    clock.lap("cycle search");

    let host = if cycle.red { red.clone() } else { complement(red) };
    let colour = if cycle.red { "red" } else { "blue" };
    let cyc_clusters: Vec<Vec<usize>> =
        cycle.vertices.iter().map(|&c| part.clusters[c].clone()).collect();
    let pairs = cyclic_pairs(m, r);
    let max_frac = params.max_trim_frac.unwrap_or(2.0 * r as f64 * params.eps);
    let trim = trim_to_super_regular(&host, &cyc_clusters, &pairs, 0.25, max_frac)
        .map_err(|e| tag("trim", e))?;
    clock.lap("trim");

    let mut pair_checks = Vec::new();
    for &(i, j) in &pairs {
        let mut v = check_super_regular(&host, &trim.clusters[i], &trim.clusters[j], params.eps, 0.25, params.check)
            .map_err(|e| tag("certify pairs", e))?;
        v.pair = Some((i, j));
        if !(v.regular && v.min_degree_ok == Some(true)) {
            return Err(Error::stage(format!(
                "certify pairs: trimmed pair ({}, {}) fails the ({}, 1/4) check",
                i, j, params.eps
            )));
        }
        pair_checks.push(v);
    }
    clock.lap("certify pairs");

    let seed_label = stage_seed(seed, 1);
    let (labelling, bw) = heuristic_bandwidth_labelling(h, seed_label);
    let map = cycle_map(h, &labelling, m, r, params.xi, params.k_prime)
        .map_err(|e| tag("guest map", e))?;
    for c in 0..m {
        if map.class_sizes[c] > trim.clusters[c].len() {
            return Err(Error::stage(format!(
                "capacity: class {} holds {} guests but cluster {} seats {}",
                c + 1,
                map.class_sizes[c],
                c,
                trim.clusters[c].len()
            )));
        }
    }
    clock.lap("guest map");

    let cert = arrangeability_of_order(h, labelling.order()).map_err(|e| tag("embed", e))?;
    let target = cycle_power(m, r);
    let restrictions = ImageRestrictionSet {
        delta: 0.25,
        eps: params.eps,
        target_degree: (0..m).map(|c| target.degree(c)).max().unwrap_or(0),
        u_sets: trim.clusters.clone(),
        assignments: Vec::new(),
    };
    let cell_of: Vec<usize> = map.f.iter().map(|&c| c - 1).collect();
    let seed_embed = stage_seed(seed, 2);
    let embedding = embed_into_clusters(
        h,
        &host,
        &host,
        &trim.clusters,
        &target,
        &target,
        &cell_of,
        &[],
        &restrictions,
        &cert.order,
        seed_embed,
        params.restart_budget,
        params.embed,
    )
    .map_err(|e| tag("embed", e))?;
    clock.lap("embed");

    // single-colour certification: every guest edge must ride the chosen
    // colour class
    let verify = verify_embedding(h, &host, &embedding.phi)?;
    if !verify.ok {
        return Err(Error::invariant("certify: embedding fails the single-colour edge check"));
    }
    clock.lap("certify");

    Ok(RamseyReport {
        seed,
        stage_seeds: vec![
            ("partition".into(), seed_part),
            ("labelling".into(), seed_label),
            ("embed".into(), seed_embed),
        ],
        host_n,
        guest_n,
        r,
        size_bound,
        size_ok,
        warnings,
        k: params.k,
        m,
        irregular: part.irregular,
        colour: Some(colour.into()),
        cycle_clusters: Some(cycle.vertices),
        trimmed_sizes: Some(trim.clusters.iter().map(|c| c.len()).collect()),
        removed: Some(trim.removed.iter().map(|r| r.len()).collect()),
        pair_checks: Some(pair_checks),
        guest_bandwidth: Some(bw),
        map: Some(map),
        embedding: Some(embedding),
        certified: true,
        timings_ms: clock.laps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_power, random_bandwidth, random_graph, random_min_degree};

    #[test]
    fn chain_reproduces_printed_constants() {
        let chain = derive_constant_chain(3, 3, 0.1, &ChainOverrides::default()).unwrap();
        assert!((chain.delta_r - 20.0).abs() < 1e-9, "delta_r = {}", chain.delta_r);
        assert!((chain.kappa - 2.0).abs() < 1e-12);
        assert!((chain.eps - 0.25).abs() < 1e-12);
        assert!(chain.delta.is_none() && chain.k0.is_none());
        assert!(chain.warnings.iter().any(|w| w.code == "degree_bound"));
    }

    #[test]
    fn chain_beta_cap_is_tiny_at_printed_xi() {
        let ov = ChainOverrides { xi: Some(0.1), ..Default::default() };
        let chain = derive_constant_chain(3, 3, 0.1, &ov).unwrap();
        let beta = chain.beta.unwrap();
        assert!((beta - 0.01 / 3600.0).abs() < 1e-12, "beta = {}", beta);
        let min_n = chain.min_n.unwrap();
        assert!((359_999..=360_001).contains(&min_n), "min_n = {}", min_n);
        assert!(chain.impractical);
        assert!(chain.warnings.iter().any(|w| w.code == "impractical"));
    }

    #[test]
    fn chain_rejects_eps_above_a_quarter() {
        let ov = ChainOverrides { eps: Some(0.5), ..Default::default() };
        let err = derive_constant_chain(3, 3, 0.1, &ov).unwrap_err();
        assert!(err.to_string().contains("eps <= 1/4"), "{}", err);
    }

    #[test]
    fn chain_rejects_xi_above_its_cap() {
        let ov = ChainOverrides {
            alpha: Some(0.5),
            k0: Some(10),
            xi: Some(0.02),
            ..Default::default()
        };
        let err = derive_constant_chain(2, 2, 0.1, &ov).unwrap_err();
        assert!(err.to_string().contains("xi <= xi0"), "{}", err);

        let ov = ChainOverrides { xi: Some(0.01), ..ov };
        let chain = derive_constant_chain(2, 2, 0.1, &ov).unwrap();
        assert!((chain.xi0.unwrap() - 0.0125).abs() < 1e-12);
        assert!((chain.beta.unwrap() - 1e-4 / 2400.0).abs() < 1e-15);
    }

    #[test]
    fn chain_is_pure() {
        let ov = ChainOverrides { delta: Some(0.3), xi: Some(0.1), ..Default::default() };
        let a = derive_constant_chain(3, 4, 0.2, &ov).unwrap();
        let b = derive_constant_chain(3, 4, 0.2, &ov).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn paper_mode_stops_with_a_feasibility_verdict() {
        let h = path_power(60, 1);
        let g = complete(60);
        let ov = ChainOverrides { xi: Some(0.1), ..Default::default() };
        let report =
            run_bandwidth_pipeline(&h, &g, 2, 0.1, &PipelineParams::paper(ov), 3).unwrap();
        assert_eq!(report.mode, "paper");
        let chain = report.chain.as_ref().unwrap();
        assert!((chain.delta_r - 17.0).abs() < 1e-9);
        assert_eq!(report.feasible, Some(false));
        assert!(report.embedding.is_none());
        assert!(!report.certified);
        assert_eq!(report.arrangeability, Some(1));
    }

    #[test]
    fn bandwidth_pipeline_embeds_a_hamilton_path() {
        let h = path_power(120, 1);
        let g = random_min_degree(120, 0.6, 41).unwrap();
        let params = PipelineParams::practical(0.2, 0.3, 0.1);
        let report = run_bandwidth_pipeline(&h, &g, 2, 0.1, &params, 7).unwrap();
        assert!(report.certified);
        assert!(report.min_degree_ok);
        assert_eq!(report.bandwidth, Some(1));
        assert_eq!(report.zeros, Some(0));
        assert_eq!(report.k, Some(2));
        let emb = report.embedding.as_ref().unwrap();
        let verify = verify_embedding(&h, &g, &emb.phi).unwrap();
        assert!(verify.ok);
    }

    #[test]
    fn bandwidth_pipeline_embeds_a_planted_square_path() {
        let h = path_power(120, 2);
        let mut g = random_min_degree(120, 2.0 / 3.0 + 0.1, 5).unwrap();
        for (u, v) in h.edges() {
            if !g.has_edge(u, v) {
                g.add_edge(u, v);
            }
        }
        let params = PipelineParams::practical(0.2, 0.3, 0.1);
        let report = run_bandwidth_pipeline(&h, &g, 3, 0.1, &params, 11).unwrap();
        assert!(report.certified);
        assert!(report.min_degree_ok);
        let emb = report.embedding.unwrap();
        assert!(emb.audit.purity_ok);
        assert!(verify_embedding(&h, &g, &emb.phi).unwrap().ok);
    }

    #[test]
    fn pipeline_rejects_an_uncolourable_guest() {
        let h = complete(10);
        let g = complete(10);
        let params = PipelineParams::practical(0.2, 0.3, 0.1);
        let err = run_bandwidth_pipeline(&h, &g, 2, 0.1, &params, 1).unwrap_err();
        assert!(err.to_string().contains("colouring:"), "{}", err);
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn pipeline_seed_reproducibility() {
        let h = path_power(120, 1);
        let g = random_min_degree(120, 0.6, 41).unwrap();
        let params = PipelineParams::practical(0.2, 0.3, 0.1);
        let mut a = run_bandwidth_pipeline(&h, &g, 2, 0.1, &params, 7).unwrap();
        let mut b = run_bandwidth_pipeline(&h, &g, 2, 0.1, &params, 7).unwrap();
        a.timings_ms.clear();
        b.timings_ms.clear();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn cycle_length_frozen_values() {
        assert_eq!(select_cycle_length(42, 2).unwrap(), 6);
        assert_eq!(select_cycle_length(100, 2).unwrap(), 12);
        assert_eq!(select_cycle_length(72, 3).unwrap(), 8);
        let err = select_cycle_length(41, 2).unwrap_err();
        assert!(err.to_string().contains("k >= 42"), "{}", err);
        assert!(select_cycle_length(30, 2).is_err());
    }

    #[test]
    fn cyclic_pairs_of_a_hexagon_square() {
        let pairs = cyclic_pairs(6, 2);
        assert_eq!(pairs.len(), 12);
        assert!(pairs.contains(&(0, 1)) && pairs.contains(&(0, 2)));
        assert!(!pairs.contains(&(0, 3)));
    }

    #[test]
    fn wrap_spreads_a_path_evenly() {
        let h = path_power(12, 1);
        let map = wrap_onto_cycle(&h, &Labelling::identity(12), 6, 2, 0.2).unwrap();
        assert_eq!(map.f[0], 1);
        assert_eq!(map.f[6], 1);
        assert_eq!(map.class_sizes, vec![2; 6]);
    }

    #[test]
    fn wrap_refuses_wide_edges() {
        let h = path_power(12, 3);
        let err = wrap_onto_cycle(&h, &Labelling::identity(12), 6, 2, 0.2).unwrap_err();
        assert!(err.to_string().contains("cyclic distance"), "{}", err);
    }

    #[test]
    fn ramsey_all_red_hosts_a_small_cycle() {
        let red = complete(96);
        let h = cycle_power(8, 1);
        // integer class sizes force ceil(8/6) = 2, so the ceiling needs
        // xi >= 1/2
        let params = RamseyParams { xi: 0.5, ..RamseyParams::desk(42) };
        let report = run_ramsey_pipeline(&red, &h, 2, &params, 9).unwrap();
        assert!(report.certified);
        assert_eq!(report.m, 6);
        assert_eq!(report.colour.as_deref(), Some("red"));
        let map = report.map.as_ref().unwrap();
        assert_eq!(map.route, "wrap");
        assert_eq!(map.class_sizes.iter().sum::<usize>(), 8);
        assert_eq!(report.removed.as_ref().unwrap().iter().sum::<usize>(), 0);
        let emb = report.embedding.as_ref().unwrap();
        assert!(verify_embedding(&h, &red, &emb.phi).unwrap().ok);
    }

    #[test]
    fn ramsey_rejects_a_small_host_when_strict() {
        let red = complete(50);
        let h = cycle_power(8, 1);
        let params = RamseyParams::desk(42);
        let err = run_ramsey_pipeline(&red, &h, 2, &params, 1).unwrap_err();
        assert!(err.to_string().contains("64"), "{}", err);
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn ramsey_names_the_minimum_cluster_count() {
        let red = complete(96);
        let h = cycle_power(8, 1);
        let params = RamseyParams::desk(30);
        let err = run_ramsey_pipeline(&red, &h, 2, &params, 1).unwrap_err();
        assert!(err.to_string().contains("k >= 42"), "{}", err);
    }

    #[test]
    fn ramsey_finds_a_mono_guest_in_a_random_colouring() {
        let red = random_graph(600, 0.5, 20260814).unwrap();
        let h = random_bandwidth(60, 2, 0.5, 99).unwrap();
        let params = RamseyParams::desk(42);
        let report = run_ramsey_pipeline(&red, &h, 2, &params, 5).unwrap();
        assert!(report.certified);
        let colour_graph = match report.colour.as_deref() {
            Some("red") => red.clone(),
            _ => complement(&red),
        };
        let phi = &report.embedding.as_ref().unwrap().phi;
        for (u, v) in h.edges() {
            assert!(colour_graph.has_edge(phi[u], phi[v]), "edge {{{} {}}} off colour", u, v);
        }
    }

    #[test]
    fn ramsey_seed_reproducibility() {
        let red = complete(96);
        let h = cycle_power(8, 1);
        let params = RamseyParams { xi: 0.5, ..RamseyParams::desk(42) };
        let mut a = run_ramsey_pipeline(&red, &h, 2, &params, 9).unwrap();
        let mut b = run_ramsey_pipeline(&red, &h, 2, &params, 9).unwrap();
        a.timings_ms.clear();
        b.timings_ms.clear();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
