//! Command line front end. Every subcommand prints one JSON report to
//! stdout (or `--json PATH`) and exits 0 on success, 2 when a
//! probabilistic stage legitimately fails, 3 on bad input or a broken
//! invariant. Reports are byte-stable for a fixed seed except the
//! `timings_ms` field.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bandspan::backbone::{
    augment_reduced_graph, build_bkr, build_kkr, build_rkr_path_augmented, verify_grid_target,
    AugmentReport, GridGraph,
};
use bandspan::embedder::{compute_image_restrictions, verify_embedding, EmbedAudit};
use bandspan::error::Error;
use bandspan::graph::{
    complete, cycle_power, path_power, random_bandwidth, random_graph, random_min_degree, Graph,
    SizeGrid,
};
use bandspan::partition_h::{partition_h, spare_colouring, CutMode, PartitionHParams};
use bandspan::pipeline::{
    derive_constant_chain, run_bandwidth_pipeline, run_ramsey_pipeline, ChainOverrides,
    PipelineMode, PipelineParams, RamseyParams,
};
use bandspan::regularity::build_host_partition;
use bandspan::regularity::RegularMode;
use bandspan::structure::{
    heuristic_arrangeability, heuristic_bandwidth_labelling, min_arrangeability_exact,
    min_bandwidth_exact,
};
use bandspan::Result;

const GRAPH_FORMS: &str = "graph forms: path:N[:R], cycle:N[:R], complete:N, random:N:P[:SEED], \
mindeg:N:FRAC[:SEED], band:N:B:P[:SEED], file:PATH (JSON {n, edges})";

#[derive(Parser)]
#[command(name = "bandspan", version, about = "Banded guests into dense hosts: partition, certify, embed", after_help = GRAPH_FORMS)]
struct Cli {
    /// Master seed; stages derive their own deterministically.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Parameter regime for the pipeline subcommand.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Practical)]
    mode: Mode,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Stage notes on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Paper,
    Practical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Exact,
    Codegree,
    Sampled,
}

impl Check {
    fn mode(self, seed: u64) -> RegularMode {
        match self {
            Check::Exact => RegularMode::Exact { cap: 14 },
            Check::Codegree => RegularMode::Codegree,
            Check::Sampled => RegularMode::Sampled { samples: 200, seed },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Cut {
    Block,
    Fine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Template {
    /// Backbone: column cliques plus crossings between consecutive columns.
    B,
    /// Column cliques only.
    K,
    /// Path-augmented target with guaranteed covers.
    R,
}

#[derive(Subcommand)]
enum Cmd {
    /// Arrangeability certificate: heuristic orderings or the exact minimum.
    Arrange {
        #[arg(long)]
        graph: String,
        /// Search all orderings (small graphs only).
        #[arg(long)]
        exact: bool,
        /// Vertex cap of the exact search.
        #[arg(long, default_value_t = 12)]
        cap: usize,
    },
    /// Bandwidth labelling: heuristic or the exact minimum.
    Bandwidth {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 12)]
        cap: usize,
    },
    /// Proper colouring with a spare colour along a bandwidth labelling.
    Colour {
        #[arg(long)]
        graph: String,
        /// Palette 1..=r plus the spare colour 0.
        #[arg(long)]
        r: usize,
    },
    /// Cut a banded guest against the grid and audit the clauses.
    PartitionH {
        #[arg(long)]
        guest: String,
        #[arg(long)]
        r: usize,
        /// Grid columns.
        #[arg(long)]
        k: usize,
        /// Bandwidth fraction; default: labelling bandwidth over n.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        xi: f64,
        /// Cut placement; default tries block and falls back to fine.
        #[arg(long, value_enum)]
        cut: Option<Cut>,
    },
    /// Partition a dense host into clusters certified against the grid.
    PartitionG {
        #[arg(long)]
        host: String,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 0.3)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Check::Codegree)]
        check: Check,
        #[arg(long, default_value_t = 400)]
        swap_budget: usize,
    },
    /// Image restriction sets of a certified host partition.
    Restrict {
        #[arg(long)]
        host: String,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 0.3)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = Check::Codegree)]
        check: Check,
        #[arg(long, default_value_t = 400)]
        swap_budget: usize,
    },
    /// Embed a guest into a host of the same order; prints the embedding.
    Embed {
        #[arg(long)]
        guest: String,
        #[arg(long)]
        host: String,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 0.3)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        xi: f64,
        #[arg(long, default_value_t = 20)]
        restarts: u32,
    },
    /// Staged run with the full report; paper mode stops at the chain.
    Pipeline {
        #[arg(long)]
        guest: String,
        #[arg(long)]
        host: String,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 0.3)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        xi: f64,
        #[arg(long)]
        beta: Option<f64>,
        /// Grid columns; default sizes clusters to about fifty vertices.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value_t = Check::Codegree)]
        check: Check,
        #[arg(long, default_value_t = 20)]
        restarts: u32,
        /// Fail instead of warn below the min-degree bound.
        #[arg(long)]
        strict: bool,
        /// Chain override (paper mode): image-restriction allowance.
        #[arg(long)]
        alpha: Option<f64>,
        /// Chain override (paper mode): cluster count bound.
        #[arg(long)]
        k0: Option<u64>,
    },
    /// Two-colour run: a monochromatic guest through a cycle power.
    Ramsey {
        /// Red edge class; blue is its complement.
        #[arg(long)]
        red: String,
        #[arg(long)]
        guest: String,
        #[arg(long)]
        r: usize,
        /// Clusters of the coloured partition.
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 0.3)]
        xi: f64,
        /// Grid columns of the guest-to-cycle map.
        #[arg(long)]
        k_prime: Option<usize>,
        #[arg(long, value_enum, default_value_t = Check::Codegree)]
        check: Check,
        /// Node budget of the cycle search.
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        #[arg(long, default_value_t = 20)]
        restarts: u32,
        /// Warn instead of failing below the (2r + 4) |V(H)| host size.
        #[arg(long)]
        allow_small: bool,
    },
    /// Derive the constant chain from (r, a, gamma) and any overrides.
    Constants {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        gamma: f64,
        /// Density floor of the host partition.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps0: Option<f64>,
        #[arg(long)]
        eps_blowup: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        k0: Option<u64>,
        #[arg(long)]
        xi0: Option<f64>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Grid templates: build, verify covers, optionally thin a dense graph.
    Backbone {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = Template::R)]
        template: Template,
        /// Thin the complete reduced graph at this gamma instead.
        #[arg(long)]
        augment: Option<f64>,
    },
}

fn parse_graph(spec: &str, default_seed: u64) -> Result<Graph> {
    let parts: Vec<&str> = spec.split(':').collect();
    let want = |lo: usize, hi: usize| -> Result<()> {
        if parts.len() - 1 < lo || parts.len() - 1 > hi {
            return Err(Error::Parse(format!("bad graph spec '{}'; {}", spec, GRAPH_FORMS)));
        }
        Ok(())
    };
    let num = |i: usize| -> Result<usize> {
        parts[i]
            .parse()
            .map_err(|_| Error::Parse(format!("bad number '{}' in graph spec '{}'", parts[i], spec)))
    };
    let real = |i: usize| -> Result<f64> {
        parts[i]
            .parse()
            .map_err(|_| Error::Parse(format!("bad number '{}' in graph spec '{}'", parts[i], spec)))
    };
    let seed_at = |i: usize| -> Result<u64> {
        if parts.len() > i {
            parts[i].parse().map_err(|_| {
                Error::Parse(format!("bad seed '{}' in graph spec '{}'", parts[i], spec))
            })
        } else {
            Ok(default_seed)
        }
    };
    match parts[0] {
        "path" => {
            want(1, 2)?;
            let r = if parts.len() > 2 { num(2)? } else { 1 };
            Ok(path_power(num(1)?, r))
        }
        "cycle" => {
            want(1, 2)?;
            let r = if parts.len() > 2 { num(2)? } else { 1 };
            Ok(cycle_power(num(1)?, r))
        }
        "complete" => {
            want(1, 1)?;
            Ok(complete(num(1)?))
        }
        "random" => {
            want(2, 3)?;
            random_graph(num(1)?, real(2)?, seed_at(3)?)
        }
        "mindeg" => {
            want(2, 3)?;
            random_min_degree(num(1)?, real(2)?, seed_at(3)?)
        }
        "band" => {
            want(3, 4)?;
            random_bandwidth(num(1)?, num(2)?, real(3)?, seed_at(4)?)
        }
        "file" => {
            want(1, usize::MAX)?;
            let path = &spec["file:".len()..];
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("cannot read graph from {}: {}", path, e)))
        }
        other => Err(Error::Parse(format!("unknown graph form '{}'; {}", other, GRAPH_FORMS))),
    }
}

fn emit<T: Serialize>(out: &Option<PathBuf>, report: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Parse(format!("report serialization failed: {}", e)))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{}", text),
    }
    Ok(())
}

#[derive(Serialize)]
struct OrderReport {
    n: usize,
    exact: bool,
    a: usize,
    order: Vec<usize>,
    per_position: Vec<usize>,
}

#[derive(Serialize)]
struct BandwidthReport {
    n: usize,
    exact: bool,
    bandwidth: usize,
    order: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct ColourReport {
    n: usize,
    r: usize,
    proper: bool,
    zeros: usize,
    class_sizes: Vec<usize>,
    colours: Vec<u32>,
}

#[derive(Serialize)]
struct EmbedReport {
    n: usize,
    r: usize,
    certified: bool,
    attempt: u32,
    seed: u64,
    audit: EmbedAudit,
    phi: Vec<usize>,
}

#[derive(Serialize)]
struct BackboneReport {
    k: usize,
    r: usize,
    template: String,
    edge_count: usize,
    edges: Vec<((usize, usize), (usize, usize))>,
    covers: Vec<(usize, usize)>,
    augment: Option<AugmentReport>,
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Arrange { graph, exact, cap } => {
            let g = parse_graph(&graph, seed)?;
            let cert = if exact {
                min_arrangeability_exact(&g, cap)?
            } else {
                heuristic_arrangeability(&g, &[])?
            };
            if cli.verbose {
                eprintln!("arrangeability {} on {} vertices", cert.a, g.n());
            }
            emit(
                &cli.json,
                &OrderReport {
                    n: g.n(),
                    exact,
                    a: cert.a,
                    order: cert.order,
                    per_position: cert.per_position,
                },
            )
        }
        Cmd::Bandwidth { graph, exact, cap } => {
            let g = parse_graph(&graph, seed)?;
            let (bandwidth, order) = if exact {
                (min_bandwidth_exact(&g, cap)?, None)
            } else {
                let (lab, b) = heuristic_bandwidth_labelling(&g, seed);
                (b, Some(lab.order().to_vec()))
            };
            if cli.verbose {
                eprintln!("bandwidth {} on {} vertices", bandwidth, g.n());
            }
            emit(&cli.json, &BandwidthReport { n: g.n(), exact, bandwidth, order })
        }
        Cmd::Colour { graph, r } => {
            let g = parse_graph(&graph, seed)?;
            let (labelling, _) = heuristic_bandwidth_labelling(&g, seed);
            let sigma = spare_colouring(&g, &labelling, r)?;
            let class_sizes = sigma.class_sizes();
            emit(
                &cli.json,
                &ColourReport {
                    n: g.n(),
                    r,
                    proper: sigma.is_proper_on(&g),
                    zeros: class_sizes[0],
                    class_sizes,
                    colours: sigma.colours().to_vec(),
                },
            )
        }
        Cmd::PartitionH { guest, r, k, beta, xi, cut } => {
            let h = parse_graph(&guest, seed)?;
            let (labelling, bw) = heuristic_bandwidth_labelling(&h, seed);
            let sigma = spare_colouring(&h, &labelling, r)?;
            let r_grid = build_rkr_path_augmented(k, r)?;
            let m_grid = SizeGrid::equitable(h.n(), k, r)?;
            let beta = beta.unwrap_or(bw.max(1) as f64 / h.n() as f64);
            let modes = match cut {
                Some(Cut::Block) => vec![CutMode::Block],
                Some(Cut::Fine) => vec![CutMode::Fine],
                None => vec![CutMode::Block, CutMode::Fine],
            };
            let mut out = None;
            let mut last = None;
            for mode in modes {
                let params =
                    PartitionHParams { beta, xi, mode, enforce_constant_chain: false };
                match partition_h(&h, &labelling, &sigma, &r_grid, &m_grid, &params) {
                    Ok(map) => {
                        out = Some(map);
                        break;
                    }
                    Err(e) => last = Some(e),
                }
            }
            match out {
                Some(map) => emit(&cli.json, &map),
                None => Err(last.unwrap()),
            }
        }
        Cmd::PartitionG { host, r, k, eps, delta, check, swap_budget } => {
            let g = parse_graph(&host, seed)?;
            let r_grid = build_rkr_path_augmented(k, r)?;
            let k_grid = build_kkr(k, r)?;
            let targets = SizeGrid::equitable(g.n(), k, r)?;
            let part = build_host_partition(
                &g,
                &targets,
                &r_grid,
                &k_grid,
                eps,
                delta,
                check.mode(seed),
                seed,
                swap_budget,
            )?;
            if cli.verbose {
                eprintln!("{} clusters certified with {} swaps", part.clusters.len(), part.swaps.len());
            }
            emit(&cli.json, &part)
        }
        Cmd::Restrict { host, r, k, eps, delta, check, swap_budget } => {
            let g = parse_graph(&host, seed)?;
            let r_grid = build_rkr_path_augmented(k, r)?;
            let k_grid = build_kkr(k, r)?;
            let targets = SizeGrid::equitable(g.n(), k, r)?;
            let part = build_host_partition(
                &g,
                &targets,
                &r_grid,
                &k_grid,
                eps,
                delta,
                check.mode(seed),
                seed,
                swap_budget,
            )?;
            let restrictions = compute_image_restrictions(&part, &r_grid, &g, delta, eps)?;
            emit(&cli.json, &restrictions)
        }
        Cmd::Embed { guest, host, r, gamma, eps, delta, xi, restarts } => {
            let h = parse_graph(&guest, seed)?;
            let g = parse_graph(&host, seed.wrapping_add(1))?;
            let mut params = PipelineParams::practical(eps, delta, xi);
            params.restart_budget = restarts;
            let report = run_bandwidth_pipeline(&h, &g, r, gamma, &params, seed)?;
            let embedding = report
                .embedding
                .ok_or_else(|| Error::Invariant("run finished without an embedding".into()))?;
            let verify = verify_embedding(&h, &g, &embedding.phi)?;
            emit(
                &cli.json,
                &EmbedReport {
                    n: h.n(),
                    r,
                    certified: report.certified && verify.ok,
                    attempt: embedding.attempt,
                    seed: embedding.seed,
                    audit: embedding.audit,
                    phi: embedding.phi,
                },
            )
        }
        Cmd::Pipeline {
            guest,
            host,
            r,
            gamma,
            eps,
            delta,
            xi,
            beta,
            k,
            check,
            restarts,
            strict,
            alpha,
            k0,
        } => {
            let h = parse_graph(&guest, seed)?;
            let g = parse_graph(&host, seed.wrapping_add(1))?;
            let mut params = PipelineParams::practical(eps, delta, xi);
            params.beta = beta;
            params.k = k;
            params.check = check.mode(seed);
            params.restart_budget = restarts;
            params.strict_min_degree = strict;
            if cli.mode == Mode::Paper {
                params.mode = PipelineMode::Paper;
                params.overrides = ChainOverrides {
                    delta: Some(delta),
                    eps: Some(eps),
                    xi: Some(xi),
                    beta,
                    alpha,
                    k0,
                    ..Default::default()
                };
            }
            let report = run_bandwidth_pipeline(&h, &g, r, gamma, &params, seed)?;
            if cli.verbose {
                eprintln!(
                    "mode {} certified {} warnings {}",
                    report.mode,
                    report.certified,
                    report.warnings.len()
                );
            }
            emit(&cli.json, &report)
        }
        Cmd::Ramsey { red, guest, r, k, eps, xi, k_prime, check, budget, restarts, allow_small } => {
            let red = parse_graph(&red, seed)?;
            let h = parse_graph(&guest, seed.wrapping_add(1))?;
            let params = RamseyParams {
                k,
                eps,
                xi,
                k_prime,
                check: check.mode(seed),
                search_budget: budget,
                restart_budget: restarts,
                strict_size: !allow_small,
                ..RamseyParams::desk(k)
            };
            let report = run_ramsey_pipeline(&red, &h, r, &params, seed)?;
            if cli.verbose {
                eprintln!(
                    "monochromatic copy in {} via C_{}^{}",
                    report.colour.clone().unwrap_or_default(),
                    report.m,
                    r
                );
            }
            emit(&cli.json, &report)
        }
        Cmd::Constants { r, a, gamma, delta, eps0, eps_blowup, alpha, eps, k0, xi0, xi, beta } => {
            let overrides =
                ChainOverrides { delta, eps0, eps_blowup, alpha, eps, k0, xi0, xi, beta };
            let chain = derive_constant_chain(r, a, gamma, &overrides)?;
            emit(&cli.json, &chain)
        }
        Cmd::Backbone { k, r, template, augment } => {
            if let Some(gamma) = augment {
                let dense = GridGraph::from_graph(k, r, complete(k * r))?;
                let (thinned, report) = augment_reduced_graph(&dense, gamma)?;
                let covers = verify_grid_target(&thinned)?;
                return emit(
                    &cli.json,
                    &BackboneReport {
                        k,
                        r,
                        template: "augmented".into(),
                        edge_count: thinned.graph().edge_count(),
                        edges: thinned.edges_cells(),
                        covers,
                        augment: Some(report),
                    },
                );
            }
            let (name, grid) = match template {
                Template::B => ("backbone", build_bkr(k, r)?),
                Template::K => ("cliques", build_kkr(k, r)?),
                Template::R => ("path-augmented", build_rkr_path_augmented(k, r)?),
            };
            let covers = match template {
                Template::R => verify_grid_target(&grid)?,
                _ => Vec::new(),
            };
            emit(
                &cli.json,
                &BackboneReport {
                    k,
                    r,
                    template: name.into(),
                    edge_count: grid.graph().edge_count(),
                    edges: grid.edges_cells(),
                    covers,
                    augment: None,
                },
            )
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e);
        std::process::exit(e.exit_code());
    }
}
