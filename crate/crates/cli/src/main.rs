//! `dpa`: directed preferential attachment toolkit.
//!
//! Subcommands: `simulate`, `recurse`, `gf`, `density`, `sample-limit`,
//! `compare`. Every stochastic subcommand is byte-identical under a fixed
//! seed; all CSV outputs carry a header row and are reported with a row
//! count and sha256 checksum.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod config;

use clap::{Parser, Subcommand, ValueEnum};
use config::ConfigFile;
use dpa::densities::{self, CurveKind};
use dpa::estimators::{self, ConditionalHistogram, DegreeSource};
use dpa::genfunc;
use dpa::graph::{self, SimConfig};
use dpa::recursion::{self, Axis};
use dpa::sampler;
use dpa::Params64;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<dpa::ParamError> for CliError {
    fn from(e: dpa::ParamError) -> Self {
        CliError::Config(e.to_string())
    }
}
impl From<dpa::graph::SimError> for CliError {
    fn from(e: dpa::graph::SimError) -> Self {
        CliError::Config(e.to_string())
    }
}
impl From<dpa::quad::QuadError> for CliError {
    fn from(e: dpa::quad::QuadError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<dpa::recursion::GridError> for CliError {
    fn from(e: dpa::recursion::GridError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<dpa::genfunc::GfError> for CliError {
    fn from(e: dpa::genfunc::GfError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<dpa::densities::DensityError> for CliError {
    fn from(e: dpa::densities::DensityError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
impl From<dpa::estimators::EstimatorError> for CliError {
    fn from(e: dpa::estimators::EstimatorError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "dpa", about = "Directed preferential attachment toolkit", version)]
struct Cli {
    /// JSON config with the model parameters and optional command blocks.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed; overrides the config's "seed".
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; overrides the per-command default.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MarginalAxis {
    In,
    Out,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DensityKind {
    Ratio,
    RatioArctan,
    Angular,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    Sim,
    Recurse,
    Sampler,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CompareKind {
    Ratio,
    Angular,
}

#[derive(Subcommand)]
enum Command {
    /// Grow a graph and emit joint degree counts.
    Simulate {
        /// Total number of edges.
        #[arg(long)]
        edges: Option<usize>,
        /// Also write the edge list as TSV (source, target) lines.
        #[arg(long)]
        edge_list: Option<PathBuf>,
    },
    /// Solve the joint degree recursion on a grid.
    Recurse {
        #[arg(long)]
        imax: Option<usize>,
        #[arg(long)]
        jmax: Option<usize>,
        /// Emit a marginal (k, p) instead of the full grid.
        #[arg(long, value_enum)]
        marginal: Option<MarginalAxis>,
    },
    /// Evaluate the generating function and its PDE residual at a point.
    Gf {
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        y: Option<f64>,
    },
    /// Sample a limit density curve to CSV.
    Density {
        #[arg(long, value_enum)]
        kind: Option<DensityKind>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Draw exact samples of the limiting (in, out) law.
    SampleLimit {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Estimate a conditional histogram and compare it with the theoretical curve.
    Compare {
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
        #[arg(long, value_enum)]
        kind: Option<CompareKind>,
        #[arg(long)]
        quantile: Option<f64>,
        #[arg(long)]
        bins: Option<usize>,
        /// Edges for the sim strategy.
        #[arg(long)]
        edges: Option<usize>,
        /// Draws for the sampler strategy.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        imax: Option<usize>,
        #[arg(long)]
        jmax: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    let path = path.ok_or_else(|| CliError::Config("--config <json> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

fn params_from(cfg: &ConfigFile) -> Result<Params64, CliError> {
    let params = Params64::new(cfg.alpha, cfg.beta, cfg.gamma, cfg.delta_in, cfg.delta_out)?;
    for w in params.tail_warnings() {
        eprintln!("warning: {w}");
    }
    Ok(params)
}

fn write_artifact(path: &Path, contents: &str, rows: usize) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    let digest = Sha256::digest(contents.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    println!("wrote {}: {rows} rows, sha256 {hex}", path.display());
    Ok(())
}

fn require<V>(flag: Option<V>, block: Option<V>, what: &str) -> Result<V, CliError> {
    flag.or(block)
        .ok_or_else(|| CliError::Config(format!("missing {what}: pass the flag or set it in the config")))
}

fn check_quantile(q: f64) -> Result<f64, CliError> {
    if q > 0.0 && q < 1.0 {
        Ok(q)
    } else {
        Err(CliError::Config(format!(
            "quantile = {q} must lie strictly between 0 and 1"
        )))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(cli.config.as_deref())?;
    let params = params_from(&cfg)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(1);

    match cli.command {
        Command::Simulate { edges, edge_list } => {
            let block = cfg.sim.clone();
            let edges = require(
                edges,
                block.as_ref().and_then(|b| b.edges),
                "edge count (--edges)",
            )?;
            let out = cli.out.unwrap_or_else(|| PathBuf::from("degrees.csv"));
            let graph = graph::grow(&params, &SimConfig::new(edges, seed))?;
            println!(
                "simulated graph: {} edges, {} nodes, seed {seed}",
                graph.n_edges(),
                graph.n_nodes()
            );
            let counts = graph::joint_degree_counts(&graph);
            let mut csv = String::from("in_degree,out_degree,count\n");
            for (&(i, o), &c) in &counts {
                csv.push_str(&format!("{i},{o},{c}\n"));
            }
            write_artifact(&out, &csv, counts.len())?;
            let edge_list = edge_list.or_else(|| {
                block
                    .as_ref()
                    .and_then(|b| b.edge_list.as_ref().map(PathBuf::from))
            });
            if let Some(path) = edge_list {
                let mut tsv = String::new();
                for (s, t) in graph.edges() {
                    tsv.push_str(&format!("{s}\t{t}\n"));
                }
                write_artifact(&path, &tsv, graph.n_edges())?;
            }
        }

        Command::Recurse {
            imax,
            jmax,
            marginal,
        } => {
            let block = cfg.recursion.clone();
            let imax = imax
                .or(block.as_ref().and_then(|b| b.imax))
                .unwrap_or(500);
            let jmax = jmax
                .or(block.as_ref().and_then(|b| b.jmax))
                .unwrap_or(500);
            let marginal = match (marginal, block.as_ref().and_then(|b| b.marginal.as_deref())) {
                (Some(m), _) => Some(m),
                (None, Some("in")) => Some(MarginalAxis::In),
                (None, Some("out")) => Some(MarginalAxis::Out),
                (None, Some(other)) => {
                    return Err(CliError::Config(format!(
                        "recursion.marginal = {other:?} is not \"in\" or \"out\""
                    )))
                }
                (None, None) => None,
            };
            let out = cli.out.unwrap_or_else(|| PathBuf::from("pij.csv"));
            let grid = recursion::solve_grid(&params, imax, jmax)?;
            println!(
                "solved {}x{} grid, captured mass {}",
                imax + 1,
                jmax + 1,
                grid.captured_mass()
            );
            match marginal {
                None => {
                    let mut csv = String::from("i,j,p\n");
                    let mut rows = 0usize;
                    for (i, j, p) in grid.cells() {
                        csv.push_str(&format!("{i},{j},{p}\n"));
                        rows += 1;
                    }
                    write_artifact(&out, &csv, rows)?;
                }
                Some(axis) => {
                    let axis = match axis {
                        MarginalAxis::In => Axis::In,
                        MarginalAxis::Out => Axis::Out,
                    };
                    let m = recursion::marginal(&grid, axis);
                    let mut csv = String::from("k,p\n");
                    for (k, p) in m.iter().enumerate() {
                        csv.push_str(&format!("{k},{p}\n"));
                    }
                    write_artifact(&out, &csv, m.len())?;
                }
            }
        }

        Command::Gf { x, y } => {
            let block = cfg.gf.clone();
            let x = require(x, block.as_ref().and_then(|b| b.x), "--x")?;
            let y = require(y, block.as_ref().and_then(|b| b.y), "--y")?;
            let value = genfunc::phi(&params, x, y)?;
            println!("phi({x}, {y}) = {value}");
            let h = 1e-4;
            match genfunc::pde_residual(&params, x, y, h) {
                Ok(residual) => println!("pde_residual(h={h}) = {residual:e}"),
                Err(genfunc::GfError::Boundary { .. }) => {
                    println!("pde_residual(h={h}) = n/a (point too close to the boundary)")
                }
                Err(e) => return Err(e.into()),
            }
        }

        Command::Density { kind, points } => {
            let block = cfg.density.clone();
            let kind = match (kind, block.as_ref().and_then(|b| b.kind.as_deref())) {
                (Some(k), _) => k,
                (None, Some("ratio")) => DensityKind::Ratio,
                (None, Some("ratio_arctan")) => DensityKind::RatioArctan,
                (None, Some("angular")) => DensityKind::Angular,
                (None, Some(other)) => {
                    return Err(CliError::Config(format!(
                        "density.kind = {other:?} is not ratio|ratio_arctan|angular"
                    )))
                }
                (None, None) => {
                    return Err(CliError::Config(
                        "missing density kind (--kind or density.kind)".into(),
                    ))
                }
            };
            let points = points
                .or(block.as_ref().and_then(|b| b.points))
                .unwrap_or(512);
            let range = match (
                block.as_ref().and_then(|b| b.lo),
                block.as_ref().and_then(|b| b.hi),
            ) {
                (Some(lo), Some(hi)) => Some((lo, hi)),
                (None, None) => None,
                _ => {
                    return Err(CliError::Config(
                        "density.lo and density.hi must be given together".into(),
                    ))
                }
            };
            let kind = match kind {
                DensityKind::Ratio => CurveKind::Ratio,
                DensityKind::RatioArctan => CurveKind::RatioArctan,
                DensityKind::Angular => CurveKind::Angular,
            };
            let out = cli.out.unwrap_or_else(|| PathBuf::from("curve.csv"));
            let curve = densities::curve(&params, kind, points, range)?;
            println!("curve mass over emitted range: {}", curve.mass());
            let mut csv = String::from("abscissa,density\n");
            for (x, v) in curve.abscissae.iter().zip(curve.values.iter()) {
                csv.push_str(&format!("{x},{v}\n"));
            }
            write_artifact(&out, &csv, curve.abscissae.len())?;
        }

        Command::SampleLimit { n } => {
            let block = cfg.sample.clone();
            let n = require(n, block.as_ref().and_then(|b| b.n), "--n")?;
            let out = cli.out.unwrap_or_else(|| PathBuf::from("samples.csv"));
            let mut rng = dpa::rng::seeded(seed);
            let mut csv = String::from("i,o,branch,z\n");
            for _ in 0..n {
                let s = sampler::sample_limit(&params, &mut rng);
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    s.i,
                    s.o,
                    if s.branch { 1 } else { 0 },
                    s.z
                ));
            }
            write_artifact(&out, &csv, n)?;
        }

        Command::Compare {
            strategy,
            kind,
            quantile,
            bins,
            edges,
            samples,
            imax,
            jmax,
        } => {
            let block = cfg.compare.clone();
            let strategy = match (strategy, block.as_ref().and_then(|b| b.strategy.as_deref())) {
                (Some(s), _) => s,
                (None, Some("sim")) => Strategy::Sim,
                (None, Some("recurse")) => Strategy::Recurse,
                (None, Some("sampler")) => Strategy::Sampler,
                (None, Some(other)) => {
                    return Err(CliError::Config(format!(
                        "compare.strategy = {other:?} is not sim|recurse|sampler"
                    )))
                }
                (None, None) => {
                    return Err(CliError::Config(
                        "missing strategy (--strategy or compare.strategy)".into(),
                    ))
                }
            };
            let kind = match (kind, block.as_ref().and_then(|b| b.kind.as_deref())) {
                (Some(k), _) => k,
                (None, Some("ratio")) => CompareKind::Ratio,
                (None, Some("angular")) => CompareKind::Angular,
                (None, Some(other)) => {
                    return Err(CliError::Config(format!(
                        "compare.kind = {other:?} is not ratio|angular"
                    )))
                }
                (None, None) => {
                    return Err(CliError::Config(
                        "missing kind (--kind or compare.kind)".into(),
                    ))
                }
            };
            let q = check_quantile(
                quantile
                    .or(block.as_ref().and_then(|b| b.quantile))
                    .unwrap_or(0.9995),
            )?;
            let bins = bins.or(block.as_ref().and_then(|b| b.bins)).unwrap_or(64);
            let out = cli.out.unwrap_or_else(|| PathBuf::from("hist.csv"));

            let hist: ConditionalHistogram<f64> = match strategy {
                Strategy::Sim => {
                    let edges = edges
                        .or(block.as_ref().and_then(|b| b.edges))
                        .unwrap_or(2_000_000);
                    let graph = graph::grow(&params, &SimConfig::new(edges, seed))?;
                    println!(
                        "simulated graph: {} edges, {} nodes, seed {seed}",
                        graph.n_edges(),
                        graph.n_nodes()
                    );
                    let counts = graph::joint_degree_counts(&graph);
                    match kind {
                        CompareKind::Ratio => {
                            estimators::ratio_histogram_sim(&counts, &params, q, bins)?
                        }
                        CompareKind::Angular => estimators::angular_histogram(
                            DegreeSource::Counts(&counts),
                            &params,
                            q,
                            bins,
                        )?,
                    }
                }
                Strategy::Sampler => {
                    let n = samples
                        .or(block.as_ref().and_then(|b| b.samples))
                        .unwrap_or(1_000_000);
                    let mut rng = dpa::rng::seeded(seed);
                    let draws: Vec<_> =
                        (0..n).map(|_| sampler::sample_limit(&params, &mut rng)).collect();
                    let counts = estimators::degree_counts_from_samples(&draws);
                    match kind {
                        CompareKind::Ratio => {
                            estimators::ratio_histogram_sim(&counts, &params, q, bins)?
                        }
                        CompareKind::Angular => estimators::angular_histogram(
                            DegreeSource::Counts(&counts),
                            &params,
                            q,
                            bins,
                        )?,
                    }
                }
                Strategy::Recurse => {
                    let imax = imax
                        .or(block.as_ref().and_then(|b| b.imax))
                        .unwrap_or(2000);
                    let jmax = jmax
                        .or(block.as_ref().and_then(|b| b.jmax))
                        .unwrap_or(2000);
                    let grid = recursion::solve_grid(&params, imax, jmax)?;
                    match kind {
                        CompareKind::Ratio => {
                            // threshold at the q-level of the grid in-marginal mass
                            let pin = recursion::marginal(&grid, Axis::In);
                            let total: f64 = pin.iter().sum();
                            let mut acc = 0.0;
                            let mut m = pin.len() - 1;
                            for (i, p) in pin.iter().enumerate() {
                                acc += p;
                                if acc >= q * total {
                                    m = i;
                                    break;
                                }
                            }
                            estimators::ratio_density_recursion(&grid, m, bins)?
                        }
                        CompareKind::Angular => estimators::angular_histogram(
                            DegreeSource::Grid(&grid),
                            &params,
                            q,
                            bins,
                        )?,
                    }
                }
            };

            let cdf = match kind {
                CompareKind::Ratio => {
                    densities::ratio_arctan_cdf_at_edges(&params, &hist.bin_edges)?
                }
                CompareKind::Angular => densities::angular_cdf_at_edges(&params, &hist.bin_edges)?,
            };
            let ks = estimators::ks_distance(&hist, &cdf)?;
            println!(
                "ks_distance = {ks} ({} exceedances above threshold {})",
                hist.n_exceedances, hist.threshold
            );
            let mut csv = String::from("bin_lo,bin_hi,mass,theoretical_mass\n");
            for k in 0..hist.masses.len() {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    hist.bin_edges[k],
                    hist.bin_edges[k + 1],
                    hist.masses[k],
                    cdf[k + 1] - cdf[k]
                ));
            }
            write_artifact(&out, &csv, hist.masses.len())?;
        }
    }
    Ok(())
}
