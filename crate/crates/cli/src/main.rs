//! Batch front end for the weighted-graph distance and clustering pipeline.
//!
//! Subcommands: `ingest`, `distances`, `embed`, `anneal`, `diagnose`.
//! Options resolve as defaults < `--config key=value file` < flags.
//! Exit codes: 0 success, 2 input or contract error, 3 numerical failure.

mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    parse_bool, parse_f64, parse_path, parse_schoenberg, parse_symmetrization, parse_trel_list,
    parse_usize, resolve, DiagonalPolicy, FamilyChoice, FileConfig,
};
use pipeline::{AnnealArgs, DiagnoseArgs, DistanceArgs, EmbedArgs, Resolved};

/// Classified error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        CliError { message, code: 2 }
    }

    pub fn numerical(message: String) -> Self {
        CliError { message, code: 3 }
    }
}

impl From<flowclust::Error> for CliError {
    fn from(e: flowclust::Error) -> Self {
        use flowclust::Error::*;
        let code = match e {
            IpfNonConvergence { .. } | Eigen(_) | SingularSystem(_) => 3,
            _ => 2,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "flowclust",
    about = "Exchange matrices, spectral graph distances, weighted MDS and annealed soft clustering",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonOpts {
    /// key=value config file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Flow matrix CSV (header of column labels, one labelled row each)
    #[arg(long)]
    input: Option<PathBuf>,
    /// half_sum, geometric_mean or quasi_symmetric
    #[arg(long)]
    symmetrize: Option<String>,
    /// keep or strip the diagonal of the exchange matrix
    #[arg(long)]
    diagonal: Option<String>,
    /// Directory for output files
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args, Default)]
struct DistanceOpts {
    /// chi2, diffusive, frozen, commute, absorption, sif, shortest_path or jump
    #[arg(long)]
    family: Option<String>,
    /// Absorption rate in (0,1); required by --family absorption
    #[arg(long)]
    rho: Option<f64>,
    /// Schoenberg transformation: power:<a> or exp:<b>
    #[arg(long)]
    schoenberg: Option<String>,
    /// Near-disconnection guard for irreducible families
    #[arg(long)]
    connectivity_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetrize and normalize a flow matrix; writes exchange.csv
    Ingest {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Compute a distance matrix; writes distances.csv
    Distances {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        distance: DistanceOpts,
    },
    /// Weighted classical MDS coordinates; writes embedding.csv
    Embed {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        distance: DistanceOpts,
        /// Requested embedding dimensions
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Annealed soft clustering; writes trace.csv and membership snapshots
    Anneal {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        distance: DistanceOpts,
        /// First relative temperature
        #[arg(long)]
        t_start: Option<f64>,
        /// Last relative temperature (the ladder may overshoot slightly)
        #[arg(long)]
        t_end: Option<f64>,
        /// Geometric ratio between consecutive temperatures
        #[arg(long)]
        t_ratio: Option<f64>,
        /// Relative-overlap tolerance for merging equivalent groups
        #[arg(long)]
        merge_tol: Option<f64>,
        /// Force coalescence of metastable micro-groups
        #[arg(long)]
        coalesce: bool,
        /// Stop as soon as one effective group remains
        #[arg(long)]
        stop_when_single: bool,
        /// Reference partition (label,group CSV) for the VI column
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Comma-separated relative temperatures to snapshot
        #[arg(long)]
        snapshot_trel: Option<String>,
        /// Exit with status 3 if any temperature step fails to converge
        #[arg(long)]
        strict: bool,
    },
    /// Equivalent-pairs report and eigenvalue summary
    Diagnose {
        #[command(flatten)]
        common: CommonOpts,
        /// Row-profile tolerance for vertex equivalence
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the first k raw coordinates to coords.csv
        #[arg(long)]
        coords: Option<usize>,
    },
}

fn resolve_common(common: &CommonOpts) -> Result<(Resolved, FileConfig), CliError> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let resolved = Resolved {
        input: resolve(common.input.clone(), &file, "input", None, parse_path)?,
        symmetrize: resolve(
            common
                .symmetrize
                .as_deref()
                .map(parse_symmetrization)
                .transpose()?,
            &file,
            "symmetrize",
            Some(flowclust::SymmetrizationMethod::HalfSum),
            parse_symmetrization,
        )?,
        diagonal: resolve(
            common
                .diagonal
                .as_deref()
                .map(DiagonalPolicy::parse)
                .transpose()?,
            &file,
            "diagonal",
            Some(DiagonalPolicy::Keep),
            DiagonalPolicy::parse,
        )?,
        output_dir: resolve(
            common.output_dir.clone(),
            &file,
            "output-dir",
            Some(PathBuf::from(".")),
            parse_path,
        )?,
    };
    Ok((resolved, file))
}

fn resolve_distance(opts: &DistanceOpts, file: &FileConfig) -> Result<DistanceArgs, CliError> {
    let rho = match opts.rho {
        Some(r) => Some(r),
        None => file
            .get("rho")
            .map(|raw| parse_f64("rho")(raw))
            .transpose()?,
    };
    let family_raw = opts
        .family
        .clone()
        .or_else(|| file.get("family").map(String::from))
        .ok_or_else(|| CliError::usage("missing required option --family".into()))?;
    let family = FamilyChoice::parse(&family_raw, rho)?;
    let schoenberg = match &opts.schoenberg {
        Some(raw) => Some(parse_schoenberg(raw)?),
        None => file.get("schoenberg").map(parse_schoenberg).transpose()?,
    };
    let connectivity_tol = resolve(
        opts.connectivity_tol,
        file,
        "connectivity-tol",
        Some(flowclust::spectral::CONNECTIVITY_TOL),
        parse_f64("connectivity-tol"),
    )?;
    Ok(DistanceArgs {
        family,
        schoenberg,
        connectivity_tol,
    })
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest { common } => {
            let (resolved, _) = resolve_common(&common)?;
            pipeline::cmd_ingest(&resolved)
        }
        Command::Distances { common, distance } => {
            let (resolved, file) = resolve_common(&common)?;
            let args = resolve_distance(&distance, &file)?;
            pipeline::cmd_distances(&resolved, &args)
        }
        Command::Embed {
            common,
            distance,
            dim,
        } => {
            let (resolved, file) = resolve_common(&common)?;
            let args = EmbedArgs {
                distance: resolve_distance(&distance, &file)?,
                dim: resolve(dim, &file, "dim", Some(2), parse_usize("dim"))?,
            };
            pipeline::cmd_embed(&resolved, &args)
        }
        Command::Anneal {
            common,
            distance,
            t_start,
            t_end,
            t_ratio,
            merge_tol,
            coalesce,
            stop_when_single,
            reference,
            snapshot_trel,
            strict,
        } => {
            let (resolved, file) = resolve_common(&common)?;
            let snapshot_trel = match snapshot_trel {
                Some(raw) => parse_trel_list(&raw)?,
                None => file
                    .get("snapshot-trel")
                    .map(parse_trel_list)
                    .transpose()?
                    .unwrap_or_default(),
            };
            let args = AnnealArgs {
                distance: resolve_distance(&distance, &file)?,
                t_start: resolve(t_start, &file, "t-start", Some(0.02), parse_f64("t-start"))?,
                t_end: resolve(t_end, &file, "t-end", Some(2.0), parse_f64("t-end"))?,
                t_ratio: resolve(t_ratio, &file, "t-ratio", Some(1.05), parse_f64("t-ratio"))?,
                merge_tol: resolve(
                    merge_tol,
                    &file,
                    "merge-tol",
                    Some(flowclust::cluster::MERGE_TOL),
                    parse_f64("merge-tol"),
                )?,
                coalesce: if coalesce {
                    true
                } else {
                    resolve(None, &file, "coalesce", Some(false), parse_bool("coalesce"))?
                },
                stop_when_single: if stop_when_single {
                    true
                } else {
                    resolve(
                        None,
                        &file,
                        "stop-when-single",
                        Some(false),
                        parse_bool("stop-when-single"),
                    )?
                },
                reference: match reference {
                    Some(p) => Some(p),
                    None => file.get("reference").map(PathBuf::from),
                },
                snapshot_trel,
                strict: if strict {
                    true
                } else {
                    resolve(None, &file, "strict", Some(false), parse_bool("strict"))?
                },
            };
            pipeline::cmd_anneal(&resolved, &args)
        }
        Command::Diagnose {
            common,
            tol,
            coords,
        } => {
            let (resolved, file) = resolve_common(&common)?;
            let args = DiagnoseArgs {
                tol: resolve(
                    tol,
                    &file,
                    "tol",
                    Some(flowclust::spectral::EQUIVALENCE_TOL),
                    parse_f64("tol"),
                )?,
                coords: match coords {
                    Some(k) => Some(k),
                    None => file
                        .get("coords")
                        .map(|raw| parse_usize("coords")(raw))
                        .transpose()?,
                },
            };
            pipeline::cmd_diagnose(&resolved, &args)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
