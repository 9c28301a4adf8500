//! Command implementations: each wires ingest → spectral → distance →
//! embed/cluster and writes its output files atomically (temp + rename).

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use flowclust::numfmt::fmt_num;
use flowclust::{
    anneal, decompose, find_equivalent_pairs, is_squared_euclidean, jump_distance, mds,
    natural_distance_with, schoenberg_transform, shortest_path_distance, weakly_equivalent_pairs,
    AnnealingOptions, DistanceMatrix, DistanceOptions, ExchangeMatrix, FlowMatrix, Membership,
    MembershipSnapshot, SpectralBasis,
};

use crate::config::{DiagonalPolicy, FamilyChoice};
use crate::CliError;

/// Everything needed to run one command, resolved from defaults, config
/// file and flags.
pub struct Resolved {
    pub input: PathBuf,
    pub symmetrize: flowclust::SymmetrizationMethod,
    pub diagonal: DiagonalPolicy,
    pub output_dir: PathBuf,
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension(match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{ext}.tmp"),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, bytes)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::usage(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}

pub fn ensure_output_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))
}

/// Loads the flow CSV, symmetrizes, normalizes and applies the diagonal
/// policy.
pub fn ingest(resolved: &Resolved) -> Result<ExchangeMatrix, CliError> {
    let file = fs::File::open(&resolved.input)
        .map_err(|e| CliError::usage(format!("cannot open {}: {e}", resolved.input.display())))?;
    let flow = FlowMatrix::from_csv(BufReader::new(file)).map_err(CliError::from)?;
    let e = ExchangeMatrix::from_flow(&flow, resolved.symmetrize).map_err(CliError::from)?;
    match resolved.diagonal {
        DiagonalPolicy::Keep => Ok(e),
        DiagonalPolicy::Strip => e.strip_diagonal().map_err(CliError::from),
    }
}

pub fn cmd_ingest(resolved: &Resolved) -> Result<(), CliError> {
    let e = ingest(resolved)?;
    ensure_output_dir(&resolved.output_dir)?;
    let mut buf = Vec::new();
    e.to_csv(&mut buf)
        .map_err(|err| CliError::usage(format!("serialization failed: {err}")))?;
    write_atomic(&resolved.output_dir.join("exchange.csv"), &buf)?;
    let f = e.weights();
    let fmin = f.iter().cloned().fold(f64::INFINITY, f64::min);
    let fmax = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!(
        "n={} diagonal_mass={} f_min={} f_max={}",
        e.n(),
        fmt_num(e.diagonal_mass()),
        fmt_num(fmin),
        fmt_num(fmax)
    );
    Ok(())
}

/// Builds the selected distance matrix, applying the Schoenberg transform
/// when requested.
pub fn build_distance(
    e: &ExchangeMatrix,
    family: &FamilyChoice,
    schoenberg: Option<flowclust::PhiSpec>,
    connectivity_tol: f64,
) -> Result<DistanceMatrix, CliError> {
    let d = match family {
        FamilyChoice::Natural(spec) => {
            let basis = decompose(e).map_err(CliError::from)?;
            natural_distance_with(&basis, spec, DistanceOptions { connectivity_tol })
                .map_err(CliError::from)?
        }
        FamilyChoice::ShortestPath => shortest_path_distance(e).map_err(CliError::from)?,
        FamilyChoice::Jump => jump_distance(e).map_err(|err| {
            if matches!(err, flowclust::Error::NonzeroDiagonal { .. }) {
                CliError::usage(format!("--family jump: {err} (use --diagonal strip)"))
            } else {
                CliError::from(err)
            }
        })?,
    };
    match schoenberg {
        Some(phi) => schoenberg_transform(&d, phi).map_err(CliError::from),
        None => Ok(d),
    }
}

pub struct DistanceArgs {
    pub family: FamilyChoice,
    pub schoenberg: Option<flowclust::PhiSpec>,
    pub connectivity_tol: f64,
}

pub fn cmd_distances(resolved: &Resolved, args: &DistanceArgs) -> Result<(), CliError> {
    let e = ingest(resolved)?;
    let mut d = build_distance(&e, &args.family, args.schoenberg, args.connectivity_tol)?;

    let verdict = if d.is_finite() {
        let (ok, min_eig) = is_squared_euclidean(&d, d.weights(), 1e-9).map_err(CliError::from)?;
        d.set_euclidean_verified(ok);
        format!("euclidean={ok} min_kernel_eig={}", fmt_num(min_eig))
    } else {
        "euclidean=unknown (infinite entries)".to_string()
    };

    ensure_output_dir(&resolved.output_dir)?;
    let mut buf = Vec::new();
    d.to_csv(&mut buf)
        .map_err(|err| CliError::usage(format!("serialization failed: {err}")))?;
    write_atomic(&resolved.output_dir.join("distances.csv"), &buf)?;

    println!(
        "family={} n={} inertia={} focused={} irreducible={} {}",
        d.flags().family,
        d.n(),
        fmt_num(d.inertia()),
        d.flags().focused,
        d.flags().irreducible,
        verdict
    );
    Ok(())
}

pub struct EmbedArgs {
    pub distance: DistanceArgs,
    pub dim: usize,
}

pub fn cmd_embed(resolved: &Resolved, args: &EmbedArgs) -> Result<(), CliError> {
    let e = ingest(resolved)?;
    let d = build_distance(
        &e,
        &args.distance.family,
        args.distance.schoenberg,
        args.distance.connectivity_tol,
    )?;
    let full = mds(&d, e.weights()).map_err(CliError::from)?;
    if full.dropped_negative_mass() > 0.0 {
        eprintln!(
            "warning: negative kernel mass {} dropped (distance is not squared Euclidean)",
            fmt_num(full.dropped_negative_mass())
        );
    }
    let emb = if args.dim > full.dims() {
        eprintln!(
            "warning: requested {} dimensions but only {} positive ones exist; truncating",
            args.dim,
            full.dims()
        );
        full
    } else {
        full.truncated(args.dim)
    };

    ensure_output_dir(&resolved.output_dir)?;
    let mut buf = Vec::new();
    emb.to_csv(&mut buf)
        .map_err(|err| CliError::usage(format!("serialization failed: {err}")))?;
    write_atomic(&resolved.output_dir.join("embedding.csv"), &buf)?;

    println!(
        "dims={} total_inertia={} dropped_negative_mass={}",
        emb.dims(),
        fmt_num(emb.total_inertia()),
        fmt_num(emb.dropped_negative_mass())
    );
    Ok(())
}

pub struct AnnealArgs {
    pub distance: DistanceArgs,
    pub t_start: f64,
    pub t_end: f64,
    pub t_ratio: f64,
    pub merge_tol: f64,
    pub coalesce: bool,
    pub stop_when_single: bool,
    pub reference: Option<PathBuf>,
    pub snapshot_trel: Vec<f64>,
    pub strict: bool,
}

/// Reads a `label,group` CSV and builds a hard membership aligned to the
/// graph's label order.
pub fn load_reference(path: &Path, e: &ExchangeMatrix) -> Result<Membership, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|err| CliError::usage(format!("cannot read {}: {err}", path.display())))?;
    let mut map = std::collections::HashMap::new();
    let mut group_order: Vec<String> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == "label,group") {
            continue;
        }
        let (label, group) = line.split_once(',').ok_or_else(|| {
            CliError::usage(format!(
                "{} line {}: expected label,group",
                path.display(),
                lineno + 1
            ))
        })?;
        let label = label.trim().to_string();
        let group = group.trim().to_string();
        if !group_order.contains(&group) {
            group_order.push(group.clone());
        }
        if map.insert(label.clone(), group).is_some() {
            return Err(CliError::usage(format!(
                "{}: duplicate label '{label}'",
                path.display()
            )));
        }
    }
    let mut assignments = Vec::with_capacity(e.n());
    for label in e.labels() {
        let group = map.get(label).ok_or_else(|| {
            CliError::usage(format!("{}: no group for vertex '{label}'", path.display()))
        })?;
        assignments.push(group_order.iter().position(|g| g == group).unwrap());
    }
    Membership::hard(&assignments, group_order.len()).map_err(CliError::from)
}

pub fn cmd_anneal(resolved: &Resolved, args: &AnnealArgs) -> Result<(), CliError> {
    let e = ingest(resolved)?;
    let d = build_distance(
        &e,
        &args.distance.family,
        args.distance.schoenberg,
        args.distance.connectivity_tol,
    )?;
    if !d.is_finite() {
        return Err(CliError::usage(
            "cannot anneal on infinite distances (disconnected pairs)".into(),
        ));
    }
    let reference = match &args.reference {
        Some(path) => Some(load_reference(path, &e)?),
        None => None,
    };
    let schedule = flowclust::geometric_schedule(args.t_start, args.t_end, args.t_ratio)
        .map_err(CliError::from)?;
    let opts = AnnealingOptions {
        merge_tol: args.merge_tol,
        forced_coalescence: args.coalesce,
        stop_when_single: args.stop_when_single,
        ..AnnealingOptions::default()
    };
    let (trace, memberships) =
        anneal(&d, &e, &schedule, &opts, reference.as_ref()).map_err(CliError::from)?;

    ensure_output_dir(&resolved.output_dir)?;
    let mut buf = Vec::new();
    trace
        .to_csv(&mut buf)
        .map_err(|err| CliError::usage(format!("serialization failed: {err}")))?;
    write_atomic(&resolved.output_dir.join("trace.csv"), &buf)?;

    // snapshots: every change of the effective group count, plus the first
    // step at or above each requested relative temperature
    let mut wanted = vec![false; trace.records.len()];
    for (idx, rec) in trace.records.iter().enumerate() {
        if idx == 0 || rec.effective_groups != trace.records[idx - 1].effective_groups {
            wanted[idx] = true;
        }
    }
    for &target in &args.snapshot_trel {
        if let Some(idx) = trace.records.iter().position(|r| r.t_rel >= target) {
            wanted[idx] = true;
        }
    }
    for (idx, rec) in trace.records.iter().enumerate() {
        if !wanted[idx] {
            continue;
        }
        let snap =
            MembershipSnapshot::new(&memberships[idx], e.weights(), e.labels(), rec.t, rec.t_rel);
        let json = serde_json::to_string_pretty(&snap)
            .map_err(|err| CliError::usage(format!("serialization failed: {err}")))?;
        write_atomic(
            &resolved
                .output_dir
                .join(format!("membership_step{idx:04}.json")),
            json.as_bytes(),
        )?;
    }

    let unconverged = trace.records.iter().filter(|r| !r.converged).count();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} temperature steps did not converge");
    }
    let last = trace.records.last().expect("nonempty schedule");
    println!(
        "steps={} final_m={} delta={} final_f={}",
        trace.records.len(),
        last.effective_groups,
        fmt_num(d.inertia()),
        fmt_num(last.free_energy)
    );
    if args.strict && unconverged > 0 {
        return Err(CliError::numerical(format!(
            "{unconverged} steps failed to converge (strict mode)"
        )));
    }
    Ok(())
}

pub struct DiagnoseArgs {
    pub tol: f64,
    pub coords: Option<usize>,
}

pub fn cmd_diagnose(resolved: &Resolved, args: &DiagnoseArgs) -> Result<(), CliError> {
    let e = ingest(resolved)?;
    let basis: SpectralBasis = decompose(&e).map_err(CliError::from)?;

    println!("n={}", e.n());
    let shown = e.n().min(6);
    let head: Vec<String> = (0..shown)
        .map(|a| fmt_num(basis.eigenvalues()[a]))
        .collect();
    println!(
        "eigenvalues: {}{} lambda_min={}",
        head.join(", "),
        if e.n() > shown { ", ..." } else { "" },
        fmt_num(basis.lambda_min())
    );

    let pairs = find_equivalent_pairs(&e, args.tol);
    if pairs.is_empty() {
        println!("equivalent_pairs: none (tol={})", fmt_num(args.tol));
    } else {
        let list: Vec<String> = pairs
            .iter()
            .map(|&(i, j)| format!("({},{})", e.labels()[i], e.labels()[j]))
            .collect();
        println!("equivalent_pairs: {}", list.join(" "));
    }

    if e.has_zero_diagonal() {
        let weak = weakly_equivalent_pairs(&e, args.tol).map_err(CliError::from)?;
        if weak.is_empty() {
            println!("weakly_equivalent_pairs: none");
        } else {
            let list: Vec<String> = weak
                .iter()
                .map(|&(i, j)| format!("({},{})", e.labels()[i], e.labels()[j]))
                .collect();
            println!("weakly_equivalent_pairs: {}", list.join(" "));
        }
    }

    if let Some(k) = args.coords {
        ensure_output_dir(&resolved.output_dir)?;
        let mut buf = Vec::new();
        basis.coords_to_csv(k, &mut buf).map_err(CliError::from)?;
        write_atomic(&resolved.output_dir.join("coords.csv"), &buf)?;
    }
    Ok(())
}
