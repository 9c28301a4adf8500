//! End-to-end tests of the command-line interface: exit codes, summaries,
//! file formats and config resolution.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use flowclust::DistanceMatrix;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flowclust"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

const FLOW_2X2: &str = "id,a,b\na,10,2\nb,4,10\n";
const TWO_BLOCKS: &str = "id,a,b,c,d\na,4,4,0,0\nb,4,4,0,0\nc,0,0,6,6\nd,0,0,6,6\n";
const K23: &str = "\
id,a,b,c,d,e
a,0,0,1,1,1
b,0,0,1,1,1
c,1,1,0,0,0
d,1,1,0,0,0
e,1,1,0,0,0
";
const PATH3: &str = "id,a,b,c\na,0,1,0\nb,1,0,1\nc,0,1,0\n";

#[test]
fn distances_frozen_summary_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(&input, FLOW_2X2);
    let out = run(&[
        "distances",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "frozen",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stdout(&out);
    assert!(summary.contains("family=frozen"));
    assert!(summary.contains("inertia=1"));
    assert!(summary.contains("euclidean=true"));

    let file = std::fs::File::open(dir.path().join("distances.csv")).unwrap();
    let d = DistanceMatrix::from_csv(std::io::BufReader::new(file)).unwrap();
    assert!((d.matrix()[(0, 1)] - 4.0).abs() < 1e-11);
    assert_eq!(d.flags().family, "frozen");
    assert_eq!(d.flags().euclidean_verified, Some(true));
}

#[test]
fn commute_on_disconnected_input_fails_with_contract_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("blocks.csv");
    write(&input, TWO_BLOCKS);
    let out = run(&[
        "distances",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "commute",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("irreducible distance on disconnected graph"));
}

#[test]
fn schoenberg_composition_is_entrywise() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(&input, FLOW_2X2);
    let plain_dir = dir.path().join("plain");
    let root_dir = dir.path().join("root");
    for (family_dir, extra) in [(&plain_dir, None), (&root_dir, Some("power:0.5"))] {
        let mut args = vec![
            "distances",
            "--input",
            input.to_str().unwrap(),
            "--family",
            "chi2",
            "--output-dir",
            family_dir.to_str().unwrap(),
        ];
        if let Some(s) = extra {
            args.push("--schoenberg");
            args.push(s);
        }
        let out = run(&args);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let load = |p: &Path| {
        let file = std::fs::File::open(p.join("distances.csv")).unwrap();
        DistanceMatrix::from_csv(std::io::BufReader::new(file)).unwrap()
    };
    let plain = load(&plain_dir);
    let rooted = load(&root_dir);
    for i in 0..2 {
        for j in 0..2 {
            let expect = plain.matrix()[(i, j)].sqrt();
            assert!((rooted.matrix()[(i, j)] - expect).abs() < 1e-10);
        }
    }
    assert!(rooted.flags().family.contains("power"));
}

#[test]
fn embed_k23_shortest_path_reports_negative_mass() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("k23.csv");
    write(&input, K23);
    let out = run(&[
        "embed",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "shortest_path",
        "--dim",
        "2",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("negative kernel mass"));
    assert!(dir.path().join("embedding.csv").exists());
}

#[test]
fn embed_truncates_to_available_rank_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(&input, FLOW_2X2);
    let out = run(&[
        "embed",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "frozen",
        "--dim",
        "5",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("truncating"));
    assert!(stdout(&out).contains("dims=1"));
}

#[test]
fn anneal_complete_graph_stays_single_group() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("complete.csv");
    write(&input, "id,a,b,c\na,4,4,4\nb,4,4,4\nc,4,4,4\n");
    let out = run(&[
        "anneal",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "chi2",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    for line in trace.lines().skip(1) {
        let m: usize = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(m, 1, "line {line}");
    }
}

#[test]
fn anneal_reference_vi_zero_on_matching_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("blocks.csv");
    write(&input, TWO_BLOCKS);
    let reference = dir.path().join("ref.csv");
    write(&reference, "label,group\na,west\nb,west\nc,east\nd,east\n");
    let out = run(&[
        "anneal",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "chi2",
        "--reference",
        reference.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let first = trace.lines().nth(1).unwrap();
    let fields: Vec<&str> = first.split(',').collect();
    assert_eq!(fields[2], "2");
    let vi: f64 = fields[7].parse().unwrap();
    assert!(vi.abs() < 1e-9, "VI at the matching hard step: {vi}");
}

#[test]
fn anneal_snapshots_written_on_group_count_changes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("blocks.csv");
    write(&input, TWO_BLOCKS);
    let out = run(&[
        "anneal",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "chi2",
        "--t-end",
        "3.0",
        "--snapshot-trel",
        "0.5",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let snaps: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("membership_step"))
        .collect();
    // first step, requested t_rel = 0.5, and the collapse to one group
    assert!(snaps.len() >= 3, "snapshots: {snaps:?}");
    let first = std::fs::read_to_string(dir.path().join("membership_step0000.json")).unwrap();
    let snap: flowclust::MembershipSnapshot = serde_json::from_str(&first).unwrap();
    assert_eq!(snap.labels, vec!["a", "b", "c", "d"]);
    assert_eq!(snap.rho.len(), 2);
    snap.to_membership().unwrap();
}

#[test]
fn ingest_output_reloads_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(&input, FLOW_2X2);
    let out = run(&[
        "ingest",
        "--input",
        input.to_str().unwrap(),
        "--symmetrize",
        "geometric_mean",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // the exchange CSV is itself a valid flow CSV that normalizes to itself
    let second = run(&[
        "ingest",
        "--input",
        dir.path().join("exchange.csv").to_str().unwrap(),
        "--output-dir",
        dir.path().join("again").to_str().unwrap(),
    ]);
    assert!(second.status.success());
    let a = std::fs::read_to_string(dir.path().join("exchange.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("again/exchange.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_flags_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(&input, FLOW_2X2);
    let config = dir.path().join("run.conf");
    write(
        &config,
        &format!(
            "input={}\nfamily=frozen\noutput-dir={}\n",
            input.display(),
            dir.path().display()
        ),
    );
    // config alone
    let out = run(&["distances", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("family=frozen"));
    // flag overrides the family
    let out = run(&[
        "distances",
        "--config",
        config.to_str().unwrap(),
        "--family",
        "chi2",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("family=chi2"));
}

#[test]
fn jump_without_strip_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(&input, FLOW_2X2);
    let out = run(&[
        "distances",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "jump",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--diagonal strip"));

    let out = run(&[
        "distances",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "jump",
        "--diagonal",
        "strip",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn absorption_requires_rho() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(&input, FLOW_2X2);
    let out = run(&[
        "distances",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "absorption",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--rho"));
}

#[test]
fn malformed_input_positions_reported() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    write(&input, "id,a,c\na,1,2\nb,3,4\n");
    let out = run(&[
        "ingest",
        "--input",
        input.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("label mismatch"));
}

#[test]
fn quasi_symmetric_boundary_case_exits_numerical() {
    // a one-sided zero drives the quasi-symmetric MLE to the boundary; the
    // fit stops at the sweep cap and reports a numerical failure
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(&input, "id,a,b\na,5,0\nb,3,4\n");
    let out = run(&[
        "ingest",
        "--input",
        input.to_str().unwrap(),
        "--symmetrize",
        "quasi_symmetric",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("did not converge"));
}

#[test]
fn frozen_distance_spans_n_minus_one_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(
        &input,
        "id,a,b,c,d\na,2,3,1,1\nb,3,2,2,1\nc,1,2,3,2\nd,1,1,2,4\n",
    );
    let out = run(&[
        "embed",
        "--input",
        input.to_str().unwrap(),
        "--family",
        "frozen",
        "--dim",
        "3",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("dims=3"));
    assert!(!stderr(&out).contains("truncating"));
}

#[test]
fn every_output_file_round_trips_through_its_loader() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flow.csv");
    write(
        &input,
        "id,a,b,c,d\na,9,3,1,0\nb,2,8,2,1\nc,1,3,7,2\nd,0,2,1,6\n",
    );
    let out_dir = dir.path().join("out");
    for args in [
        vec!["distances", "--family", "commute"],
        vec!["embed", "--family", "commute", "--dim", "3"],
        vec!["anneal", "--family", "chi2", "--t-ratio", "1.3"],
        vec!["diagnose", "--coords", "2"],
    ] {
        let mut full = args.clone();
        full.extend([
            "--input",
            input.to_str().unwrap(),
            "--output-dir",
            out_dir.to_str().unwrap(),
        ]);
        let out = run(&full);
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
    }

    let open =
        |name: &str| std::io::BufReader::new(std::fs::File::open(out_dir.join(name)).unwrap());

    let d = DistanceMatrix::from_csv(open("distances.csv")).unwrap();
    assert_eq!(d.n(), 4);
    assert_eq!(d.flags().family, "commute");

    let (lab, w, mu, coords) = flowclust::mds::embedding_from_csv(open("embedding.csv")).unwrap();
    assert_eq!(lab.len(), 4);
    assert_eq!(mu.len(), coords.ncols());
    assert!((w.sum() - 1.0).abs() < 1e-9);

    let trace = flowclust::AnnealingTrace::from_csv(open("trace.csv")).unwrap();
    assert!(!trace.records.is_empty());
    assert_eq!(trace.records.last().unwrap().effective_groups, 1);

    let (clab, cf, cx) = flowclust::spectral::coords_from_csv(open("coords.csv")).unwrap();
    assert_eq!(clab.len(), 4);
    assert_eq!(cx.ncols(), 2);
    assert!((cf.sum() - 1.0).abs() < 1e-9);
}

#[test]
fn diagnose_reports_weak_pairs_and_writes_coords() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("path.csv");
    write(&input, PATH3);
    let out = run(&[
        "diagnose",
        "--input",
        input.to_str().unwrap(),
        "--coords",
        "2",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("equivalent_pairs: (a,c)"));
    assert!(text.contains("weakly_equivalent_pairs: (a,c)"));
    assert!(dir.path().join("coords.csv").exists());
}
