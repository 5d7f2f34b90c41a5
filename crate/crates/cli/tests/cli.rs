use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_entcat");

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(name: &str, text: &str) -> PathBuf {
    let p = tmp(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn entcat(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("ENTCAT_SEED")
        .env_remove("ENTCAT_SAMPLES")
        .env_remove("ENTCAT_OUT")
        .output()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identity_catalysis_has_zero_drift() {
    let out = tmp("identity.json");
    let scn = scenarios().join("catalyze_identity.toml");
    let o = entcat(&["catalyze", "--scenario", path_str(&scn), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = entcat_cli::Report::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let drift = r.results["instances"][0]["certificate"]["catalyst_drift"].as_f64().unwrap();
    assert!(drift < 1e-12);
    assert_eq!(r.command, "catalyze");
    assert_eq!(r.scenario["n"], 2);
}

#[test]
fn malformed_scenario_exits_with_input_error() {
    let p = write("malformed.toml", "command = \"distill\"\ngrid_points = \n");
    let o = entcat(&["run", "--scenario", path_str(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn unknown_keys_are_input_errors() {
    let p = write("unknown.toml", "command = \"distill\"\ngrid_pionts = 10\n");
    let o = entcat(&["run", "--scenario", path_str(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid_pionts"));

    let p = write("unknown_family.toml", "command = \"bounds\"\n[[states]]\nfamily = \"werner\"\nfidelity = 0.9\nfidelty = 1\n");
    assert_eq!(entcat(&["run", "--scenario", path_str(&p)]).status.code(), Some(2));
}

#[test]
fn missing_files_are_input_errors() {
    let o = entcat(&["run", "--scenario", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let p = write("missing_state.toml", "command = \"bounds\"\n[[states]]\nfamily = \"file\"\npath = \"nope.state\"\n");
    assert_eq!(entcat(&["run", "--scenario", path_str(&p)]).status.code(), Some(2));
}

#[test]
fn subcommand_must_match_scenario() {
    let scn = scenarios().join("distill.toml");
    let o = entcat(&["bounds", "--scenario", path_str(&scn)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_checks_exit_with_one() {
    // the stated expectation is wrong on purpose
    let p = write(
        "wrong_expectation.toml",
        "command = \"pure-rate\"\nexpect_convertible = true\n[source]\nfamily = \"jp-example\"\n[target]\nfamily = \"jp-example\"\npart = \"target\"\n",
    );
    let out = tmp("wrong_expectation.json");
    let o = entcat(&["run", "--scenario", path_str(&p), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
    let r = entcat_cli::Report::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!r.pass);
}

#[test]
fn rejected_computations_exit_with_three() {
    let p = write("not_distillable.toml", "command = \"distill\"\ngrid_points = 3\nf_initial = 0.5\nf_target = 0.9\n");
    assert_eq!(entcat(&["run", "--scenario", path_str(&p)]).status.code(), Some(3));
}

#[test]
fn report_goes_to_stdout_without_out() {
    let p = write("stdout.toml", "command = \"distill\"\ngrid_points = 3\n");
    let o = entcat(&["distill", "--scenario", path_str(&p)]);
    assert_eq!(o.status.code(), Some(0));
    let r = entcat_cli::Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(r.series["distill_sweep"].rows.len(), 3);
}

#[test]
fn seed_and_samples_overrides_are_recorded() {
    let p = write("override.toml", "command = \"verify-lemma1\"\nseed = 1\nsamples = 50\nfvdg_pairs = 10\n");
    let flag = entcat(&["run", "--scenario", path_str(&p), "--seed", "8", "--samples", "20"]);
    assert_eq!(flag.status.code(), Some(0));
    let a = entcat_cli::Report::from_json(&String::from_utf8(flag.stdout).unwrap()).unwrap();
    assert_eq!(a.seed, 8);
    assert_eq!(a.scenario["samples"], 20);
    assert_eq!(a.results["lemma1"]["accepted"], 20);

    let env = Command::new(BIN)
        .args(["run", "--scenario", path_str(&p)])
        .env("ENTCAT_SEED", "8")
        .env("ENTCAT_SAMPLES", "20")
        .env_remove("ENTCAT_OUT")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    let b = entcat_cli::Report::from_json(&String::from_utf8(env.stdout).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn plot_emits_csv_and_rejects_missing_series() {
    let p = write("plot.toml", "command = \"distill\"\ngrid_points = 4\n");
    let report = tmp("plot.json");
    assert_eq!(
        entcat(&["run", "--scenario", path_str(&p), "--out", path_str(&report)]).status.code(),
        Some(0)
    );
    let o = entcat(&["plot", "--report", path_str(&report), "--kind", "distill-sweep"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "f_in,f_out,p,expected_copies");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0.25,0.25,"));

    let o = entcat(&["plot", "--report", path_str(&report), "--kind", "decoupling-scatter"]);
    assert_eq!(o.status.code(), Some(1));

    // a report with no series at all
    let p = write("noseries.toml", "command = \"pure-rate\"\n[source]\nfamily = \"singlet\"\n[target]\nfamily = \"singlet\"\n");
    let empty = tmp("noseries.json");
    assert_eq!(
        entcat(&["run", "--scenario", path_str(&p), "--out", path_str(&empty)]).status.code(),
        Some(0)
    );
    let o = entcat(&["plot", "--report", path_str(&empty), "--kind", "distill-sweep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no plottable series"));
}

#[test]
fn decoupling_scatter_has_one_row_per_sample() {
    let p = write("scatter.toml", "command = \"verify-lemma1\"\nsamples = 30\nfvdg_pairs = 0\n");
    let report = tmp("scatter.json");
    assert_eq!(
        entcat(&["run", "--scenario", path_str(&p), "--out", path_str(&report)]).status.code(),
        Some(0)
    );
    let o = entcat(&["plot", "--report", path_str(&report), "--kind", "decoupling_scatter"]);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("eps,lhs,rhs"));
    assert_eq!(csv.lines().count(), 31);
}

#[test]
fn every_shipped_scenario_parses() {
    for entry in std::fs::read_dir(scenarios()).unwrap() {
        let path = entry.unwrap().path();
        let scn = entcat_cli::Scenario::load(&path, None).unwrap();
        assert!(!scn.echo().is_null(), "{}", path.display());
    }
}
