use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use recimap::maharam::MaharamClaim;
use recimap::{builtin_fixtures, fixture, Scalar, SystemConfig};
use recimap_cli::{analyze, AnalysisReport, CliError, Conservativity, Parameters, Verdict};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_recimap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("RECIMAP_BRANCH_CAP").output().expect("binary runs")
}

fn emit_fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fixtures", "--emit", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn analyze_file(path: &Path, extra: &[&str]) -> (AnalysisReport, Output) {
    let mut args = vec!["analyze", path_str(path)];
    args.extend_from_slice(extra);
    let out = run(&args);
    let report = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}\nstderr: {}", String::from_utf8_lossy(&out.stderr));
    });
    (report, out)
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

#[test]
fn fixture_listing() {
    let out = run(&["fixtures", "--list"]);
    assert!(out.status.success());
    let names: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(str::to_string).collect();
    assert_eq!(names.len(), 7);
    assert!(names.contains(&"pair_rotation_sqrt2".to_string()));
}

#[test]
fn emitted_fixtures_reparse() {
    let dir = emit_fixtures();
    let read = |name: &str| -> SystemConfig {
        serde_json::from_str(&fs::read_to_string(dir.path().join(format!("{name}.json"))).unwrap()).unwrap()
    };
    assert_eq!(read("wandering").lengths, vec![q(1, 9), q(2, 9), q(4, 9), q(2, 9)]);
    assert_eq!(read("nonsurjective").lengths, vec![q(1, 6), q(1, 6), q(1, 6), q(1, 2)]);
    for cfg in builtin_fixtures() {
        assert_eq!(read(&cfg.name), cfg);
    }
}

#[test]
fn unwritable_emit_dir() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = run(&["fixtures", "--emit", path_str(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_wandering() {
    let dir = emit_fixtures();
    let (report, out) = analyze_file(&dir.path().join("wandering.json"), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report.first_return.return_times.get(&1), Some(&q(2, 9)));
    assert_eq!(report.first_return.return_times.get(&3), Some(&q(1, 9)));
    assert_eq!(report.first_return.return_times.len(), 2);
    match &report.conservativity {
        Conservativity::WanderingSetFound { wandering, horizon, .. } => {
            assert_eq!(wandering.lo(), &q(1, 9));
            assert_eq!(wandering.hi(), &q(2, 9));
            assert!(*horizon >= 20);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn analyze_identity() {
    let dir = emit_fixtures();
    let (report, _) = analyze_file(&dir.path().join("identity.json"), &["--strict"]);
    assert_eq!(report.first_return.return_times.into_iter().collect::<Vec<_>>(), vec![(2, q(1, 4))]);
    assert_eq!(report.conservativity, Conservativity::ConservativeCertified);
}

#[test]
fn analyze_sqrt2_rotation() {
    let dir = emit_fixtures();
    let (report, _) = analyze_file(&dir.path().join("pair_rotation_sqrt2.json"), &[]);
    assert_eq!(report.ergodicity.verdict, Verdict::ErgodicCertified);
    assert!(matches!(report.maharam.claim, MaharamClaim::NonErgodic { .. }));
    assert!(report.ergodicity.rotation.irrational == Some(true));
}

#[test]
fn strict_mode_flags_unknown() {
    let dir = emit_fixtures();
    let path = dir.path().join("wandering.json");
    let (report, out) = analyze_file(&path, &["--strict"]);
    assert!(report.has_unknown());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"name\": \"bad\",\n  \"lengths\": [\"1/2\" \"1/2\"]\n}\n").unwrap();
    let out = run(&["analyze", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.json:3:"), "{err}");

    fs::write(&path, r#"{"name":"x","lengths":["1/2","1/3"],"permutation":[0,1],"involution_s":"1/3"}"#).unwrap();
    assert_eq!(run(&["analyze", path_str(&path)]).status.code(), Some(1));

    fs::write(&path, r#"{"name":"x","lengths":["1/3+1/4*sqrt(3)"],"permutation":[0],"involution_s":"1/3"}"#).unwrap();
    let out = run(&["analyze", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("is not in"));
}

#[test]
fn branch_cap_env() {
    let dir = emit_fixtures();
    let path = dir.path().join("wandering.json");
    let out = bin().args(["analyze", path_str(&path)]).env("RECIMAP_BRANCH_CAP", "1").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("more than 1 pieces"));
    let out = bin().args(["analyze", path_str(&path)]).env("RECIMAP_BRANCH_CAP", "lots").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_code_contract() {
    assert_eq!(CliError::InvariantViolation("x".into()).exit_code(), 3);
    assert_eq!(CliError::MissingZeta("x".into()).exit_code(), 1);
}

fn strip_timing(mut r: AnalysisReport) -> AnalysisReport {
    r.timing_ms = 0.0;
    r
}

#[test]
fn analyze_is_deterministic_and_round_trips() {
    let dir = emit_fixtures();
    let path = dir.path().join("pair_rotation.json");
    let (a, _) = analyze_file(&path, &[]);
    let (b, _) = analyze_file(&path, &[]);
    let (a, b) = (strip_timing(a), strip_timing(b));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let back: AnalysisReport = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(back, a);
    assert_eq!(a.schema_version, 1);
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn default_params() -> Parameters {
    Parameters { budget: 64, orbit_steps: 2_000, probes: 4, ratio_steps: 500, branch_cap: 1_000_000 }
}

#[test]
fn golden_reports() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for cfg in builtin_fixtures() {
        let report = strip_timing(analyze(&cfg, &default_params()).unwrap());
        let text = serde_json::to_string_pretty(&report).unwrap() + "\n";
        let path = golden_dir().join(format!("{}.json", cfg.name));
        if update {
            fs::create_dir_all(golden_dir()).unwrap();
            fs::write(&path, &text).unwrap();
            continue;
        }
        let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(text, expected, "golden mismatch for {}", cfg.name);
    }
}

fn render(config: &Path, figure: &str) -> String {
    let out = run(&["render", path_str(config), "--figure", figure]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn row_ticks(svg: &str, row: &str) -> Vec<f64> {
    let key = format!("data-row=\"{row}\" data-value=\"");
    svg.match_indices(&key)
        .map(|(i, _)| {
            let rest = &svg[i + key.len()..];
            rest[..rest.find('"').unwrap()].parse::<Scalar>().unwrap().to_f64()
        })
        .collect()
}

#[test]
fn render_figures() {
    let dir = emit_fixtures();
    let fig1 = dir.path().join("figure1.json");
    let map = render(&fig1, "map");
    assert_eq!(row_ticks(&map, "domain"), [0.0, 0.3, 0.8, 1.0]);
    assert_eq!(row_ticks(&map, "image"), [0.0, 0.2, 0.7, 1.0]);
    assert_eq!(map, render(&fig1, "map"));

    let surface = render(&fig1, "suspension");
    assert!(surface.contains("data-closed=\"true\""));

    let maharam = render(&dir.path().join("pair_rotation.json"), "maharam");
    assert_eq!(maharam.matches("class=\"level\"").count(), 3);
    assert!(maharam.contains("data-from=\"0\" data-to=\"1\""));
    assert!(maharam.contains("data-from=\"0\" data-to=\"-1\""));

    let fs_svg = render(&dir.path().join("nonsurjective.json"), "first-return");
    assert!(fs_svg.contains("class=\"unreached\" data-row=\"image\""));

    let out = run(&["render", path_str(&dir.path().join("identity.json")), "--figure", "suspension"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn render_to_file() {
    let dir = emit_fixtures();
    let target = dir.path().join("fig.svg");
    let cfg = dir.path().join("pair_rotation.json");
    let out = run(&["render", path_str(&cfg), "--figure", "composition", "--out", path_str(&target)]);
    assert!(out.status.success());
    let svg = fs::read_to_string(target).unwrap();
    assert!(svg.starts_with("<?xml"));
    let got = row_ticks(&svg, "image");
    for (g, w) in got.iter().zip([0.0, 0.146, 0.333, 0.516, 1.0]) {
        assert!((g - w).abs() < 1e-3, "{g} vs {w}");
    }
    assert!(fixture("pair_rotation").is_some());
}
