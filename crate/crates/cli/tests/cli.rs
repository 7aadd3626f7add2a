use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use modspace::field_io::{read_field, write_field};
use modspace::gabor::{stft, Window};
use modspace::lattice::{GridSpec, SampledField};
use modspace::psdo::{gaussian_symbol, op_from_symbol, QuantizationMatrix};
use num_complex::Complex64;
use tempfile::TempDir;

fn modspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modspace")).args(args).output().unwrap()
}

fn gaussian_field(n: usize) -> SampledField {
    SampledField::from_fn(GridSpec::self_dual(1, n).unwrap(), |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stft_writes_phase_space_file() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("f.msf");
    let out = dir.path().join("v.msf");
    let f = gaussian_field(16);
    write_field(&input, &f).unwrap();
    let o = modspace(&["stft", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::metadata(&out).unwrap().len(), 22 + 16 * 16 * 16);
    let v = read_field(&out).unwrap();
    assert_eq!(v.spec().dim(), 2);
    let direct = stft(&f, &Window::gaussian(f.spec())).unwrap();
    assert_eq!(v.values(), direct.values());
}

#[test]
fn corrupted_magic_is_a_parse_failure() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("f.msf");
    write_field(&input, &gaussian_field(8)).unwrap();
    let mut bytes = fs::read(&input).unwrap();
    bytes[2] = b'?';
    fs::write(&input, bytes).unwrap();
    let o = modspace(&["stft", s(&input), "--out", s(&dir.path().join("v.msf"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn window_size_mismatch() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("f.msf");
    let window = dir.path().join("w.msf");
    write_field(&input, &gaussian_field(16)).unwrap();
    write_field(&window, &gaussian_field(8)).unwrap();
    let o = modspace(&["stft", s(&input), "--window", s(&window), "--out", s(&dir.path().join("v.msf"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn norm_outputs() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("f.msf");
    let zero = dir.path().join("z.msf");
    let manifest = dir.path().join("m.json");
    let bad = dir.path().join("bad.json");
    let f = gaussian_field(32);
    write_field(&input, &f).unwrap();
    write_field(&zero, &SampledField::zeros(*f.spec())).unwrap();
    fs::write(&manifest, r#"{"p": [2], "q": [2]}"#).unwrap();
    fs::write(&bad, r#"{"p": [0], "q": [2]}"#).unwrap();

    let o = modspace(&["norm", s(&zero), "--manifest", s(&manifest)]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "0");

    // Moyal: ‖V_φ f‖₂ = ‖f‖₂ ‖φ‖₂ with grid norms.
    let o = modspace(&["norm", s(&input), "--manifest", s(&manifest)]);
    assert!(o.status.success());
    let value: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    let expect = f.l2_norm() * Window::gaussian(f.spec()).grid_norm();
    assert!((value - expect).abs() <= 1e-6 * expect, "{value} vs {expect}");

    let o = modspace(&["norm", s(&input), "--manifest", s(&bad)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn psdo_apply_matches_library() {
    let dir = TempDir::new().unwrap();
    let g2 = GridSpec::self_dual(2, 16).unwrap();
    let a = gaussian_symbol(&g2, 1, 0);
    let f = gaussian_field(16);
    let (fa, sa, out) = (dir.path().join("f"), dir.path().join("a"), dir.path().join("o"));
    write_field(&fa, &f).unwrap();
    write_field(&sa, &a).unwrap();
    let o = modspace(&["psdo-apply", s(&fa), "--symbol", s(&sa), "--t", "0.5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let expect = op_from_symbol(&a, QuantizationMatrix::WEYL).unwrap().apply(&f).unwrap();
    assert_eq!(read_field(&out).unwrap(), expect);
    let o = modspace(&["psdo-apply", s(&fa), "--symbol", s(&sa), "--t", "0.3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.json");
    let o = modspace(&["verify", "nonsense", "--out", s(&report)]);
    assert_eq!(o.status.code(), Some(2));

    let o = modspace(&["verify", "young", "--deterministic", "--out", s(&report)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("C1") && text.contains("PASS"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["passed"], true);

    // The discrete reduction is exact, so only a tolerance below roundoff fails.
    let tight = dir.path().join("tight.json");
    fs::write(&tight, r#"{"tolerances": {"reduce": 1e-18}}"#).unwrap();
    let o = modspace(&["verify", "reduce", "--manifest", s(&tight), "--out", s(&report)]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn shipped_schema_lists_manifest_fields() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../docs/schemas/verify-manifest.schema.json")).unwrap();
    let manifest = serde_json::to_value(modspace::verify::VerifyManifest::default()).unwrap();
    let keys = |v: &serde_json::Value| {
        let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    };
    assert_eq!(keys(&schema["properties"]), keys(&manifest));
    assert_eq!(keys(&schema["properties"]["tolerances"]["properties"]), keys(&manifest["tolerances"]));
    assert_eq!(keys(&schema["properties"]["schatten"]["properties"]), keys(&manifest["schatten"]));
    assert_eq!(keys(&schema["properties"]["trace"]["properties"]), keys(&manifest["trace"]));
}

#[test]
fn field_files_round_trip_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    write_field(&a, &gaussian_field(12)).unwrap();
    write_field(&b, &read_field(&a).unwrap()).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
