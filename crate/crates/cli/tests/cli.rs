use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use npm_core::rng;
use tempfile::TempDir;

fn npm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npm"))
        .args(args)
        .output()
        .expect("run npm")
}

fn stdout(args: &[&str]) -> String {
    let out = npm(args);
    assert!(
        out.status.success(),
        "npm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    npm(args).status.code().expect("exit code")
}

fn random_bytes(seed: u64, len: usize) -> Vec<u8> {
    use rand::RngCore;
    let mut bytes = vec![0u8; len];
    rng::seeded(seed).fill_bytes(&mut bytes);
    bytes
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Noise-free efficiency of an m-point zero-signal family, from scratch.
fn family_efficiency(m: usize, p: f64) -> f64 {
    let q = (1.0 - p) / (m - 1) as f64;
    let h = -p * p.log2() - (m - 1) as f64 * q * q.log2();
    h / (1.0 - p)
}

/// CSV rows as (p, information, energy, efficiency) with the header checked.
fn parse_curves(csv: &str) -> Vec<[f64; 4]> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,information,energy,efficiency"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

fn row_at(rows: &[[f64; 4]], p: f64) -> [f64; 4] {
    *rows
        .iter()
        .find(|r| (r[0] - p).abs() < 1e-12)
        .unwrap_or_else(|| panic!("no row at p = {p}"))
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, bytes).unwrap();
        p
    }
}

#[test]
fn encode_decode_is_byte_identical() {
    let files = Files::new();
    for (i, (kind, p, rate, len)) in [
        ("hexagonal", "0.84", "none", 3000),
        ("binary", "0.9", "none", 700),
        ("ternary", "0.6", "none", 0),
        ("hexagonal", "0.8", "1/2", 1000),
        ("ternary", "0.5", "2/3", 513),
        ("binary", "0.7", "1/2", 0),
    ]
    .into_iter()
    .enumerate()
    {
        let data = random_bytes(i as u64, len);
        let input = files.write("in.bin", &data);
        let (frame, back) = (files.path("frame.npm"), files.path("back.bin"));
        stdout(&[
            "encode", path_str(&input), "--kind", kind, "--p", p, "--R", "11", "--rate", rate, "--out",
            path_str(&frame),
        ]);
        stdout(&["decode", path_str(&frame), "--rate", rate, "--out", path_str(&back)]);
        assert_eq!(fs::read(&back).unwrap(), data, "{kind} p={p} rate={rate}");
    }
}

#[test]
fn encoded_size_tracks_entropy() {
    // A 10 kB file should need about 8·10⁴ / h(0.84) symbols. One file
    // scatters by roughly 0.7%, so the 1% bound is applied to the mean of
    // four files and each file is held to 3σ.
    let files = Files::new();
    let m = 7usize;
    let p = 0.84;
    let q = (1.0 - p) / (m - 1) as f64;
    let h = -p * p.log2() - (m - 1) as f64 * q * q.log2();
    let expected = 80_000.0 / h;
    let ratios: Vec<f64> = (0..4)
        .map(|seed| {
            let input = files.write("in.bin", &random_bytes(100 + seed, 10_000));
            let frame = files.path("frame.npm");
            stdout(&["encode", path_str(&input), "--kind", "hexagonal", "--p", "0.84", "--out", path_str(&frame)]);
            // Header: magic, R, m, m counts, payload bits, final state.
            let body = fs::read(&frame).unwrap().len() - (3 + 2 * m + 6);
            body as f64 / expected
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 1.0).abs() < 0.01, "{ratios:?}");
    assert!(ratios.iter().all(|r| (r - 1.0).abs() < 0.021), "{ratios:?}");
}

#[test]
fn noise_free_hexagonal_curve_has_uniform_anchor() {
    let rows = parse_curves(&stdout(&["curves", "--kind", "hexagonal", "--grid", "0:0.001:1"]));
    assert_eq!(rows.len(), 1002);
    let upm = row_at(&rows, 1.0 / 7.0);
    assert!((upm[3] - family_efficiency(7, 1.0 / 7.0)).abs() < 1e-9);
    assert!((upm[3] - 3.275).abs() < 1e-3, "{upm:?}");
    assert!((row_at(&rows, 0.5)[3] - family_efficiency(7, 0.5)).abs() < 1e-9);
}

#[test]
fn noisy_hexagonal_curve_has_uniform_anchor() {
    let rows = parse_curves(&stdout(&["curves", "--kind", "hexagonal", "--noise", "0.1", "--grid", "0:0.25:1"]));
    assert_eq!(rows.len(), 6);
    let upm = row_at(&rows, 1.0 / 7.0);
    assert!((upm[3] - 2.568).abs() < 0.01, "{upm:?}");
    // Zero energy at p = 1 reports the limiting efficiency 1/(N ln 4).
    let last = row_at(&rows, 1.0);
    assert_eq!(last[2], 0.0);
    assert!((last[3] - 1.0 / (0.1 * 4f64.ln())).abs() < 1e-9);
}

#[test]
fn binary_endpoints_carry_no_information() {
    let csv = stdout(&["curves", "--kind", "binary", "--grid", "0,1"]);
    let mut lines = csv.lines().skip(1);
    assert_eq!(lines.next(), Some("0,0,1,0"));
    assert_eq!(lines.next(), Some("1,0,0,inf"));
}

#[test]
fn curves_json_keys_are_stable() {
    let files = Files::new();
    let out = files.path("c.json");
    stdout(&["curves", "--kind", "ternary", "--grid", "0.5,1", "--format", "json", "--out", path_str(&out)]);
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let keys: Vec<&str> = rows[0].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["efficiency", "efficiency_kind", "energy", "information", "p"]);
    assert_eq!(rows[1]["efficiency_kind"], "unbounded");
    assert!(rows[1]["efficiency"].is_null());
}

#[test]
fn optimize_anchors() {
    for (kind, m) in [("binary", 2.0), ("ternary", 3.0), ("hexagonal", 7.0)] {
        let out = stdout(&["optimize", "--kind", kind, "--multiple", "1", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["p"].as_f64().unwrap() - 1.0 / m).abs() < 1e-12, "{kind}: {out}");
    }
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["optimize", "--kind", "hexagonal", "--format", "json"])).unwrap();
    let p = v["p"].as_f64().unwrap();
    assert!((p - 0.84).abs() < 0.01, "{v}");
    assert!((family_efficiency(7, p) / family_efficiency(7, 1.0 / 7.0) - 2.0).abs() < 1e-6);
    assert!((v["information_ratio"].as_f64().unwrap() - 2.7).abs() < 0.1, "{v}");
}

#[test]
fn exit_codes() {
    let files = Files::new();
    let input = files.write("in.bin", &random_bytes(7, 200));
    let frame = files.path("frame.npm");
    let out = files.path("out.bin");
    let (input, frame_s, out_s) = (path_str(&input), path_str(&frame), path_str(&out));

    assert_eq!(exit_code(&["curves", "--kind", "octagonal"]), 2);
    assert_eq!(exit_code(&["curves", "--kind", "binary", "--grid", "1:0.1:0"]), 2);
    assert_eq!(exit_code(&["curves", "--kind", "binary", "--noise", "-1", "--grid", "0.5"]), 2);
    assert_eq!(exit_code(&["curves", "--kind", "binary", "--grid", "0.5,1.5"]), 2);
    assert_eq!(exit_code(&["optimize", "--kind", "binary", "--multiple", "0.5"]), 2);
    assert_eq!(exit_code(&["tables", "--kind", "binary", "--p", "0.5", "--R", "40"]), 2);
    assert_eq!(exit_code(&["decode", "/nonexistent/frame", "--out", out_s]), 2);

    assert_eq!(exit_code(&["optimize", "--kind", "hexagonal", "--multiple", "100"]), 3);

    stdout(&["encode", input, "--kind", "hexagonal", "--p", "0.8", "--rate", "1/2", "--out", frame_s]);
    // Channel decoding without a seed or without redundancy is a configuration error.
    assert_eq!(exit_code(&["decode", frame_s, "--rate", "1/2", "--channel", "0.01", "--out", out_s]), 2);
    assert_eq!(exit_code(&["decode", frame_s, "--channel", "0.01", "--seed", "1", "--out", out_s]), 2);
    // Hopeless noise under a small budget.
    assert_eq!(
        exit_code(&[
            "decode", frame_s, "--rate", "1/2", "--channel", "1", "--seed", "1", "--budget", "5000", "--out", out_s,
        ]),
        5
    );

    let mut bytes = fs::read(&frame).unwrap();
    let last = bytes.len() - 1;
    bytes[last] = if bytes[last] == 0 { 1 } else { 0 };
    fs::write(&frame, &bytes).unwrap();
    assert_eq!(exit_code(&["decode", frame_s, "--rate", "1/2", "--out", out_s]), 4);
    assert_eq!(exit_code(&["decode", input, "--out", out_s]), 4);
}

#[test]
fn channel_decoding_recovers_fixture_seeds() {
    let seeds: Vec<u64> = include_str!("fixtures/channel_seeds.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().unwrap())
        .collect();
    let files = Files::new();
    let data = random_bytes(2024, 256);
    let input = files.write("in.bin", &data);
    let frame = files.path("frame.npm");
    stdout(&[
        "encode", path_str(&input), "--kind", "hexagonal", "--p", "0.8", "--rate", "1/2", "--out", path_str(&frame),
    ]);
    let recovered = seeds
        .iter()
        .filter(|seed| {
            let out = files.path(&format!("out{seed}.bin"));
            let status = npm(&[
                "decode", path_str(&frame), "--rate", "1/2", "--channel", "0.01", "--seed", &seed.to_string(),
                "--out", path_str(&out),
            ])
            .status;
            status.success() && fs::read(&out).unwrap() == data
        })
        .count();
    assert!(recovered * 100 >= 99 * seeds.len(), "{recovered}/{}", seeds.len());
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = ["simulate", "--kind", "hexagonal", "--p", "0.8", "--noise", "0.03", "--seed", "9", "--bits", "2000"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    for key in ["energy", "symbols", "bits", "ber_pre", "ber_post", "bits_per_energy", "nodes_expanded", "success"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let curve = ["curves", "--kind", "ternary", "--noise", "0.5", "--grid", "0:0.2:1"];
    let threaded = stdout(&curve);
    let single = Command::new(env!("CARGO_BIN_EXE_npm"))
        .args(curve)
        .env("NPM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(single.stdout).unwrap(), threaded);
}

#[test]
fn tables_dump() {
    let csv = stdout(&["tables", "--kind", "binary", "--p", "0.75", "--R", "2"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("S,symbol,nbBits,newS"));
    assert_eq!(lines.count(), 4);
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["tables", "--kind", "hexagonal", "--p", "0.8", "--R", "8", "--format", "json"]))
            .unwrap();
    let counts: u64 = v["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(counts, 256);
    assert_eq!(v["encoding"].as_array().unwrap().len(), 256);
}
