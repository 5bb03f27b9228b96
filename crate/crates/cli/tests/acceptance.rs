//! Acceptance suite: one line per criterion, `PASS`, `FAIL` or `NOT EVALUATED`.
//!
//! Criteria listed in [`KNOWN_FAILURES`] are reported as failures but do not
//! fail the run; each has an analysis in the README.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use sha2::{Digest, Sha256};
use slepiankit::concentration::fill_matrix_general;
use slepiankit::functions::{random_bandlimited, SplitMix64};
use slepiankit::harmonic::harmonics_at;
use slepiankit::mesh::{
    graph_laplacian, mesh_basis, mesh_laplacian, mesh_slepian, write_off, LaplacianKind, Mesh,
};
use slepiankit::wavelets::{analysis, build_tiling, synthesis};
use slepiankit::{
    build_matrix_general, build_matrix_polar_cap, eigendecompose, forward_sht, inverse_sht, make_grid, Bandlimit,
    ConcentrationMatrix, Region, RegionQuadrature, SlepianBasis, TilingParams,
};

mod tol {
    pub const SHT_ROUND_TRIP: f64 = 1e-10;
    pub const SHT_BUDGET_SECS: u64 = 60;
    pub const CAP_TRACE_REL: f64 = 1e-6;
    pub const BOX_TRACE_REL: f64 = 1e-4;
    pub const TRACE_BUDGET_SECS: u64 = 120;
    pub const FAST_PATH: f64 = 1e-6;
    pub const EIGEN_RANGE: f64 = 1e-10;
    pub const RESIDUAL_REL: f64 = 1e-9;
    pub const WHOLE_SPHERE_IDENTITY: f64 = 1e-10;
    pub const DOUBLE_ORTHOGONALITY: f64 = 1e-6;
    pub const PARTITION: f64 = 1e-10;
    pub const RECONSTRUCTION: f64 = 1e-10;
    pub const SPEEDUP: f64 = 2.0;
    pub const SPEEDUP_MIN_CORES: usize = 4;
    pub const EXPONENT: f64 = 4.0;
    pub const EXPONENT_SLACK: f64 = 0.1;
    pub const PATH_EIGEN: f64 = 1e-10;
    pub const MESH_IDENTITY: f64 = 1e-8;
    pub const MESH_TRACE: f64 = 1e-8;
    pub const CONSTANT_FIELD: f64 = 1e-8;
    pub const CLI_SHANNON: f64 = 1e-9;
}

/// Criteria that are implemented as stated and fail for mathematical reasons.
const KNOWN_FAILURES: &[&str] = &["9c"];

enum Outcome {
    Pass(String),
    Fail(String),
    NotEvaluated(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn bl(l: usize) -> Bandlimit {
    Bandlimit::new(l).unwrap()
}

fn within(d: Duration, secs: u64) -> bool {
    d <= Duration::from_secs(secs)
}

fn c1_sht_round_trip() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for l in [4, 8, 16, 32] {
        let grid = make_grid(bl(l));
        for seed in 0..20 {
            let c = random_bandlimited(bl(l), 7000 + seed, false);
            let back = forward_sht(&inverse_sht(&c, &grid).unwrap()).unwrap();
            for (a, b) in back.values().iter().zip(c.values()) {
                worst = worst.max((a - b).norm());
            }
        }
    }
    let t = start.elapsed();
    check(
        worst <= tol::SHT_ROUND_TRIP && within(t, tol::SHT_BUDGET_SECS),
        format!("max error {worst:.2e}, {:.2} s", t.as_secs_f64()),
    )
}

fn c2_trace_identity() -> Outcome {
    let start = Instant::now();
    let cap = SlepianBasis::compute(&Region::polar_cap(PI / 3.0).unwrap(), bl(16)).unwrap();
    let cap_sum: f64 = cap.eigenvalues().iter().sum();
    let cap_rel = (cap_sum - 64.0).abs() / 64.0;
    let half = SlepianBasis::compute(&Region::lat_lon_box(0.0, PI, 0.0, PI).unwrap(), bl(8)).unwrap();
    let box_sum: f64 = half.eigenvalues().iter().sum();
    let box_rel = (box_sum - 32.0).abs() / 32.0;
    let t = start.elapsed();
    check(
        cap_rel <= tol::CAP_TRACE_REL && box_rel <= tol::BOX_TRACE_REL && within(t, tol::TRACE_BUDGET_SECS),
        format!(
            "cap Σλ = {cap_sum:.10} (rel {cap_rel:.1e}), box Σλ = {box_sum:.10} (rel {box_rel:.1e}), {:.2} s",
            t.as_secs_f64()
        ),
    )
}

fn max_entry_difference(a: &ConcentrationMatrix, b: &ConcentrationMatrix) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries().iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

fn c3_fast_path() -> Outcome {
    let mut worst: f64 = 0.0;
    for deg in [30.0f64, 60.0, 90.0] {
        let t = deg.to_radians();
        let fast = build_matrix_polar_cap(t, bl(16)).unwrap();
        let generic = build_matrix_general(&Region::polar_cap(t).unwrap(), bl(16)).unwrap();
        worst = worst.max(max_entry_difference(&fast, &generic));
    }
    check(worst <= tol::FAST_PATH, format!("max entry difference {worst:.2e}"))
}

fn residual_stats(matrix: &ConcentrationMatrix, basis: &SlepianBasis) -> (f64, f64) {
    let d = matrix.entries();
    let norm = basis.raw_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for (p, &lambda) in basis.raw_eigenvalues().iter().enumerate() {
        let s = basis.vectors().column(p);
        let r = d * s - s * Complex64::new(lambda, 0.0);
        worst = worst.max(r.norm() / norm);
    }
    let (lo, hi) = basis
        .raw_eigenvalues()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    (worst, lo.min(1.0 - hi))
}

fn c4_eigen_contract() -> Outcome {
    let regions = [
        Region::polar_cap(PI / 3.0).unwrap(),
        Region::lat_lon_box(0.3, 1.7, 0.4, 2.9).unwrap(),
        Region::polar_cap(2.0 * PI / 3.0).unwrap(),
    ];
    let mut worst_residual: f64 = 0.0;
    let mut margin = f64::INFINITY;
    for region in &regions {
        let b = bl(16);
        let matrix = match region {
            Region::PolarCap { theta_max } => build_matrix_polar_cap(*theta_max, b).unwrap(),
            _ => build_matrix_general(region, b).unwrap(),
        };
        let basis = eigendecompose(&matrix, region).unwrap();
        let (r, m) = residual_stats(&matrix, &basis);
        worst_residual = worst_residual.max(r);
        margin = margin.min(m);
    }
    let whole = build_matrix_general(&Region::whole_sphere(), bl(16)).unwrap();
    let n = whole.entries().nrows();
    let mut identity: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            identity = identity.max((whole.entries()[(i, j)] - target).norm());
        }
    }
    check(
        worst_residual <= tol::RESIDUAL_REL && margin >= -tol::EIGEN_RANGE && identity <= tol::WHOLE_SPHERE_IDENTITY,
        format!(
            "max residual/‖D‖ {worst_residual:.2e}, range margin {margin:.2e}, whole-sphere |D − I| {identity:.2e}"
        ),
    )
}

fn c5_double_orthogonality() -> Outcome {
    let b = bl(16);
    let region = Region::polar_cap(PI / 3.0).unwrap();
    let basis = SlepianBasis::compute(&region, b).unwrap();
    let quad = RegionQuadrature::new(&region, b).unwrap();
    let count = 8;
    let samples: Vec<Vec<Complex64>> = quad
        .points()
        .iter()
        .map(|&(t, p)| {
            let ys = harmonics_at(b, t, p);
            (0..count)
                .map(|k| basis.vectors().column(k).iter().zip(&ys).map(|(s, y)| s * y).sum())
                .collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for p in 0..count {
        for q in 0..count {
            let g: Complex64 = samples
                .iter()
                .zip(quad.weights())
                .map(|(s, w)| s[p] * s[q].conj() * *w)
                .sum();
            let target = if p == q { basis.eigenvalues()[p] } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    check(worst <= tol::DOUBLE_ORTHOGONALITY, format!("max |G − Λ| {worst:.2e}"))
}

fn c6_wavelets() -> Outcome {
    let mut partition: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for (b, j_min) in [(2.0, 0), (2.0, 2), (3.0, 0)] {
        for t in [17, 64, 100] {
            let tiling = build_tiling(TilingParams::new(b, j_min, t).unwrap()).unwrap();
            for v in tiling.partition() {
                partition = partition.max((v - 1.0).abs());
            }
            let mut rng = SplitMix64::new(t as u64 + j_min as u64);
            for _ in 0..20 {
                let f: Vec<Complex64> = (0..t).map(|_| Complex64::new(rng.next_normal(), rng.next_normal())).collect();
                let back = synthesis(&analysis(&f, &tiling), &tiling).unwrap();
                for (x, y) in back.iter().zip(&f) {
                    recon = recon.max((x - y).norm());
                }
            }
        }
    }
    check(
        partition <= tol::PARTITION && recon <= tol::RECONSTRUCTION,
        format!("partition defect {partition:.2e}, reconstruction error {recon:.2e}"),
    )
}

fn c7_determinism() -> Outcome {
    let region = Region::lat_lon_box(0.2, 1.9, 0.5, 3.5).unwrap();
    let timed = |workers: usize| {
        let start = Instant::now();
        let fill = fill_matrix_general(&region, bl(16), Some(workers)).unwrap();
        (fill.matrix, start.elapsed())
    };
    let (m1, t1) = timed(1);
    let (m2, _) = timed(2);
    let (m8, t8) = timed(8);
    let identical = m1.entries() == m2.entries() && m1.entries() == m8.entries();
    let cores = std::thread::available_parallelism().map_or(1, usize::from);
    let speedup = t1.as_secs_f64() / t8.as_secs_f64();
    let detail = format!("bit-identical across 1/2/8 workers: {identical}, speedup 1→8 {speedup:.2}×");
    if !identical {
        return Outcome::Fail(detail);
    }
    if cores < tol::SPEEDUP_MIN_CORES {
        return Outcome::NotEvaluated(format!(
            "{detail}; speedup needs {} cores, found {cores}",
            tol::SPEEDUP_MIN_CORES
        ));
    }
    check(speedup >= tol::SPEEDUP, detail)
}

fn c8_scaling() -> Outcome {
    let region = Region::lat_lon_box(0.2, 1.9, 0.5, 3.5).unwrap();
    let points: Vec<(f64, f64)> = [4usize, 8, 16]
        .iter()
        .map(|&l| {
            let n = fill_matrix_general(&region, bl(l), None).unwrap().entries_computed;
            ((l as f64).ln(), (n as f64).ln())
        })
        .collect();
    let mx = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    check(
        (slope - tol::EXPONENT).abs() <= tol::EXPONENT_SLACK,
        format!("fitted exponent {slope:.3}"),
    )
}

fn icosphere_setup() -> (Mesh, slepiankit::mesh::MeshBasis, Vec<usize>) {
    let mesh = Mesh::icosphere(2);
    let lap = mesh_laplacian(&mesh, LaplacianKind::Cotangent).unwrap();
    let basis = mesh_basis(&lap, mesh.vertex_weights(), 50, true).unwrap();
    let hemisphere: Vec<usize> = (0..mesh.len()).filter(|&v| mesh.vertices()[v][2] > 0.0).collect();
    (mesh, basis, hemisphere)
}

fn c9a_path_graph() -> Outcome {
    let lap = graph_laplacian(3, &[(0, 1), (1, 2)]).unwrap();
    let basis = mesh_basis(&lap, &[1.0; 3], 3, true).unwrap();
    let worst = basis
        .eigenvalues()
        .iter()
        .zip([0.0, 1.0, 3.0])
        .fold(0.0f64, |m, (v, e)| m.max((v - e).abs()));
    check(worst <= tol::PATH_EIGEN, format!("eigenvalues {:?}, max error {worst:.2e}", basis.eigenvalues()))
}

fn c9b_whole_mesh() -> Outcome {
    let (mesh, basis, _) = icosphere_setup();
    let all: Vec<usize> = (0..mesh.len()).collect();
    let s = mesh_slepian(&basis, &all).unwrap();
    let k = basis.size();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s.matrix()[(i, j)] - target).abs());
        }
    }
    check(worst <= tol::MESH_IDENTITY, format!("{} vertices, K = {k}, max |C − I| {worst:.2e}", mesh.len()))
}

fn c9c_mesh_trace() -> Outcome {
    let (mesh, basis, region) = icosphere_setup();
    let s = mesh_slepian(&basis, &region).unwrap();
    let trace: f64 = s.raw_eigenvalues().iter().sum();
    let projection: f64 = region
        .iter()
        .map(|&v| (0..basis.size()).map(|k| mesh.vertex_weights()[v] * basis.vectors()[(v, k)].powi(2)).sum::<f64>())
        .sum();
    let rel = (trace - s.shannon()).abs() / s.shannon();
    check(
        rel <= tol::MESH_TRACE,
        format!(
            "{} of {} vertices, K = {}: trace {trace:.10}, K·weight fraction {:.10} (rel {rel:.2e}); \
             projection trace {projection:.10} (diff {:.1e})",
            region.len(),
            mesh.len(),
            basis.size(),
            s.shannon(),
            (trace - projection).abs()
        ),
    )
}

fn sha256(path: &Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

struct Run {
    code: Option<i32>,
    stderr: String,
}

fn run(exe: &str, args: &[&str], dir: &Path) -> Run {
    let out = Command::new(exe).args(args).current_dir(dir).output().unwrap();
    Run {
        code: out.status.code(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn c10_cli() -> Outcome {
    let sphere = env!("CARGO_BIN_EXE_sphere");
    let mesh = env!("CARGO_BIN_EXE_mesh");
    let mut failures = Vec::new();
    let mut digests: Vec<Vec<Vec<u8>>> = Vec::new();
    for round in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        let mut files = Vec::new();

        let r = run(sphere, &["gaussian", "-L", "16", "--param", "sigma=0.1", "-o", "out", "--format", "csv"], d);
        let rows = fs::read_to_string(d.join("out.csv")).map(|t| t.lines().count() - 1).unwrap_or(0);
        if r.code != Some(0) || rows != 16 * 31 {
            failures.push(format!("sphere csv: exit {:?}, {rows} rows", r.code));
        }
        files.push(d.join("out.csv"));

        let r = run(sphere, &["gaussian", "-L", "16", "--method", "slepian"], d);
        if r.code != Some(2) || !r.stderr.contains("--region") {
            failures.push(format!("sphere missing region: exit {:?}", r.code));
        }

        let r = run(
            sphere,
            &["slepian", "-L", "16", "--region", "polar-cap:60", "--rank", "0", "-o", "s0", "--format", "png,json"],
            d,
        );
        let shannon = fs::read_to_string(d.join("s0.json"))
            .ok()
            .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
            .and_then(|v| v["shannon"].as_f64());
        if r.code != Some(0) || !d.join("s0.png").exists() || shannon.map_or(true, |n| (n - 64.0).abs() > tol::CLI_SHANNON) {
            failures.push(format!("sphere slepian: exit {:?}, shannon {shannon:?}", r.code));
        }
        files.push(d.join("s0.png"));
        files.push(d.join("s0.json"));

        let ico = Mesh::icosphere(2);
        write_off(&ico, &d.join("ico.off")).unwrap();
        let all: String = (0..ico.len()).map(|v| format!("{v}\n")).collect();
        fs::write(d.join("all.txt"), all).unwrap();

        let r = run(mesh, &["ico.off", "--basis", "20", "--method", "basis", "--rank", "0", "-o", "b0", "--format", "csv,json"], d);
        let values: Vec<f64> = json(&d.join("b0.json"))["values"]
            .as_array()
            .map(|a| a.iter().filter_map(|v| v.as_f64()).collect())
            .unwrap_or_default();
        let spread = values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if r.code != Some(0) || values.len() != ico.len() || spread > tol::CONSTANT_FIELD {
            failures.push(format!("mesh basis: exit {:?}, spread {spread:.2e}", r.code));
        }
        files.push(d.join("b0.csv"));
        files.push(d.join("b0.json"));

        let r = run(mesh, &["ico.off", "--basis", "20", "--method", "slepian", "-o", "x"], d);
        if r.code != Some(2) || !r.stderr.contains("--region") {
            failures.push(format!("mesh missing region: exit {:?}", r.code));
        }

        let r = run(
            mesh,
            &["ico.off", "--basis", "20", "--method", "slepian", "--region", "all.txt", "--rank", "0", "-o", "w0", "--format", "json"],
            d,
        );
        let lambda = json(&d.join("w0.json"))["eigenvalue"].as_f64();
        if r.code != Some(0) || lambda.map_or(true, |l| (l - 1.0).abs() > tol::MESH_IDENTITY) {
            failures.push(format!("mesh whole region: exit {:?}, λ0 {lambda:?}", r.code));
        }
        files.push(d.join("w0.json"));

        digests.push(files.iter().map(|f| sha256(f)).collect());
        if round == 1 && digests[0] != digests[1] {
            failures.push("outputs differ between runs".into());
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "6 examples as specified, 6 output files byte-identical across two runs".into()
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 12] = [
        ("1", "SHT round trip", c1_sht_round_trip),
        ("2", "concentration trace identity", c2_trace_identity),
        ("3", "fast-path equivalence", c3_fast_path),
        ("4", "eigen contract", c4_eigen_contract),
        ("5", "double orthogonality", c5_double_orthogonality),
        ("6", "wavelet partition and reconstruction", c6_wavelets),
        ("7", "parallel determinism and speedup", c7_determinism),
        ("8", "matrix fill scaling exponent", c8_scaling),
        ("9a", "mesh: 3-path eigenvalues", c9a_path_graph),
        ("9b", "mesh: whole-mesh identity", c9b_whole_mesh),
        ("9c", "mesh: trace identity against K·weight fraction", c9c_mesh_trace),
        ("10", "CLI black box and byte determinism", c10_cli),
    ];
    let mut unexpected = 0;
    let (mut passed, mut failed, mut skipped) = (0, 0, 0);
    for (id, name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match outcome {
            Outcome::Pass(d) => {
                passed += 1;
                ("PASS", d)
            }
            Outcome::Fail(d) => {
                failed += 1;
                if KNOWN_FAILURES.contains(&id) {
                    ("FAIL (known)", d)
                } else {
                    unexpected += 1;
                    ("FAIL", d)
                }
            }
            Outcome::NotEvaluated(d) => {
                skipped += 1;
                ("NOT EVALUATED", d)
            }
        };
        println!("criterion {id:>3} {status:<13} {name}: {detail} [{secs:.1} s]");
    }
    println!("acceptance: {passed} passed, {failed} failed ({} known), {skipped} not evaluated", failed - unexpected);
    if unexpected > 0 {
        std::process::exit(1);
    }
}
