use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use cww::fastop::{FastOp, LinearOperator};
use cww::kernel::KernelTable;
use cww::wavelet::{Boundary, WaveletSpec, DEFAULT_RESOLUTION};
use cww_cli::apply::random_vector;
use cww_cli::bench;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cww(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cww"))
        .args(args)
        .current_dir(dir)
        .env("CWW_CACHE_DIR", dir.join("cache"))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(o: &Output, key: &str) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(o)))
        .parse()
        .unwrap()
}

#[test]
fn precompute_writes_small_tables_and_then_reuses_them() {
    let dir = tempfile::tempdir().unwrap();
    let first = cww(dir.path(), &["precompute", "--q", "4"]);
    assert!(first.status.success(), "{first:?}");
    let files: Vec<_> = fs::read_dir(dir.path().join("cache"))
        .unwrap()
        .map(|e| e.unwrap())
        .collect();
    assert_eq!(files.len(), 20);
    for f in &files {
        assert!(f.metadata().unwrap().len() < 64 * 1024);
    }
    let again = cww(dir.path(), &["precompute", "--q", "4"]);
    assert!(again.status.success());
    let text = stdout(&again);
    assert_eq!(text.lines().count(), 20);
    assert!(text.lines().all(|l| l.starts_with("cached ")), "{text}");
}

#[test]
fn unwritable_cache_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let cache = blocker.join("cache");
    let o = cww(
        dir.path(),
        &[
            "precompute",
            "--wavelet",
            "db2",
            "--q",
            "1",
            "--kernel-cache-dir",
            cache.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{o:?}");
}

#[test]
fn check_adjoint_reports_a_tiny_defect() {
    let dir = tempfile::tempdir().unwrap();
    for dim in ["1", "2"] {
        let o = cww(
            dir.path(),
            &[
                "apply",
                "--wavelet",
                "sym4",
                "--j",
                "5",
                "--q",
                "2",
                "--dim",
                dim,
                "--check-adjoint",
            ],
        );
        assert!(o.status.success(), "{o:?}");
        assert!(field(&o, "adjoint_defect") <= 1e-12);
    }
}

fn kernels(spec: &WaveletSpec, q: u32) -> KernelTable {
    KernelTable::compute(spec, q, DEFAULT_RESOLUTION).unwrap()
}

#[test]
fn one_dimensional_apply_is_fast() {
    let spec = WaveletSpec::daubechies(2, Boundary::Vmp).unwrap();
    let op = FastOp::new(&spec, 8, 1, 1, &kernels(&spec, 1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x = random_vector(&mut rng, op.cols());
    let a = random_vector(&mut rng, op.rows());
    op.apply(&x).unwrap();
    let start = Instant::now();
    op.apply(&x).unwrap();
    op.apply_adjoint(&a).unwrap();
    assert!(start.elapsed().as_secs_f64() < 0.1);
}

#[test]
fn two_dimensional_apply_at_j9_is_fast() {
    let spec = WaveletSpec::daubechies(4, Boundary::Vmp).unwrap();
    let op = FastOp::new(&spec, 9, 1, 2, &kernels(&spec, 1)).unwrap();
    let x = random_vector(&mut ChaCha8Rng::seed_from_u64(1), op.cols());
    let start = Instant::now();
    let y = op.apply(&x).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(y.len(), 1 << 20);
}

#[test]
fn apply_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let fwd = cww(
        p,
        &[
            "--no-header",
            "apply",
            "--j",
            "4",
            "--q",
            "1",
            "--seed",
            "3",
            "--out",
            "beta.csv",
        ],
    );
    assert!(fwd.status.success(), "{fwd:?}");
    let adj = cww(
        p,
        &[
            "apply",
            "--j",
            "4",
            "--q",
            "1",
            "--adjoint",
            "--input",
            "beta.csv",
            "--out",
            "xi.csv",
        ],
    );
    assert!(adj.status.success(), "{adj:?}");
    let xi = fs::read_to_string(p.join("xi.csv")).unwrap();
    assert!(xi.starts_with("# cww "));
    let (values, _) = cww::reconstruct::read_csv(xi.as_bytes()).unwrap();
    assert_eq!(values.len(), 16);

    let spec = WaveletSpec::daubechies(4, Boundary::Vmp).unwrap();
    let op = FastOp::new(&spec, 4, 1, 1, &kernels(&spec, 1)).unwrap();
    let x = random_vector(&mut ChaCha8Rng::seed_from_u64(3), 16);
    let expect = op.apply_adjoint(&op.apply(&x).unwrap()).unwrap();
    for (a, b) in values.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("short.csv"), "1\n2\n3\n").unwrap();
    let o = cww(p, &["apply", "--j", "4", "--input", "short.csv"]);
    assert_eq!(o.status.code(), Some(1), "{o:?}");

    let o = cww(
        p,
        &[
            "apply",
            "--j",
            "4",
            "--no-auto",
            "--kernel-cache-dir",
            "empty",
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{o:?}");

    let o = cww(p, &["apply", "--j"]);
    assert_eq!(o.status.code(), Some(1));
    let o = cww(
        p,
        &[
            "reconstruct",
            "--method",
            "gs",
            "--j",
            "4",
            "--reference-function",
            "nope",
        ],
    );
    assert_eq!(o.status.code(), Some(1));

    // A full mask with eta = 0 asks for an exact fit the solver cannot certify.
    let o = cww(
        p,
        &[
            "reconstruct",
            "--method",
            "cs",
            "--j",
            "3",
            "--q",
            "1",
            "--reference-function",
            "step",
            "--m",
            "16",
            "--eta",
            "0",
        ],
    );
    assert_eq!(o.status.code(), Some(2), "{o:?}");
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let run = |name: &str, extra: &[&str]| {
        let mut args = vec![
            "reconstruct",
            "--method",
            "cs",
            "--j",
            "4",
            "--q",
            "1",
            "--reference-function",
            "boxes-2d",
        ];
        args.extend_from_slice(&["--seed", "5", "--grid-out", name]);
        args.extend_from_slice(extra);
        let o = cww(p, &args);
        assert!(o.status.success(), "{o:?}");
        fs::read(p.join(name)).unwrap()
    };
    let a = run("a.csv", &["--no-header"]);
    let b = run("b.csv", &["--no-header", "--threads", "1"]);
    assert_eq!(a, b);
    let c = run("c.csv", &[]);
    assert!(c.starts_with(b"# cww "));
    let body = c.iter().position(|&ch| ch == b'\n').unwrap() + 1;
    assert_eq!(&c[body..], &a[..]);
}

#[test]
fn walsh_series_of_a_constant_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = cww(
        dir.path(),
        &[
            "reconstruct",
            "--method",
            "tw",
            "--j",
            "3",
            "--reference-function",
            "one",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    assert!(field(&o, "relative_error") <= 1e-10);
}

#[test]
fn boundary_wavelets_beat_periodic_ones_on_a_non_periodic_function() {
    let dir = tempfile::tempdir().unwrap();
    let err = |boundary: &str| {
        let o = cww(
            dir.path(),
            &[
                "reconstruct",
                "--method",
                "gs",
                "--wavelet",
                "db4",
                "--boundary",
                boundary,
                "--j",
                "4",
                "--q",
                "1",
                "--reference-function",
                "cos-ramp",
            ],
        );
        assert!(o.status.success(), "{o:?}");
        field(&o, "relative_error")
    };
    assert!(err("vmp") < err("periodic"));
}

#[test]
fn bench_memory_and_dense_speedup() {
    let spec = WaveletSpec::daubechies(4, Boundary::Vmp).unwrap();
    let rows = bench::measure(&kernels(&spec, 1), 1, 1, 20..=20, 1, true, 0).unwrap();
    let fast = &rows[0];
    assert!(fast.peak_bytes < 10 * fast.n * 8, "{fast:?}");
    let dense = rows.iter().find(|r| r.kind == "dense").unwrap();
    assert!(dense.forward_ratio.unwrap() >= 50.0, "{dense:?}");
}

#[test]
fn functions_lists_the_registry() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&cww(dir.path(), &["functions"]));
    for (name, _) in cww::functions::REGISTRY {
        assert!(text.contains(name));
    }
}

#[test]
fn table1_squares_the_one_dimensional_angle() {
    let dir = tempfile::tempdir().unwrap();
    let o = cww(
        dir.path(),
        &[
            "--no-header",
            "table1",
            "--wavelet",
            "db2,sym4",
            "--j",
            "5",
            "--j2d",
            "5",
            "--q",
            "2",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 8);
    for r1 in rows.iter().filter(|r| r[2] == "1") {
        let r2 = rows
            .iter()
            .find(|r| r[2] == "2" && r[0] == r1[0] && r[4] == r1[4])
            .unwrap();
        let (m1, m2): (f64, f64) = (r1[5].parse().unwrap(), r2[5].parse().unwrap());
        assert!((m1 * m1 - m2).abs() < 1e-5, "{r1:?} {r2:?}");
    }
}
