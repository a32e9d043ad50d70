mod common;

use std::io::Cursor;

use common::{exact_matrix, max_diff, quasi_optimality};
use cww::fastop::{compose_cs, FastOp, LinearOperator, SamplingMask, WaveletSynthesis};
use cww::functions::{lookup, TestFunction};
use cww::reconstruct::*;
use cww::wavelet::{Boundary, WaveletSpec};
use cww::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

#[test]
fn acquisition_examples() {
    let one = acquire_samples(&lookup("one").unwrap(), 32, 9).unwrap();
    assert!(max_diff(&one.values, &unit(32, 0)) < 1e-14);

    // w_3 in sequency order is +, -, +, - on the quarters.
    let w3 = TestFunction::OneD(|t| if (4.0 * t) as i64 % 2 == 0 { 1.0 } else { -1.0 });
    let y = acquire_samples(&w3, 16, 6).unwrap();
    assert!(max_diff(&y.values, &unit(16, 3)) < 1e-14);

    for r in [6, 10, 14] {
        let y = acquire_samples(&lookup("ramp").unwrap(), 8, r).unwrap();
        assert!((y.values[0] - 0.5).abs() <= (-(r as f64)).exp2());
    }

    let one = acquire_samples(&lookup("one-2d").unwrap(), 8, 6).unwrap();
    assert_eq!(one.dim, 2);
    assert!(max_diff(&one.values, &unit(64, 0)) < 1e-14);

    assert!(matches!(
        acquire_samples(&w3, 12, 6),
        Err(Error::NotPowerOfTwo(12))
    ));
    assert!(acquire_samples(&w3, 16, 3).is_err());
}

#[test]
fn gs_recovers_consistent_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (spec, dim) in [
        (WaveletSpec::daubechies(2, Boundary::Vmp).unwrap(), 1),
        (WaveletSpec::daubechies(4, Boundary::Periodic).unwrap(), 1),
        (WaveletSpec::symlet(3, Boundary::Vmp).unwrap(), 2),
    ] {
        let op = FastOp::with_kernels(&spec, spec.j0() + 1, 1, dim).unwrap();
        let x = random_vec(&mut rng, op.cols());
        let y = op.apply(&x).unwrap();
        let rep = gs_solve(&op, &y, &CgParams::default()).unwrap();
        assert!(max_diff(&rep.x, &x) < 1e-8, "{spec} dim {dim}");
        assert!(rep.residual <= 1e-10);
    }
}

#[test]
fn gs_reproduces_a_basis_function() {
    let spec = WaveletSpec::daubechies(3, Boundary::Vmp).unwrap();
    let (j, q) = (4, 1);
    let exact = exact_matrix(&spec, j, q);
    let y: Vec<f64> = exact.iter().map(|row| row[5]).collect();
    let op = FastOp::with_kernels(&spec, j, q, 1).unwrap();
    let rep = gs_solve(&op, &y, &CgParams::default()).unwrap();
    assert!(max_diff(&rep.x, &unit(16, 5)) < 1e-7);
}

#[test]
fn gs_errors() {
    let spec = WaveletSpec::daubechies(2, Boundary::Vmp).unwrap();
    let op = FastOp::with_kernels(&spec, 4, 1, 1).unwrap();
    assert!(matches!(
        gs_solve(&op, &[0.0; 31], &CgParams::default()),
        Err(Error::DimensionMismatch {
            expected: 32,
            got: 31
        })
    ));
    let y: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
    let starved = CgParams {
        max_iters: 1,
        residual_tol: 1e-14,
    };
    assert!(matches!(
        gs_solve(&op, &y, &starved),
        Err(Error::NoConvergence { .. })
    ));
    // Fewer samples than unknowns.
    let mask = SamplingMask::new((0..8).collect(), 32).unwrap();
    let wide = compose_cs(&op, mask, false).unwrap();
    assert!(gs_solve(&wide, &[0.0; 8], &CgParams::default()).is_err());
}

#[test]
fn gs_is_quasi_optimal_for_the_hat() {
    let spec = WaveletSpec::daubechies(2, Boundary::Vmp).unwrap();
    let hat = |t: f64| (1.0 - (4.0 * t - 2.0).abs()).max(0.0);
    let r = quasi_optimality(&spec, 5, 1, hat);
    assert!((r.mu - 1.2).abs() < 0.05, "{r:?}");
    assert!(r.error <= r.mu * r.best, "{r:?}");
    assert!(r.best > 0.0);
}

#[test]
fn gs_quasi_optimality_suite() {
    for spec in [
        WaveletSpec::daubechies(2, Boundary::Vmp).unwrap(),
        WaveletSpec::daubechies(4, Boundary::Vmp).unwrap(),
    ] {
        for name in ["hat", "step", "piecewise", "bump", "exp-sine"] {
            let TestFunction::OneD(f) = lookup(name).unwrap() else {
                unreachable!()
            };
            let r = quasi_optimality(&spec, 5, 1, f);
            assert!(r.error <= 1.05 * r.mu * r.best, "{spec} {name} {r:?}");
        }
    }
}

#[test]
fn pbdw_copies_the_samples() {
    let spec = WaveletSpec::daubechies(2, Boundary::Vmp).unwrap();
    let params = SolverParams::default();
    for dim in [1, 2] {
        let op = FastOp::with_kernels(&spec, 3, 1, dim).unwrap();
        let f = lookup(if dim == 1 { "exp-sine" } else { "smooth-2d" }).unwrap();
        let y = acquire_samples(&f, op.n(), 10).unwrap().values;
        let res = pbdw_solve(&op, &y, &params, None).unwrap();
        let n = op.n();
        assert_eq!(res.k, 4 * n);
        assert_eq!(res.coefficients.len(), (4 * n).pow(dim as u32));
        if dim == 1 {
            assert_eq!(res.coefficients[..n], y[..]);
        } else {
            for r in 0..n {
                assert_eq!(
                    res.coefficients[r * 4 * n..r * 4 * n + n],
                    y[r * n..(r + 1) * n]
                );
            }
        }
        assert!(norm(&res.correction) < norm(&y));
    }
}

#[test]
fn pbdw_degenerate_and_invalid_truncation() {
    let spec = WaveletSpec::daubechies(3, Boundary::Vmp).unwrap();
    let op = FastOp::with_kernels(&spec, 4, 1, 1).unwrap();
    let y = acquire_samples(&lookup("cos").unwrap(), 32, 10)
        .unwrap()
        .values;
    let params = SolverParams {
        pbdw_k: Some(32),
        ..Default::default()
    };
    assert_eq!(pbdw_solve(&op, &y, &params, None).unwrap().coefficients, y);
    for k in [16, 48] {
        let params = SolverParams {
            pbdw_k: Some(k),
            ..Default::default()
        };
        assert!(pbdw_solve(&op, &y, &params, None).is_err());
    }
}

#[test]
fn pbdw_on_walsh_polynomials() {
    let spec = WaveletSpec::daubechies(2, Boundary::Vmp).unwrap();
    let op = FastOp::with_kernels(&spec, 4, 1, 1).unwrap();
    let params = SolverParams::default();

    // A constant lies in both spaces, so the tail vanishes.
    let y = unit(32, 0);
    let res = pbdw_solve(&op, &y, &params, None).unwrap();
    assert!(max_diff(&res.coefficients, &unit(128, 0)) < 1e-7);

    // Outside the wavelet space the samples are reproduced; the tail comes
    // from the GS estimate and the correction carries the misfit.
    let mut y = vec![0.0; 32];
    y[3] = 1.0;
    y[10] = -0.5;
    let res = pbdw_solve(&op, &y, &params, None).unwrap();
    assert_eq!(res.coefficients[..32], y[..]);
    let fitted = op.apply(&res.gs.x).unwrap();
    let sum: Vec<f64> = fitted
        .iter()
        .zip(&res.correction)
        .map(|(a, b)| a + b)
        .collect();
    assert!(max_diff(&sum, &y) < 1e-15);
}

#[test]
fn pbdw_refines_generalised_sampling() {
    let spec = WaveletSpec::daubechies(4, Boundary::Vmp).unwrap();
    let (j, q, r) = (5, 1, 12);
    let op = FastOp::with_kernels(&spec, j, q, 1).unwrap();
    let basis = BasisSamples::new(&spec, j, r).unwrap();
    for name in ["exp-sine", "cos-ramp", "bump"] {
        let f = lookup(name).unwrap();
        let y = acquire_samples(&f, op.n(), 18).unwrap().values;
        let res = pbdw_solve(&op, &y, &SolverParams::default(), None).unwrap();
        let truth = sample_on_grid(&f, r);
        let gs = basis.synthesize_1d(&res.gs.x).unwrap();
        let fix = walsh_synthesize(&res.correction, 1, r).unwrap();
        let pbdw: Vec<f64> = gs.iter().zip(&fix).map(|(a, b)| a + b).collect();
        let (e_gs, e_pbdw) = (
            relative_l2_error(&truth, &gs),
            relative_l2_error(&truth, &pbdw),
        );
        assert!(e_pbdw <= e_gs + 1e-9, "{name}: {e_pbdw} vs {e_gs}");
    }
}

#[test]
fn cs_with_a_huge_ball_returns_zero() {
    let spec = WaveletSpec::daubechies(2, Boundary::Vmp).unwrap();
    let op = FastOp::with_kernels(&spec, 4, 1, 1).unwrap();
    let mask = variable_density_mask(32, 1, 12, 3, &DensityParams::default()).unwrap();
    let a = compose_cs(&op, mask.clone(), true).unwrap();
    let y = mask.restrict(
        &acquire_samples(&lookup("bump").unwrap(), 32, 10)
            .unwrap()
            .values,
    );
    let params = PdParams {
        eta: 1e6,
        ..Default::default()
    };
    let rep = cs_solve(&a, &y, &params).unwrap();
    assert!(rep.x.iter().all(|&v| v == 0.0));
    assert!(rep.feasibility_gaps.iter().all(|&g| g == 0.0));
}

#[test]
fn cs_recovers_a_one_sparse_vector() {
    let spec = WaveletSpec::daubechies(3, Boundary::Vmp).unwrap();
    let op = FastOp::with_kernels(&spec, 4, 1, 1).unwrap();
    let a = compose_cs(&op, SamplingMask::full(32), true).unwrap();
    let x = unit(16, 6);
    let y = a.apply(&x).unwrap();
    let params = PdParams {
        eta: 1e-14,
        tol: 1e-14,
        ..Default::default()
    };
    let rep = cs_solve(&a, &y, &params).unwrap();
    assert!(max_diff(&rep.x, &x) < 1e-6, "{:?}", rep.x);
    assert!(rep.residual_sq <= params.eta + params.tol);
    let direct = gs_solve(&a, &y, &CgParams::default()).unwrap();
    assert!(max_diff(&direct.x, &x) < 1e-8);
}

#[test]
fn cs_reports_infeasible_balls() {
    let spec = WaveletSpec::daubechies(2, Boundary::Vmp).unwrap();
    let op = FastOp::with_kernels(&spec, 3, 1, 1).unwrap();
    let a = compose_cs(&op, SamplingMask::full(16), false).unwrap();
    // Most of this data lies outside the range.
    let y: Vec<f64> = (0..16)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let params = PdParams {
        eta: 1e-6,
        max_iters: 200,
        ..Default::default()
    };
    assert!(matches!(
        cs_solve(&a, &y, &params),
        Err(Error::Infeasible { .. })
    ));
    assert!(cs_solve(&a, &y[..15], &params).is_err());
    let bad = PdParams {
        eta: -1.0,
        ..Default::default()
    };
    assert!(cs_solve(&a, &y, &bad).is_err());
}

#[test]
fn cs_feasibility_holds_at_return_even_when_stopped_early() {
    let spec = WaveletSpec::daubechies(4, Boundary::Vmp).unwrap();
    let op = FastOp::with_kernels(&spec, 5, 1, 1).unwrap();
    let mask = variable_density_mask(64, 1, 24, 5, &DensityParams::default()).unwrap();
    let a = compose_cs(&op, mask.clone(), true).unwrap();
    let y = mask.restrict(
        &acquire_samples(&lookup("piecewise").unwrap(), 64, 12)
            .unwrap()
            .values,
    );
    for max_iters in [1, 10, 5000] {
        let params = PdParams {
            max_iters,
            eta: 1e-4,
            ..Default::default()
        };
        let rep = cs_solve(&a, &y, &params).unwrap();
        assert!(rep.residual_sq <= params.eta + params.tol, "{max_iters}");
        assert_eq!(rep.feasibility_gaps.len(), rep.iterations);
    }
}

/// Smooth-plus-boxes image, DB4 VMP, j = 6, q = 1, a quarter of the samples.
fn cs_regression() -> (f64, CsReport) {
    let f = lookup("boxes-2d").unwrap();
    let (j, q, r) = (6, 1, 9);
    let n = 1usize << (j + q);
    let spec = WaveletSpec::daubechies(4, Boundary::Vmp).unwrap();
    let op = FastOp::with_kernels(&spec, j, q, 2).unwrap();
    let mask = variable_density_mask(n, 2, n * n / 4, 1, &DensityParams::default()).unwrap();
    let y = mask.restrict(&acquire_samples(&f, n, 11).unwrap().values);
    let a = compose_cs(&op, mask, true).unwrap();
    let rep = cs_solve(&a, &y, &PdParams::default()).unwrap();
    let c = WaveletSynthesis::new(&spec, j, 2)
        .unwrap()
        .synthesize(&rep.x)
        .unwrap();
    let image = BasisSamples::new(&spec, j, r)
        .unwrap()
        .synthesize_2d(&c)
        .unwrap();
    (relative_l2_error(&sample_on_grid(&f, r), &image), rep)
}

#[test]
fn cs_smooth_plus_boxes_regression() {
    let (err, rep) = cs_regression();
    let late = &rep.feasibility_gaps[50.min(rep.feasibility_gaps.len())..];
    assert!(
        late.windows(2).all(|w| w[1] <= w[0]),
        "feasibility gap increased"
    );
    assert!(rep.residual_sq <= 1e-3 + 1e-6);
    assert!(err <= 0.05, "relative error {err}");
}

#[test]
fn mask_examples() {
    let p = DensityParams::default();
    assert_eq!(
        variable_density_mask(32, 1, 32, 0, &p).unwrap(),
        SamplingMask::full(32)
    );
    assert_eq!(
        variable_density_mask(16, 2, 256, 9, &p).unwrap(),
        SamplingMask::full(256)
    );

    let a = variable_density_mask(64, 2, 900, 42, &p).unwrap();
    assert_eq!(a, variable_density_mask(64, 2, 900, 42, &p).unwrap());
    assert_ne!(a, variable_density_mask(64, 2, 900, 43, &p).unwrap());
    assert_eq!(a.len(), 900);
    for i in 0..64 * 64 {
        if (i / 64).max(i % 64) < 8 {
            assert!(a.indices().binary_search(&i).is_ok());
        }
    }

    assert!(variable_density_mask(64, 2, 63, 0, &p).is_err());
    assert!(variable_density_mask(64, 1, 65, 0, &p).is_err());
    assert!(variable_density_mask(48, 1, 16, 0, &p).is_err());
    assert!(variable_density_mask(64, 3, 16, 0, &p).is_err());
}

#[test]
fn mask_is_pinned_by_seed() {
    let mask = variable_density_mask(32, 1, 12, 7, &DensityParams::default()).unwrap();
    assert_eq!(mask.indices(), &[0, 1, 2, 3, 4, 5, 6, 7, 17, 22, 23, 27]);
    let mask = variable_density_mask(
        16,
        2,
        70,
        2024,
        &DensityParams {
            floor: 4,
            decay: 1.0,
        },
    )
    .unwrap();
    let sum: usize = mask.indices().iter().sum();
    assert_eq!((mask.len(), sum), (70, 7837));
}

#[test]
fn mask_band_frequencies() {
    // 24 candidates outside the floor, 8 drawn per mask.
    let trials = 3000;
    let uniform = DensityParams {
        floor: 8,
        decay: 0.0,
    };
    let mut counts = [0usize; 32];
    for seed in 0..trials {
        for &i in variable_density_mask(32, 1, 16, seed, &uniform)
            .unwrap()
            .indices()
        {
            counts[i] += 1;
        }
    }
    let expect = trials as f64 / 3.0;
    let sd = (trials as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
    for &c in &counts[8..] {
        assert!((c as f64 - expect).abs() < 5.0 * sd, "{counts:?}");
    }

    let decaying = DensityParams::default();
    let mut by_band = [0.0f64; 6];
    for seed in 0..trials {
        for &i in variable_density_mask(32, 1, 16, seed, &decaying)
            .unwrap()
            .indices()
        {
            by_band[band(i) as usize] += 1.0;
        }
    }
    // Per-index frequency in band 4 (8..16) exceeds band 5 (16..32).
    assert!(by_band[4] / 8.0 > by_band[5] / 16.0);
    assert_eq!(
        (band(0), band(1), band(2), band(3), band(4), band(1023)),
        (0, 1, 2, 2, 3, 10)
    );
}

#[test]
fn csv_round_trips() {
    let v = vec![0.1, -2.5e-17, 3.0, f64::MIN_POSITIVE];
    let mut buf = Vec::new();
    write_vector_csv(&mut buf, &v).unwrap();
    assert!(String::from_utf8(buf.clone())
        .unwrap()
        .starts_with("index,value\n0,"));
    assert_eq!(read_csv(Cursor::new(buf)).unwrap(), (v.clone(), 1));

    let mut buf = b"# produced by a test\n".to_vec();
    write_matrix_csv(&mut buf, &v, 2).unwrap();
    assert_eq!(read_csv(Cursor::new(buf)).unwrap(), (v, 2));

    for bad in [
        "",
        "index,value\n0,1\n2,3\n",
        "index,value\n0,x\n",
        "c0,c1\n1,2\n3\n",
        "c0,c1\n1,2\n3,y\n",
    ] {
        assert!(
            matches!(read_csv(Cursor::new(bad)), Err(Error::Corrupt(_))),
            "{bad:?}"
        );
    }
}

#[test]
fn mask_files_round_trip() {
    let mask = variable_density_mask(
        16,
        2,
        100,
        5,
        &DensityParams {
            floor: 4,
            decay: 0.5,
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    write_mask(&mut buf, &mask).unwrap();
    assert_eq!(read_mask(Cursor::new(buf), 256).unwrap(), mask);
    assert!(read_mask(Cursor::new("# header\n1\n\n5\n"), 8).is_ok());
    assert!(read_mask(Cursor::new("5\n1\n"), 8).is_err());
    assert!(read_mask(Cursor::new("1\n1\n"), 8).is_err());
    assert!(read_mask(Cursor::new("1\n9\n"), 8).is_err());
    assert!(read_mask(Cursor::new("a\n"), 8).is_err());
}

#[test]
fn basis_samples_and_grid_helpers() {
    let spec = WaveletSpec::daubechies(3, Boundary::Periodic).unwrap();
    let j = 4;
    let b = BasisSamples::new(&spec, j, 10).unwrap();
    assert_eq!(b.len(), 1024);
    let ones = vec![(-(j as f64) / 2.0).exp2(); 16];
    let v = b.synthesize_1d(&ones).unwrap();
    assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-10));
    let v = b.synthesize_2d(&vec![(-(j as f64)).exp2(); 256]).unwrap();
    assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-10));
    assert!(b.synthesize_1d(&[1.0; 3]).is_err());
    assert!(BasisSamples::new(&spec, j, 3).is_err());

    // Walsh synthesis inverts acquisition for piecewise constants.
    let step = lookup("step").unwrap();
    let y = acquire_samples(&step, 8, 8).unwrap();
    let g = walsh_synthesize(&y.values, 1, 5).unwrap();
    assert!(max_diff(&g, &sample_on_grid(&step, 5)) < 1e-14);
    let y2 = acquire_samples(&lookup("one-2d").unwrap(), 4, 4).unwrap();
    assert!(walsh_synthesize(&y2.values, 2, 3)
        .unwrap()
        .iter()
        .all(|x| (x - 1.0).abs() < 1e-14));
    assert!(walsh_synthesize(&[1.0; 3], 1, 4).is_err());
    assert!(walsh_synthesize(&[1.0; 32], 1, 4).is_err());

    assert_eq!(relative_l2_error(&[3.0, 4.0], &[3.0, 4.0]), 0.0);
    assert!((relative_l2_error(&[3.0, 4.0], &[0.0, 4.0]) - 0.6).abs() < 1e-15);
}
