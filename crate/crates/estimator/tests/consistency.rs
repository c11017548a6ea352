//! Internal consistency of the filter entry points and variant policies.
//!
//! The run loop, the data-independent gain trace, and the mean replay share
//! their floating-point cores, so agreement here is required bit for bit,
//! not approximately.

use gasgen_estimator::{
    cee_with_gains, gain_trace, gain_trace_split, mean_pass, run_estimator, EstimatorError,
    EstimatorKind, FilterModel, GaussianBelief, ShaftPowerInput, StepInput,
};
use gasgen_model::GasGenModel;
use nalgebra::{DMatrix, DVector};

const MODEL_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/apu_gasgen.json");

fn shipped_filter() -> FilterModel {
    let model = GasGenModel::from_json_file(MODEL_PATH).unwrap();
    FilterModel::new(&model).unwrap()
}

fn init_belief(n: usize) -> GaussianBelief {
    let mut cov = DMatrix::zeros(n, n);
    cov[(0, 0)] = 1.0e4;
    for i in 1..n {
        cov[(i, i)] = 1.0e-4;
    }
    GaussianBelief::from_cov(cov)
}

/// Deterministic synthetic inputs with a wandering power profile; no RNG so
/// failures replay exactly.
fn synthetic_steps(n: usize) -> Vec<StepInput> {
    (0..n)
        .map(|k| {
            let t = k as f64;
            StepInput {
                u: DVector::from_vec(vec![0.4 * (t / 7.0).sin()]),
                y: DVector::from_vec(vec![
                    120.0 * (t / 13.0).cos(),
                    -4.0 + 0.3 * t.sin(),
                    25.0 * (t / 5.0).sin(),
                    6.0 * (t / 17.0).cos(),
                ]),
                pe: ShaftPowerInput {
                    mean: 1500.0 * (t / 11.0).cos(),
                    var: 300.0 + 50.0 * (t / 3.0).sin().powi(2),
                },
            }
        })
        .collect()
}

#[test]
fn run_loop_equals_gain_trace_plus_mean_pass() {
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let steps = synthetic_steps(60);

    for kind in [
        EstimatorKind::Pes,
        EstimatorKind::Pens {
            pe_t: 0.0,
            p_pe_t: 1.0e9,
        },
        EstimatorKind::Mpes { p_pe_t: 1.0e9 },
    ] {
        let run = run_estimator(kind, &fm, &init, &steps).unwrap();

        let pe_vars: Vec<f64> = steps.iter().map(|s| kind.pe_var(&s.pe)).collect();
        let trace = gain_trace(&fm, &init.cov, &pe_vars).unwrap();
        let means = mean_pass(kind, &fm, &init.mean, &trace.gains, &steps).unwrap();

        for k in 0..steps.len() {
            assert_eq!(run.diagnostics[k].gain, trace.gains[k], "gain at step {k}");
            assert_eq!(
                run.diagnostics[k].prior_cov, trace.prior_covs[k],
                "prior at step {k}"
            );
            assert_eq!(
                run.diagnostics[k].posterior_cov, trace.posterior_covs[k],
                "posterior at step {k}"
            );
            assert_eq!(run.beliefs[k].mean, means[k], "mean at step {k}");
        }
    }
}

#[test]
fn pens_never_reads_the_power_channel() {
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let kind = EstimatorKind::Pens {
        pe_t: 250.0,
        p_pe_t: 1.0e8,
    };

    let clean = synthetic_steps(40);
    let mut poisoned = clean.clone();
    for s in &mut poisoned {
        s.pe = ShaftPowerInput {
            mean: f64::NAN,
            var: f64::NAN,
        };
    }

    let a = run_estimator(kind, &fm, &init, &clean).unwrap();
    let b = run_estimator(kind, &fm, &init, &poisoned).unwrap();
    for k in 0..clean.len() {
        assert_eq!(
            a.beliefs[k], b.beliefs[k],
            "PENS belief diverged at step {k}"
        );
    }

    // The power-informed variant must refuse the same poisoned inputs.
    let err = run_estimator(EstimatorKind::Pes, &fm, &init, &poisoned).unwrap_err();
    match err {
        EstimatorError::AtStep { step: 0, source } => {
            assert!(matches!(*source, EstimatorError::BadPowerVariance { .. }))
        }
        other => panic!("expected step-0 power-variance error, got {other}"),
    }
}

#[test]
fn pens_matches_pes_when_the_placeholder_is_exact() {
    // If the true power feed is constant at the placeholder mean with
    // variance equal to the placeholder variance, the two variants perform
    // identical arithmetic.
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let (pe_t, p_pe_t) = (320.0, 4.0e5);

    let mut steps = synthetic_steps(40);
    for s in &mut steps {
        s.pe = ShaftPowerInput {
            mean: pe_t,
            var: p_pe_t,
        };
    }

    let pes = run_estimator(EstimatorKind::Pes, &fm, &init, &steps).unwrap();
    let pens = run_estimator(EstimatorKind::Pens { pe_t, p_pe_t }, &fm, &init, &steps).unwrap();
    for k in 0..steps.len() {
        assert_eq!(pes.beliefs[k], pens.beliefs[k]);
        assert_eq!(pes.diagnostics[k].gain, pens.diagnostics[k].gain);
    }
}

#[test]
fn mpes_matches_pes_when_the_placeholder_variance_is_honest() {
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let var = 400.0;

    let mut steps = synthetic_steps(40);
    for s in &mut steps {
        s.pe.var = var;
    }

    let pes = run_estimator(EstimatorKind::Pes, &fm, &init, &steps).unwrap();
    let mpes = run_estimator(EstimatorKind::Mpes { p_pe_t: var }, &fm, &init, &steps).unwrap();
    for k in 0..steps.len() {
        assert_eq!(pes.beliefs[k], mpes.beliefs[k]);
    }
}

#[test]
fn overwhelming_measurement_noise_freezes_the_update() {
    let mut model = GasGenModel::from_json_file(MODEL_PATH).unwrap();
    model.r *= 1.0e10;
    let fm = FilterModel::new(&model).unwrap();

    let init = init_belief(fm.n());
    let steps = synthetic_steps(5);
    let run = run_estimator(EstimatorKind::Pes, &fm, &init, &steps).unwrap();

    for k in 0..steps.len() {
        let d = &run.diagnostics[k];
        for i in 0..fm.n() {
            let (post, prior) = (d.posterior_cov[(i, i)], d.prior_cov[(i, i)]);
            assert!(
                (post - prior).abs() <= 1e-4 * prior,
                "step {k} diag {i}: posterior {post} should track prior {prior}"
            );
        }
    }
}

#[test]
fn cee_under_own_gains_reproduces_reported_covariances() {
    // With gains from an honest filter and the true variances fed back in,
    // the error-covariance recursion retraces the filter's own covariance
    // arithmetic exactly.
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let steps = synthetic_steps(50);

    let pe_vars: Vec<f64> = steps.iter().map(|s| s.pe.var).collect();
    let trace = gain_trace(&fm, &init.cov, &pe_vars).unwrap();
    let cee = cee_with_gains(&fm, &init.cov, &trace.gains, &pe_vars).unwrap();

    assert_eq!(cee.len(), steps.len());
    for k in 0..steps.len() {
        assert_eq!(cee[k], trace.posterior_covs[k], "CEE diverged at step {k}");
    }
}

#[test]
fn split_gain_trace_agrees_with_the_plain_one() {
    // The rank-one split recursion takes a different algebraic route, so
    // agreement is approximate — but tight at a moderate variance.
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let p_pe_t = 1.0e6;
    let n_steps = 80;

    let plain = gain_trace(&fm, &init.cov, &vec![p_pe_t; n_steps]).unwrap();
    let split = gain_trace_split(&fm, &init.cov, p_pe_t, n_steps).unwrap();

    for k in 0..n_steps {
        let gain_dev = (&plain.gains[k] - &split.gains[k]).amax() / (1.0 + plain.gains[k].amax());
        assert!(gain_dev < 1e-9, "gain deviation {gain_dev:e} at step {k}");
        let cov_dev = (&plain.posterior_covs[k] - &split.posterior_covs[k]).amax()
            / (1.0 + plain.posterior_covs[k].amax());
        assert!(
            cov_dev < 1e-9,
            "covariance deviation {cov_dev:e} at step {k}"
        );
    }
}

#[test]
fn singular_innovation_is_refused() {
    // Rank-one prior and zero measurement noise make the innovation
    // covariance singular; the update must refuse, not emit garbage.
    let mut model = GasGenModel::from_json_file(MODEL_PATH).unwrap();
    model.r = DMatrix::zeros(4, 4);
    let fm = FilterModel::new(&model).unwrap();

    let v = DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0, 1.0]);
    let prior = GaussianBelief::from_cov(&v * v.transpose());
    let err =
        gasgen_estimator::update(&prior, &fm, &DVector::zeros(1), &DVector::zeros(4)).unwrap_err();
    assert!(
        matches!(err, EstimatorError::SingularInnovation { .. }),
        "got {err}"
    );
}

#[test]
fn invalid_configurations_are_named() {
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let steps = synthetic_steps(3);

    assert!(matches!(
        EstimatorKind::Pens {
            pe_t: f64::NAN,
            p_pe_t: 1.0
        }
        .validate()
        .unwrap_err(),
        EstimatorError::BadPowerMean { .. }
    ));
    assert!(matches!(
        EstimatorKind::Mpes { p_pe_t: 0.0 }.validate().unwrap_err(),
        EstimatorError::BadPlaceholderVariance { .. }
    ));
    assert!(matches!(
        run_estimator(EstimatorKind::Mpes { p_pe_t: -1.0 }, &fm, &init, &steps).unwrap_err(),
        EstimatorError::BadPlaceholderVariance { .. }
    ));

    // Initial belief of the wrong size.
    let bad_init = GaussianBelief::from_cov(DMatrix::identity(3, 3));
    assert!(matches!(
        run_estimator(EstimatorKind::Pes, &fm, &bad_init, &steps).unwrap_err(),
        EstimatorError::BeliefDimensionMismatch { expected: 5, .. }
    ));

    // Asymmetric and indefinite covariances.
    let mut asym = DMatrix::identity(5, 5);
    asym[(0, 1)] = 0.5;
    assert!(matches!(
        GaussianBelief::from_cov(asym).validate(5).unwrap_err(),
        EstimatorError::CovarianceAsymmetric { .. }
    ));
    let mut indef = DMatrix::identity(5, 5);
    indef[(2, 2)] = -1.0;
    assert!(matches!(
        GaussianBelief::from_cov(indef).validate(5).unwrap_err(),
        EstimatorError::CovarianceNotPsd { .. }
    ));

    // Step inputs with the wrong shapes carry their index.
    let mut bad_steps = synthetic_steps(3);
    bad_steps[2].y = DVector::zeros(2);
    match run_estimator(EstimatorKind::Pes, &fm, &init, &bad_steps).unwrap_err() {
        EstimatorError::StepDimensionMismatch {
            index: 2,
            y_len: 2,
            n_y: 4,
            ..
        } => {}
        other => panic!("expected step-2 dimension error, got {other}"),
    }

    // Mean replay checks the gain count against the steps.
    let trace = gain_trace(&fm, &init.cov, &[400.0, 400.0]).unwrap();
    assert!(matches!(
        mean_pass(EstimatorKind::Pes, &fm, &init.mean, &trace.gains, &steps).unwrap_err(),
        EstimatorError::LengthMismatch {
            expected: 3,
            got: 2,
            ..
        }
    ));

    // Negative per-step power variance is caught where it is consumed.
    assert!(matches!(
        gain_trace(&fm, &init.cov, &[400.0, -1.0]).unwrap_err(),
        EstimatorError::AtStep { step: 1, .. }
    ));
}
