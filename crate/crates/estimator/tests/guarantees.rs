//! The three structural guarantees, exercised both ways.
//!
//! Each check is run on a configuration where the guarantee holds and on a
//! perturbed one where it must fail, so the checks themselves are falsified
//! — a check that cannot fail verifies nothing. Property tests then push the
//! guarantees across randomized models.

use gasgen_estimator::theorems::{
    check_error_covariance_ordering, check_gain_equivalence, check_placeholder_insensitivity,
    GAIN_EQUIVALENCE_TOL,
};
use gasgen_estimator::{
    update, EstimatorError, FilterModel, GaussianBelief, ShaftPowerInput, StepInput,
};
use gasgen_model::{Dims, GasGenModel, SteadyState};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

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
                    mean: 2000.0 * (t / 11.0).cos(),
                    var: 300.0 + 50.0 * (t / 3.0).sin().powi(2),
                },
            }
        })
        .collect()
}

// --- gain equivalence ---------------------------------------------------------

#[test]
fn placeholder_and_modified_filters_share_gains() {
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let steps = synthetic_steps(80);

    let report = check_gain_equivalence(&fm, &fm, &init, &steps, 0.0, 1.0e9).unwrap();
    assert!(report.pass, "gain equivalence failed: {report:?}");
    // Same covariance arithmetic in the same order: the agreement should be
    // exact, far inside the nominal tolerance.
    assert!(
        report.max_gain_dev < 1e-12,
        "gain dev {:e}",
        report.max_gain_dev
    );
    assert!(
        report.max_cov_dev < 1e-12,
        "cov dev {:e}",
        report.max_cov_dev
    );
}

#[test]
fn gain_equivalence_check_can_fail() {
    // Feeding two models that differ in the health random-walk covariance
    // must break the equivalence, proving the check has teeth.
    let model = GasGenModel::from_json_file(MODEL_PATH).unwrap();
    let fm = FilterModel::new(&model).unwrap();
    let mut other_model = model.clone();
    other_model.qh *= 100.0;
    let fm_other = FilterModel::new(&other_model).unwrap();

    let init = init_belief(fm.n());
    let steps = synthetic_steps(80);
    let report = check_gain_equivalence(&fm, &fm_other, &init, &steps, 0.0, 1.0e9).unwrap();
    assert!(
        !report.pass,
        "check passed across different models: {report:?}"
    );
    assert!(report.max_gain_dev > GAIN_EQUIVALENCE_TOL);
}

// --- placeholder insensitivity -------------------------------------------------

#[test]
fn placeholder_mean_influence_vanishes_up_the_ladder() {
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let steps = synthetic_steps(120);
    let ladder: Vec<f64> = (0..7).map(|d| 1.0e6 * 10f64.powi(2 * d)).collect();

    let report = check_placeholder_insensitivity(&fm, &init, &steps, 0.0, &ladder).unwrap();
    assert!(
        report.monotone,
        "deviation not monotone: {:?}",
        report.rungs
    );
    assert!(report.pass, "insensitivity failed: {report:?}");
    // The decay must be real, not a flat line of negligible deviations.
    assert!(
        report.rungs[0].delta > 1e3 * report.final_delta,
        "no meaningful decay: first {:e}, final {:e}",
        report.rungs[0].delta,
        report.final_delta
    );
}

#[test]
fn exact_placeholder_mean_induces_no_deviation() {
    // When the power profile is constant at the placeholder value the
    // deviation recursion is identically zero at every rung.
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let pe_t = 480.0;
    let mut steps = synthetic_steps(60);
    for s in &mut steps {
        s.pe.mean = pe_t;
    }
    let ladder: Vec<f64> = (0..4).map(|d| 1.0e6 * 10f64.powi(3 * d)).collect();

    let report = check_placeholder_insensitivity(&fm, &init, &steps, pe_t, &ladder).unwrap();
    assert!(report.pass);
    for rung in &report.rungs {
        assert_eq!(
            rung.delta, 0.0,
            "rung {:e} picked up a deviation",
            rung.p_pe_t
        );
    }
}

#[test]
fn degenerate_ladders_are_rejected() {
    let fm = shipped_filter();
    let init = init_belief(fm.n());
    let steps = synthetic_steps(10);

    // Too narrow a span.
    let err =
        check_placeholder_insensitivity(&fm, &init, &steps, 0.0, &[1.0e6, 1.0e8]).unwrap_err();
    assert!(matches!(err, EstimatorError::BadLadder { .. }));
    // Not increasing.
    let err = check_placeholder_insensitivity(&fm, &init, &steps, 0.0, &[1.0e12, 1.0e6, 1.0e14])
        .unwrap_err();
    assert!(matches!(err, EstimatorError::BadLadder { .. }));
    // Nonpositive rung.
    let err = check_placeholder_insensitivity(&fm, &init, &steps, 0.0, &[0.0, 1.0e6, 1.0e14])
        .unwrap_err();
    assert!(matches!(err, EstimatorError::BadLadder { .. }));
}

// --- error-covariance ordering ---------------------------------------------------

#[test]
fn placeholder_gains_cost_accuracy_when_power_is_known() {
    let fm = shipped_filter();
    let init = init_belief(fm.n());

    let report = check_error_covariance_ordering(&fm, &init.cov, 300, 400.0, 1.0e10, 11).unwrap();
    assert!(report.pass, "ordering failed: {report:?}");
    assert!(report.min_diag_gap >= report.floor);
    assert!(report.min_diag_gap_after_burn_in > 0.0);
}

#[test]
fn ordering_demands_an_inflated_placeholder() {
    let fm = shipped_filter();
    let init = init_belief(fm.n());

    let err = check_error_covariance_ordering(&fm, &init.cov, 100, 400.0, 200.0, 11).unwrap_err();
    assert!(matches!(err, EstimatorError::OrderingPrecondition { .. }));

    let err = check_error_covariance_ordering(&fm, &init.cov, 10, 400.0, 1.0e8, 10).unwrap_err();
    assert!(matches!(err, EstimatorError::LengthMismatch { .. }));
}

// --- property tests ----------------------------------------------------------------

/// A small but fully valid model with one state, one input, two sensors,
/// and two health parameters, built from bounded raw draws.
#[allow(clippy::too_many_arguments)]
fn small_model(
    a: f64,
    b: f64,
    c2: f64,
    f: f64,
    e: [f64; 2],
    g2: [f64; 2],
    q: f64,
    r: [f64; 2],
    qh: f64,
) -> GasGenModel {
    GasGenModel {
        dims: Dims {
            n_x: 1,
            n_u: 1,
            n_y: 2,
            n_theta: 2,
        },
        a: DMatrix::from_element(1, 1, a),
        b: DMatrix::from_element(1, 1, b),
        c: DMatrix::from_row_slice(2, 1, &[1.0, c2]),
        d: DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
        e: DMatrix::from_row_slice(1, 2, &e),
        f: DMatrix::from_element(1, 1, f),
        g: DMatrix::from_row_slice(2, 2, &[0.5, -g2[0], g2[0], g2[1]]),
        q: DMatrix::from_element(1, 1, q),
        r: DMatrix::from_partial_diagonal(2, 2, &r),
        qh: DMatrix::from_partial_diagonal(2, 2, &[qh, qh]),
        ss: SteadyState {
            x: DVector::from_vec(vec![100.0]),
            u: DVector::from_vec(vec![1.0]),
            y: DVector::from_vec(vec![100.0, 10.0]),
            theta: DVector::from_vec(vec![1.0, 1.0]),
            pe: 1000.0,
        },
    }
}

fn model_strategy() -> impl Strategy<Value = GasGenModel> {
    (
        0.5..0.99f64,
        1.0..100.0f64,
        0.01..2.0f64,
        proptest::bool::ANY,
        0.05..2.0f64,
        (-50.0..50.0f64, -50.0..50.0f64),
        (1.0..80.0f64, 1.0..80.0f64),
        0.01..25.0f64,
        (0.5..10.0f64, 0.5..10.0f64),
        1e-9..1e-5f64,
    )
        .prop_map(
            |(a, b, c2, f_neg, f_mag, (e0, e1), (g0, g1), q, (r0, r1), qh)| {
                let f = if f_neg { -f_mag } else { f_mag };
                // Keep E entries bounded away from zero so the health channel
                // genuinely drives the state.
                let e = [e0 + 1.0f64.copysign(e0), e1 + 1.0f64.copysign(e1)];
                small_model(a, b, c2, f, e, [g0, g1], q, [r0, r1], qh)
            },
        )
        .prop_filter("model must validate", |m| m.validate().is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Joseph-form updates keep randomly generated PSD priors PSD.
    #[test]
    fn joseph_update_preserves_psd(
        seed_vals in proptest::collection::vec(-3.0..3.0f64, 25),
        scale_log in -2.0..6.0f64,
    ) {
        let fm = shipped_filter();
        let n = fm.n();
        let raw = DMatrix::from_vec(n, n, seed_vals);
        let scale = 10f64.powf(scale_log);
        // L Lᵀ + εI is PSD by construction.
        let prior_cov = (&raw * raw.transpose()) * scale + DMatrix::identity(n, n) * 1e-8;
        let prior = GaussianBelief::from_cov(prior_cov);

        let u = DVector::from_vec(vec![0.1]);
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        // Refusing an ill-conditioned innovation is acceptable behavior;
        // the property under test is that whatever comes back is PSD.
        let (post, _) = match update(&prior, &fm, &u, &y) {
            Ok(out) => out,
            Err(EstimatorError::SingularInnovation { .. }) => return Ok(()),
            Err(other) => panic!("unexpected update failure: {other}"),
        };

        let asym = gasgen_model::max_asymmetry(&post.cov);
        prop_assert_eq!(asym, 0.0, "posterior not exactly symmetric");
        let min_eig = gasgen_model::min_symmetric_eigenvalue(&post.cov);
        let bound = -gasgen_model::PSD_REL_TOL * post.cov.trace();
        prop_assert!(min_eig >= bound, "min eigenvalue {} below {}", min_eig, bound);
    }

    /// Gain equivalence is structural: it holds on arbitrary valid models,
    /// placeholder configurations, and horizons.
    #[test]
    fn gain_equivalence_holds_on_random_models(
        model in model_strategy(),
        pe_t in -5000.0..5000.0f64,
        p_log in 2.0..8.0f64,
        n_steps in 5..60usize,
    ) {
        let fm = FilterModel::new(&model).unwrap();
        let n = fm.n();
        let mut cov = DMatrix::zeros(n, n);
        cov[(0, 0)] = 25.0;
        for i in 1..n {
            cov[(i, i)] = 1.0e-4;
        }
        let init = GaussianBelief::from_cov(cov);

        let steps: Vec<StepInput> = (0..n_steps)
            .map(|k| {
                let t = k as f64;
                StepInput {
                    u: DVector::from_vec(vec![(t / 3.0).sin()]),
                    y: DVector::from_vec(vec![2.0 * (t / 5.0).cos(), (t / 4.0).sin()]),
                    pe: ShaftPowerInput { mean: 100.0 * (t / 6.0).cos(), var: 10.0 },
                }
            })
            .collect();

        let report = check_gain_equivalence(&fm, &fm, &init, &steps, pe_t, 10f64.powf(p_log)).unwrap();
        prop_assert!(report.pass, "equivalence broke: {:?}", report);
    }
}
