use super::*;
use crate::data::Family;
use crate::oracle::orthonormal_formula;
use ndarray::{array, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian_data(n: usize, p: usize, seed: u64) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
    let mut y = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
    for i in 0..n {
        y[i] += 1.5 * x[[i, 0]] - x[[i, 1]] + 0.5 * x[[i, 2]];
    }
    Dataset::new(x, y, Family::Gaussian).unwrap()
}

fn orthonormal_design(n: usize, p: usize) -> Array2<f64> {
    let mut x = Array2::<f64>::zeros((n, p));
    for i in 0..n {
        let s = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
        for j in 0..p {
            x[[i, j]] = ((j + 1) as f64 * s).cos();
        }
    }
    for mut c in x.axis_iter_mut(Axis(1)) {
        let norm = c.dot(&c).sqrt();
        c.mapv_inplace(|v| v / norm);
    }
    x
}

#[test]
fn exact_line_reaches_least_squares() {
    let x: Array2<f64> = array![[0.0], [1.0], [2.0], [3.0], [5.0], [8.0]];
    let y = x.column(0).mapv(|v| 1.0 + 2.0 * v);
    let d = Dataset::new(x, y, Family::Gaussian).unwrap();
    let fit = fit_stage2_path(&d, &Stage2Kind::from_config(&FitConfig::default()), &FitConfig::default()).unwrap();
    let last = fit.coefficient_path.len() - 1;
    assert!((fit.coefficient_path.coefs[[last, 0]] - 2.0).abs() < 1e-3);
    assert!((fit.coefficient_path.intercepts[last] - 1.0).abs() < 1e-2);
    let m = unireg(&d, &FitConfig::default()).unwrap();
    assert!((m.gammas[0] - 2.0).abs() < 1e-8 && (m.gamma0 - 1.0).abs() < 1e-7);
}

#[test]
fn orthonormal_design_matches_thresholding_rules() {
    let (n, p) = (40, 6);
    let x = orthonormal_design(n, p);
    let beta = array![3.0, -2.0, 1.0, -0.6, 0.3, 0.0];
    let y = x.dot(&beta) + 5.0;
    let d = Dataset::new(x.clone(), y.clone(), Family::Gaussian).unwrap();
    let cfg = FitConfig { loo: false, n_lambda: 25, ..FitConfig::default() };
    let fit = fit_stage2_path(&d, &Stage2Kind::from_config(&cfg), &cfg).unwrap();
    let bhat = x.t().dot(&y);
    for k in 0..fit.path.len() {
        let lam = n as f64 * fit.path.lambdas[k] / 2.0;
        let expected = orthonormal_formula(bhat.view(), lam).unilasso;
        for j in 0..p {
            assert!((fit.coefficient_path.coefs[[k, j]] - expected[j]).abs() < 1e-6, "k={k} j={j}");
        }
    }
    // lasso on standardized columns: z_j = sqrt(n) x_j, so the threshold is sqrt(n) lambda / 2
    let lasso = fit_stage2_path(&d, &Stage2Kind::Lasso, &cfg).unwrap();
    for k in 0..lasso.path.len() {
        let lam = (n as f64).sqrt() * lasso.path.lambdas[k] / 2.0;
        let expected = orthonormal_formula(bhat.view(), lam).lasso;
        for j in 0..p {
            assert!((lasso.coefficient_path.coefs[[k, j]] - expected[j]).abs() < 1e-6, "k={k} j={j}");
        }
    }
}

#[test]
fn collapse_identity_on_insample_columns() {
    let d = gaussian_data(50, 6, 2);
    let fit = unilasso_cv(&d, &FitConfig::default()).unwrap();
    let u = fit.univariate.as_ref().unwrap();
    let s2 = fit.model.stage2.as_ref().unwrap();
    let theta_fit = u.insample_fits.dot(&s2.thetas) + s2.theta0;
    let collapsed = fit.model.linear_predictor(d.features.view()).unwrap();
    for (a, b) in theta_fit.iter().zip(collapsed.iter()) {
        assert!((a - b).abs() < 1e-12);
    }
    for j in 0..6 {
        assert_eq!(fit.model.gammas[j], u.slopes[j] * s2.thetas[j]);
    }
}

#[test]
fn sign_constrained_variants_respect_univariate_signs() {
    for seed in 0..4 {
        let d = gaussian_data(60, 12, seed);
        for (loo, mag) in [(true, true), (false, true), (true, false)] {
            let cfg = FitConfig { loo, use_magnitude: mag, ..FitConfig::default() };
            let fit = unilasso_cv(&d, &cfg).unwrap();
            for k in 0..fit.coefficient_path.len() {
                let slopes = &fit.model.univariate.as_ref().unwrap().slopes;
                for j in 0..12 {
                    assert!(fit.coefficient_path.coefs[[k, j]] * slopes[j] >= 0.0);
                }
            }
            assert_eq!(fit.model.sign_violations(), 0);
        }
        assert_eq!(unireg(&d, &FitConfig::default()).unwrap().sign_violations(), 0);
    }
}

#[test]
fn non_loo_variants_equal_adaptive_lasso() {
    let d = gaussian_data(50, 10, 7);
    for sign in [true, false] {
        let cfg = FitConfig { loo: false, sign_constraint: sign, n_lambda: 30, ..FitConfig::default() };
        let uni = fit_stage2_path(&d, &Stage2Kind::from_config(&cfg), &cfg).unwrap();
        let ada = fit_stage2_path_with_lambdas(&d, &Stage2Kind::Adaptive { sign_constraint: sign }, &uni.path.lambdas, &cfg)
            .unwrap();
        let diff = (&uni.coefficient_path.coefs - &ada.coefficient_path.coefs)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(diff < 1e-6, "sign={sign} diff={diff}");
    }
}

#[test]
fn external_scores_equal_to_insample_fits_match_no_loo() {
    let d = gaussian_data(40, 5, 3);
    let cfg = FitConfig { loo: false, ..FitConfig::default() };
    let base = unilasso_cv(&d, &cfg).unwrap();
    let u = base.univariate.as_ref().unwrap();
    let scores = ExternalScores::new(u.slopes.clone()).with_intercepts(u.intercepts.clone());
    let ext = unilasso_external(&d, &scores, &cfg).unwrap();
    let diff = (&ext.model.gammas - &base.model.gammas).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(diff < 1e-10, "{diff}");
    assert_eq!(ext.model.variant, Variant::External);

    let zero = unilasso_external(&d, &ExternalScores::new(Array1::zeros(5)), &cfg).unwrap();
    assert_eq!(zero.model.support_size(), 0);
    assert!((zero.model.gamma0 - d.response.mean().unwrap()).abs() < 1e-12);
}

#[test]
fn polish_first_point_keeps_base_slopes() {
    let d = gaussian_data(60, 8, 4);
    let cfg = FitConfig::default();
    let fit = unilasso_polish(&d, &cfg).unwrap();
    let head = fit.base.selected + 1;
    assert_eq!(fit.stitched.stages[head], PathStage::Polish);
    assert_eq!(fit.stitched.coefs.row(head), fit.base.model.gammas);
    assert_eq!(fit.stitched.coefs.row(head - 1), fit.base.model.gammas);
    assert_eq!(fit.model.variant, Variant::Polish);
}

#[test]
fn polish_on_exact_fit_adds_nothing() {
    let x = array![[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 1.0], [4.0, 3.0], [5.0, 0.5]];
    let y = x.column(0).mapv(|v| 2.0 * v + 1.0);
    let d = Dataset::new(x, y, Family::Gaussian).unwrap();
    let cfg = FitConfig { n_folds: 3, ..FitConfig::default() };
    let mut base = unilasso_cv(&d, &cfg).unwrap();
    base.model.gammas = array![2.0, 0.0];
    base.model.gamma0 = 1.0;
    let fit = polish(&d, &base, &cfg).unwrap();
    assert_eq!(fit.residual_fit.model.support_size(), 0);
    assert_eq!(fit.model.gammas, array![2.0, 0.0]);
}

#[test]
fn strict_cv_uses_the_same_grid() {
    let d = gaussian_data(50, 6, 5);
    let loose = unilasso_cv(&d, &FitConfig::default()).unwrap();
    let strict = unilasso_cv(&d, &FitConfig { strict_cv: true, ..FitConfig::default() }).unwrap();
    assert_eq!(loose.path.lambdas, strict.path.lambdas);
    assert_eq!(loose.path, strict.path);
    assert_ne!(loose.cv.as_ref().unwrap().cv_mean, strict.cv.as_ref().unwrap().cv_mean);
}

#[test]
fn constant_column_gets_zero_coefficient() {
    let mut d = gaussian_data(40, 4, 6);
    d.features.column_mut(1).fill(7.0);
    let fit = unilasso_cv(&d, &FitConfig::default()).unwrap();
    assert_eq!(fit.model.gammas[1], 0.0);
    assert_eq!(fit.design.q(), 3);
}

#[test]
fn binomial_unilasso_fits() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 120;
    let x = Array2::from_shape_fn((n, 5), |_| rng.sample::<f64, _>(StandardNormal));
    let y = Array1::from_shape_fn(n, |i| {
        let p = crate::scalar::sigmoid(1.5 * x[[i, 0]] - x[[i, 1]]);
        if rng.random::<f64>() < p { 1.0 } else { 0.0 }
    });
    let d = Dataset::new(x, y, Family::Binomial).unwrap();
    let fit = unilasso_cv(&d, &FitConfig::default()).unwrap();
    assert!(fit.model.gammas[0] > 0.0);
    assert_eq!(fit.model.sign_violations(), 0);
    let pred = fit.model.predict(d.features.view()).unwrap();
    assert!(pred.prob.unwrap().iter().all(|p| (0.0..=1.0).contains(p)));
}

#[test]
fn ovr_separates_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let centers = [[-4.0, 0.0], [4.0, 0.0], [0.0, 5.0]];
    let n = 90;
    let mut x = Array2::zeros((n, 3));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let c = i % 3;
        x[[i, 0]] = centers[c][0] + 0.5 * rng.sample::<f64, _>(StandardNormal);
        x[[i, 1]] = centers[c][1] + 0.5 * rng.sample::<f64, _>(StandardNormal);
        x[[i, 2]] = rng.sample::<f64, _>(StandardNormal);
        y[i] = (c + 1) as f64;
    }
    let d = Dataset::new(x, y.clone(), Family::Gaussian).unwrap();
    let cfg = FitConfig { n_folds: 5, ..FitConfig::default() };
    let ovr = ovr_multiclass(&d, &cfg).unwrap();
    assert_eq!(ovr.classes, vec![1.0, 2.0, 3.0]);
    let probs = ovr.predict_proba(d.features.view()).unwrap();
    assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
    let pred = ovr.predict(d.features.view()).unwrap();
    assert_eq!(pred, y);

    let few = FitConfig { n_folds: 40, ..FitConfig::default() };
    let err = ovr_multiclass(&d, &few).unwrap_err();
    assert!(err.to_string().contains("fewer folds"), "{err}");
}
