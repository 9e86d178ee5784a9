use ndarray::{Array1, Array2};
use proptest::prelude::*;
use unilasso::cv::assign_folds;
use unilasso::data::standardize;
use unilasso::{fit_path, unilasso_cv, Dataset, Family, FitConfig, SolverProblem};

fn matrix(n: usize, p: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-3.0f64..3.0, n * p).prop_map(move |v| Array2::from_shape_vec((n, p), v).unwrap())
}

fn regression() -> impl Strategy<Value = Dataset<f64>> {
    (12usize..30, 2usize..7)
        .prop_flat_map(|(n, p)| (matrix(n, p), prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(-2.0f64..2.0, p)))
        .prop_map(|(x, noise, beta)| {
            let y = x.dot(&Array1::from(beta)) + Array1::from(noise);
            Dataset::new(x, y, Family::Gaussian).unwrap()
        })
}

fn small_config() -> FitConfig {
    FitConfig {
        n_lambda: 20,
        n_folds: 3,
        ..FitConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn standardize_round_trip(x in matrix(15, 4)) {
        let (z, stats) = standardize(x.view());
        let back = stats.unstandardize(z.view());
        for (a, b) in x.iter().zip(back.iter()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn kkt_holds_along_nonnegative_paths(x in matrix(20, 5), y in prop::collection::vec(-3.0f64..3.0, 20)) {
        let problem = SolverProblem::new(x, Array1::from(y), Family::Gaussian).unwrap().nonnegative(true);
        let path = fit_path(&problem, &small_config()).unwrap();
        for k in 0..path.len() {
            prop_assert!(path.coef(k).iter().all(|&t| t >= 0.0));
            let v = problem.kkt_violation(path.intercepts[k], path.coef(k), path.lambdas[k]);
            prop_assert!(v <= 1e-6, "k={} violation {}", k, v);
        }
    }

    #[test]
    fn signs_follow_univariate_slopes(d in regression()) {
        let fit = unilasso_cv(&d, &small_config()).unwrap();
        prop_assert_eq!(fit.model.sign_violations(), 0);
        for k in 0..fit.coefficient_path.len() {
            let thetas = fit.path.coef(k);
            prop_assert!(thetas.iter().all(|&t| t >= 0.0));
        }
        let slopes = &fit.model.univariate.as_ref().unwrap().slopes;
        for k in 0..fit.coefficient_path.len() {
            for j in 0..d.p() {
                prop_assert!(fit.coefficient_path.coefs[[k, j]] * slopes[j] >= 0.0);
            }
        }
    }

    #[test]
    fn collapsed_model_reproduces_stage2_fit(d in regression()) {
        let fit = unilasso_cv(&d, &small_config()).unwrap();
        let u = fit.univariate.as_ref().unwrap();
        let s2 = fit.model.stage2.as_ref().unwrap();
        let stacked = u.insample_fits.dot(&s2.thetas) + s2.theta0;
        let collapsed = fit.model.linear_predictor(d.features.view()).unwrap();
        for (a, b) in stacked.iter().zip(collapsed.iter()) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn fits_are_deterministic(d in regression(), seed in 0u64..1000) {
        let cfg = FitConfig { seed, ..small_config() };
        let a = unilasso_cv(&d, &cfg).unwrap();
        let b = unilasso_cv(&d, &cfg).unwrap();
        prop_assert_eq!(a.model, b.model);
        prop_assert_eq!(a.cv, b.cv);
    }

    #[test]
    fn folds_are_balanced_and_seeded(n in 2usize..200, k in 2usize..10, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = assign_folds(n, k, seed);
        prop_assert_eq!(&folds, &assign_folds(n, k, seed));
        let mut sizes = vec![0usize; k];
        for &f in &folds {
            sizes[f] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
    }
}

#[test]
fn single_precision_matches_double() {
    let (n, p) = (60, 5);
    let x64 = Array2::from_shape_fn((n, p), |(i, j)| (((i * 7 + j * 13) % 17) as f64 - 8.0) / 4.0);
    let y64 = Array1::from_shape_fn(n, |i| 2.0 * x64[[i, 0]] - x64[[i, 2]] + ((i % 5) as f64 - 2.0) * 0.3);
    let d64 = Dataset::new(x64.clone(), y64.clone(), Family::Gaussian).unwrap();
    let d32 = Dataset::new(x64.mapv(|v| v as f32), y64.mapv(|v| v as f32), Family::Gaussian).unwrap();
    let cfg = FitConfig { tol: 1e-4, ..FitConfig::default() };
    let m64 = unilasso_cv(&d64, &cfg).unwrap().model;
    let m32 = unilasso_cv(&d32, &cfg).unwrap().model;
    assert_eq!(m32.sign_violations(), 0);
    for j in 0..p {
        assert!((m64.gammas[j] - m32.gammas[j] as f64).abs() < 1e-2, "feature {j}");
    }
}
