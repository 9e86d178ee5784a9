use ndarray::{Array1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{CollapsedModel, Variant};
use super::stage2::{build_design, collapse_point, Stage2Kind};
use crate::cv::null_path;
use crate::data::{Dataset, FitConfig};
use crate::error::{Error, Result};
use crate::linalg::{centered_gram, cholesky};
use crate::scalar::Scalar;
use crate::solver::{fit_path_with_lambdas, lambda_grid, lambda_max, solve_at, PathSolution};

/// Penalty ratio used when the zero-penalty problem is not strictly convex.
pub const UNIREG_MIN_RATIO: f64 = 1e-8;

/// Sign-constrained least squares on the leave-one-out columns (the zero
/// penalty end of the uniLasso path), collapsed to the original features.
///
/// With fewer usable columns than rows and a well-conditioned design the
/// exact constrained least squares solution is computed; otherwise the path is
/// followed down to `1e-8 * lambda_max` and its last point is returned.
pub fn unireg<F: Scalar>(dataset: &Dataset<F>, config: &FitConfig) -> Result<CollapsedModel<F>> {
    config.validate()?;
    crate::data::validate(dataset)?;
    let kind = Stage2Kind::UniLasso {
        loo: config.loo,
        sign_constraint: true,
        use_magnitude: true,
    };
    let (design, _) = build_design(dataset, &kind, None)?;
    let problem = design.problem(&dataset.response, dataset.family, None)?;
    let lmax = lambda_max(&problem)?;
    let (n, q) = (problem.n(), problem.q());
    let path: PathSolution<F> = if lmax == F::zero() {
        null_path(&problem)
    } else if q < n && strictly_convex(&design.columns, &dataset.response) {
        let s = solve_at(&problem, F::zero(), None, config)?;
        PathSolution {
            lambdas: vec![F::zero()],
            intercepts: vec![s.intercept],
            n_active: vec![s.coefs.iter().filter(|v| **v != F::zero()).count()],
            objective: vec![s.objective],
            sweeps: vec![s.sweeps],
            coefs: s.coefs.insert_axis(Axis(0)),
        }
    } else {
        let grid = lambda_grid(lmax, config.n_lambda, UNIREG_MIN_RATIO);
        fit_path_with_lambdas(&problem, &grid, config)?
    };
    let last = path.len() - 1;
    Ok(collapse_point(&design, &path, last, dataset.family, Variant::Unireg, &dataset.names()))
}

fn strictly_convex<F: Scalar>(columns: &ndarray::Array2<F>, y: &Array1<F>) -> bool {
    let (gram, _, _, _) = centered_gram(columns.view(), y.view());
    cholesky(gram.view(), F::epsilon() * F::lit(1e3)).is_some()
}

/// Percentile bootstrap interval for one coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapInterval<F> {
    pub estimate: F,
    pub lower: F,
    pub upper: F,
}

/// Row-resampling bootstrap intervals for every uniReg coefficient.
///
/// Replicate `b` draws its rows from stream `b + 1` of a ChaCha generator
/// seeded with `config.seed`, so results do not depend on thread count.
pub fn unireg_bootstrap_ci<F: Scalar>(
    dataset: &Dataset<F>,
    config: &FitConfig,
    n_boot: usize,
    level: f64,
) -> Result<Vec<BootstrapInterval<F>>> {
    if n_boot < 100 {
        return Err(Error::InvalidConfig(format!("n_boot must be at least 100, got {n_boot}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!("level must be in (0, 1), got {level}")));
    }
    let estimate = unireg(dataset, config)?;
    let n = dataset.n();
    let draws: Vec<Array1<F>> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(b as u64 + 1);
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            unireg(&dataset.select_rows(&rows), config).map(|m| m.gammas)
        })
        .collect::<Result<_>>()?;
    let alpha = (1.0 - level) / 2.0;
    Ok((0..dataset.p())
        .map(|j| {
            let mut v: Vec<F> = draws.iter().map(|g| g[j]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).expect("finite coefficients"));
            BootstrapInterval {
                estimate: estimate.gammas[j],
                lower: quantile(&v, alpha),
                upper: quantile(&v, 1.0 - alpha),
            }
        })
        .collect())
}

/// Linearly interpolated quantile of sorted data.
fn quantile<F: Scalar>(sorted: &[F], q: f64) -> F {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = F::lit(h - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Family;
    use ndarray::{array, Array2};

    #[test]
    fn single_feature_line_is_least_squares() {
        let x: Array2<f64> = array![[1.0], [2.0], [3.0], [4.0], [6.0]];
        let y = x.column(0).mapv(|v| 1.0 + 2.0 * v);
        let d = Dataset::new(x, y, Family::Gaussian).unwrap();
        let m = unireg(&d, &FitConfig::default()).unwrap();
        assert!((m.gammas[0] - 2.0).abs() < 1e-8, "{}", m.gammas[0]);
        assert!((m.gamma0 - 1.0).abs() < 1e-7);
        assert_eq!(m.variant, Variant::Unireg);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0f64, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert!((quantile(&v, 0.125) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_rejects_small_replicate_counts() {
        let d = Dataset::new(Array2::from_shape_fn((5, 1), |(i, _)| i as f64), array![1.0, 2.0, 2.5, 4.0, 5.0], Family::Gaussian)
            .unwrap();
        assert!(unireg_bootstrap_ci(&d, &FitConfig::default(), 10, 0.95).is_err());
        assert!(unireg_bootstrap_ci(&d, &FitConfig::default(), 100, 1.5).is_err());
    }
}
