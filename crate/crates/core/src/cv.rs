//! K-fold cross-validation over a fixed penalty grid.

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{Family, FitConfig, LambdaRule};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solver::{fit_path_with_lambdas, lambda_grid, lambda_max, PathSolution, SolverProblem};
use crate::univariate::{binomial_unit_deviance, clamped_sigmoid};

/// Cross-validation curves along a penalty path.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult<F> {
    pub lambdas: Vec<F>,
    /// Held-out squared error (gaussian) or deviance (binomial), per penalty.
    pub cv_mean: Vec<F>,
    pub cv_se: Vec<F>,
    pub idx_min: usize,
    /// Largest penalty within one standard error of the minimum.
    pub idx_1se: usize,
    pub fold_assignment: Vec<usize>,
    /// Binomial only: held-out misclassification rate.
    pub misclass_mean: Option<Vec<F>>,
    pub misclass_se: Option<Vec<F>>,
}

impl<F: Scalar> CvResult<F> {
    pub fn selected_index(&self, rule: LambdaRule) -> usize {
        match rule {
            LambdaRule::Min => self.idx_min,
            LambdaRule::OneSe => self.idx_1se,
        }
    }

    pub fn lambda_min(&self) -> F {
        self.lambdas[self.idx_min]
    }

    pub fn lambda_1se(&self) -> F {
        self.lambdas[self.idx_1se]
    }

    pub fn n_folds(&self) -> usize {
        self.fold_assignment.iter().max().map_or(0, |m| m + 1)
    }
}

/// Held-out losses of one fold at every penalty.
#[derive(Debug, Clone)]
pub struct FoldEval<F> {
    /// Total observation weight in the held-out rows.
    pub weight: F,
    pub loss: Vec<F>,
    pub misclass: Option<Vec<F>>,
}

/// Seeded fold ids: a shuffled permutation dealt round-robin into `k` folds.
pub fn assign_folds(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![0; n];
    for (pos, &row) in perm.iter().enumerate() {
        folds[row] = pos % k;
    }
    folds
}

/// Rows of fold `k` and rows of every other fold.
pub fn split(folds: &[usize], k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, &f) in folds.iter().enumerate() {
        if f == k {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    (train, test)
}

/// Default penalty grid for a problem.
pub fn default_grid<F: Scalar>(problem: &SolverProblem<F>, config: &FitConfig) -> Result<Vec<F>> {
    let lmax = lambda_max(problem)?;
    Ok(lambda_grid(lmax, config.n_lambda, config.min_ratio_for(problem.n(), problem.q())))
}

/// Cross-validates `problem` on the full-data grid with seeded folds.
pub fn kfold_cv<F: Scalar>(problem: &SolverProblem<F>, config: &FitConfig) -> Result<CvResult<F>> {
    config.validate()?;
    check_fold_count(problem.n(), config.n_folds)?;
    let lambdas = default_grid(problem, config)?;
    let folds = assign_folds(problem.n(), config.n_folds, config.seed);
    kfold_cv_with_folds(problem, &lambdas, &folds, config)
}

/// Cross-validates on a given grid and fold assignment.
pub fn kfold_cv_with_folds<F: Scalar>(
    problem: &SolverProblem<F>,
    lambdas: &[F],
    folds: &[usize],
    config: &FitConfig,
) -> Result<CvResult<F>> {
    problem.validate()?;
    if folds.len() != problem.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} fold ids for {} rows",
            folds.len(),
            problem.n()
        )));
    }
    cross_validate(lambdas, folds, problem.family, |train, test| {
        let fit = problem.select_rows(train);
        let path = fit_fold_path(&fit, lambdas, config)?;
        Ok(evaluate_fold(&problem.select_rows(test), &path))
    })
}

/// Runs `fold_fit(train_rows, test_rows)` for every fold in parallel and
/// aggregates the curves in fold order.
pub fn cross_validate<F, G>(lambdas: &[F], folds: &[usize], family: Family, fold_fit: G) -> Result<CvResult<F>>
where
    F: Scalar,
    G: Fn(&[usize], &[usize]) -> Result<FoldEval<F>> + Sync,
{
    let k = folds.iter().max().map_or(0, |m| m + 1);
    if k < 2 {
        return Err(Error::InvalidConfig("cross-validation needs at least 2 folds".into()));
    }
    let evals: Vec<FoldEval<F>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (train, test) = split(folds, f);
            if test.is_empty() {
                return Err(Error::InvalidInput(format!("fold {f} is empty")));
            }
            fold_fit(&train, &test)
        })
        .collect::<Result<Vec<_>>>()?;
    for (f, e) in evals.iter().enumerate() {
        if e.weight <= F::zero() {
            return Err(Error::InvalidInput(format!("fold {f} has zero total weight")));
        }
    }
    let (cv_mean, cv_se) = aggregate(&evals, lambdas.len(), |e| &e.loss);
    let (misclass_mean, misclass_se) = if family == Family::Binomial {
        let (m, s) = aggregate(&evals, lambdas.len(), |e| e.misclass.as_ref().expect("binomial fold"));
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    let idx_min = (0..cv_mean.len()).fold(0, |best, i| if cv_mean[i] < cv_mean[best] { i } else { best });
    let bound = cv_mean[idx_min] + cv_se[idx_min];
    let idx_1se = (0..=idx_min).find(|&i| cv_mean[i] <= bound).unwrap_or(idx_min);
    Ok(CvResult {
        lambdas: lambdas.to_vec(),
        cv_mean,
        cv_se,
        idx_min,
        idx_1se,
        fold_assignment: folds.to_vec(),
        misclass_mean,
        misclass_se,
    })
}

fn aggregate<F: Scalar>(evals: &[FoldEval<F>], m: usize, pick: impl Fn(&FoldEval<F>) -> &Vec<F>) -> (Vec<F>, Vec<F>) {
    let total: F = evals.iter().map(|e| e.weight).sum();
    let k = F::from_count(evals.len());
    let mut mean = vec![F::zero(); m];
    let mut se = vec![F::zero(); m];
    for l in 0..m {
        let mu = evals.iter().map(|e| e.weight * pick(e)[l]).sum::<F>() / total;
        let var = evals
            .iter()
            .map(|e| {
                let d = pick(e)[l] - mu;
                e.weight * d * d
            })
            .sum::<F>()
            / total;
        mean[l] = mu;
        se[l] = (var / (k - F::one())).sqrt();
    }
    (mean, se)
}

/// Fits a fold on the shared grid. A degenerate single-point grid at zero
/// (nothing correlates on the full data) is the null model in every fold.
pub fn fit_fold_path<F: Scalar>(problem: &SolverProblem<F>, lambdas: &[F], config: &FitConfig) -> Result<PathSolution<F>> {
    if lambdas.len() == 1 && lambdas[0] == F::zero() {
        return Ok(null_path(problem));
    }
    fit_path_with_lambdas(problem, lambdas, config)
}

/// Single-point path holding the intercept-only model.
pub fn null_path<F: Scalar>(problem: &SolverProblem<F>) -> PathSolution<F> {
    let q = problem.q();
    let coefs = Array1::zeros(q);
    let b0 = crate::solver::null_model_intercept(problem);
    PathSolution {
        lambdas: vec![F::zero()],
        intercepts: vec![b0],
        objective: vec![problem.objective(b0, coefs.view(), F::zero())],
        coefs: coefs.insert_axis(ndarray::Axis(0)),
        n_active: vec![0],
        sweeps: vec![0],
    }
}

/// Held-out loss (and misclassification for binomial) of every path point.
pub fn evaluate_fold<F: Scalar>(test: &SolverProblem<F>, path: &PathSolution<F>) -> FoldEval<F> {
    let weight = test.weights.sum();
    let mut loss = Vec::with_capacity(path.len());
    let mut misclass = (test.family == Family::Binomial).then(|| Vec::with_capacity(path.len()));
    for k in 0..path.len() {
        let eta = test.linear_predictor(path.intercepts[k], path.coef(k));
        let mut l = F::zero();
        let mut m = F::zero();
        for i in 0..test.n() {
            let (w, y, e) = (test.weights[i], test.target[i], eta[i]);
            match test.family {
                Family::Gaussian => l += w * (y - e) * (y - e),
                Family::Binomial => {
                    l += w * binomial_unit_deviance(y, e);
                    let predicted = if clamped_sigmoid(e) > F::lit(0.5) { F::one() } else { F::zero() };
                    if predicted != y {
                        m += w;
                    }
                }
            }
        }
        loss.push(l / weight);
        if let Some(v) = misclass.as_mut() {
            v.push(m / weight);
        }
    }
    FoldEval { weight, loss, misclass }
}

/// Cross-validated error at the selected (minimizing) penalty.
pub fn cv_error_at_selected<F: Scalar>(cv: &CvResult<F>) -> F {
    cv.cv_mean[cv.idx_min]
}

pub(crate) fn check_fold_count(n: usize, n_folds: usize) -> Result<()> {
    if n_folds > n {
        return Err(Error::InvalidConfig(format!(
            "n_folds = {n_folds} exceeds the number of observations ({n})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_at;
    use ndarray::{Array1, Array2};
    use rand::Rng;

    fn noisy_problem(n: usize, q: usize, signal: f64, seed: u64) -> SolverProblem<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, q), |_| rng.random_range(-1.7..1.7));
        let y = x.column(0).mapv(|v| signal * v) + Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
        SolverProblem::new(x, y, Family::Gaussian).unwrap().nonnegative(true)
    }

    #[test]
    fn folds_are_balanced_and_seeded() {
        let a = assign_folds(23, 5, 7);
        assert_eq!(a, assign_folds(23, 5, 7));
        assert_ne!(a, assign_folds(23, 5, 8));
        for k in 0..5 {
            let c = a.iter().filter(|&&f| f == k).count();
            assert!(c == 4 || c == 5);
        }
    }

    #[test]
    fn selection_indices_are_consistent() {
        let p = noisy_problem(60, 5, 2.0, 1);
        let cv = kfold_cv(&p, &FitConfig { n_lambda: 30, n_folds: 5, ..FitConfig::default() }).unwrap();
        let min = cv.cv_mean.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(cv.cv_mean[cv.idx_min], min);
        assert!(cv.idx_1se <= cv.idx_min);
        assert_eq!(cv_error_at_selected(&cv), min);
        // strong signal: the minimum is strictly inside the path
        assert!(cv.idx_min > 0 && cv.idx_min < cv.lambdas.len() - 1);
    }

    #[test]
    fn too_many_folds_is_rejected() {
        let p = noisy_problem(8, 2, 1.0, 1);
        assert!(kfold_cv(&p, &FitConfig { n_folds: 9, ..FitConfig::default() }).is_err());
    }

    #[test]
    fn leave_one_out_folds_match_refits() {
        let p = noisy_problem(20, 3, 1.0, 3);
        let cfg = FitConfig::default();
        let lmax = lambda_max(&p).unwrap();
        let lambdas = vec![lmax * 0.3];
        let folds: Vec<usize> = (0..20).collect();
        let cv = kfold_cv_with_folds(&p, &lambdas, &folds, &cfg).unwrap();
        let mut expected = 0.0;
        for i in 0..20 {
            let train: Vec<usize> = (0..20).filter(|&k| k != i).collect();
            let s = solve_at(&p.select_rows(&train), lambdas[0], None, &cfg).unwrap();
            let pred = s.intercept + p.design.row(i).dot(&s.coefs);
            expected += (p.target[i] - pred).powi(2) / 20.0;
        }
        assert!((cv.cv_mean[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn row_permutation_with_same_folds_is_invariant() {
        let p = noisy_problem(40, 4, 1.5, 5);
        let cfg = FitConfig { n_lambda: 20, n_folds: 4, ..FitConfig::default() };
        let lambdas = default_grid(&p, &cfg).unwrap();
        let folds = assign_folds(40, 4, 2);
        let a = kfold_cv_with_folds(&p, &lambdas, &folds, &cfg).unwrap();
        let perm: Vec<usize> = (0..40).rev().collect();
        let permuted = p.select_rows(&perm);
        let pf: Vec<usize> = perm.iter().map(|&i| folds[i]).collect();
        let b = kfold_cv_with_folds(&permuted, &lambdas, &pf, &cfg).unwrap();
        for (x, y) in a.cv_mean.iter().zip(&b.cv_mean) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn binomial_records_misclassification() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = Array2::from_shape_fn((80, 3), |_| rng.random_range(-2.0..2.0));
        let y = Array1::from_shape_fn(80, |i| if x[[i, 0]] + rng.random_range(-1.0..1.0) > 0.0 { 1.0 } else { 0.0 });
        let p = SolverProblem::new(x, y, Family::Binomial).unwrap().nonnegative(true);
        let cv = kfold_cv(&p, &FitConfig { n_lambda: 20, n_folds: 5, ..FitConfig::default() }).unwrap();
        let m = cv.misclass_mean.unwrap();
        assert_eq!(m.len(), 20);
        assert!(m.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(m[cv.idx_min] < 0.3);
    }

    #[test]
    fn degenerate_grid_uses_null_model() {
        let x = Array2::from_shape_fn((10, 2), |(i, j)| (i * (j + 1)) as f64);
        let p = SolverProblem::new(x, Array1::from_elem(10, 3.0), Family::Gaussian).unwrap();
        let cv = kfold_cv(&p, &FitConfig { n_folds: 5, ..FitConfig::default() }).unwrap();
        assert_eq!(cv.lambdas, vec![0.0]);
        assert_eq!(cv.cv_mean, vec![0.0]);
    }
}
