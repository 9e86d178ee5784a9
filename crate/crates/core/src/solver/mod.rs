//! Stage 2: penalized regression paths by cyclic coordinate descent.
//!
//! Supports an unpenalized intercept, observation weights, an offset,
//! per-column penalty factors and a zero lower bound per column. Columns are
//! used on their own scale.

mod coordinate;
mod problem;

use ndarray::{Array1, Array2, ArrayView1};

pub use problem::SolverProblem;

use crate::data::{FitConfig, Family};
use crate::error::Result;
use crate::scalar::Scalar;
use coordinate::{null_intercept, solve_binomial, solve_gaussian, CdSettings};

/// Solution at a single penalty value.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSolution<F> {
    pub lambda: F,
    pub intercept: F,
    pub coefs: Array1<F>,
    pub objective: F,
    pub sweeps: usize,
}

/// Solutions along a decreasing sequence of penalty values.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSolution<F> {
    pub lambdas: Vec<F>,
    pub intercepts: Vec<F>,
    /// `n_lambda x q`.
    pub coefs: Array2<F>,
    pub n_active: Vec<usize>,
    pub objective: Vec<F>,
    pub sweeps: Vec<usize>,
}

impl<F: Scalar> PathSolution<F> {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn coef(&self, k: usize) -> ArrayView1<'_, F> {
        self.coefs.row(k)
    }

    pub fn point(&self, k: usize) -> PointSolution<F> {
        PointSolution {
            lambda: self.lambdas[k],
            intercept: self.intercepts[k],
            coefs: self.coefs.row(k).to_owned(),
            objective: self.objective[k],
            sweeps: self.sweeps[k],
        }
    }
}

fn settings<F: Scalar>(config: &FitConfig, lambda_index: usize) -> CdSettings<F> {
    CdSettings {
        tol: F::lit(config.tol),
        max_iter: config.max_iter,
        lambda_index,
    }
}

/// Smallest penalty at which every coefficient is zero.
///
/// Scores are `(2/n) sum_i w_i d_ij r_i` at the null model; with a zero lower
/// bound only positive scores count. Returns zero when nothing correlates.
pub fn lambda_max<F: Scalar>(problem: &SolverProblem<F>) -> Result<F> {
    problem.validate()?;
    let b0 = null_intercept(problem);
    let zeros = Array1::zeros(problem.q());
    let r = problem.residual(b0, zeros.view());
    let scores = problem.scores(r.view());
    let mut best = F::zero();
    for j in 0..problem.q() {
        let s = if problem.is_constrained(j) {
            scores[j].max(F::zero())
        } else {
            scores[j].abs()
        };
        best = best.max(s / problem.penalty_factors[j]);
    }
    // Numerical dust from an orthogonal target is not signal.
    let scale = problem.target.iter().fold(F::zero(), |m, &v| m.max(v.abs()));
    let dust = F::epsilon() * F::lit(16.0) * scale * scale.max(F::one());
    Ok(if best <= dust { F::zero() } else { best })
}

/// Intercept of the model with every coefficient at zero.
pub fn null_model_intercept<F: Scalar>(problem: &SolverProblem<F>) -> F {
    null_intercept(problem)
}

/// Geometric grid from `lambda_max` down to `lambda_max * min_ratio`.
pub fn lambda_grid<F: Scalar>(lambda_max: F, n_lambda: usize, min_ratio: f64) -> Vec<F> {
    if lambda_max == F::zero() {
        return vec![F::zero()];
    }
    let ratio = F::lit(min_ratio);
    let last = F::from_count(n_lambda - 1);
    (0..n_lambda)
        .map(|k| {
            if k == 0 {
                lambda_max
            } else {
                lambda_max * ratio.powf(F::from_count(k) / last)
            }
        })
        .collect()
}

fn solve_point<F: Scalar>(
    problem: &SolverProblem<F>,
    lambda: F,
    intercept: &mut F,
    coefs: &mut Array1<F>,
    settings: CdSettings<F>,
) -> Result<usize> {
    match problem.family {
        Family::Gaussian => {
            let out = solve_gaussian(problem, lambda, coefs, settings)?;
            *intercept = out.intercept;
            Ok(out.sweeps)
        }
        Family::Binomial => solve_binomial(problem, lambda, intercept, coefs, settings),
    }
}

/// Solves at one penalty value, optionally warm-started from `(intercept, coefs)`.
///
/// `lambda = 0` gives (sign-constrained) least squares; when that minimizer
/// is not unique the result is whichever minimizer coordinate descent reaches.
pub fn solve_at<F: Scalar>(
    problem: &SolverProblem<F>,
    lambda: F,
    warm: Option<(F, ArrayView1<'_, F>)>,
    config: &FitConfig,
) -> Result<PointSolution<F>> {
    problem.validate()?;
    if lambda < F::zero() {
        return Err(crate::error::Error::InvalidInput("lambda must be non-negative".into()));
    }
    let (mut b0, mut coefs) = match warm {
        Some((b, c)) => (b, c.to_owned()),
        None => (null_intercept(problem), Array1::zeros(problem.q())),
    };
    for j in 0..problem.q() {
        if problem.is_constrained(j) && coefs[j] < F::zero() {
            coefs[j] = F::zero();
        }
    }
    let sweeps = solve_point(problem, lambda, &mut b0, &mut coefs, settings(config, 0))?;
    Ok(PointSolution {
        lambda,
        intercept: b0,
        objective: problem.objective(b0, coefs.view(), lambda),
        coefs,
        sweeps,
    })
}

/// Full path on the default geometric grid.
pub fn fit_path<F: Scalar>(problem: &SolverProblem<F>, config: &FitConfig) -> Result<PathSolution<F>> {
    config.validate()?;
    let lmax = lambda_max(problem)?;
    let grid = lambda_grid(lmax, config.n_lambda, config.min_ratio_for(problem.n(), problem.q()));
    fit_path_with_lambdas(problem, &grid, config)
}

/// Path on a caller-supplied decreasing grid, warm-starting each point from the previous one.
pub fn fit_path_with_lambdas<F: Scalar>(
    problem: &SolverProblem<F>,
    lambdas: &[F],
    config: &FitConfig,
) -> Result<PathSolution<F>> {
    problem.validate()?;
    let q = problem.q();
    let mut b0 = null_intercept(problem);
    let mut coefs = Array1::zeros(q);
    let mut out = PathSolution {
        lambdas: lambdas.to_vec(),
        intercepts: Vec::with_capacity(lambdas.len()),
        coefs: Array2::zeros((lambdas.len(), q)),
        n_active: Vec::with_capacity(lambdas.len()),
        objective: Vec::with_capacity(lambdas.len()),
        sweeps: Vec::with_capacity(lambdas.len()),
    };
    for (k, &lambda) in lambdas.iter().enumerate() {
        let sweeps = solve_point(problem, lambda, &mut b0, &mut coefs, settings(config, k))?;
        out.intercepts.push(b0);
        out.coefs.row_mut(k).assign(&coefs);
        out.n_active.push(coefs.iter().filter(|v| **v != F::zero()).count());
        out.objective.push(problem.objective(b0, coefs.view(), lambda));
        out.sweeps.push(sweeps);
    }
    Ok(out)
}
