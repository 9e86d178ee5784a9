//! Cyclic coordinate descent kernels.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::problem::SolverProblem;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::scalar::{sign, soft_threshold, Scalar};
use crate::univariate::clamped_sigmoid;

#[derive(Debug, Clone, Copy)]
pub(crate) struct CdSettings<F> {
    pub tol: F,
    pub max_iter: usize,
    pub lambda_index: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CdOutcome<F> {
    pub intercept: F,
    pub sweeps: usize,
}

const IRLS_MAX_OUTER: usize = 25;
const MAX_HALVINGS: usize = 30;

/// Minimizes `(1/n) sum_i w_i (t_i - b0 - d_i . theta)^2 + lambda sum_j pf_j pen(theta_j)`
/// over `theta` (updated in place) and the intercept.
///
/// The intercept is profiled out by centering columns and target with the
/// weights, which leaves column scales untouched. A sweep's change is
/// `max_j a_j dtheta_j^2` with `a_j` the weighted column variance; sweeps stop
/// once it is at most `tol^2` times the weighted variance of the target.
/// Moves within a few ulps of the coefficient do not count as change.
pub(crate) fn weighted_cd<F: Scalar>(
    design: ArrayView2<'_, F>,
    weights: ArrayView1<'_, F>,
    target: ArrayView1<'_, F>,
    penalty_factors: ArrayView1<'_, F>,
    constrained: &[bool],
    lambda: F,
    coefs: &mut Array1<F>,
    settings: CdSettings<F>,
) -> Result<CdOutcome<F>> {
    let (n, q) = design.dim();
    let inv_n = F::one() / F::from_count(n);
    let sw = weights.sum();
    let ym = weights.dot(&target) / sw;
    let xm: Vec<F> = (0..q).map(|j| weights.dot(&design.column(j)) / sw).collect();
    let a: Vec<F> = (0..q)
        .map(|j| {
            let m = xm[j];
            design
                .column(j)
                .iter()
                .zip(weights.iter())
                .map(|(&d, &w)| w * (d - m) * (d - m))
                .sum::<F>()
                * inv_n
        })
        .collect();

    let mut resid: Array1<F> = target.mapv(|t| t - ym);
    let null_loss = weights.iter().zip(resid.iter()).map(|(&w, &r)| w * r * r).sum::<F>() * inv_n;
    for j in 0..q {
        let t = coefs[j];
        if t != F::zero() {
            let m = xm[j];
            resid.zip_mut_with(&design.column(j), |r, &d| *r -= t * (d - m));
        }
    }
    let thr = settings.tol * settings.tol * null_loss.max(F::min_positive_value());
    let half_lambda = lambda * F::lit(0.5);
    let roundoff = F::epsilon() * F::lit(64.0);

    let sweep = |indices: &mut dyn Iterator<Item = usize>, coefs: &mut Array1<F>, resid: &mut Array1<F>| -> F {
        let mut max_change = F::zero();
        for j in indices {
            let aj = a[j];
            let old = coefs[j];
            let col = design.column(j);
            let m = xm[j];
            let new = if aj > F::zero() {
                let rho = col
                    .iter()
                    .zip(weights.iter())
                    .zip(resid.iter())
                    .map(|((&d, &w), &r)| w * (d - m) * r)
                    .sum::<F>()
                    * inv_n;
                let z = rho + aj * old;
                let t = half_lambda * penalty_factors[j];
                if constrained[j] {
                    ((z - t) / aj).max(F::zero())
                } else {
                    soft_threshold(z, t) / aj
                }
            } else {
                F::zero()
            };
            let delta = new - old;
            if delta != F::zero() {
                resid.zip_mut_with(&col, |r, &d| *r -= delta * (d - m));
                coefs[j] = new;
                if delta.abs() > roundoff * new.abs().max(old.abs()) {
                    max_change = max_change.max(aj * delta * delta);
                }
            }
        }
        max_change
    };

    // Active-set solve of the problem restricted to the current nonzero
    // coordinates with their signs held fixed: step to the face minimizer,
    // or to the first sign boundary and drop that coordinate. Kept only when
    // the objective does not go up.
    let face_solve = |active: &[usize], coefs: &mut Array1<F>, resid: &mut Array1<F>| {
        let cols: Vec<usize> = active.iter().copied().filter(|&j| coefs[j] != F::zero()).collect();
        let k = cols.len();
        if k == 0 || k >= n {
            return;
        }
        let centered: Vec<Array1<F>> = cols.iter().map(|&j| design.column(j).mapv(|d| d - xm[j])).collect();
        let weighted: Vec<Array1<F>> = centered.iter().map(|c| c * &weights).collect();
        let mut gram = Array2::<F>::zeros((k, k));
        for u in 0..k {
            for v in 0..=u {
                let g = weighted[u].dot(&centered[v]) * inv_n;
                gram[[u, v]] = g;
                gram[[v, u]] = g;
            }
        }
        let start: Vec<F> = cols.iter().map(|&j| coefs[j]).collect();
        let signs: Vec<F> = cols.iter().map(|&j| if constrained[j] { F::one() } else { sign(coefs[j]) }).collect();
        let cross: Vec<F> = (0..k)
            .map(|u| weighted[u].dot(&*resid) * inv_n + (0..k).map(|v| gram[[u, v]] * start[v]).sum::<F>())
            .collect();
        let mut theta = start.clone();
        let mut set: Vec<usize> = (0..k).collect();
        while !set.is_empty() {
            let m = set.len();
            let sub = Array2::from_shape_fn((m, m), |(u, v)| gram[[set[u], set[v]]]);
            let rhs = Array1::from_shape_fn(m, |u| {
                let i = set[u];
                cross[i] - half_lambda * penalty_factors[cols[i]] * signs[i]
            });
            let Some(l) = cholesky(sub.view(), F::epsilon() * F::lit(1e3)) else {
                break;
            };
            let sol = cholesky_solve(&l, rhs.view());
            let mut step = F::one();
            let mut blocking = None;
            for u in 0..m {
                let (t0, t1) = (theta[set[u]], sol[u]);
                if !(t1 * signs[set[u]] > F::zero()) {
                    let t = t0 / (t0 - t1);
                    if t < step {
                        step = t;
                        blocking = Some(u);
                    }
                }
            }
            for u in 0..m {
                let i = set[u];
                theta[i] = theta[i] + step * (sol[u] - theta[i]);
            }
            match blocking {
                None => break,
                Some(u) => {
                    theta[set[u]] = F::zero();
                    set.remove(u);
                }
            }
        }
        let mut trial = resid.clone();
        for u in 0..k {
            let delta = theta[u] - start[u];
            if delta != F::zero() {
                trial.zip_mut_with(&centered[u], |r, &d| *r -= delta * d);
            }
        }
        let value = |r: &Array1<F>, t: &[F]| {
            let fit = weights.iter().zip(r.iter()).map(|(&w, &e)| w * e * e).sum::<F>() * inv_n;
            fit + lambda * (0..k).map(|u| penalty_factors[cols[u]] * t[u].abs()).sum::<F>()
        };
        if value(&trial, &theta) > value(resid, &start) {
            return;
        }
        *resid = trial;
        for u in 0..k {
            coefs[cols[u]] = theta[u];
        }
    };

    let mut sweeps = 0usize;
    loop {
        let mut last = sweep(&mut (0..q), coefs, &mut resid);
        sweeps += 1;
        if last <= thr {
            break;
        }
        let active: Vec<usize> = (0..q).filter(|&j| coefs[j] != F::zero()).collect();
        let mut inner = 0usize;
        loop {
            inner += 1;
            if inner.is_multiple_of((active.len() / 2).max(4)) {
                face_solve(&active, coefs, &mut resid);
            }
            if sweeps >= settings.max_iter {
                return Err(Error::NonConvergence {
                    lambda_index: settings.lambda_index,
                    delta: last.as_f64(),
                    sweeps,
                });
            }
            last = sweep(&mut active.iter().copied(), coefs, &mut resid);
            sweeps += 1;
            if last <= thr {
                break;
            }
        }
        if sweeps >= settings.max_iter {
            return Err(Error::NonConvergence {
                lambda_index: settings.lambda_index,
                delta: last.as_f64(),
                sweeps,
            });
        }
    }
    let intercept = ym - (0..q).map(|j| xm[j] * coefs[j]).sum::<F>();
    Ok(CdOutcome { intercept, sweeps })
}

/// Gaussian solve of a whole problem at one penalty value.
pub(crate) fn solve_gaussian<F: Scalar>(
    problem: &SolverProblem<F>,
    lambda: F,
    coefs: &mut Array1<F>,
    settings: CdSettings<F>,
) -> Result<CdOutcome<F>> {
    let target = &problem.target - &problem.offset;
    let constrained: Vec<bool> = (0..problem.q()).map(|j| problem.is_constrained(j)).collect();
    weighted_cd(
        problem.design.view(),
        problem.weights.view(),
        target.view(),
        problem.penalty_factors.view(),
        &constrained,
        lambda,
        coefs,
        settings,
    )
}

/// Binomial solve: IRLS outer loop around [`weighted_cd`], halving the step
/// whenever the penalized objective goes up.
pub(crate) fn solve_binomial<F: Scalar>(
    problem: &SolverProblem<F>,
    lambda: F,
    intercept: &mut F,
    coefs: &mut Array1<F>,
    settings: CdSettings<F>,
) -> Result<usize> {
    let constrained: Vec<bool> = (0..problem.q()).map(|j| problem.is_constrained(j)).collect();
    let mut obj = problem.objective(*intercept, coefs.view(), lambda);
    let mut sweeps = 0;
    for _ in 0..IRLS_MAX_OUTER {
        let eta = problem.linear_predictor(*intercept, coefs.view());
        let n = problem.n();
        let mut work_w = Array1::zeros(n);
        let mut work_t = Array1::zeros(n);
        for i in 0..n {
            let p = clamped_sigmoid(eta[i]);
            let v = p * (F::one() - p);
            work_w[i] = problem.weights[i] * v;
            work_t[i] = eta[i] - problem.offset[i] + (problem.target[i] - p) / v;
        }
        let mut new = coefs.clone();
        let out = weighted_cd(
            problem.design.view(),
            work_w.view(),
            work_t.view(),
            problem.penalty_factors.view(),
            &constrained,
            lambda,
            &mut new,
            settings,
        )?;
        sweeps += out.sweeps;
        let mut new_b0 = out.intercept;
        let mut new_obj = problem.objective(new_b0, new.view(), lambda);
        let mut halvings = 0;
        while new_obj > obj && halvings < MAX_HALVINGS {
            new = (&new + &*coefs) * F::lit(0.5);
            new_b0 = (new_b0 + *intercept) * F::lit(0.5);
            new_obj = problem.objective(new_b0, new.view(), lambda);
            halvings += 1;
        }
        if new_obj > obj {
            break;
        }
        let change = obj - new_obj;
        *coefs = new;
        *intercept = new_b0;
        obj = new_obj;
        if change <= settings.tol * (obj.abs() + F::lit(0.1)) {
            break;
        }
    }
    Ok(sweeps)
}

/// Intercept of the model with every coefficient at zero.
pub(crate) fn null_intercept<F: Scalar>(problem: &SolverProblem<F>) -> F {
    let w = &problem.weights;
    let sw = w.sum();
    match problem.family {
        crate::data::Family::Gaussian => w.dot(&(&problem.target - &problem.offset)) / sw,
        crate::data::Family::Binomial => {
            let ybar = w.dot(&problem.target) / sw;
            let lo = F::lit(crate::univariate::PROB_CLAMP);
            let yc = ybar.max(lo).min(F::one() - lo);
            let mut b0 = (yc / (F::one() - yc)).ln();
            for _ in 0..50 {
                let (mut g, mut h) = (F::zero(), F::zero());
                for i in 0..problem.n() {
                    let p = clamped_sigmoid(problem.offset[i] + b0);
                    g += w[i] * (problem.target[i] - p);
                    h += w[i] * p * (F::one() - p);
                }
                let step = g / h;
                b0 += step;
                if step.abs() <= F::lit(1e-13) * (F::one() + b0.abs()) {
                    break;
                }
            }
            b0
        }
    }
}
