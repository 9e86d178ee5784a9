//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here shares code with the routines it checks beyond the problem
//! definitions themselves.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::data::Family;
use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::scalar::{positive_part, sigmoid, sign, soft_threshold, Scalar};
use crate::solver::SolverProblem;

/// Largest `n` accepted by [`loo_refit_oracle`].
pub const LOO_ORACLE_MAX_N: usize = 500;
/// Largest column count accepted by [`projected_gradient_oracle`].
pub const GRADIENT_ORACLE_MAX_Q: usize = 200;

const NEWTON_ITERATIONS: usize = 50;
const GRADIENT_MAX_ITER: usize = 1_000_000;

/// Leave-one-out fits by explicit refitting: entry `(i, j)` is the univariate
/// model for column `j` trained without row `i`, evaluated at row `i`.
///
/// Gaussian fits are least squares; binomial fits run 50 Newton iterations.
pub fn loo_refit_oracle<F: Scalar>(z: ArrayView2<'_, F>, y: ArrayView1<'_, F>, family: Family) -> Result<Array2<F>> {
    let (n, p) = z.dim();
    if n > LOO_ORACLE_MAX_N {
        return Err(Error::InvalidInput(format!(
            "refit oracle is limited to n <= {LOO_ORACLE_MAX_N}, got {n}"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("{n} rows but {} responses", y.len())));
    }
    let mut out = Array2::zeros((n, p));
    let mut xs = Vec::with_capacity(n - 1);
    let mut ys = Vec::with_capacity(n - 1);
    for j in 0..p {
        for i in 0..n {
            xs.clear();
            ys.clear();
            for k in (0..n).filter(|&k| k != i) {
                xs.push(z[[k, j]]);
                ys.push(y[k]);
            }
            let (a, b) = match family {
                Family::Gaussian => least_squares_line(&xs, &ys),
                Family::Binomial => newton_logistic_line(&xs, &ys),
            };
            out[[i, j]] = a + b * z[[i, j]];
        }
    }
    Ok(out)
}

fn least_squares_line<F: Scalar>(x: &[F], y: &[F]) -> (F, F) {
    let m = F::from_count(x.len());
    let xbar = x.iter().copied().sum::<F>() / m;
    let ybar = y.iter().copied().sum::<F>() / m;
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - xbar) * (a - xbar);
        sxy += (a - xbar) * (b - ybar);
    }
    let slope = if sxx > F::zero() { sxy / sxx } else { F::zero() };
    (ybar - slope * xbar, slope)
}

/// Plain Newton-Raphson on the two-parameter logistic likelihood.
/// Probabilities are clamped and the slope is clipped to the separation cap,
/// matching the conventions of the fast path.
fn newton_logistic_line<F: Scalar>(x: &[F], y: &[F]) -> (F, F) {
    let lo = F::lit(crate::univariate::PROB_CLAMP);
    let cap = F::lit(crate::univariate::SEPARATION_CAP);
    let prob = |eta: F| sigmoid(eta).max(lo).min(F::one() - lo);
    let m = F::from_count(x.len());
    let ybar = (y.iter().copied().sum::<F>() / m).max(lo).min(F::one() - lo);
    let mut a = (ybar / (F::one() - ybar)).ln();
    let mut b = F::zero();
    for _ in 0..NEWTON_ITERATIONS {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (F::zero(), F::zero(), F::zero(), F::zero(), F::zero());
        for (&xi, &yi) in x.iter().zip(y) {
            let p = prob(a + b * xi);
            let w = p * (F::one() - p);
            ga += yi - p;
            gb += (yi - p) * xi;
            haa += w;
            hab += w * xi;
            hbb += w * xi * xi;
        }
        let det = haa * hbb - hab * hab;
        if det <= F::zero() {
            break;
        }
        a += (hbb * ga - hab * gb) / det;
        b += (haa * gb - hab * ga) / det;
        if b.abs() > cap {
            b = cap * b.signum();
        }
    }
    (a, b)
}

/// Minimizes the solver objective by accelerated proximal gradient with
/// step `1/L` (`L` from power iteration) and adaptive restart.
///
/// Stops when the gradient mapping falls below `1e-10` relative to the
/// target scale. Returns `(intercept, coefficients)`.
pub fn projected_gradient_oracle<F: Scalar>(problem: &SolverProblem<F>, lambda: F) -> Result<(F, Array1<F>)> {
    problem.validate()?;
    let (n, q) = problem.design.dim();
    if q > GRADIENT_ORACLE_MAX_Q {
        return Err(Error::InvalidInput(format!(
            "gradient oracle is limited to q <= {GRADIENT_ORACLE_MAX_Q}, got {q}"
        )));
    }
    // Augmented design [1, D]; the first coordinate is the free intercept.
    let mut a = Array2::ones((n, q + 1));
    a.slice_mut(ndarray::s![.., 1..]).assign(&problem.design);
    let nf = F::from_count(n);
    let curvature = match problem.family {
        Family::Gaussian => F::lit(2.0),
        Family::Binomial => F::lit(0.5),
    };
    let lip = curvature / nf * weighted_top_eigenvalue(a.view(), problem.weights.view());
    let step = F::one() / lip;
    let lower: Vec<bool> = (0..q).map(|j| problem.lower_bounds[j] == F::zero()).collect();

    let gradient = |x: &Array1<F>| -> Array1<F> {
        let eta = a.dot(x) + &problem.offset;
        let mut r = Array1::zeros(n);
        for i in 0..n {
            let fitted = match problem.family {
                Family::Gaussian => eta[i],
                Family::Binomial => {
                    let lo = F::lit(crate::univariate::PROB_CLAMP);
                    sigmoid(eta[i]).max(lo).min(F::one() - lo)
                }
            };
            r[i] = problem.weights[i] * (problem.target[i] - fitted);
        }
        a.t().dot(&r) * (-F::lit(2.0) / nf)
    };
    let prox = |v: &Array1<F>| -> Array1<F> {
        let mut out = v.clone();
        for j in 0..q {
            let t = lambda * problem.penalty_factors[j] * step;
            out[j + 1] = if lower[j] {
                positive_part(v[j + 1] - t)
            } else {
                soft_threshold(v[j + 1], t)
            };
        }
        out
    };
    let objective = |x: &Array1<F>| problem.objective(x[0], x.slice(ndarray::s![1..]), lambda);

    let scale = problem.target.iter().fold(F::one(), |m, &v| m.max(v.abs()));
    let tol = F::lit(1e-10) * scale;
    let mut x = Array1::zeros(q + 1);
    let mut yk = x.clone();
    let mut t = F::one();
    let mut fx = objective(&x);
    for _ in 0..GRADIENT_MAX_ITER {
        let g = gradient(&yk);
        let next = prox(&(&yk - &(g * step)));
        let mapping = (&next - &yk).mapv(|v| v * v).sum().sqrt() / step;
        let f_next = objective(&next);
        if f_next > fx && t > F::one() {
            // restart momentum from the last iterate
            yk = x.clone();
            t = F::one();
            continue;
        }
        let t_next = (F::one() + (F::one() + F::lit(4.0) * t * t).sqrt()) / F::lit(2.0);
        yk = &next + &((&next - &x) * ((t - F::one()) / t_next));
        x = next;
        fx = f_next;
        t = t_next;
        if mapping <= tol {
            let coefs = x.slice(ndarray::s![1..]).to_owned();
            return Ok((x[0], coefs));
        }
    }
    Err(Error::Oracle(format!(
        "gradient oracle did not converge in {GRADIENT_MAX_ITER} iterations"
    )))
}

/// Largest eigenvalue of `A^T W A` by power iteration, with a 5% safety margin.
fn weighted_top_eigenvalue<F: Scalar>(a: ArrayView2<'_, F>, w: ArrayView1<'_, F>) -> F {
    let q = a.ncols();
    let mut v = Array1::from_elem(q, F::one() / F::from_count(q).sqrt());
    let mut est = F::zero();
    for _ in 0..500 {
        let av = a.dot(&v) * w;
        let u = a.t().dot(&av);
        let norm = u.dot(&u).sqrt();
        if norm == F::zero() {
            return F::one();
        }
        let prev = est;
        est = norm;
        v = u / norm;
        if (est - prev).abs() <= F::lit(1e-12) * est {
            break;
        }
    }
    est * F::lit(1.05)
}

/// Non-negative least squares with a free intercept (Lawson-Hanson active set).
///
/// Minimizes `||y - b0 - D theta||^2` subject to `theta >= 0`.
/// Returns `(intercept, theta)`.
pub fn nnls_active_set_oracle<F: Scalar>(design: ArrayView2<'_, F>, target: ArrayView1<'_, F>) -> Result<(F, Array1<F>)> {
    let (n, q) = design.dim();
    if q >= n {
        return Err(Error::InvalidInput(format!("NNLS oracle needs q < n, got q={q}, n={n}")));
    }
    let means = design.mean_axis(Axis(0)).expect("n > 0");
    let ybar = target.mean().expect("n > 0");
    let a = &design - &means.view().insert_axis(Axis(0));
    let b = target.mapv(|v| v - ybar);
    let ata = a.t().dot(&a);
    let atb = a.t().dot(&b);
    let tol = F::epsilon() * F::lit(1e4) * atb.iter().fold(F::one(), |m, v| m.max(v.abs()));

    let mut x = Array1::<F>::zeros(q);
    let mut passive = vec![false; q];
    let solve_passive = |passive: &[bool]| -> Result<Array1<F>> {
        let idx: Vec<usize> = (0..q).filter(|&j| passive[j]).collect();
        let sub = ata.select(Axis(0), &idx).select(Axis(1), &idx);
        let rhs = atb.select(Axis(0), &idx);
        let sol = solve_spd(sub.view(), rhs.view())
            .ok_or_else(|| Error::Oracle("NNLS oracle: active design is rank deficient".into()))?;
        let mut full = Array1::zeros(q);
        for (k, &j) in idx.iter().enumerate() {
            full[j] = sol[k];
        }
        Ok(full)
    };
    for _ in 0..(10 * q.max(1)) {
        let w = &atb - &ata.dot(&x);
        let candidate = (0..q)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).expect("finite gradient"));
        let Some(j) = candidate else {
            return Ok((ybar - means.dot(&x), x));
        };
        passive[j] = true;
        loop {
            let s = solve_passive(&passive)?;
            if (0..q).filter(|&k| passive[k]).all(|k| s[k] > F::zero()) {
                x = s;
                break;
            }
            let mut alpha = F::one();
            for k in (0..q).filter(|&k| passive[k] && s[k] <= F::zero()) {
                alpha = alpha.min(x[k] / (x[k] - s[k]));
            }
            x = &x + &((&s - &x) * alpha);
            for k in 0..q {
                if passive[k] && x[k] <= F::epsilon() * F::lit(16.0) {
                    passive[k] = false;
                    x[k] = F::zero();
                }
            }
        }
    }
    Err(Error::Oracle("NNLS oracle: cycle guard reached".into()))
}

/// Closed-form coefficients for a mean-zero orthonormal design.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalCoefficients<F> {
    /// `sign(b)(|b| - lambda/|b|)_+`
    pub unilasso: Array1<F>,
    /// `sign(b)(|b| - lambda)_+`
    pub lasso: Array1<F>,
}

/// Evaluates both thresholding rules elementwise; a zero `beta_hat` maps to 0.
///
/// `lambda` is on the `1/2 ||y - X b||^2 + lambda * penalty` scale.
pub fn orthonormal_formula<F: Scalar>(beta_hats: ArrayView1<'_, F>, lambda: F) -> OrthonormalCoefficients<F> {
    let unilasso = beta_hats.mapv(|b| {
        if b == F::zero() {
            F::zero()
        } else {
            sign(b) * positive_part(b.abs() - lambda / b.abs())
        }
    });
    let lasso = beta_hats.mapv(|b| sign(b) * positive_part(b.abs() - lambda));
    OrthonormalCoefficients { unilasso, lasso }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn orthonormal_formula_examples() {
        let c = orthonormal_formula(array![2.0, 0.5, -2.0, 0.0].view(), 1.0);
        assert_eq!(c.unilasso, array![1.5, 0.0, -1.5, 0.0]);
        assert_eq!(c.lasso, array![1.0, 0.0, -1.0, 0.0]);
        let big = orthonormal_formula(array![5.0].view(), 1.0);
        assert!(5.0 - big.unilasso[0] < 5.0 - big.lasso[0]);
    }

    #[test]
    fn refit_oracle_exact_line_and_constant_column() {
        let z = array![[1.0, 3.0], [2.0, 3.0], [3.0, 3.0], [4.0, 3.0]];
        let y = array![3.0, 5.0, 7.0, 11.0];
        let loo = loo_refit_oracle(z.view(), y.view(), Family::Gaussian).unwrap();
        let sum: f64 = y.sum();
        for i in 0..4 {
            assert!((loo[[i, 1]] - (sum - y[i]) / 3.0).abs() < 1e-12);
        }
        let line = array![1.0, 3.0, 5.0, 7.0];
        let loo = loo_refit_oracle(z.view(), line.view(), Family::Gaussian).unwrap();
        for i in 0..4 {
            assert!((loo[[i, 0]] - line[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn refit_oracle_guardrail() {
        let z = Array2::<f64>::zeros((501, 1));
        let y = Array1::zeros(501);
        assert!(loo_refit_oracle(z.view(), y.view(), Family::Gaussian).is_err());
    }

    #[test]
    fn nnls_interpolates_positive_cone_and_zeroes_anticorrelated() {
        let d: Array2<f64> = array![[1.0, 0.0], [0.0, 1.0], [2.0, 1.0], [1.0, 3.0], [0.5, 0.2]];
        let y = d.dot(&array![2.0, 0.5]) + 1.0;
        let (b0, th) = nnls_active_set_oracle(d.view(), y.view()).unwrap();
        assert!((b0 - 1.0).abs() < 1e-10 && (th[0] - 2.0).abs() < 1e-10 && (th[1] - 0.5).abs() < 1e-10);

        let col: Array2<f64> = array![[1.0], [2.0], [3.0], [4.0]];
        let y = array![4.0, 3.0, 2.0, 1.0];
        let (b0, th) = nnls_active_set_oracle(col.view(), y.view()).unwrap();
        assert_eq!(th[0], 0.0);
        assert!((b0 - 2.5).abs() < 1e-12);
    }

    #[test]
    fn gradient_oracle_recovers_least_squares() {
        let d: Array2<f64> = array![[1.0, 0.3], [0.2, 1.0], [2.0, 1.0], [1.0, 3.0], [0.5, 0.2], [1.5, -1.0]];
        let y = array![1.0, 2.0, 0.5, 3.0, -1.0, 0.2];
        let p = SolverProblem::new(d.clone(), y.clone(), Family::Gaussian).unwrap();
        let (b0, th) = projected_gradient_oracle(&p, 0.0).unwrap();
        let (e0, e) = crate::linalg::ols_with_intercept(d.view(), y.view()).unwrap();
        assert!((b0 - e0).abs() < 1e-8);
        assert!((th[0] - e[0]).abs() < 1e-8 && (th[1] - e[1]).abs() < 1e-8);
        let lmax = crate::solver::lambda_max(&p).unwrap();
        let (_, th) = projected_gradient_oracle(&p, lmax * 1.01).unwrap();
        assert!(th.iter().all(|v| *v == 0.0));
    }
}
