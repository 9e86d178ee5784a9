//! Stage 1: one univariate regression per feature, with leave-one-out fits.
//!
//! Gaussian LOO fits are exact and come from the hat-diagonal identity
//! `y_i - eta^{-i} = (y_i - eta^i) / (1 - H_ii)` with `H_ii = (1 + z_ij^2) / n`
//! on standardized features. Binomial LOO fits apply the weighted version of
//! the same identity to the last IRLS step.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, ShapeBuilder, Zip};
use rayon::prelude::*;

use crate::data::{standardize, Dataset, Family, StandardizationStats};
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Scalar};

/// Bound on the standardized-scale logistic slope.
pub const SEPARATION_CAP: f64 = 10.0;
/// Fitted probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]`.
pub const PROB_CLAMP: f64 = 1e-5;
const IRLS_MIN_STEPS: usize = 4;
const IRLS_MAX_STEPS: usize = 25;
const IRLS_DEVIANCE_TOL: f64 = 1e-10;
const LEVERAGE_GUARD: f64 = 1e-12;

/// Per-feature univariate fits and their leave-one-out counterparts.
#[derive(Debug, Clone)]
pub struct UnivariateFits<F> {
    /// Intercepts on the original feature scale.
    pub intercepts: Array1<F>,
    /// Slopes on the original feature scale.
    pub slopes: Array1<F>,
    /// Intercepts against standardized features.
    pub std_intercepts: Array1<F>,
    /// Slopes against standardized features.
    pub std_slopes: Array1<F>,
    /// `n x p`, entry `(i, j)` is feature `j`'s fit at row `i` with row `i` left out.
    pub loo_fits: Array2<F>,
    /// `n x p` in-sample fits `intercept_j + slope_j * x_ij`.
    pub insample_fits: Array2<F>,
    pub stats: StandardizationStats<F>,
    pub family: Family,
    /// Binomial columns whose slope hit [`SEPARATION_CAP`].
    pub separated: Vec<bool>,
}

impl<F: Scalar> UnivariateFits<F> {
    pub fn n(&self) -> usize {
        self.loo_fits.nrows()
    }

    pub fn p(&self) -> usize {
        self.slopes.len()
    }

    /// Features that can enter stage 2: non-constant with a nonzero slope.
    pub fn usable(&self) -> Vec<bool> {
        (0..self.p())
            .map(|j| !self.stats.constant_mask[j] && self.std_slopes[j] != F::zero())
            .collect()
    }

    /// `intercept_j + slope_j * x_ij` for new rows.
    pub fn predict_columns(&self, x: ArrayView2<'_, F>) -> Array2<F> {
        let mut out = Array2::zeros(x.raw_dim().f());
        for (j, (mut o, xc)) in out.axis_iter_mut(Axis(1)).zip(x.axis_iter(Axis(1))).enumerate() {
            let (b0, b) = (self.intercepts[j], self.slopes[j]);
            o.zip_mut_with(&xc, |ov, &xv| *ov = b0 + b * xv);
        }
        out
    }
}

/// Standardizes the features and fits every univariate model for the dataset's family.
pub fn fit_univariate<F: Scalar>(dataset: &Dataset<F>) -> Result<UnivariateFits<F>> {
    let (z, stats) = standardize(dataset.features.view());
    match dataset.family {
        Family::Gaussian => fit_univariate_gaussian(z.view(), dataset.response.view(), stats),
        Family::Binomial => fit_univariate_binomial(z.view(), dataset.response.view(), stats),
    }
}

/// Least-squares slope/intercept per column plus exact LOO fits.
pub fn fit_univariate_gaussian<F: Scalar>(
    z: ArrayView2<'_, F>,
    y: ArrayView1<'_, F>,
    stats: StandardizationStats<F>,
) -> Result<UnivariateFits<F>> {
    let n = F::from_count(z.nrows());
    let ybar = y.sum() / n;
    // delta_j = (1/n) sum_i z_ij y_i; constant columns are all-zero so get 0.
    let std_slopes = z.t().dot(&y) / n;
    let std_intercepts = Array1::from_elem(z.ncols(), ybar);
    let (intercepts, slopes) = to_original_scale(&std_intercepts, &std_slopes, &stats);

    let mut insample = Array2::zeros(z.raw_dim().f());
    Zip::from(insample.axis_iter_mut(Axis(1)))
        .and(z.axis_iter(Axis(1)))
        .and(&std_slopes)
        .for_each(|mut col, zc, &d| col.zip_mut_with(&zc, |v, &zv| *v = ybar + d * zv));
    let loo = loo_fits_gaussian(std_slopes.view(), z, y)?;

    Ok(UnivariateFits {
        intercepts,
        slopes,
        std_intercepts,
        std_slopes,
        loo_fits: loo,
        insample_fits: insample,
        separated: vec![false; z.ncols()],
        stats,
        family: Family::Gaussian,
    })
}

/// Exact gaussian LOO fits from standardized slopes, computed elementwise.
pub fn loo_fits_gaussian<F: Scalar>(
    std_slopes: ArrayView1<'_, F>,
    z: ArrayView2<'_, F>,
    y: ArrayView1<'_, F>,
) -> Result<Array2<F>> {
    let n = F::from_count(z.nrows());
    let ybar = y.sum() / n;
    let guard = F::lit(LEVERAGE_GUARD);
    let mut loo = Array2::zeros(z.raw_dim().f());
    for (j, (mut out, zc)) in loo.axis_iter_mut(Axis(1)).zip(z.axis_iter(Axis(1))).enumerate() {
        let d = std_slopes[j];
        for (i, ((o, &zi), &yi)) in out.iter_mut().zip(zc.iter()).zip(y.iter()).enumerate() {
            let gap = F::one() - (F::one() + zi * zi) / n;
            if gap < guard {
                return Err(Error::DegenerateLeverage {
                    row: i,
                    feature: j,
                    gap: gap.as_f64(),
                });
            }
            let fit = ybar + d * zi;
            *o = yi - (yi - fit) / gap;
        }
    }
    Ok(loo)
}

/// Per-column logistic fit on standardized features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticColumn<F> {
    pub intercept: F,
    pub slope: F,
    pub separated: bool,
    pub iterations: usize,
}

/// Univariate logistic regressions by IRLS, plus approximate LOO linear predictors.
pub fn fit_univariate_binomial<F: Scalar>(
    z: ArrayView2<'_, F>,
    y: ArrayView1<'_, F>,
    stats: StandardizationStats<F>,
) -> Result<UnivariateFits<F>> {
    let cols: Vec<LogisticColumn<F>> = (0..z.ncols())
        .into_par_iter()
        .map(|j| {
            if stats.constant_mask[j] {
                intercept_only(y)
            } else {
                irls_column(z.column(j), y)
            }
        })
        .collect();
    let std_intercepts: Array1<F> = cols.iter().map(|c| c.intercept).collect();
    let std_slopes: Array1<F> = cols.iter().map(|c| c.slope).collect();
    let separated: Vec<bool> = cols.iter().map(|c| c.separated).collect();
    let (intercepts, slopes) = to_original_scale(&std_intercepts, &std_slopes, &stats);

    let mut insample = Array2::zeros(z.raw_dim().f());
    for (j, (mut col, zc)) in insample.axis_iter_mut(Axis(1)).zip(z.axis_iter(Axis(1))).enumerate() {
        let (a, b) = (std_intercepts[j], std_slopes[j]);
        col.zip_mut_with(&zc, |v, &zv| *v = a + b * zv);
    }
    let loo = loo_fits_binomial(std_intercepts.view(), std_slopes.view(), &separated, z, y)?;
    Ok(UnivariateFits {
        intercepts,
        slopes,
        std_intercepts,
        std_slopes,
        loo_fits: loo,
        insample_fits: insample,
        stats,
        family: Family::Binomial,
        separated,
    })
}

/// Approximate LOO linear predictors from the final IRLS weights.
///
/// With `h_i` the weighted leverage, `eta^{-i} = eta_i - h_i (y_i - p_i) / (w_i (1 - h_i))`,
/// which is the weighted LOO-residual identity applied to the working response.
/// Separated columns keep their (capped) in-sample fits.
pub fn loo_fits_binomial<F: Scalar>(
    std_intercepts: ArrayView1<'_, F>,
    std_slopes: ArrayView1<'_, F>,
    separated: &[bool],
    z: ArrayView2<'_, F>,
    y: ArrayView1<'_, F>,
) -> Result<Array2<F>> {
    let guard = F::lit(LEVERAGE_GUARD);
    let mut loo = Array2::zeros(z.raw_dim().f());
    for (j, (mut out, zc)) in loo.axis_iter_mut(Axis(1)).zip(z.axis_iter(Axis(1))).enumerate() {
        let (a, b) = (std_intercepts[j], std_slopes[j]);
        let eta: Array1<F> = zc.mapv(|v| a + b * v);
        if separated[j] {
            out.assign(&eta);
            continue;
        }
        let p = eta.mapv(clamped_sigmoid);
        let w = p.mapv(|v| v * (F::one() - v));
        let wsum = w.sum();
        let zbar = w.dot(&zc) / wsum;
        let szz = Zip::from(&w).and(&zc).fold(F::zero(), |acc, &wi, &zi| acc + wi * (zi - zbar) * (zi - zbar));
        let inv_szz = if szz > F::zero() { F::one() / szz } else { F::zero() };
        for i in 0..eta.len() {
            let dz = zc[i] - zbar;
            let h = w[i] * (F::one() / wsum + dz * dz * inv_szz);
            let gap = F::one() - h;
            if gap < guard {
                return Err(Error::DegenerateLeverage {
                    row: i,
                    feature: j,
                    gap: gap.as_f64(),
                });
            }
            out[i] = eta[i] - h * (y[i] - p[i]) / (w[i] * gap);
        }
    }
    Ok(loo)
}

/// `sqrt(2/n)`: below this absolute correlation with the response, a feature's
/// LOO fit tends to be negatively correlated with the response.
pub fn loo_correlation_threshold(n: usize) -> f64 {
    (2.0 / n as f64).sqrt()
}

fn to_original_scale<F: Scalar>(
    std_intercepts: &Array1<F>,
    std_slopes: &Array1<F>,
    stats: &StandardizationStats<F>,
) -> (Array1<F>, Array1<F>) {
    let p = std_slopes.len();
    let mut intercepts = Array1::zeros(p);
    let mut slopes = Array1::zeros(p);
    for j in 0..p {
        if stats.constant_mask[j] {
            intercepts[j] = std_intercepts[j];
            continue;
        }
        let b = std_slopes[j] / stats.sds[j];
        slopes[j] = b;
        intercepts[j] = std_intercepts[j] - b * stats.means[j];
    }
    (intercepts, slopes)
}

pub(crate) fn clamped_sigmoid<F: Scalar>(eta: F) -> F {
    let lo = F::lit(PROB_CLAMP);
    sigmoid(eta).max(lo).min(F::one() - lo)
}

pub(crate) fn binomial_unit_deviance<F: Scalar>(y: F, eta: F) -> F {
    let p = clamped_sigmoid(eta);
    -F::lit(2.0) * (y * p.ln() + (F::one() - y) * (F::one() - p).ln())
}

pub(crate) fn binomial_deviance<F: Scalar>(y: ArrayView1<'_, F>, eta: impl Iterator<Item = F>) -> F {
    y.iter().zip(eta).map(|(&yi, e)| binomial_unit_deviance(yi, e)).sum()
}

fn logit<F: Scalar>(p: F) -> F {
    let lo = F::lit(PROB_CLAMP);
    let p = p.max(lo).min(F::one() - lo);
    (p / (F::one() - p)).ln()
}

fn intercept_only<F: Scalar>(y: ArrayView1<'_, F>) -> LogisticColumn<F> {
    LogisticColumn {
        intercept: logit(y.mean().unwrap_or(F::lit(0.5))),
        slope: F::zero(),
        separated: false,
        iterations: 0,
    }
}

/// True when one class lies entirely on one side of the other (ties allowed).
fn is_separated<F: Scalar>(z: ArrayView1<'_, F>, y: ArrayView1<'_, F>) -> Option<F> {
    let mut lo = [F::infinity(); 2];
    let mut hi = [F::neg_infinity(); 2];
    for (&zi, &yi) in z.iter().zip(y.iter()) {
        let k = usize::from(yi == F::one());
        lo[k] = lo[k].min(zi);
        hi[k] = hi[k].max(zi);
    }
    if lo[0].is_infinite() || lo[1].is_infinite() {
        return None;
    }
    if hi[0] <= lo[1] {
        Some(F::one())
    } else if hi[1] <= lo[0] {
        Some(-F::one())
    } else {
        None
    }
}

/// Newton steps on the intercept with the slope held fixed.
fn refit_intercept<F: Scalar>(z: ArrayView1<'_, F>, y: ArrayView1<'_, F>, slope: F, start: F) -> F {
    let mut a = start;
    for _ in 0..IRLS_MAX_STEPS {
        let (mut g, mut h) = (F::zero(), F::zero());
        for (&zi, &yi) in z.iter().zip(y.iter()) {
            let p = clamped_sigmoid(a + slope * zi);
            g += yi - p;
            h += p * (F::one() - p);
        }
        let step = g / h;
        a += step;
        if step.abs() < F::lit(1e-12) * (F::one() + a.abs()) {
            break;
        }
    }
    a
}

/// IRLS for `logit P(y=1) = a + b z` on one standardized column.
///
/// Four steps, then more while the deviance is still moving, up to 25.
pub fn irls_column<F: Scalar>(z: ArrayView1<'_, F>, y: ArrayView1<'_, F>) -> LogisticColumn<F> {
    let cap = F::lit(SEPARATION_CAP);
    let start = intercept_only(y);
    if let Some(dir) = is_separated(z, y) {
        let slope = dir * cap;
        return LogisticColumn {
            intercept: refit_intercept(z, y, slope, start.intercept),
            slope,
            separated: true,
            iterations: 0,
        };
    }
    let (mut a, mut b) = (start.intercept, F::zero());
    let mut dev = binomial_deviance(y, z.iter().map(|&zi| a + b * zi));
    let mut iterations = 0;
    for it in 0..IRLS_MAX_STEPS {
        iterations = it + 1;
        let (mut sw, mut swz, mut swu) = (F::zero(), F::zero(), F::zero());
        let mut work = Vec::with_capacity(z.len());
        for (&zi, &yi) in z.iter().zip(y.iter()) {
            let eta = a + b * zi;
            let p = clamped_sigmoid(eta);
            let w = p * (F::one() - p);
            let u = eta + (yi - p) / w;
            sw += w;
            swz += w * zi;
            swu += w * u;
            work.push((w, u));
        }
        let (zbar, ubar) = (swz / sw, swu / sw);
        let (mut szz, mut szu) = (F::zero(), F::zero());
        for (&zi, &(w, u)) in z.iter().zip(work.iter()) {
            szz += w * (zi - zbar) * (zi - zbar);
            szu += w * (zi - zbar) * (u - ubar);
        }
        b = szu / szz;
        a = ubar - b * zbar;
        if b.abs() > cap {
            b = cap * b.signum();
            a = refit_intercept(z, y, b, a);
            return LogisticColumn {
                intercept: a,
                slope: b,
                separated: true,
                iterations,
            };
        }
        let new_dev = binomial_deviance(y, z.iter().map(|&zi| a + b * zi));
        let change = (new_dev - dev).abs();
        dev = new_dev;
        if iterations >= IRLS_MIN_STEPS && change <= F::lit(IRLS_DEVIANCE_TOL) * (dev.abs() + F::lit(0.1)) {
            break;
        }
    }
    LogisticColumn {
        intercept: a,
        slope: b,
        separated: false,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::standardize;
    use ndarray::array;

    fn gaussian(x: Array2<f64>, y: Array1<f64>) -> UnivariateFits<f64> {
        let (z, stats) = standardize(x.view());
        fit_univariate_gaussian(z.view(), y.view(), stats).unwrap()
    }

    #[test]
    fn exact_line_slope_and_loo() {
        let f = gaussian(array![[1.0], [2.0], [3.0]], array![2.0, 4.0, 6.0]);
        assert!(f.intercepts[0].abs() < 1e-12);
        assert!((f.slopes[0] - 2.0).abs() < 1e-12);
        for (a, b) in f.loo_fits.column(0).iter().zip([2.0, 4.0, 6.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_feature_gives_flat_fit() {
        // centered y = (-1, 0, 1, 0) is orthogonal to x = (1, 0, 1, 0) - mean
        let f = gaussian(array![[1.0], [0.0], [1.0], [0.0]], array![1.0, 2.0, 3.0, 2.0]);
        assert!(f.slopes[0].abs() < 1e-15);
        assert!(f.insample_fits.column(0).iter().all(|v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn constant_column_uses_loo_mean() {
        let y = array![1.0, 4.0, 2.0, 7.0];
        let f = gaussian(array![[3.0], [3.0], [3.0], [3.0]], y.clone());
        let n = 4.0;
        let ybar = y.sum() / n;
        assert_eq!(f.slopes[0], 0.0);
        assert!((f.intercepts[0] - ybar).abs() < 1e-12);
        for i in 0..4 {
            assert!((f.loo_fits[[i, 0]] - (n * ybar - y[i]) / (n - 1.0)).abs() < 1e-12);
        }
        assert!(!f.usable()[0]);
    }

    #[test]
    fn leverage_guard_names_cell() {
        // n = 3 with an extreme point: z^2 = 2 at the outlier gives 1 - H = 0
        let z = array![[-(0.5f64).sqrt()], [-(0.5f64).sqrt()], [2.0f64.sqrt()]];
        let err = loo_fits_gaussian(array![1.0].view(), z.view(), array![1.0, 2.0, 3.0].view()).unwrap_err();
        assert!(matches!(err, Error::DegenerateLeverage { row: 2, feature: 0, .. }), "{err}");
    }

    #[test]
    fn threshold_values() {
        assert!((loo_correlation_threshold(300) - 0.0816).abs() < 1e-4);
        assert!((loo_correlation_threshold(8) - 0.5).abs() < 1e-15);
        assert!((loo_correlation_threshold(50) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn separated_column_is_capped() {
        let z = array![-1.5, -1.0, -0.5, 0.5, 1.0, 1.5];
        let y = array![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let c = irls_column(z.view(), y.view());
        assert!(c.separated);
        assert_eq!(c.slope, SEPARATION_CAP);
        let neg = irls_column(z.view(), y.mapv(|v| 1.0 - v).view());
        assert_eq!(neg.slope, -SEPARATION_CAP);
    }

    #[test]
    fn separated_loo_equals_insample() {
        let x = array![[-1.5, 0.3], [-1.0, -0.2], [-0.5, 0.9], [0.5, 0.1], [1.0, -0.7], [1.5, 0.4]];
        let y = array![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let (z, stats) = standardize(x.view());
        let f = fit_univariate_binomial(z.view(), y.view(), stats).unwrap();
        assert!(f.separated[0] && !f.separated[1]);
        assert_eq!(f.loo_fits.column(0), f.insample_fits.column(0));
    }

    #[test]
    fn uniform_weights_reduce_to_gaussian_formula() {
        // slope 0 and balanced y: every probability is 0.5
        let z: Array2<f64> = array![[-1.0], [1.0], [-1.0], [1.0]];
        let y = array![0.0, 0.0, 1.0, 1.0];
        let loo = loo_fits_binomial(array![0.0].view(), array![0.0].view(), &[false], z.view(), y.view()).unwrap();
        // working response u = (y - 0.5) / 0.25, in-sample fit 0
        let u = y.mapv(|v| (v - 0.5) / 0.25);
        let g = loo_fits_gaussian(array![0.0].view(), z.view(), u.view()).unwrap();
        for (a, b) in loo.iter().zip(g.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}
