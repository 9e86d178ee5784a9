use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::data::{to_column_major, Family};
use crate::error::{Error, Result};
use crate::scalar::{sign, Scalar};
use crate::univariate::{binomial_unit_deviance, clamped_sigmoid};

/// A penalized regression problem with an unpenalized intercept.
///
/// Loss is `(1/n) sum_i w_i (y_i - offset_i - b0 - d_i . theta)^2` for the
/// gaussian family and `(1/n) sum_i w_i dev_i` for the binomial family. The
/// penalty is `lambda sum_j pf_j theta_j` when `theta_j >= 0` is enforced and
/// `lambda sum_j pf_j |theta_j|` otherwise. Columns are never rescaled.
#[derive(Debug, Clone)]
pub struct SolverProblem<F> {
    /// `n x q`, column-major.
    pub design: Array2<F>,
    pub target: Array1<F>,
    pub weights: Array1<F>,
    pub offset: Array1<F>,
    pub penalty_factors: Array1<F>,
    /// `0` (non-negative coefficient) or `-inf` (free) per column.
    pub lower_bounds: Array1<F>,
    pub family: Family,
}

impl<F: Scalar> SolverProblem<F> {
    /// Unit weights, zero offset, unit penalty factors, no sign constraint.
    pub fn new(design: Array2<F>, target: Array1<F>, family: Family) -> Result<Self> {
        let (n, q) = design.dim();
        if target.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "design has {n} rows, target has {}",
                target.len()
            )));
        }
        let design = if design.t().is_standard_layout() {
            design
        } else {
            to_column_major(design.view())
        };
        Ok(SolverProblem {
            design,
            target,
            weights: Array1::ones(n),
            offset: Array1::zeros(n),
            penalty_factors: Array1::ones(q),
            lower_bounds: Array1::from_elem(q, F::neg_infinity()),
            family,
        })
    }

    pub fn nonnegative(mut self, on: bool) -> Self {
        let lb = if on { F::zero() } else { F::neg_infinity() };
        self.lower_bounds.fill(lb);
        self
    }

    pub fn with_weights(mut self, weights: Array1<F>) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_offset(mut self, offset: Array1<F>) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_penalty_factors(mut self, pf: Array1<F>) -> Self {
        self.penalty_factors = pf;
        self
    }

    pub fn with_lower_bounds(mut self, lb: Array1<F>) -> Self {
        self.lower_bounds = lb;
        self
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn q(&self) -> usize {
        self.design.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, q) = self.design.dim();
        if self.weights.len() != n || self.offset.len() != n || self.target.len() != n {
            return Err(Error::DimensionMismatch("weights/offset/target length must equal rows".into()));
        }
        if self.penalty_factors.len() != q || self.lower_bounds.len() != q {
            return Err(Error::DimensionMismatch(
                "penalty factors and lower bounds need one entry per column".into(),
            ));
        }
        if self.weights.iter().any(|w| !(*w >= F::zero()) || !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite and non-negative".into()));
        }
        if !(self.weights.sum() > F::zero()) {
            return Err(Error::InvalidInput("weights sum to zero".into()));
        }
        if self.penalty_factors.iter().any(|v| !(*v > F::zero()) || !v.is_finite()) {
            return Err(Error::InvalidInput("penalty factors must be finite and positive".into()));
        }
        if self.lower_bounds.iter().any(|&b| b != F::zero() && b != F::neg_infinity()) {
            return Err(Error::InvalidInput("lower bounds must be 0 or -inf".into()));
        }
        if self.family == Family::Binomial && self.target.iter().any(|&v| v != F::zero() && v != F::one()) {
            return Err(Error::InvalidInput("binomial target must be 0/1".into()));
        }
        Ok(())
    }

    /// Rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> SolverProblem<F> {
        SolverProblem {
            design: to_column_major(self.design.select(Axis(0), rows).view()),
            target: self.target.select(Axis(0), rows),
            weights: self.weights.select(Axis(0), rows),
            offset: self.offset.select(Axis(0), rows),
            penalty_factors: self.penalty_factors.clone(),
            lower_bounds: self.lower_bounds.clone(),
            family: self.family,
        }
    }

    /// `offset + b0 + D theta`.
    pub fn linear_predictor(&self, intercept: F, coefs: ArrayView1<'_, F>) -> Array1<F> {
        let mut eta = self.design.dot(&coefs);
        eta.zip_mut_with(&self.offset, |e, &o| *e = *e + o + intercept);
        eta
    }

    pub(crate) fn is_constrained(&self, j: usize) -> bool {
        self.lower_bounds[j] == F::zero()
    }

    pub fn penalty(&self, coefs: ArrayView1<'_, F>) -> F {
        coefs
            .iter()
            .enumerate()
            .map(|(j, &t)| self.penalty_factors[j] * if self.is_constrained(j) { t } else { t.abs() })
            .sum()
    }

    /// Unpenalized loss at the given coefficients.
    pub fn loss(&self, intercept: F, coefs: ArrayView1<'_, F>) -> F {
        let eta = self.linear_predictor(intercept, coefs);
        let n = F::from_count(self.n());
        match self.family {
            Family::Gaussian => {
                self.weights
                    .iter()
                    .zip(self.target.iter().zip(eta.iter()))
                    .map(|(&w, (&y, &e))| w * (y - e) * (y - e))
                    .sum::<F>()
                    / n
            }
            Family::Binomial => {
                self.weights
                    .iter()
                    .zip(self.target.iter().zip(eta.iter()))
                    .map(|(&w, (&y, &e))| w * binomial_unit_deviance(y, e))
                    .sum::<F>()
                    / n
            }
        }
    }

    pub fn objective(&self, intercept: F, coefs: ArrayView1<'_, F>, lambda: F) -> F {
        self.loss(intercept, coefs) + lambda * self.penalty(coefs)
    }

    /// Generalized residual: `y - eta` (gaussian) or `y - p` (binomial).
    pub fn residual(&self, intercept: F, coefs: ArrayView1<'_, F>) -> Array1<F> {
        let eta = self.linear_predictor(intercept, coefs);
        match self.family {
            Family::Gaussian => &self.target - &eta,
            Family::Binomial => {
                let mut r = self.target.clone();
                r.zip_mut_with(&eta, |y, &e| *y = *y - clamped_sigmoid(e));
                r
            }
        }
    }

    /// `(2/n) sum_i w_i d_ij r_i` per column: minus the loss gradient.
    pub fn scores(&self, residual: ArrayView1<'_, F>) -> Array1<F> {
        let wr = &self.weights * &residual;
        self.design.t().dot(&wr) * (F::lit(2.0) / F::from_count(self.n()))
    }

    /// Largest violation of the optimality conditions at `lambda`.
    ///
    /// For a coefficient above its bound the score must equal
    /// `lambda * pf_j * sign(theta_j)`; at the zero bound it must not exceed
    /// `lambda * pf_j`; a free coefficient at zero needs `|score| <= lambda * pf_j`.
    /// The intercept condition `sum_i w_i r_i = 0` is included (scaled the same way).
    pub fn kkt_violation(&self, intercept: F, coefs: ArrayView1<'_, F>, lambda: F) -> F {
        let r = self.residual(intercept, coefs);
        let scores = self.scores(r.view());
        let n = F::from_count(self.n());
        let mut worst = (F::lit(2.0) / n * self.weights.dot(&r)).abs();
        for j in 0..self.q() {
            let t = coefs[j];
            let bound = lambda * self.penalty_factors[j];
            let v = if t != F::zero() {
                (scores[j] - bound * sign(t)).abs()
            } else if self.is_constrained(j) {
                (scores[j] - bound).max(F::zero())
            } else {
                (scores[j].abs() - bound).max(F::zero())
            };
            worst = worst.max(v);
        }
        worst
    }
}
