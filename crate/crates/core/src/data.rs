//! Datasets, standardization and fit configuration.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, ShapeBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Response family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Gaussian,
    Binomial,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Family::Gaussian),
            "binomial" => Ok(Family::Binomial),
            other => Err(Error::InvalidConfig(format!("unknown family '{other}'"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Gaussian => "gaussian",
            Family::Binomial => "binomial",
        })
    }
}

/// Copies a matrix into column-major (Fortran) order so column scans are contiguous.
pub fn to_column_major<F: Scalar>(x: ArrayView2<'_, F>) -> Array2<F> {
    let mut out = Array2::zeros(x.raw_dim().f());
    out.assign(&x);
    out
}

/// Feature matrix plus response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    pub features: Array2<F>,
    pub response: Array1<F>,
    pub family: Family,
    pub feature_names: Option<Vec<String>>,
}

impl<F: Scalar> Dataset<F> {
    /// Builds a dataset after checking shapes. Content checks live in [`validate`].
    pub fn new(features: Array2<F>, response: Array1<F>, family: Family) -> Result<Self> {
        if features.nrows() != response.len() {
            return Err(Error::DimensionMismatch(format!(
                "features have {} rows but response has {} entries",
                features.nrows(),
                response.len()
            )));
        }
        let features = if features.t().is_standard_layout() {
            features
        } else {
            to_column_major(features.view())
        };
        Ok(Dataset {
            features,
            response,
            family,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {} features",
                names.len(),
                self.p()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn p(&self) -> usize {
        self.features.ncols()
    }

    pub fn feature_name(&self, j: usize) -> String {
        match &self.feature_names {
            Some(names) => names[j].clone(),
            None => format!("x{}", j + 1),
        }
    }

    /// Names for all features, generated (`x1`, `x2`, ...) when absent.
    pub fn names(&self) -> Vec<String> {
        (0..self.p()).map(|j| self.feature_name(j)).collect()
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset<F> {
        Dataset {
            features: to_column_major(self.features.select(Axis(0), rows).view()),
            response: self.response.select(Axis(0), rows),
            family: self.family,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Same features with a different response.
    pub fn with_response(&self, response: Array1<F>, family: Family) -> Result<Dataset<F>> {
        let mut d = Dataset::new(self.features.clone(), response, family)?;
        d.feature_names = self.feature_names.clone();
        Ok(d)
    }
}

/// Summary produced by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub n: usize,
    pub p: usize,
    pub family: Family,
    pub constant_columns: Vec<usize>,
    /// `(zeros, ones)` for the binomial family.
    pub class_counts: Option<(usize, usize)>,
}

/// Checks a dataset without modifying it.
pub fn validate<F: Scalar>(dataset: &Dataset<F>) -> Result<ValidationReport> {
    let n = dataset.n();
    let p = dataset.p();
    if n < 3 {
        return Err(Error::TooFewObservations { n });
    }
    for (j, col) in dataset.features.axis_iter(Axis(1)).enumerate() {
        if let Some(i) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: i,
                column: format!("feature '{}'", dataset.feature_name(j)),
                value: col[i].as_f64(),
            });
        }
    }
    if let Some(i) = dataset.response.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: i,
            column: "response".into(),
            value: dataset.response[i].as_f64(),
        });
    }
    let class_counts = match dataset.family {
        Family::Gaussian => None,
        Family::Binomial => {
            let mut ones = 0;
            for (i, &v) in dataset.response.iter().enumerate() {
                if v == F::one() {
                    ones += 1;
                } else if v != F::zero() {
                    return Err(Error::NonBinaryResponse {
                        row: i,
                        value: v.as_f64(),
                    });
                }
            }
            Some((n - ones, ones))
        }
    };
    let constant_columns = dataset
        .features
        .axis_iter(Axis(1))
        .enumerate()
        .filter(|(_, col)| column_is_constant(*col))
        .map(|(j, _)| j)
        .collect();
    Ok(ValidationReport {
        n,
        p,
        family: dataset.family,
        constant_columns,
        class_counts,
    })
}

fn column_is_constant<F: Scalar>(col: ArrayView1<'_, F>) -> bool {
    let first = col[0];
    col.iter().all(|&v| v == first) || {
        let (_, sd) = mean_and_population_sd(col);
        sd <= constant_threshold(col)
    }
}

fn constant_threshold<F: Scalar>(col: ArrayView1<'_, F>) -> F {
    let scale = col.iter().fold(F::one(), |m, &v| m.max(v.abs()));
    F::epsilon() * F::lit(64.0) * scale
}

pub(crate) fn mean_and_population_sd<F: Scalar>(col: ArrayView1<'_, F>) -> (F, F) {
    let n = F::from_count(col.len());
    let mean = col.iter().copied().sum::<F>() / n;
    let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / n;
    (mean, var.sqrt())
}

/// Per-column means and population standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationStats<F> {
    pub means: Array1<F>,
    pub sds: Array1<F>,
    pub constant_mask: Vec<bool>,
}

impl<F: Scalar> StandardizationStats<F> {
    pub fn p(&self) -> usize {
        self.means.len()
    }

    /// Inverse of [`standardize`] on non-constant columns; constant columns come back as their mean.
    pub fn unstandardize(&self, z: ArrayView2<'_, F>) -> Array2<F> {
        let mut x = Array2::zeros(z.raw_dim().f());
        for (j, (mut xc, zc)) in x
            .axis_iter_mut(Axis(1))
            .zip(z.axis_iter(Axis(1)))
            .enumerate()
        {
            let (m, s) = (self.means[j], self.sds[j]);
            if self.constant_mask[j] {
                xc.fill(m);
            } else {
                xc.zip_mut_with(&zc, |xv, &zv| *xv = m + s * zv);
            }
        }
        x
    }
}

/// Centers and scales every column to mean 0 and population variance 1.
///
/// Constant columns come out as zeros and are flagged in the mask.
pub fn standardize<F: Scalar>(x: ArrayView2<'_, F>) -> (Array2<F>, StandardizationStats<F>) {
    let p = x.ncols();
    let mut z = Array2::zeros(x.raw_dim().f());
    let mut means = Array1::zeros(p);
    let mut sds = Array1::zeros(p);
    let mut constant_mask = vec![false; p];
    for (j, (col, mut zc)) in x
        .axis_iter(Axis(1))
        .zip(z.axis_iter_mut(Axis(1)))
        .enumerate()
    {
        let (mean, sd) = mean_and_population_sd(col);
        means[j] = mean;
        if column_is_constant(col) {
            constant_mask[j] = true;
            sds[j] = F::zero();
            continue;
        }
        sds[j] = sd;
        zc.zip_mut_with(&col, |zv, &xv| *zv = (xv - mean) / sd);
    }
    (
        z,
        StandardizationStats {
            means,
            sds,
            constant_mask,
        },
    )
}

/// How the CV-selected penalty is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    #[default]
    Min,
    OneSe,
}

/// Options shared by the path solver, cross-validation and the pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub n_lambda: usize,
    /// `None` picks 1e-3 when `p >= n` and 1e-4 otherwise.
    pub lambda_min_ratio: Option<f64>,
    pub n_folds: usize,
    /// Coordinate descent stops once no coordinate moves the fitted values by
    /// more than `tol` times the response standard deviation (RMS) in a sweep.
    pub tol: f64,
    /// Cap on coordinate sweeps per penalty value.
    pub max_iter: usize,
    pub seed: u64,
    pub loo: bool,
    pub sign_constraint: bool,
    pub use_magnitude: bool,
    /// Refit the univariate stage inside every CV fold.
    pub strict_cv: bool,
    pub lambda_rule: LambdaRule,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_lambda: 100,
            lambda_min_ratio: None,
            n_folds: 10,
            tol: 1e-7,
            max_iter: 100_000,
            seed: 0,
            loo: true,
            sign_constraint: true,
            use_magnitude: true,
            strict_cv: false,
            lambda_rule: LambdaRule::Min,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_lambda < 2 {
            return Err(Error::InvalidConfig("n_lambda must be at least 2".into()));
        }
        if let Some(r) = self.lambda_min_ratio {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "lambda_min_ratio must lie in (0, 1), got {r}"
                )));
            }
        }
        if self.n_folds < 2 {
            return Err(Error::InvalidConfig("n_folds must be at least 2".into()));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        Ok(())
    }

    pub fn min_ratio_for(&self, n: usize, p: usize) -> f64 {
        self.lambda_min_ratio
            .unwrap_or(if p >= n { 1e-3 } else { 1e-4 })
    }
}
