use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::Family;
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Scalar};

/// Which estimator produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Unilasso,
    Unireg,
    Polish,
    Adaptive,
    NoSign,
    NoMag,
    NoLoo,
    External,
    Lasso,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Unilasso => "unilasso",
            Variant::Unireg => "unireg",
            Variant::Polish => "polish",
            Variant::Adaptive => "adaptive",
            Variant::NoSign => "no_sign",
            Variant::NoMag => "no_mag",
            Variant::NoLoo => "no_loo",
            Variant::External => "external",
            Variant::Lasso => "lasso",
        }
    }

    /// Variants whose coefficients must agree in sign with the univariate slopes.
    pub fn enforces_signs(self) -> bool {
        matches!(
            self,
            Variant::Unilasso | Variant::Unireg | Variant::NoMag | Variant::NoLoo | Variant::External
        )
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidInput(format!("unknown variant '{s}'")))
    }
}

/// Univariate intercepts and slopes on the original feature scale.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSummary<F> {
    pub intercepts: Array1<F>,
    pub slopes: Array1<F>,
}

/// Stage-2 coefficients behind a collapsed model.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage2Coefficients<F> {
    pub theta0: F,
    /// One entry per original feature; masked features hold 0.
    pub thetas: Array1<F>,
}

/// A fitted linear model `gamma0 + sum_j gamma_j x_j` on the original feature scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapsedModel<F> {
    pub family: Family,
    pub variant: Variant,
    pub gamma0: F,
    pub gammas: Array1<F>,
    pub lambda_selected: F,
    pub feature_names: Vec<String>,
    pub univariate: Option<UnivariateSummary<F>>,
    /// Not serialized.
    pub stage2: Option<Stage2Coefficients<F>>,
}

/// Linear predictor, plus probabilities for the binomial family.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<F> {
    pub eta: Array1<F>,
    pub prob: Option<Array1<F>>,
}

impl<F: Scalar> CollapsedModel<F> {
    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.gammas[j] != F::zero()).collect()
    }

    pub fn support_size(&self) -> usize {
        self.gammas.iter().filter(|g| **g != F::zero()).count()
    }

    /// Number of coefficients whose sign disagrees with the univariate slope.
    pub fn sign_violations(&self) -> usize {
        match &self.univariate {
            Some(u) => self
                .gammas
                .iter()
                .zip(u.slopes.iter())
                .filter(|(&g, &b)| g * b < F::zero() || (b == F::zero() && g != F::zero()))
                .count(),
            None => 0,
        }
    }

    pub fn linear_predictor(&self, x: ArrayView2<'_, F>) -> Result<Array1<F>> {
        if x.ncols() != self.p() {
            return Err(Error::DimensionMismatch(format!(
                "model has {} features, data has {} columns",
                self.p(),
                x.ncols()
            )));
        }
        // Fixed summation order, whatever the memory layout of `x`.
        Ok(Array1::from_shape_fn(x.nrows(), |i| {
            let row = x.row(i);
            let mut acc = F::zero();
            for (v, g) in row.iter().zip(self.gammas.iter()) {
                acc += *v * *g;
            }
            acc + self.gamma0
        }))
    }

    pub fn predict(&self, x: ArrayView2<'_, F>) -> Result<Prediction<F>> {
        let eta = self.linear_predictor(x)?;
        let prob = (self.family == Family::Binomial).then(|| eta.mapv(sigmoid));
        Ok(Prediction { eta, prob })
    }

    /// Response-scale predictions: the linear predictor or the probability.
    pub fn predict_response(&self, x: ArrayView2<'_, F>) -> Result<Array1<F>> {
        let p = self.predict(x)?;
        Ok(p.prob.unwrap_or(p.eta))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelJson {
            family: self.family,
            variant_tag: self.variant,
            gamma0: self.gamma0.as_f64(),
            gammas: self.gammas.iter().map(|v| v.as_f64()).collect(),
            lambda_selected: self.lambda_selected.as_f64(),
            feature_names: self.feature_names.clone(),
            univariate: self.univariate.as_ref().map(|u| UnivariateJson {
                intercepts: u.intercepts.iter().map(|v| v.as_f64()).collect(),
                slopes: u.slopes.iter().map(|v| v.as_f64()).collect(),
            }),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelJson = serde_json::from_str(text)?;
        let p = doc.gammas.len();
        if doc.feature_names.len() != p {
            return Err(Error::InvalidInput(format!(
                "model has {p} coefficients but {} feature names",
                doc.feature_names.len()
            )));
        }
        let arr = |v: &[f64]| Array1::from_iter(v.iter().map(|&x| F::lit(x)));
        let univariate = match doc.univariate {
            Some(u) => {
                if u.intercepts.len() != p || u.slopes.len() != p {
                    return Err(Error::InvalidInput("univariate arrays do not match the coefficient count".into()));
                }
                Some(UnivariateSummary {
                    intercepts: arr(&u.intercepts),
                    slopes: arr(&u.slopes),
                })
            }
            None => None,
        };
        Ok(CollapsedModel {
            family: doc.family,
            variant: doc.variant_tag,
            gamma0: F::lit(doc.gamma0),
            gammas: arr(&doc.gammas),
            lambda_selected: F::lit(doc.lambda_selected),
            feature_names: doc.feature_names,
            univariate,
            stage2: None,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    family: Family,
    variant_tag: Variant,
    gamma0: f64,
    gammas: Vec<f64>,
    lambda_selected: f64,
    feature_names: Vec<String>,
    univariate: Option<UnivariateJson>,
}

#[derive(Serialize, Deserialize)]
struct UnivariateJson {
    intercepts: Vec<f64>,
    slopes: Vec<f64>,
}

/// Which fit a path point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStage {
    Base,
    Polish,
}

/// Collapsed coefficients along a penalty path.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPath<F> {
    pub lambdas: Vec<F>,
    pub stages: Vec<PathStage>,
    pub intercepts: Vec<F>,
    /// `n_lambda x p`.
    pub coefs: Array2<F>,
    /// Stage-2 objective at each point.
    pub objective: Vec<F>,
}

impl<F: Scalar> CoefficientPath<F> {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn support_size(&self, k: usize) -> usize {
        self.coefs.row(k).iter().filter(|v| **v != F::zero()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn model() -> CollapsedModel<f64> {
        CollapsedModel {
            family: Family::Gaussian,
            variant: Variant::Unilasso,
            gamma0: 0.1 + 0.2,
            gammas: array![1.0 / 3.0, 0.0, -2.5e-300],
            lambda_selected: 0.012345678901234567,
            feature_names: vec!["a".into(), "b".into(), "c".into()],
            univariate: Some(UnivariateSummary {
                intercepts: array![0.5, 1.0, 2.0],
                slopes: array![1.0, 0.0, -3.0],
            }),
            stage2: None,
        }
    }

    #[test]
    fn json_round_trip_is_bitwise() {
        let m = model();
        let back = CollapsedModel::<f64>::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        for (a, b) in back.gammas.iter().zip(m.gammas.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn zero_model_predicts_intercept() {
        let mut m = model();
        m.gammas.fill(0.0);
        let x = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        assert_eq!(m.linear_predictor(x.view()).unwrap(), array![m.gamma0, m.gamma0]);
        assert!(m.linear_predictor(array![[1.0]].view()).is_err());
    }

    #[test]
    fn prediction_matches_loop() {
        let m = model();
        let x = array![[0.3, -1.0, 2.0], [1.5, 0.2, -0.7]];
        let eta = m.linear_predictor(x.view()).unwrap();
        for i in 0..2 {
            let mut s = m.gamma0;
            for j in 0..3 {
                s += m.gammas[j] * x[[i, j]];
            }
            assert!((eta[i] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_violations_counted() {
        let mut m = model();
        assert_eq!(m.sign_violations(), 0);
        m.gammas[0] = -1.0;
        m.gammas[1] = 0.5;
        assert_eq!(m.sign_violations(), 2);
    }

    #[test]
    fn variant_parses() {
        assert_eq!("no_mag".parse::<Variant>().unwrap(), Variant::NoMag);
        assert!("nope".parse::<Variant>().is_err());
    }
}
