use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::metrics::{evaluate, evaluate_coefficients, matching_from_path, Metrics};
use super::scenarios::{Scenario, SimData};
use crate::data::{Family, FitConfig};
use crate::error::{Error, Result};
use crate::linalg::ols_with_intercept;
use crate::pipeline::{
    adaptive_lasso_cv, lasso_cv, polish, unilasso_cv, unilasso_external, unireg, ExternalScores, PathFit,
};
use crate::univariate::fit_univariate;

/// Estimators compared by the simulation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Lasso,
    Unilasso,
    Polish,
    Adaptive,
    /// Lasso restricted to the uniLasso support size.
    Matching,
    Unireg,
    Ols,
    NoLoo,
    NoSign,
    NoMag,
    /// uniLasso with univariate fits taken from the external rows.
    External,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Lasso,
        Method::Unilasso,
        Method::Polish,
        Method::Adaptive,
        Method::Matching,
        Method::Unireg,
        Method::Ols,
        Method::NoLoo,
        Method::NoSign,
        Method::NoMag,
        Method::External,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lasso => "lasso",
            Method::Unilasso => "unilasso",
            Method::Polish => "polish",
            Method::Adaptive => "adaptive",
            Method::Matching => "matching",
            Method::Unireg => "unireg",
            Method::Ols => "ols",
            Method::NoLoo => "no_loo",
            Method::NoSign => "no_sign",
            Method::NoMag => "no_mag",
            Method::External => "external",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Method::ALL.iter().map(|m| m.as_str()).collect();
            Error::InvalidInput(format!("unknown method '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// Result of one method on one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub seed: u64,
    pub method: Method,
    pub metrics: Metrics,
    pub support: Vec<usize>,
    pub sign_violations: usize,
}

/// Fits every requested method on one draw of the scenario.
///
/// The draw and every cross-validation split use `seed`.
pub fn run_replicate(scenario: &Scenario, seed: u64, methods: &[Method], config: &FitConfig) -> Result<Vec<ReplicateRecord>> {
    let data = scenario.generate(seed)?;
    let config = FitConfig { seed, ..config.clone() };
    let mut fits = Fits::default();
    methods
        .iter()
        .map(|&m| {
            let (gamma0, gammas, violations) = fits.coefficients(m, &data, &config)?;
            let metrics = evaluate_coefficients(gamma0, gammas.view(), data.train.family, &data.test, data.true_beta.view())?;
            Ok(ReplicateRecord {
                seed,
                method: m,
                metrics,
                support: gammas.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect(),
                sign_violations: violations,
            })
        })
        .collect()
}

/// Runs replicates `seed, seed + 1, ..., seed + replicates - 1` in parallel;
/// records come back in replicate order, then method order.
pub fn run_simulation(
    scenario: &Scenario,
    seed: u64,
    replicates: usize,
    methods: &[Method],
    config: &FitConfig,
) -> Result<Vec<ReplicateRecord>> {
    let per: Vec<Vec<ReplicateRecord>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(scenario, seed + r, methods, config))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Per-method averages over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub replicates: usize,
    pub mean_error: f64,
    /// Standard error `sd / sqrt(R)`; NaN for a single replicate.
    pub se_error: f64,
    pub mean_support: f64,
    pub se_support: f64,
    pub mean_tpr: f64,
    pub mean_fpr: f64,
    /// Mean error relative to the lasso mean error, when lasso was run.
    pub error_ratio: Option<f64>,
}

pub fn summarize(records: &[ReplicateRecord]) -> Vec<MethodSummary> {
    let mut methods: Vec<Method> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let mut rows: Vec<MethodSummary> = methods
        .iter()
        .map(|&m| {
            let rs: Vec<&ReplicateRecord> = records.iter().filter(|r| r.method == m).collect();
            let err: Vec<f64> = rs.iter().map(|r| r.metrics.error).collect();
            let sup: Vec<f64> = rs.iter().map(|r| r.metrics.support as f64).collect();
            let (mean_error, se_error) = mean_se(&err);
            let (mean_support, se_support) = mean_se(&sup);
            MethodSummary {
                method: m,
                replicates: rs.len(),
                mean_error,
                se_error,
                mean_support,
                se_support,
                mean_tpr: mean_se(&rs.iter().map(|r| r.metrics.tpr).collect::<Vec<_>>()).0,
                mean_fpr: mean_se(&rs.iter().map(|r| r.metrics.fpr).collect::<Vec<_>>()).0,
                error_ratio: None,
            }
        })
        .collect();
    if let Some(lasso) = rows.iter().find(|r| r.method == Method::Lasso).map(|r| r.mean_error) {
        for r in &mut rows {
            r.error_ratio = Some(r.mean_error / lasso);
        }
    }
    rows
}

/// Mean and `sd / sqrt(len)` of the values.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Lazily fitted models shared between methods of one replicate.
#[derive(Default)]
struct Fits {
    unilasso: Option<PathFit<f64>>,
    lasso: Option<PathFit<f64>>,
}

impl Fits {
    fn unilasso(&mut self, data: &SimData, config: &FitConfig) -> Result<&PathFit<f64>> {
        if self.unilasso.is_none() {
            self.unilasso = Some(unilasso_cv(&data.train, config)?);
        }
        Ok(self.unilasso.as_ref().expect("fitted above"))
    }

    fn lasso(&mut self, data: &SimData, config: &FitConfig) -> Result<&PathFit<f64>> {
        if self.lasso.is_none() {
            self.lasso = Some(lasso_cv(&data.train, config)?);
        }
        Ok(self.lasso.as_ref().expect("fitted above"))
    }

    fn coefficients(
        &mut self,
        method: Method,
        data: &SimData,
        config: &FitConfig,
    ) -> Result<(f64, ndarray::Array1<f64>, usize)> {
        let train = &data.train;
        let model = match method {
            Method::Lasso => self.lasso(data, config)?.model.clone(),
            Method::Unilasso => self.unilasso(data, config)?.model.clone(),
            Method::Polish => {
                let base = self.unilasso(data, config)?.clone();
                polish(train, &base, config)?.model
            }
            Method::Adaptive => adaptive_lasso_cv(train, false, config)?.model,
            Method::Matching => {
                let target = self.unilasso(data, config)?.model.support_size();
                matching_from_path(self.lasso(data, config)?, target)
            }
            Method::Unireg => unireg(train, config)?,
            Method::Ols => {
                if train.family != Family::Gaussian {
                    return Err(Error::InvalidInput("ols comparator needs a gaussian response".into()));
                }
                let (b0, b) = ols_with_intercept(train.features.view(), train.response.view()).ok_or_else(|| {
                    Error::InvalidInput(format!("ols needs n > p with full column rank (n={}, p={})", train.n(), train.p()))
                })?;
                return Ok((b0, b, 0));
            }
            Method::NoLoo => unilasso_cv(train, &FitConfig { loo: false, ..config.clone() })?.model,
            Method::NoSign => unilasso_cv(train, &FitConfig { sign_constraint: false, ..config.clone() })?.model,
            Method::NoMag => unilasso_cv(train, &FitConfig { use_magnitude: false, ..config.clone() })?.model,
            Method::External => {
                let ext = data
                    .external
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("method 'external' needs the external scenario".into()))?;
                let u = fit_univariate(ext)?;
                let scores = ExternalScores::new(u.slopes).with_intercepts(u.intercepts);
                unilasso_external(train, &scores, config)?.model
            }
        };
        let violations = if model.variant.enforces_signs() { model.sign_violations() } else { 0 };
        Ok((model.gamma0, model.gammas, violations))
    }
}

/// Evaluates an already fitted model on a simulated test set.
pub fn score(model: &crate::pipeline::CollapsedModel<f64>, data: &SimData) -> Result<Metrics> {
    evaluate(model, &data.test, data.true_beta.view())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::ScenarioKind;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("ridge".parse::<Method>().is_err());
    }

    #[test]
    fn mean_se_handles_single_value() {
        let (m, se) = mean_se(&[2.0]);
        assert_eq!(m, 2.0);
        assert!(se.is_nan());
        let (m, se) = mean_se(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-12);
    }

    #[test]
    fn replicates_are_deterministic_and_ordered() {
        let sc = Scenario::new(ScenarioKind::HighSnr).with_size(50, 20);
        let sc = Scenario { n_test: 200, ..sc };
        let methods = [Method::Lasso, Method::Unilasso, Method::Matching, Method::Ols];
        let cfg = FitConfig { n_lambda: 30, ..FitConfig::default() };
        let a = run_simulation(&sc, 5, 2, &methods, &cfg).unwrap();
        let b = run_simulation(&sc, 5, 2, &methods, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert_eq!(a[4].seed, 6);
        assert_eq!(a[1].sign_violations, 0);
        assert!(a[2].metrics.support <= a[1].metrics.support);
        let summary = summarize(&a);
        assert_eq!(summary[0].error_ratio, Some(1.0));
        assert_eq!(summary.len(), 4);
    }

    #[test]
    fn external_method_requires_external_rows() {
        let sc = Scenario { n_test: 100, ..Scenario::new(ScenarioKind::MediumSnr).with_size(40, 10) };
        assert!(run_replicate(&sc, 1, &[Method::External], &FitConfig::default()).is_err());
        let ext = Scenario { n_test: 100, n_external: 50, ..Scenario::new(ScenarioKind::External).with_size(40, 10) };
        let r = run_replicate(&ext, 1, &[Method::External], &FitConfig::default()).unwrap();
        assert_eq!(r[0].sign_violations, 0);
    }
}
