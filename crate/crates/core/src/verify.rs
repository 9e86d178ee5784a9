//! Oracle comparisons on a data set, as run by the `verify` command.

use crate::data::{standardize, Dataset, Family, FitConfig};
use crate::error::{Error, Result};
use crate::oracle::{loo_refit_oracle, projected_gradient_oracle, GRADIENT_ORACLE_MAX_Q, LOO_ORACLE_MAX_N};
use crate::pipeline::{build_design, fit_stage2_path, fit_stage2_path_with_lambdas, Stage2Kind};
use crate::solver::fit_path;
use crate::univariate::fit_univariate;

/// Gaussian leave-one-out fits must match refits to this max-abs error.
pub const LOO_TOL_GAUSSIAN: f64 = 1e-8;
/// Binomial leave-one-out fits are approximate; max-abs error on the linear predictor scale.
pub const LOO_TOL_BINOMIAL: f64 = 0.05;
pub const OBJECTIVE_REL_TOL: f64 = 1e-6;
pub const KKT_TOL: f64 = 1e-6;
pub const EQUIVALENCE_TOL: f64 = 1e-6;
/// Penalty values at which the solver is compared with the gradient oracle.
pub const ORACLE_POINTS: usize = 5;

/// Outcome of one comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub discrepancy: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.discrepancy <= self.tolerance
    }
}

/// Refuses data too large for the brute-force references.
pub fn guardrails(dataset: &Dataset<f64>) -> Result<()> {
    if dataset.n() > LOO_ORACLE_MAX_N {
        return Err(Error::InvalidInput(format!(
            "verify runs explicit refits and is limited to n <= {LOO_ORACLE_MAX_N} rows (got {}); subsample the rows",
            dataset.n()
        )));
    }
    if dataset.p() > GRADIENT_ORACLE_MAX_Q {
        return Err(Error::InvalidInput(format!(
            "verify is limited to p <= {GRADIENT_ORACLE_MAX_Q} features (got {}); select a subset of columns",
            dataset.p()
        )));
    }
    Ok(())
}

/// Closed-form leave-one-out fits against explicit refits.
pub fn loo_check(dataset: &Dataset<f64>) -> Result<Check> {
    let fits = fit_univariate(dataset)?;
    let (z, _) = standardize(dataset.features.view());
    let oracle = loo_refit_oracle(z.view(), dataset.response.view(), dataset.family)?;
    let discrepancy = (&fits.loo_fits - &oracle).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Check {
        name: "loo_closed_form_vs_refit",
        discrepancy,
        tolerance: match dataset.family {
            Family::Gaussian => LOO_TOL_GAUSSIAN,
            Family::Binomial => LOO_TOL_BINOMIAL,
        },
    })
}

/// Stage-2 path objectives against the gradient oracle, and path KKT residuals.
pub fn solver_checks(dataset: &Dataset<f64>, config: &FitConfig) -> Result<[Check; 2]> {
    let kind = Stage2Kind::from_config(&FitConfig::default());
    let (design, _) = build_design(dataset, &kind, None)?;
    let problem = design.problem(&dataset.response, dataset.family, None)?;
    let path = fit_path(&problem, config)?;
    let mut kkt = 0.0f64;
    for k in 0..path.len() {
        kkt = kkt.max(problem.kkt_violation(path.intercepts[k], path.coef(k), path.lambdas[k]));
    }
    let mut rel = 0.0f64;
    let last = path.len() - 1;
    for m in 0..ORACLE_POINTS {
        let k = (m * last + (ORACLE_POINTS - 1) / 2) / (ORACLE_POINTS - 1);
        let lambda = path.lambdas[k];
        let (b0, theta) = projected_gradient_oracle(&problem, lambda)?;
        let reference = problem.objective(b0, theta.view(), lambda);
        let ours = problem.objective(path.intercepts[k], path.coef(k), lambda);
        rel = rel.max((ours - reference).abs() / reference.abs().max(f64::MIN_POSITIVE));
    }
    Ok([
        Check {
            name: "solver_objective_vs_gradient_oracle",
            discrepancy: rel,
            tolerance: OBJECTIVE_REL_TOL,
        },
        Check {
            name: "solver_kkt_residual",
            discrepancy: kkt,
            tolerance: KKT_TOL,
        },
    ])
}

/// Non-LOO uniLasso against the adaptive lasso with penalty factors `1/|slope|`
/// on a shared grid, with and without the sign constraint.
pub fn equivalence_check(dataset: &Dataset<f64>, config: &FitConfig) -> Result<Check> {
    let mut worst = 0.0f64;
    for sign in [true, false] {
        let kind = Stage2Kind::UniLasso {
            loo: false,
            sign_constraint: sign,
            use_magnitude: true,
        };
        let uni = fit_stage2_path(dataset, &kind, config)?;
        let ada = fit_stage2_path_with_lambdas(
            dataset,
            &Stage2Kind::Adaptive { sign_constraint: sign },
            &uni.path.lambdas,
            config,
        )?;
        let diff = (&uni.coefficient_path.coefs - &ada.coefficient_path.coefs)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(diff);
    }
    Ok(Check {
        name: "no_loo_vs_adaptive_lasso",
        discrepancy: worst,
        tolerance: EQUIVALENCE_TOL,
    })
}

/// Every check; `solver_config` drives the solver under test.
pub fn run_checks(dataset: &Dataset<f64>, config: &FitConfig, solver_config: &FitConfig) -> Result<Vec<Check>> {
    guardrails(dataset)?;
    let mut out = vec![loo_check(dataset)?];
    out.extend(solver_checks(dataset, solver_config)?);
    out.push(equivalence_check(dataset, config)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{Scenario, ScenarioKind};

    #[test]
    fn random_gaussian_passes_every_check() {
        let d = Scenario { n_test: 1, ..Scenario::new(ScenarioKind::MediumSnr).with_size(40, 5) }
            .generate(1)
            .unwrap();
        let cfg = FitConfig::default();
        for c in run_checks(&d.train, &cfg, &cfg).unwrap() {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn loose_solver_is_caught() {
        let sc = Scenario { n_test: 1, sparsity: 0.5, ..Scenario::new(ScenarioKind::HighSnr).with_size(60, 20) };
        let d = sc.generate(2).unwrap();
        let [_, kkt] = solver_checks(&d.train, &FitConfig::default()).unwrap();
        assert!(kkt.passed(), "{kkt:?}");
        let loose = FitConfig { tol: 0.5, ..FitConfig::default() };
        let [_, kkt] = solver_checks(&d.train, &loose).unwrap();
        assert!(!kkt.passed(), "{kkt:?}");
    }

    #[test]
    fn guardrails_reject_large_data() {
        let d = Scenario { n_test: 1, ..Scenario::new(ScenarioKind::MediumSnr).with_size(40, 201) }
            .generate(2)
            .unwrap();
        assert!(guardrails(&d.train).is_err());
    }
}
