use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, ShapeBuilder};

use super::external::ExternalScores;
use super::model::{CoefficientPath, CollapsedModel, PathStage, Stage2Coefficients, UnivariateSummary, Variant};
use crate::cv::{assign_folds, check_fold_count, cross_validate, default_grid, evaluate_fold, fit_fold_path, CvResult};
use crate::data::{standardize, Dataset, Family, FitConfig};
use crate::error::Result;
use crate::scalar::{sign, Scalar};
use crate::solver::{fit_path_with_lambdas, PathSolution, SolverProblem};
use crate::univariate::{fit_univariate, UnivariateFits};

/// How the stage-2 columns are built from the features.
#[derive(Debug, Clone, PartialEq)]
pub enum Stage2Kind<F> {
    /// Univariate fit columns with a non-negative (or free) stage-2 lasso.
    UniLasso {
        loo: bool,
        sign_constraint: bool,
        use_magnitude: bool,
    },
    /// Lasso on standardized features, coefficients mapped back to the raw scale.
    Lasso,
    /// Lasso on raw features with penalty factors `1/|slope_j|`.
    Adaptive { sign_constraint: bool },
    /// Columns `intercept_j + slope_j x_j` from externally supplied scores.
    External(ExternalScores<F>),
}

impl<F: Scalar> Stage2Kind<F> {
    pub fn from_config(config: &FitConfig) -> Self {
        Stage2Kind::UniLasso {
            loo: config.loo,
            sign_constraint: config.sign_constraint,
            use_magnitude: config.use_magnitude,
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            Stage2Kind::UniLasso {
                loo,
                sign_constraint,
                use_magnitude,
            } => {
                if !sign_constraint {
                    Variant::NoSign
                } else if !use_magnitude {
                    Variant::NoMag
                } else if !loo {
                    Variant::NoLoo
                } else {
                    Variant::Unilasso
                }
            }
            Stage2Kind::Lasso => Variant::Lasso,
            Stage2Kind::Adaptive { .. } => Variant::Adaptive,
            Stage2Kind::External(_) => Variant::External,
        }
    }

    fn needs_univariate(&self) -> bool {
        matches!(self, Stage2Kind::UniLasso { .. } | Stage2Kind::Adaptive { .. })
    }
}

/// Stage-2 columns and the affine map from each column back to its feature.
///
/// Column `k` stands for `a_k + b_k x_{features[k]}` on new data, so a
/// stage-2 fit collapses to `gamma_j = b_k theta_k` and
/// `gamma0 = theta0 + sum_k a_k theta_k`.
#[derive(Debug, Clone)]
pub struct Stage2Design<F> {
    pub p: usize,
    pub features: Vec<usize>,
    /// Training columns, `n x q`.
    pub columns: Array2<F>,
    pub a: Array1<F>,
    pub b: Array1<F>,
    pub nonnegative: bool,
    pub penalty_factors: Array1<F>,
    pub univariate: Option<UnivariateSummary<F>>,
}

impl<F: Scalar> Stage2Design<F> {
    pub fn q(&self) -> usize {
        self.features.len()
    }

    /// Columns evaluated on new rows through the affine map.
    pub fn evaluate(&self, x: ArrayView2<'_, F>) -> Array2<F> {
        let mut out = Array2::zeros((x.nrows(), self.q()).f());
        for (k, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (a, b) = (self.a[k], self.b[k]);
            col.zip_mut_with(&x.column(self.features[k]), |o, &v| *o = a + b * v);
        }
        out
    }

    pub fn problem(&self, target: &Array1<F>, family: Family, offset: Option<&Array1<F>>) -> Result<SolverProblem<F>> {
        let mut p = SolverProblem::new(self.columns.clone(), target.clone(), family)?
            .nonnegative(self.nonnegative)
            .with_penalty_factors(self.penalty_factors.clone());
        if let Some(o) = offset {
            p = p.with_offset(o.clone());
        }
        Ok(p)
    }

    /// Collapses stage-2 coefficients to `(gamma0, gammas)` over all `p` features.
    pub fn collapse(&self, theta0: F, thetas: ArrayView1<'_, F>) -> (F, Array1<F>) {
        let mut gammas = Array1::zeros(self.p);
        let mut g0 = theta0;
        for k in 0..self.q() {
            let t = thetas[k];
            if t != F::zero() {
                gammas[self.features[k]] = self.b[k] * t;
                g0 += self.a[k] * t;
            }
        }
        (g0, gammas)
    }

    fn expand(&self, thetas: ArrayView1<'_, F>) -> Array1<F> {
        let mut full = Array1::zeros(self.p);
        for k in 0..self.q() {
            full[self.features[k]] = thetas[k];
        }
        full
    }
}

/// Builds the stage-2 design for `dataset`; `fits` are reused when supplied.
pub fn build_design<F: Scalar>(
    dataset: &Dataset<F>,
    kind: &Stage2Kind<F>,
    fits: Option<&UnivariateFits<F>>,
) -> Result<(Stage2Design<F>, Option<UnivariateFits<F>>)> {
    let owned;
    let fits = if kind.needs_univariate() {
        match fits {
            Some(f) => Some(f),
            None => {
                owned = fit_univariate(dataset)?;
                Some(&owned)
            }
        }
    } else {
        None
    };
    let x = dataset.features.view();
    let p = dataset.p();
    let design = match kind {
        Stage2Kind::UniLasso {
            loo,
            sign_constraint,
            use_magnitude,
        } => {
            let f = fits.expect("univariate fits");
            let features: Vec<usize> = (0..p).filter(|&j| f.usable()[j]).collect();
            let source = if *loo { &f.loo_fits } else { &f.insample_fits };
            let scale: Vec<F> = features
                .iter()
                .map(|&j| if *use_magnitude { F::one() } else { F::one() / f.std_slopes[j].abs() })
                .collect();
            let mut columns = source.select(Axis(1), &features);
            for (k, mut c) in columns.axis_iter_mut(Axis(1)).enumerate() {
                c.mapv_inplace(|v| v * scale[k]);
            }
            Stage2Design {
                p,
                a: Array1::from_iter(features.iter().zip(&scale).map(|(&j, &s)| f.intercepts[j] * s)),
                b: Array1::from_iter(features.iter().zip(&scale).map(|(&j, &s)| f.slopes[j] * s)),
                columns: ensure_column_major(columns),
                penalty_factors: Array1::ones(features.len()),
                nonnegative: *sign_constraint,
                univariate: Some(summary(f)),
                features,
            }
        }
        Stage2Kind::Lasso => {
            let (z, stats) = standardize(x);
            let features: Vec<usize> = (0..p).filter(|&j| !stats.constant_mask[j]).collect();
            Stage2Design {
                p,
                a: Array1::from_iter(features.iter().map(|&j| -stats.means[j] / stats.sds[j])),
                b: Array1::from_iter(features.iter().map(|&j| F::one() / stats.sds[j])),
                columns: ensure_column_major(z.select(Axis(1), &features)),
                penalty_factors: Array1::ones(features.len()),
                nonnegative: false,
                univariate: None,
                features,
            }
        }
        Stage2Kind::Adaptive { sign_constraint } => {
            let f = fits.expect("univariate fits");
            let features: Vec<usize> = (0..p).filter(|&j| f.usable()[j]).collect();
            let signs: Vec<F> = features
                .iter()
                .map(|&j| if *sign_constraint { sign(f.slopes[j]) } else { F::one() })
                .collect();
            let mut columns = x.select(Axis(1), &features);
            for (k, mut c) in columns.axis_iter_mut(Axis(1)).enumerate() {
                c.mapv_inplace(|v| v * signs[k]);
            }
            Stage2Design {
                p,
                a: Array1::zeros(features.len()),
                b: Array1::from(signs),
                columns: ensure_column_major(columns),
                penalty_factors: Array1::from_iter(features.iter().map(|&j| F::one() / f.slopes[j].abs())),
                nonnegative: *sign_constraint,
                univariate: Some(summary(f)),
                features,
            }
        }
        Stage2Kind::External(scores) => {
            let scores = scores.resolved(dataset)?;
            let (_, stats) = standardize(x);
            let features: Vec<usize> = (0..p)
                .filter(|&j| !stats.constant_mask[j] && scores.slopes[j] != F::zero())
                .collect();
            let mut design = Stage2Design {
                p,
                a: scores.intercepts.select(Axis(0), &features),
                b: scores.slopes.select(Axis(0), &features),
                columns: Array2::zeros((0, 0)),
                penalty_factors: Array1::ones(features.len()),
                nonnegative: true,
                univariate: Some(UnivariateSummary {
                    intercepts: scores.intercepts.clone(),
                    slopes: scores.slopes.clone(),
                }),
                features,
            };
            design.columns = design.evaluate(x);
            design
        }
    };
    let fits_out = if fits.is_some() && kind.needs_univariate() {
        fits.cloned()
    } else {
        None
    };
    Ok((design, fits_out))
}

fn summary<F: Scalar>(f: &UnivariateFits<F>) -> UnivariateSummary<F> {
    UnivariateSummary {
        intercepts: f.intercepts.clone(),
        slopes: f.slopes.clone(),
    }
}

fn ensure_column_major<F: Scalar>(a: Array2<F>) -> Array2<F> {
    if a.t().is_standard_layout() {
        a
    } else {
        crate::data::to_column_major(a.view())
    }
}

/// A stage-2 path together with everything needed to collapse any point.
#[derive(Debug, Clone)]
pub struct PathFit<F> {
    /// Model at the selected point.
    pub model: CollapsedModel<F>,
    pub selected: usize,
    pub cv: Option<CvResult<F>>,
    /// Stage-2 path over the design columns.
    pub path: PathSolution<F>,
    /// Collapsed coefficients at every point.
    pub coefficient_path: CoefficientPath<F>,
    pub design: Stage2Design<F>,
    pub univariate: Option<UnivariateFits<F>>,
    pub family: Family,
    pub variant: Variant,
    pub feature_names: Vec<String>,
}

impl<F: Scalar> PathFit<F> {
    /// Collapsed model at path index `k`.
    pub fn model_at(&self, k: usize) -> CollapsedModel<F> {
        collapse_point(&self.design, &self.path, k, self.family, self.variant, &self.feature_names)
    }
}

pub(crate) fn collapse_point<F: Scalar>(
    design: &Stage2Design<F>,
    path: &PathSolution<F>,
    k: usize,
    family: Family,
    variant: Variant,
    names: &[String],
) -> CollapsedModel<F> {
    let (gamma0, gammas) = design.collapse(path.intercepts[k], path.coef(k));
    CollapsedModel {
        family,
        variant,
        gamma0,
        gammas,
        lambda_selected: path.lambdas[k],
        feature_names: names.to_vec(),
        univariate: design.univariate.clone(),
        stage2: Some(Stage2Coefficients {
            theta0: path.intercepts[k],
            thetas: design.expand(path.coef(k)),
        }),
    }
}

pub(crate) fn coefficient_path<F: Scalar>(design: &Stage2Design<F>, path: &PathSolution<F>) -> CoefficientPath<F> {
    let mut coefs = Array2::zeros((path.len(), design.p));
    let mut intercepts = Vec::with_capacity(path.len());
    for k in 0..path.len() {
        let (g0, g) = design.collapse(path.intercepts[k], path.coef(k));
        intercepts.push(g0);
        coefs.row_mut(k).assign(&g);
    }
    CoefficientPath {
        lambdas: path.lambdas.clone(),
        stages: vec![PathStage::Base; path.len()],
        intercepts,
        coefs,
        objective: path.objective.clone(),
    }
}

/// Fits the stage-2 path on the default grid without cross-validation;
/// the last (smallest) penalty is selected.
pub fn fit_stage2_path<F: Scalar>(dataset: &Dataset<F>, kind: &Stage2Kind<F>, config: &FitConfig) -> Result<PathFit<F>> {
    config.validate()?;
    crate::data::validate(dataset)?;
    let (design, fits) = build_design(dataset, kind, None)?;
    let problem = design.problem(&dataset.response, dataset.family, None)?;
    let lambdas = default_grid(&problem, config)?;
    let path = fit_fold_path(&problem, &lambdas, config)?;
    let selected = path.len() - 1;
    Ok(assemble(dataset, kind, design, fits, path, None, selected))
}

/// Fits the stage-2 path on a caller-supplied grid.
pub fn fit_stage2_path_with_lambdas<F: Scalar>(
    dataset: &Dataset<F>,
    kind: &Stage2Kind<F>,
    lambdas: &[F],
    config: &FitConfig,
) -> Result<PathFit<F>> {
    config.validate()?;
    crate::data::validate(dataset)?;
    let (design, fits) = build_design(dataset, kind, None)?;
    let problem = design.problem(&dataset.response, dataset.family, None)?;
    let path = fit_path_with_lambdas(&problem, lambdas, config)?;
    let selected = path.len() - 1;
    Ok(assemble(dataset, kind, design, fits, path, None, selected))
}

/// Fits the stage-2 path and selects the penalty by K-fold cross-validation.
///
/// By default the stage-2 columns are built once on all rows and the folds
/// only split the stage-2 problem. With `config.strict_cv` every fold
/// rebuilds the columns from its own training rows and scores the held-out
/// rows through the fold's affine column map.
pub fn fit_stage2_cv<F: Scalar>(
    dataset: &Dataset<F>,
    kind: &Stage2Kind<F>,
    offset: Option<&Array1<F>>,
    config: &FitConfig,
) -> Result<PathFit<F>> {
    config.validate()?;
    crate::data::validate(dataset)?;
    check_fold_count(dataset.n(), config.n_folds)?;
    let (design, fits) = build_design(dataset, kind, None)?;
    let problem = design.problem(&dataset.response, dataset.family, offset)?;
    let lambdas = default_grid(&problem, config)?;
    let folds = assign_folds(dataset.n(), config.n_folds, config.seed);
    let cv = if config.strict_cv {
        cross_validate(&lambdas, &folds, dataset.family, |train, test| {
            let sub = dataset.select_rows(train);
            let (fold_design, _) = build_design(&sub, kind, None)?;
            let sub_offset = offset.map(|o| o.select(Axis(0), train));
            let fit = fold_design.problem(&sub.response, sub.family, sub_offset.as_ref())?;
            let path = fit_fold_path(&fit, &lambdas, config)?;
            let held = dataset.select_rows(test);
            let mut test_problem = SolverProblem::new(
                fold_design.evaluate(held.features.view()),
                held.response.clone(),
                held.family,
            )?;
            if let Some(o) = offset {
                test_problem = test_problem.with_offset(o.select(Axis(0), test));
            }
            Ok(evaluate_fold(&test_problem, &path))
        })?
    } else {
        crate::cv::kfold_cv_with_folds(&problem, &lambdas, &folds, config)?
    };
    let path = fit_fold_path(&problem, &lambdas, config)?;
    let selected = cv.selected_index(config.lambda_rule);
    Ok(assemble(dataset, kind, design, fits, path, Some(cv), selected))
}

fn assemble<F: Scalar>(
    dataset: &Dataset<F>,
    kind: &Stage2Kind<F>,
    design: Stage2Design<F>,
    fits: Option<UnivariateFits<F>>,
    path: PathSolution<F>,
    cv: Option<CvResult<F>>,
    selected: usize,
) -> PathFit<F> {
    let variant = kind.variant();
    let names = dataset.names();
    let model = collapse_point(&design, &path, selected, dataset.family, variant, &names);
    let coefficient_path = coefficient_path(&design, &path);
    PathFit {
        model,
        selected,
        cv,
        path,
        coefficient_path,
        design,
        univariate: fits,
        family: dataset.family,
        variant,
        feature_names: names,
    }
}
