pub mod bench;
pub mod cv;
pub mod fit;
pub mod polish;
pub mod predict;
pub mod simulate;
pub mod unireg;
pub mod verify;

use unilasso::data::{Dataset, FitConfig};
use unilasso::io::read_dataset;
use unilasso::pipeline::{
    read_external_scores, unilasso_cv, unilasso_external, CoefficientPath, CollapsedModel, OvrModel, PathFit,
    PathStage,
};
use unilasso::Result;

use crate::args::{DataArgs, VariantArgs};
use crate::output::{num, Sink};

pub fn load(args: &DataArgs) -> Result<Dataset<f64>> {
    read_dataset(&args.input, &args.selector(), args.base_family())
}

/// uniLasso (or the variant chosen by the flags) with cross-validation.
pub fn fit_variant(data: &Dataset<f64>, variant: &VariantArgs, config: &FitConfig) -> Result<PathFit<f64>> {
    match &variant.external_scores {
        Some(path) => unilasso_external(data, &read_external_scores(path)?, config),
        None => unilasso_cv(data, config),
    }
}

/// Path CSV: one row per penalty with the collapsed coefficients.
pub fn write_path(sink: &mut Sink, path: &CoefficientPath<f64>, names: &[String], with_stage: bool) -> Result<()> {
    let mut header: Vec<String> = Vec::new();
    if with_stage {
        header.push("stage".into());
    }
    header.extend(["lambda", "df", "objective", "intercept"].map(String::from));
    header.extend(names.iter().cloned());
    sink.record(&header)?;
    for k in 0..path.len() {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        if with_stage {
            row.push(
                match path.stages[k] {
                    PathStage::Base => "base",
                    PathStage::Polish => "polish",
                }
                .into(),
            );
        }
        row.push(num(path.lambdas[k]));
        row.push(path.support_size(k).to_string());
        row.push(num(path.objective[k]));
        row.push(num(path.intercepts[k]));
        row.extend(path.coefs.row(k).iter().map(|v| num(*v)));
        sink.record(&row)?;
    }
    Ok(())
}

/// Two-column table of the nonzero coefficients next to the univariate slopes.
pub fn summary_table(model: &CollapsedModel<f64>) -> String {
    let mut out = format!(
        "variant: {}  family: {}  lambda: {}  support: {}/{}\n",
        model.variant,
        model.family,
        num(model.lambda_selected),
        model.support_size(),
        model.p()
    );
    let width = model.feature_names.iter().map(|n| n.len()).max().unwrap_or(0).max(9);
    out.push_str(&format!("{:<width$}  {:>14}  {:>14}\n", "feature", "univariate", "coefficient"));
    out.push_str(&format!("{:<width$}  {:>14}  {:>14.6}\n", "(intercept)", "", model.gamma0));
    for j in model.support() {
        let uni = model
            .univariate
            .as_ref()
            .map_or_else(String::new, |u| format!("{:.6}", u.slopes[j]));
        out.push_str(&format!("{:<width$}  {:>14}  {:>14.6}\n", model.feature_names[j], uni, model.gammas[j]));
    }
    out
}

/// JSON document holding one model per class.
pub fn ovr_json(ovr: &OvrModel<f64>) -> Result<String> {
    let models = ovr
        .models
        .iter()
        .map(|m| Ok(serde_json::from_str::<serde_json::Value>(&m.to_json()?)?))
        .collect::<Result<Vec<_>>>()?;
    let doc = serde_json::json!({ "classes": ovr.classes, "models": models });
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn ovr_from_json(text: &str) -> Result<Option<OvrModel<f64>>> {
    let doc: serde_json::Value = serde_json::from_str(text)?;
    let (Some(classes), Some(models)) = (doc.get("classes"), doc.get("models")) else {
        return Ok(None);
    };
    let classes: Vec<f64> = serde_json::from_value(classes.clone())?;
    let models = models
        .as_array()
        .map(|ms| ms.iter().map(|m| CollapsedModel::from_json(&m.to_string())).collect::<Result<Vec<_>>>())
        .transpose()?
        .unwrap_or_default();
    if models.len() != classes.len() {
        return Err(unilasso::Error::InvalidInput(format!(
            "model file lists {} classes but {} models",
            classes.len(),
            models.len()
        )));
    }
    Ok(Some(OvrModel { classes, models }))
}
