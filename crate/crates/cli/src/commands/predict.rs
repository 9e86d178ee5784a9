use ndarray::Array2;
use unilasso::io::{read_table, NumericTable};
use unilasso::pipeline::CollapsedModel;
use unilasso::{Error, Result};

use super::ovr_from_json;
use crate::args::PredictArgs;
use crate::output::{num, read_text, Sink};

pub fn run(args: &PredictArgs) -> Result<()> {
    let text = read_text(&args.model)?;
    let table = read_table(&args.input)?;
    let mut sink = Sink::open(args.output.as_ref())?;
    if let Some(ovr) = ovr_from_json(&text)? {
        let x = features(&table, &ovr.models[0].feature_names)?;
        let probs = ovr.predict_proba(x.view())?;
        let labels = ovr.predict(x.view())?;
        let mut header = vec!["class".to_string()];
        header.extend(ovr.classes.iter().map(|c| format!("prob_{c}")));
        sink.record(&header)?;
        for (i, row) in probs.rows().into_iter().enumerate() {
            let mut rec = vec![num(labels[i])];
            rec.extend(row.iter().map(|v| num(*v)));
            sink.record(&rec)?;
        }
        return sink.finish();
    }
    let model: CollapsedModel<f64> = CollapsedModel::from_json(&text)?;
    let x = features(&table, &model.feature_names)?;
    let pred = model.predict(x.view())?;
    match &pred.prob {
        Some(prob) => {
            sink.record(["eta", "prob"])?;
            for (e, p) in pred.eta.iter().zip(prob.iter()) {
                sink.record([num(*e), num(*p)])?;
            }
        }
        None => {
            sink.record(["eta"])?;
            for e in pred.eta.iter() {
                sink.record([num(*e)])?;
            }
        }
    }
    sink.finish()
}

/// Columns of `table` named by the model, in model order.
fn features(table: &NumericTable, names: &[String]) -> Result<Array2<f64>> {
    let idx = names
        .iter()
        .map(|name| {
            table
                .header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::InvalidInput(format!("feature column '{name}' not found in input")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let n = table.rows.len();
    Ok(Array2::from_shape_fn((n, idx.len()), |(i, k)| table.rows[i][idx[k]]))
}
