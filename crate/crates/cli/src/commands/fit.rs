use unilasso::pipeline::ovr_multiclass;
use unilasso::{Error, Result};

use super::{fit_variant, load, ovr_json, summary_table, write_path};
use crate::args::{FamilyArg, FitArgs};
use crate::output::{write_text, Sink};

pub fn run(args: &FitArgs) -> Result<()> {
    args.variant.check_family(args.data.family)?;
    let config = args.variant.apply(args.config.config()?);
    if args.data.family == FamilyArg::Multiclass && args.path.is_some() {
        return Err(Error::InvalidConfig("--path is not available with --family multiclass".into()));
    }
    let data = load(&args.data)?;

    if args.data.family == FamilyArg::Multiclass {
        let ovr = ovr_multiclass(&data, &config)?;
        write_text(&args.output, &ovr_json(&ovr)?)?;
        let mut out = Sink::stdout();
        for (c, m) in ovr.classes.iter().zip(&ovr.models) {
            out.line(&format!("class {c}"))?;
            out.line(&summary_table(m))?;
        }
        return out.finish();
    }

    let fit = fit_variant(&data, &args.variant, &config)?;
    write_text(&args.output, &fit.model.to_json()?)?;
    if let Some(path) = &args.path {
        let mut sink = Sink::create(path)?;
        write_path(&mut sink, &fit.coefficient_path, &fit.feature_names, false)?;
        sink.finish()?;
    }
    let mut out = Sink::stdout();
    out.line(&summary_table(&fit.model))?;
    out.finish()
}
