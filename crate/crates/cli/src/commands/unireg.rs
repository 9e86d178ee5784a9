use unilasso::pipeline::{unireg, unireg_bootstrap_ci};
use unilasso::{Error, Result};

use super::{load, summary_table};
use crate::args::{FamilyArg, UniregArgs};
use crate::output::{num, write_text, Sink};

pub fn run(args: &UniregArgs) -> Result<()> {
    if args.data.family == FamilyArg::Multiclass {
        return Err(Error::InvalidConfig("unireg needs a gaussian or binomial response".into()));
    }
    let mut config = args.config.config()?;
    config.loo = !args.no_loo;
    if let Some(b) = args.bootstrap {
        if b < 100 {
            return Err(Error::InvalidConfig(format!("--bootstrap must be at least 100, got {b}")));
        }
        if !(args.level > 0.0 && args.level < 1.0) {
            return Err(Error::InvalidConfig(format!("--level must be in (0, 1), got {}", args.level)));
        }
    }
    let data = load(&args.data)?;
    let model = unireg(&data, &config)?;
    write_text(&args.output, &model.to_json()?)?;

    let mut out = Sink::stdout();
    out.line(&summary_table(&model))?;
    if let Some(b) = args.bootstrap {
        let ci = unireg_bootstrap_ci(&data, &config, b, args.level)?;
        let mut sink = match &args.ci {
            Some(path) => Sink::create(path)?,
            None => Sink::stdout(),
        };
        sink.record(["feature", "estimate", "lower", "upper"])?;
        for (name, c) in model.feature_names.iter().zip(&ci) {
            sink.record([name.clone(), num(c.estimate), num(c.lower), num(c.upper)])?;
        }
        out.finish()?;
        return sink.finish();
    }
    out.finish()
}
