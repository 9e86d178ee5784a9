use unilasso::pipeline::unilasso_polish;
use unilasso::{Error, Result};

use super::{load, summary_table, write_path};
use crate::args::{FamilyArg, PolishArgs};
use crate::output::{write_text, Sink};

pub fn run(args: &PolishArgs) -> Result<()> {
    if args.data.family == FamilyArg::Multiclass {
        return Err(Error::InvalidConfig("polish needs a gaussian or binomial response".into()));
    }
    let config = args.config.config()?;
    let data = load(&args.data)?;
    let fit = unilasso_polish(&data, &config)?;
    write_text(&args.output, &fit.model.to_json()?)?;
    if let Some(path) = &args.path {
        let mut sink = Sink::create(path)?;
        write_path(&mut sink, &fit.stitched, &fit.model.feature_names, true)?;
        sink.finish()?;
    }
    let mut out = Sink::stdout();
    out.line(&format!(
        "base support: {}  polished support: {}",
        fit.base.model.support_size(),
        fit.model.support_size()
    ))?;
    out.line(&summary_table(&fit.model))?;
    out.finish()
}
