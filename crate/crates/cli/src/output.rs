use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use unilasso::{Error, Result};

/// Shortest round-trip text for a float; NaN becomes an empty field.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:?}")
    }
}

/// A file or standard output.
pub struct Sink {
    name: String,
    inner: Box<dyn Write>,
}

impl Sink {
    pub fn create(path: &Path) -> Result<Sink> {
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Sink {
            name: path.display().to_string(),
            inner: Box::new(BufWriter::new(file)),
        })
    }

    pub fn stdout() -> Sink {
        Sink {
            name: "<stdout>".into(),
            inner: Box::new(BufWriter::new(io::stdout())),
        }
    }

    pub fn open(path: Option<&PathBuf>) -> Result<Sink> {
        match path {
            Some(p) => Sink::create(p),
            None => Ok(Sink::stdout()),
        }
    }

    fn wrap(&self, source: io::Error) -> Error {
        Error::Io {
            path: self.name.clone(),
            source,
        }
    }

    pub fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.inner, "{text}").map_err(|e| self.wrap(e))
    }

    /// Writes one CSV record; fields are quoted only when needed.
    pub fn record<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(fields.into_iter().map(|f| f.as_ref().to_owned()))
            .map_err(|e| self.wrap(io::Error::other(e.to_string())))?;
        let bytes = w.into_inner().map_err(|e| self.wrap(io::Error::other(e.to_string())))?;
        self.inner.write_all(&bytes).map_err(|e| self.wrap(e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| self.wrap(e))
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut sink = Sink::create(path)?;
    sink.line(text)?;
    sink.finish()
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0, -2.5e-9, 1e300, 123456.789] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::NAN), "");
    }
}
