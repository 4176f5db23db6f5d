use std::fs::File;
use std::io::{self, BufWriter, Write};

use biasci::{Error, Result};
use clap::ValueEnum;
use serde::Serialize;

use crate::OutputArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl OutputArgs {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    /// Runs `write` against the chosen sink and flushes it.
    pub fn emit<F>(&self, write: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let mut sink: Box<dyn Write> = match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
                Error::Domain(format!("cannot create {}: {e}", path.display()))
            })?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        write(&mut sink)?;
        sink.flush()
            .map_err(|e| Error::Domain(format!("write failed: {e}")))
    }

    pub fn emit_json<T: Serialize + ?Sized>(&self, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Numerical(format!("json: {e}")))?;
        self.emit(|w| {
            writeln!(w, "{text}").map_err(|e| Error::Domain(format!("write failed: {e}")))
        })
    }
}

/// Six significant digits for log summaries.
pub fn short(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return x.to_string();
    }
    format!("{x:.5e}")
        .parse::<f64>()
        .map(|r| r.to_string())
        .unwrap_or_else(|_| x.to_string())
}
