use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig17;

/// Population summary at step `p`: `g = η^N_p(G)` and `f[j] = η^N_p(φ_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub g: f64,
    pub f: Vec<f64>,
}

impl StepRecord {
    pub fn new(step: u64, g: f64, f: Vec<f64>) -> Self {
        Self { step, g, f }
    }

    pub(crate) fn validate(&self, functions: usize) -> Result<()> {
        if !(self.g > 0.0) || !self.g.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "record {}: g = {} must be finite and > 0",
                self.step, self.g
            )));
        }
        if self.f.len() != functions {
            return Err(Error::InvalidArgument(format!(
                "record {}: expected {functions} test-function values, got {}",
                self.step,
                self.f.len()
            )));
        }
        if let Some(j) = self.f.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "record {}: f_{j} is not finite",
                self.step
            )));
        }
        Ok(())
    }
}

/// Writes the record dump: a header `step,g,f_0,…,f_{J-1}` followed by one
/// row per record, floats at 17 significant digits.
pub fn write_records_csv<W: Write>(mut out: W, records: &[StepRecord]) -> std::io::Result<()> {
    let functions = records.first().map_or(0, |r| r.f.len());
    write!(out, "step,g")?;
    for j in 0..functions {
        write!(out, ",f_{j}")?;
    }
    writeln!(out)?;
    for r in records {
        write!(out, "{},{}", r.step, sig17(r.g))?;
        for v in &r.f {
            write!(out, ",{}", sig17(*v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_records_csv<R: BufRead>(input: R) -> Result<Vec<StepRecord>> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::io("<records>", e))?,
        None => return Ok(Vec::new()),
    };
    let columns: Vec<&str> = header.trim().split(',').collect();
    if columns.len() < 2 || columns[0] != "step" || columns[1] != "g" {
        return Err(Error::RecordFormat {
            line: 1,
            message: format!("expected header starting `step,g`, found `{header}`"),
        });
    }
    for (j, c) in columns[2..].iter().enumerate() {
        if *c != format!("f_{j}") {
            return Err(Error::RecordFormat {
                line: 1,
                message: format!("column {} should be `f_{j}`, found `{c}`", j + 3),
            });
        }
    }
    let functions = columns.len() - 2;
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io("<records>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::RecordFormat { line: i + 1, message };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != functions + 2 {
            return Err(bad(format!(
                "expected {} fields, found {}",
                functions + 2,
                fields.len()
            )));
        }
        let step = fields[0].parse::<u64>().map_err(|e| bad(format!("step: {e}")))?;
        let mut values = fields[1..].iter().map(|s| s.parse::<f64>());
        let g = values.next().unwrap().map_err(|e| bad(format!("g: {e}")))?;
        let f = values
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("f: {e}")))?;
        records.push(StepRecord { step, g, f });
    }
    Ok(records)
}
