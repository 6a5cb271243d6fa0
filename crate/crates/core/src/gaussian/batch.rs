//! Repeated quadrature acquisitions and their CSV record format.
//!
//! File layout, one row per (repetition, mode):
//!
//! ```text
//! # quadratures v1
//! # modes=signal,idler
//! # pump_state=on
//! # normalized=true
//! rep_index,mode,x,p,pump_state
//! 0,signal,0.41,-0.12,on
//! 0,idler,-0.03,0.27,on
//! ```

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const QUADRATURE_SCHEMA: &str = "quadratures v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpState {
    On,
    Off,
}

impl PumpState {
    pub fn as_str(self) -> &'static str {
        match self {
            PumpState::On => "on",
            PumpState::Off => "off",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" => Ok(PumpState::On),
            "off" => Ok(PumpState::Off),
            other => Err(Error::Parse(format!("unknown pump state {other:?}"))),
        }
    }
}

/// `n_rep` acquisitions of `(x, p)` for each mode, stored row-major as
/// `[x_0, p_0, x_1, p_1, …]` per repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureBatch {
    mode_labels: Vec<String>,
    values: Vec<f64>,
    pump_state: PumpState,
    normalized: bool,
}

impl QuadratureBatch {
    /// `values.len()` must be a multiple of `2 * mode_labels.len()`.
    pub fn new(
        mode_labels: Vec<String>,
        values: Vec<f64>,
        pump_state: PumpState,
        normalized: bool,
    ) -> Result<Self> {
        if mode_labels.is_empty() || mode_labels.len() > 2 {
            return Err(Error::InvalidParameter(format!(
                "expected one or two modes, got {}",
                mode_labels.len()
            )));
        }
        let width = 2 * mode_labels.len();
        if !values.len().is_multiple_of(width) {
            return Err(Error::InvalidParameter(format!(
                "{} values do not split into rows of {width}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite quadrature in repetition {}",
                i / width
            )));
        }
        Ok(Self {
            mode_labels,
            values,
            pump_state,
            normalized,
        })
    }

    pub fn mode_labels(&self) -> &[String] {
        &self.mode_labels
    }

    pub fn pump_state(&self) -> PumpState {
        self.pump_state
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Number of quadratures per repetition (2 or 4).
    pub fn dim(&self) -> usize {
        2 * self.mode_labels.len()
    }

    pub fn n_rep(&self) -> usize {
        self.values.len() / self.dim()
    }

    pub fn record(&self, rep: usize) -> &[f64] {
        let d = self.dim();
        &self.values[rep * d..(rep + 1) * d]
    }

    /// All quadratures, repetition-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn records(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim())
    }

    /// Multiply every quadrature by `upsilon` and mark the batch normalized.
    pub fn normalize(mut self, upsilon: f64) -> Self {
        for v in &mut self.values {
            *v *= upsilon;
        }
        self.normalized = true;
        self
    }

    /// Scale the power gain seen by this batch by `drift_db`, i.e. the
    /// quadratures by `10^(drift_db/20)`, leaving the normalization flag as is.
    /// Models gain drift between the pump-on and pump-off sequences.
    pub fn with_gain_drift(mut self, drift_db: f64) -> Self {
        let scale = 10f64.powf(drift_db / 20.0);
        for v in &mut self.values {
            *v *= scale;
        }
        self
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(out);
        writeln!(out, "# {QUADRATURE_SCHEMA}")?;
        writeln!(out, "# modes={}", self.mode_labels.join(","))?;
        writeln!(out, "# pump_state={}", self.pump_state.as_str())?;
        writeln!(out, "# normalized={}", self.normalized)?;
        let mut writer = csv::Writer::from_writer(out);
        writer
            .write_record(["rep_index", "mode", "x", "p", "pump_state"])
            .map_err(csv_error)?;
        for (rep, record) in self.records().enumerate() {
            for (m, label) in self.mode_labels.iter().enumerate() {
                writer
                    .write_record([
                        rep.to_string(),
                        label.clone(),
                        format!("{:e}", record[2 * m]),
                        format!("{:e}", record[2 * m + 1]),
                        self.pump_state.as_str().to_string(),
                    ])
                    .map_err(csv_error)?;
            }
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut modes: Option<Vec<String>> = None;
        let mut pump_state = None;
        let mut normalized = None;
        let mut header_lines = String::new();
        loop {
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                break;
            }
            let Some(comment) = line.trim().strip_prefix('#') else {
                header_lines = line;
                break;
            };
            if let Some((key, value)) = comment.trim().split_once('=') {
                match key.trim() {
                    "modes" => modes = Some(value.trim().split(',').map(str::to_string).collect()),
                    "pump_state" => pump_state = Some(PumpState::parse(value)?),
                    "normalized" => {
                        normalized = Some(value.trim().parse::<bool>().map_err(|e| {
                            Error::Parse(format!("normalized flag: {e}"))
                        })?)
                    }
                    _ => {}
                }
            }
        }
        let modes = modes.ok_or_else(|| Error::Parse("missing `# modes=` header".into()))?;
        let pump_state =
            pump_state.ok_or_else(|| Error::Parse("missing `# pump_state=` header".into()))?;
        let normalized =
            normalized.ok_or_else(|| Error::Parse("missing `# normalized=` header".into()))?;

        let mut reader = csv::Reader::from_reader(header_lines.as_bytes().chain(input));
        let n_modes = modes.len();
        let mut values = Vec::new();
        for (row, result) in reader.records().enumerate() {
            let rec = result.map_err(csv_error)?;
            if rec.len() != 5 {
                return Err(Error::Parse(format!("row {row}: expected 5 columns")));
            }
            let rep: usize = parse_field(&rec[0], row)?;
            let mode = row % n_modes;
            if rep != row / n_modes || rec[1] != modes[mode] {
                return Err(Error::Parse(format!(
                    "row {row}: expected repetition {} mode {}",
                    row / n_modes,
                    modes[mode]
                )));
            }
            if PumpState::parse(&rec[4])? != pump_state {
                return Err(Error::Parse(format!("row {row}: pump state differs from header")));
            }
            values.push(parse_field(&rec[2], row)?);
            values.push(parse_field(&rec[3], row)?);
        }
        if values.len() % (2 * n_modes) != 0 {
            return Err(Error::Parse("incomplete final repetition".into()));
        }
        Self::new(modes, values, pump_state, normalized)
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, row: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("row {row}: {e}")))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Default labels for one or two modes.
pub fn default_labels(n_modes: usize) -> Vec<String> {
    ["signal", "idler"]
        .iter()
        .take(n_modes)
        .map(|s| s.to_string())
        .collect()
}
