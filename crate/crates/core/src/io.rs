//! JSON model files and CSV result tables.
//!
//! A model file carries either explicit data
//!
//! ```json
//! { "units": "cm-1", "energies": [0, 1], "modes": [30, 45],
//!   "couplings": [ [[[0,0],[1,0.5]], [[1,-0.5],[0,0]]], ... ] }
//! ```
//!
//! with one `N_s × N_s` matrix of `[re, im]` pairs per mode, or a
//! `model_spec` block that is expanded through [`generate_model`].

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{generate_model, ModelSpec};
use crate::sweeps::SweepSeries;
use crate::system::{CouplingSet, Model, PhononBath, SpinSystem};

pub const UNITS_TAG: &str = "cm-1";

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<RawMatrix>>,
    /// Global coupling multiplier λ, 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_spec: Option<ModelSpec>,
}

impl SystemFile {
    /// Explicit form of a model.
    pub fn from_model(model: &Model) -> Self {
        let couplings = model
            .couplings
            .matrices()
            .iter()
            .map(|m| {
                (0..m.nrows())
                    .map(|r| {
                        (0..m.ncols())
                            .map(|c| [m[(r, c)].re, m[(r, c)].im])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let scale = model.couplings.scale();
        Self {
            units: UNITS_TAG.to_string(),
            energies: Some(model.system.energies().to_vec()),
            modes: Some(model.bath.frequencies().to_vec()),
            couplings: Some(couplings),
            scale: (scale != 1.0).then_some(scale),
            model_spec: None,
        }
    }

    pub fn from_spec(spec: ModelSpec) -> Self {
        Self {
            units: UNITS_TAG.to_string(),
            energies: None,
            modes: None,
            couplings: None,
            scale: None,
            model_spec: Some(spec),
        }
    }

    pub fn to_model(&self) -> Result<Model> {
        if self.units != UNITS_TAG {
            return Err(Error::invalid(format!(
                "unsupported units \"{}\", expected \"{UNITS_TAG}\"",
                self.units
            )));
        }
        let explicit = self.energies.is_some() || self.modes.is_some() || self.couplings.is_some();
        let model = match (&self.model_spec, explicit) {
            (Some(_), true) => {
                return Err(Error::invalid(
                    "model file has both explicit data and a model_spec block",
                ))
            }
            (None, false) => {
                return Err(Error::invalid(
                    "model file has neither explicit data nor a model_spec block",
                ))
            }
            (Some(spec), false) => generate_model(spec)?,
            (None, true) => self.explicit_model()?,
        };
        match self.scale {
            Some(s) => Model::new(model.system, model.bath, model.couplings.with_scale(s)?),
            None => Ok(model),
        }
    }

    fn explicit_model(&self) -> Result<Model> {
        let missing = |what| Error::invalid(format!("model file is missing \"{what}\""));
        let energies = self.energies.clone().ok_or_else(|| missing("energies"))?;
        let modes = self.modes.clone().ok_or_else(|| missing("modes"))?;
        let raw = self
            .couplings
            .as_ref()
            .ok_or_else(|| missing("couplings"))?;
        let n = energies.len();
        if raw.len() != modes.len() {
            return Err(Error::Shape(format!(
                "{} coupling matrices for {} modes",
                raw.len(),
                modes.len()
            )));
        }
        let mut matrices = Vec::with_capacity(raw.len());
        for (mode, rows) in raw.iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Shape(format!(
                    "coupling matrix {mode} is not {n}x{n}"
                )));
            }
            matrices.push(DMatrix::from_fn(n, n, |r, c| {
                let [re, im] = rows[r][c];
                Complex64::new(re, im)
            }));
        }
        let system = SpinSystem::new(energies)?;
        let bath = PhononBath::new(modes)?;
        Model::new(system, bath, CouplingSet::new(matrices)?)
    }
}

pub fn parse_system(text: &str) -> Result<Model> {
    serde_json::from_str::<SystemFile>(text)?.to_model()
}

pub fn load_system(path: impl AsRef<Path>) -> Result<Model> {
    parse_system(&fs::read_to_string(path)?)
}

pub fn system_to_json(file: &SystemFile) -> Result<String> {
    let mut s = serde_json::to_string_pretty(file)?;
    s.push('\n');
    Ok(s)
}

/// Write a model in explicit form.
pub fn save_system(path: impl AsRef<Path>, model: &Model) -> Result<()> {
    fs::write(path, system_to_json(&SystemFile::from_model(model))?)?;
    Ok(())
}

/// A numeric CSV table: a header row and rows of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// 17 significant digits, `inf` for infinities.
pub fn format_value(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_value(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::invalid(format!("cannot parse \"{s}\" as a number")))
}

impl ResultTable {
    /// Columns: axis, `t1_order{n}` per order, then `rate_{pattern}_{b}_{a}`
    /// per channel series.
    pub fn from_series(series: &SweepSeries) -> Self {
        let mut header = vec![series.axis_kind.label().to_string()];
        header.extend(series.t1.keys().map(|o| format!("t1_order{}", o.value())));
        header.extend(
            series
                .channels
                .iter()
                .map(|c| format!("rate_{}_{}_{}", c.pattern, c.transition.0, c.transition.1)),
        );
        let rows = (0..series.axis.len())
            .map(|i| {
                let mut row = vec![series.axis[i]];
                row.extend(series.t1.values().map(|col| col[i]));
                row.extend(series.channels.iter().map(|c| c.rates[i]));
                row
            })
            .collect();
        Self { header, rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            if row.len() != self.header.len() {
                return Err(Error::Shape(format!(
                    "row has {} values for {} columns",
                    row.len(),
                    self.header.len()
                )));
            }
            out.write_record(row.iter().map(|&x| format_value(x)))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut input = csv::Reader::from_reader(r);
        let header = input.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for record in input.records() {
            rows.push(
                record?
                    .iter()
                    .map(parse_value)
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self { header, rows })
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))
    }
}

pub fn write_series(path: impl AsRef<Path>, series: &SweepSeries) -> Result<()> {
    ResultTable::from_series(series).write(fs::File::create(path)?)
}
