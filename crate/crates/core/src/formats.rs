//! JSON file schemas for measures and moment vectors.
//!
//! Floats are serialized with 17 significant digits so every file
//! round-trips bit for bit.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::basis::{BasisKind, PolyBasis};
use crate::recovery::{DiscreteMeasure, MomentData, Provenance};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Basis(#[from] crate::basis::BasisError),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AtomRecord {
    pub point: Vec<f64>,
    pub weight: f64,
}

/// On-disk measure: `{ "n": int, "atoms": [ { "point": [...], "weight": w } ] }`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeasureFile {
    pub n: usize,
    pub atoms: Vec<AtomRecord>,
}

impl MeasureFile {
    pub fn from_measure(m: &DiscreteMeasure) -> Self {
        Self {
            n: m.n,
            atoms: m
                .atoms
                .iter()
                .map(|(p, w)| AtomRecord {
                    point: p.clone(),
                    weight: *w,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), FormatError> {
        for (i, a) in self.atoms.iter().enumerate() {
            if a.point.len() != self.n {
                return Err(FormatError::Schema(format!(
                    "atom {i} has dimension {} but n = {}",
                    a.point.len(),
                    self.n
                )));
            }
            if a.weight < 0.0 {
                return Err(FormatError::Schema(format!(
                    "atom {i} has negative weight {}",
                    a.weight
                )));
            }
        }
        Ok(())
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure, FormatError> {
        self.validate()?;
        Ok(DiscreteMeasure::new(
            self.n,
            self.atoms
                .iter()
                .map(|a| (a.point.clone(), a.weight))
                .collect(),
        ))
    }
}

/// On-disk moments:
/// `{ "n", "degree", "basis", "box", "values", "delta" }`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MomentFile {
    pub n: usize,
    pub degree: u32,
    pub basis: BasisKind,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub delta: f64,
}

impl MomentFile {
    pub fn from_data(y: &MomentData) -> Self {
        Self {
            n: y.basis.dimension(),
            degree: y.basis.degree(),
            basis: y.basis.kind(),
            bounds: y.basis.bounds().iter().map(|&(a, b)| [a, b]).collect(),
            values: y.values.clone(),
            delta: y.delta,
        }
    }

    pub fn validate(&self) -> Result<(), FormatError> {
        let want = crate::linalg::binomial(self.n + self.degree as usize, self.degree as usize);
        if self.values.len() != want {
            return Err(FormatError::Schema(format!(
                "values length {} does not match binomial(n+degree, degree) = {want}",
                self.values.len()
            )));
        }
        if self.bounds.len() != self.n {
            return Err(FormatError::Schema(format!(
                "box has {} coordinates but n = {}",
                self.bounds.len(),
                self.n
            )));
        }
        if self.delta < 0.0 {
            return Err(FormatError::Schema("delta must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn to_data(&self) -> Result<MomentData, FormatError> {
        self.validate()?;
        let bounds: Vec<(f64, f64)> = self.bounds.iter().map(|&[a, b]| (a, b)).collect();
        let basis = match self.basis {
            BasisKind::Monomial => PolyBasis::monomial_on(self.n, self.degree, bounds)?,
            BasisKind::OrthonormalUniformBox => {
                PolyBasis::orthonormalize(self.n, self.degree, bounds)?
            }
            BasisKind::ChebyshevProduct => {
                PolyBasis::chebyshev_product(self.n, self.degree, bounds)?
            }
        };
        let provenance = if self.delta == 0.0 {
            Provenance::Exact
        } else {
            Provenance::Noisy
        };
        Ok(MomentData::new(
            Arc::new(basis),
            self.values.clone(),
            self.delta,
            provenance,
        )?)
    }
}

struct Digits17Formatter;

impl serde_json::ser::Formatter for Digits17Formatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize any value as JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, FormatError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17Formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("json is utf8"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, FormatError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<(), FormatError> {
    std::fs::write(path, to_json_string(value)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_file_round_trips_exactly() {
        let m = MeasureFile {
            n: 2,
            atoms: vec![
                AtomRecord {
                    point: vec![0.1234567890123456, -1.0 / 3.0],
                    weight: std::f64::consts::PI,
                },
                AtomRecord {
                    point: vec![1e-300, 2.5e17],
                    weight: 0.0,
                },
            ],
        };
        let text = to_json_string(&m).unwrap();
        let back: MeasureFile = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn moment_file_round_trips_and_validates() {
        let f = MomentFile {
            n: 1,
            degree: 2,
            basis: BasisKind::Monomial,
            bounds: vec![[-1.0, 1.0]],
            values: vec![1.0, 0.0, 1.0 / 3.0],
            delta: 0.0,
        };
        let text = to_json_string(&f).unwrap();
        let back: MomentFile = serde_json::from_str(&text).unwrap();
        assert_eq!(f, back);
        let y = back.to_data().unwrap();
        assert_eq!(y.values.len(), 3);

        let bad = MomentFile {
            values: vec![1.0],
            ..f.clone()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn negative_weight_is_rejected() {
        let m = MeasureFile {
            n: 1,
            atoms: vec![AtomRecord {
                point: vec![0.0],
                weight: -1.0,
            }],
        };
        assert!(m.validate().is_err());
    }
}
