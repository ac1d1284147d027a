//! JSON file formats. Complex numbers are `[re, im]` pairs everywhere.
//!
//! State file: `{"matrix": [[[re, im], ×4], ×4]}`, row-major in the basis
//! |00⟩, |01⟩, |10⟩, |11⟩. Amplitude file: `{"amplitudes": [[re, im], ×4]}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use twocopy_core::protocol::{DetectionReport, WeakValueSet};
use twocopy_core::{CMatrix, PureAmplitudes, StateError, TwoQubitState};

pub type Pair = [f64; 2];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Shape(String),
    #[error("invalid state: {0}")]
    Invalid(#[from] StateError),
}

impl IoError {
    /// Parse and I/O failures are 1, physically invalid input is 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Invalid(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub matrix: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeFile {
    pub amplitudes: Vec<Pair>,
}

pub fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn complex([re, im]: Pair) -> Complex64 {
    Complex64::new(re, im)
}

impl StateFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self {
            matrix: (0..m.rows()).map(|i| m.row(i).iter().copied().map(pair).collect()).collect(),
        }
    }

    /// Shape and finiteness only; physical validity is checked separately.
    pub fn to_matrix(&self) -> Result<CMatrix, IoError> {
        if self.matrix.len() != 4 || self.matrix.iter().any(|r| r.len() != 4) {
            return Err(IoError::Shape("\"matrix\" must be 4 rows of 4 [re, im] pairs".into()));
        }
        let data = self.matrix.iter().flatten().copied().map(complex).collect();
        CMatrix::from_row_major(4, 4, data).map_err(|e| IoError::Shape(e.to_string()))
    }
}

impl AmplitudeFile {
    pub fn from_amplitudes(psi: &PureAmplitudes) -> Self {
        Self {
            amplitudes: psi.as_array().iter().copied().map(pair).collect(),
        }
    }

    pub fn to_amplitudes(&self) -> Result<PureAmplitudes, IoError> {
        let [a, b, c, d]: [Pair; 4] = self
            .amplitudes
            .as_slice()
            .try_into()
            .map_err(|_| IoError::Shape("\"amplitudes\" must hold 4 [re, im] pairs".into()))?;
        if [a, b, c, d].iter().flatten().any(|v| !v.is_finite()) {
            return Err(IoError::Shape("amplitudes must be finite".into()));
        }
        Ok(PureAmplitudes::new(complex(a), complex(b), complex(c), complex(d))?)
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_state_matrix(text: &str) -> Result<CMatrix, IoError> {
    serde_json::from_str::<StateFile>(text)?.to_matrix()
}

pub fn parse_state(text: &str) -> Result<TwoQubitState, IoError> {
    Ok(TwoQubitState::validate(&parse_state_matrix(text)?)?)
}

pub fn parse_amplitudes(text: &str) -> Result<PureAmplitudes, IoError> {
    serde_json::from_str::<AmplitudeFile>(text)?.to_amplitudes()
}

pub fn load_state_matrix(path: &Path) -> Result<CMatrix, IoError> {
    parse_state_matrix(&read(path)?)
}

pub fn load_state(path: &Path) -> Result<TwoQubitState, IoError> {
    parse_state(&read(path)?)
}

pub fn load_amplitudes(path: &Path) -> Result<PureAmplitudes, IoError> {
    parse_amplitudes(&read(path)?)
}

pub fn state_to_json(rho: &TwoQubitState) -> String {
    serde_json::to_string_pretty(&StateFile::from_matrix(rho.matrix())).expect("plain data")
}

pub fn amplitudes_to_json(psi: &PureAmplitudes) -> String {
    serde_json::to_string_pretty(&AmplitudeFile::from_amplitudes(psi)).expect("plain data")
}

/// Weak values keyed by outcome number; undefined outcomes are omitted.
pub fn weak_values_json(wv: &WeakValueSet) -> BTreeMap<u8, Pair> {
    wv.iter().map(|(k, z)| (k, pair(z))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionJson {
    pub verdict: &'static str,
    pub path: &'static str,
    pub det_scaled: Option<f64>,
    pub det_value: Option<f64>,
    pub e_estimate: f64,
    pub weak_values: BTreeMap<u8, Pair>,
}

impl From<&DetectionReport> for DetectionJson {
    fn from(r: &DetectionReport) -> Self {
        Self {
            verdict: r.verdict.as_str(),
            path: r.path.as_str(),
            det_scaled: r.det_scaled,
            det_value: r.det_value,
            e_estimate: r.e_estimate,
            weak_values: weak_values_json(&r.weak_values),
        }
    }
}
