//! JSON file formats.
//!
//! A complex matrix is a row-major nested array of `[re, im]` pairs:
//! `[[[1,0],[0,0]],[[0,0],[1,0]]]` is the 2×2 identity.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, DensityMatrix, PureState};

/// Serialized complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl TryFrom<&MatrixJson> for CMatrix {
    type Error = Error;

    fn try_from(j: &MatrixJson) -> Result<CMatrix> {
        let rows = j.0.len();
        let cols = j.0.first().map_or(0, Vec::len);
        if j.0.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged matrix rows"));
        }
        let m = CMatrix::from_fn(rows, cols, |r, k| c(j.0[r][k][0], j.0[r][k][1]));
        if !crate::linalg::is_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}

fn matrices(list: &[MatrixJson]) -> Result<Vec<CMatrix>> {
    list.iter().map(CMatrix::try_from).collect()
}

fn check_dims(dim: usize, ms: &[CMatrix]) -> Result<()> {
    for m in ms {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.nrows(),
            });
        }
    }
    Ok(())
}

/// `{ "dim": d, "effects": [matrix, ...] }`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmFile {
    pub dim: usize,
    pub effects: Vec<MatrixJson>,
}

impl PovmFile {
    pub fn from_effects(effects: &[CMatrix]) -> Self {
        PovmFile {
            dim: effects.first().map_or(0, CMatrix::nrows),
            effects: effects.iter().map(MatrixJson::from).collect(),
        }
    }

    /// Decoded effects, unvalidated beyond shape.
    pub fn effects(&self) -> Result<Vec<CMatrix>> {
        let ms = matrices(&self.effects)?;
        check_dims(self.dim, &ms)?;
        Ok(ms)
    }
}

/// `{ "d": d, "d_prime": d', "kind": "...", "projectors": [matrix, ...] }`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionFile {
    pub d: usize,
    pub d_prime: usize,
    pub kind: String,
    pub projectors: Vec<MatrixJson>,
}

impl ExtensionFile {
    pub fn projectors(&self) -> Result<Vec<CMatrix>> {
        let ms = matrices(&self.projectors)?;
        check_dims(self.d_prime, &ms)?;
        Ok(ms)
    }
}

/// `{ "dim": d, "kraus": [matrix, ...] }`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<MatrixJson>,
}

impl ChannelFile {
    pub fn from_kraus(kraus: &[CMatrix]) -> Self {
        ChannelFile {
            dim: kraus.first().map_or(0, CMatrix::ncols),
            kraus: kraus.iter().map(MatrixJson::from).collect(),
        }
    }

    pub fn kraus(&self) -> Result<Vec<CMatrix>> {
        let ms = matrices(&self.kraus)?;
        check_dims(self.dim, &ms)?;
        Ok(ms)
    }
}

/// A state is either `{ "matrix": m }`, `{ "amplitudes": [[re, im], ...] }`
/// or a bare matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Density { matrix: MatrixJson },
    Pure { amplitudes: Vec<[f64; 2]> },
    Bare(MatrixJson),
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        StateFile::Density {
            matrix: rho.matrix().into(),
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        StateFile::Pure {
            amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        match self {
            StateFile::Density { matrix } | StateFile::Bare(matrix) => {
                DensityMatrix::new(CMatrix::try_from(matrix)?)
            }
            StateFile::Pure { amplitudes } => {
                let v = CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|a| c(a[0], a[1])));
                Ok(PureState::new(v)?.density())
            }
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let file = File::create(path)?;
    serde_json::to_writer_pretty(BufWriter::new(file), value)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, pauli_y};

    #[test]
    fn matrix_round_trip() {
        let m = pauli_y();
        let j = MatrixJson::from(&m);
        assert_eq!(j.0[0][1], [0.0, -1.0]);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(text, "[[[0.0,0.0],[-0.0,-1.0]],[[0.0,1.0],[0.0,0.0]]]");
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(CMatrix::try_from(&back).unwrap(), m);
    }

    #[test]
    fn ragged_rejected() {
        let j: MatrixJson = serde_json::from_str("[[[1,0],[0,0]],[[0,0]]]").unwrap();
        assert!(CMatrix::try_from(&j).is_err());
    }

    #[test]
    fn state_forms() {
        let pure: StateFile = serde_json::from_str(r#"{"amplitudes": [[1,0],[0,0]]}"#).unwrap();
        let rho = pure.density().unwrap();
        assert_eq!(rho.matrix()[(0, 0)], c(1.0, 0.0));
        let bare: StateFile = serde_json::from_str("[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]").unwrap();
        assert_eq!(bare.density().unwrap().matrix(), &identity(2).scale(0.5));
        let wrapped: StateFile =
            serde_json::from_str(r#"{"matrix": [[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#).unwrap();
        assert!(wrapped.density().is_ok());
    }

    #[test]
    fn povm_file_dimension_checked() {
        let f = PovmFile {
            dim: 3,
            effects: vec![MatrixJson::from(&identity(2))],
        };
        assert!(f.effects().is_err());
    }
}
