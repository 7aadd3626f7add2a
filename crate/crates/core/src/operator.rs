//! Dense operator matrices acting on grid functions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, SampledField};

/// Where an [`OperatorMatrix`] came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Symbol { t: f64 },
    Amplitude,
    Kernel,
    FrameOperator,
    Conjugated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: DMatrix<Complex64>,
    pub domain: GridSpec,
    pub codomain: GridSpec,
    pub provenance: Provenance,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<Complex64>, domain: GridSpec, codomain: GridSpec, provenance: Provenance) -> Result<Self> {
        if entries.nrows() != codomain.len() || entries.ncols() != domain.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for grids of size {} -> {}",
                entries.nrows(),
                entries.ncols(),
                domain.len(),
                codomain.len()
            )));
        }
        if entries.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(OperatorMatrix { entries, domain, codomain, provenance })
    }

    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        if f.spec() != &self.domain {
            return Err(Error::GridMismatch("field grid differs from operator domain".into()));
        }
        let v = DVector::from_column_slice(f.values());
        let out = &self.entries * v;
        SampledField::new(self.codomain, out.as_slice().to_vec())
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self - other‖_F / ‖self‖_F`.
    pub fn relative_distance(&self, other: &OperatorMatrix) -> Result<f64> {
        if self.entries.shape() != other.entries.shape() {
            return Err(Error::ShapeMismatch("operator sizes differ".into()));
        }
        let diff: f64 = self.entries.iter().zip(other.entries.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let base = self.frobenius();
        Ok(if base == 0.0 { diff } else { diff / base })
    }
}
