//! Finite positive operator-valued measures on a labelled composite system.

use super::dims::SystemDims;
use super::herm::HermOp;
use super::linalg::{self, CMat};
use crate::tol::Tolerances;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Povm {
    dims: SystemDims,
    effects: Vec<CMat>,
}

impl Povm {
    pub fn new(dims: SystemDims, effects: Vec<CMat>) -> Result<Self> {
        Self::new_with_tol(dims, effects, &Tolerances::default())
    }

    pub fn new_with_tol(dims: SystemDims, effects: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::InvalidPovm("no effects".into()));
        }
        let d = dims.total();
        let mut sum = CMat::zeros(d, d);
        for (i, e) in effects.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} is {}x{}, expected {d}x{d}",
                    e.nrows(),
                    e.ncols()
                )));
            }
            let herm = linalg::herm_residual(e);
            if herm > tol.herm {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} is not Hermitian (residual {herm:.3e})"
                )));
            }
            let min = linalg::min_eig(e);
            if min < -tol.psd {
                return Err(Error::InvalidPovm(format!(
                    "effect {i} has eigenvalue {min:.3e}"
                )));
            }
            sum += e;
        }
        let resid = linalg::max_abs(&(&sum - linalg::identity(d)));
        if resid > tol.povm {
            return Err(Error::InvalidPovm(format!(
                "completeness residual {resid:.3e}"
            )));
        }
        Ok(Self { dims, effects })
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }

    pub fn effect(&self, i: usize) -> &CMat {
        &self.effects[i]
    }

    pub fn effect_op(&self, i: usize) -> HermOp {
        HermOp::unchecked(self.dims.clone(), self.effects[i].clone())
    }

    /// Max-abs deviation of the effect sum from the identity.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dims.total();
        let mut sum = CMat::zeros(d, d);
        for e in &self.effects {
            sum += e;
        }
        linalg::max_abs(&(&sum - linalg::identity(d)))
    }

    /// Permute the underlying factors of every effect.
    pub fn reorder(&self, order: &[&str]) -> Result<Povm> {
        let perm = self.dims.positions(order)?;
        let dims = self.dims.select(&perm);
        let raw_dims = self.dims.dims();
        let effects = self
            .effects
            .iter()
            .map(|e| linalg::reorder(e, &raw_dims, &perm))
            .collect();
        Ok(Povm { dims, effects })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Povm> {
        let pos = self.dims.position(from)?;
        Ok(Povm {
            dims: self.dims.relabelled(pos, to)?,
            effects: self.effects.clone(),
        })
    }
}
