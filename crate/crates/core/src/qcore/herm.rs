//! Labelled Hermitian operators, density operators, and pure states.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dims::SystemDims;
use super::linalg::{self, CMat, CVec};
use crate::tol::Tolerances;
use crate::{Error, Result};

/// Hermitian operator on a labelled tensor-product space.
#[derive(Debug, Clone)]
pub struct HermOp {
    dims: SystemDims,
    mat: CMat,
}

impl HermOp {
    pub fn new(dims: SystemDims, mat: CMat) -> Result<Self> {
        Self::new_with_tol(dims, mat, &Tolerances::default())
    }

    pub fn new_with_tol(dims: SystemDims, mat: CMat, tol: &Tolerances) -> Result<Self> {
        let total = dims.total();
        if mat.nrows() != total || mat.ncols() != total {
            return Err(Error::DimMismatch(format!(
                "matrix is {}x{}, dims {} give total {}",
                mat.nrows(),
                mat.ncols(),
                dims,
                total
            )));
        }
        let resid = linalg::herm_residual(&mat);
        if resid > tol.herm {
            return Err(Error::NotHermitian(resid));
        }
        Ok(Self { dims, mat })
    }

    /// Construction from values already known to be Hermitian (results of
    /// conjugations, sums of Hermitian terms, ...). Checked in debug builds.
    pub(crate) fn unchecked(dims: SystemDims, mat: CMat) -> Self {
        debug_assert!(linalg::herm_residual(&mat) < 1e-7);
        Self { dims, mat }
    }

    pub fn identity(dims: SystemDims) -> Self {
        let d = dims.total();
        Self {
            dims,
            mat: linalg::identity(d),
        }
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.mat).re
    }

    /// Kronecker product with concatenated labels.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dims = self.dims.join(&other.dims)?;
        Ok(Self {
            dims,
            mat: linalg::kron(&self.mat, &other.mat),
        })
    }

    /// Trace over the named factors; remaining labels keep their order.
    pub fn partial_trace(&self, over: &[&str]) -> Result<Self> {
        let traced = self.dims.positions(over)?;
        let keep: Vec<usize> = (0..self.dims.len()).filter(|p| !traced.contains(p)).collect();
        let mat = linalg::partial_trace(&self.mat, &self.dims.dims(), &keep);
        Ok(Self {
            dims: self.dims.select(&keep),
            mat,
        })
    }

    /// Transpose the named factors in the canonical basis.
    pub fn partial_transpose(&self, which: &[&str]) -> Result<Self> {
        let pos = self.dims.positions(which)?;
        let mat = linalg::partial_transpose(&self.mat, &self.dims.dims(), &pos);
        Ok(Self {
            dims: self.dims.clone(),
            mat,
        })
    }

    /// Permute factors into the given label order.
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.dims.len() {
            return Err(Error::DimMismatch(format!(
                "reorder lists {} labels, operator has {}",
                order.len(),
                self.dims.len()
            )));
        }
        let perm = self.dims.positions(order)?;
        let mat = linalg::reorder(&self.mat, &self.dims.dims(), &perm);
        Ok(Self {
            dims: self.dims.select(&perm),
            mat,
        })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let pos = self.dims.position(from)?;
        Ok(Self {
            dims: self.dims.relabelled(pos, to)?,
            mat: self.mat.clone(),
        })
    }

    /// Real spectrum sorted descending plus orthonormal eigenvectors
    /// (columns, deterministic phase convention).
    pub fn eig(&self) -> (Vec<f64>, CMat) {
        linalg::eigh(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eig(&self.mat)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        linalg::max_eig(&self.mat)
    }

    pub fn expectation(&self, psi: &PureState) -> f64 {
        (psi.vector().adjoint() * &self.mat * psi.vector())[(0, 0)].re
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            mat: &self.mat - &other.mat,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            mat: self.mat.scale(s),
        }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(format!(
                "operators live on {} and {}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

/// Density operator: Hermitian, positive semidefinite, unit trace.
///
/// Eigenvalues in `[-tol.psd, 0)` are treated as round-off: they are clamped
/// to zero and the trace renormalized. Anything more negative is rejected.
#[derive(Debug, Clone)]
pub struct DensityOp {
    op: HermOp,
}

impl DensityOp {
    pub fn new(dims: SystemDims, mat: CMat) -> Result<Self> {
        Self::new_with_tol(dims, mat, &Tolerances::default())
    }

    pub fn new_with_tol(dims: SystemDims, mat: CMat, tol: &Tolerances) -> Result<Self> {
        let op = HermOp::new_with_tol(dims, mat, tol)?;
        Self::from_herm_with_tol(op, tol)
    }

    pub fn from_herm(op: HermOp) -> Result<Self> {
        Self::from_herm_with_tol(op, &Tolerances::default())
    }

    pub fn from_herm_with_tol(op: HermOp, tol: &Tolerances) -> Result<Self> {
        let tr = linalg::trace(&op.mat).re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::BadTrace {
                got: tr,
                expected: 1.0,
            });
        }
        let min = linalg::min_eig(&op.mat);
        if min < -tol.psd {
            return Err(Error::NotPsd(min));
        }
        let op = if min < 0.0 {
            let clamped = linalg::psd_project(&op.mat);
            let new_tr = linalg::trace(&clamped).re;
            HermOp::unchecked(op.dims, clamped.scale(1.0 / new_tr))
        } else {
            op
        };
        Ok(Self { op })
    }

    pub fn herm(&self) -> &HermOp {
        &self.op
    }

    pub fn dims(&self) -> &SystemDims {
        self.op.dims()
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(self.matrix(), self.matrix()).re
    }

    /// Reduced state on the named factors (their original order).
    pub fn marginal(&self, keep: &[&str]) -> Result<DensityOp> {
        let over: Vec<&str> = self
            .dims()
            .labels()
            .filter(|l| !keep.contains(l))
            .collect();
        let op = self.op.partial_trace(&over)?;
        Ok(DensityOp { op })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self {
            op: self.op.relabel(from, to)?,
        })
    }

    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        Ok(Self {
            op: self.op.reorder(order)?,
        })
    }
}

/// Normalized state vector on a labelled space.
#[derive(Debug, Clone)]
pub struct PureState {
    dims: SystemDims,
    vec: CVec,
}

impl PureState {
    pub fn new(dims: SystemDims, vec: CVec) -> Result<Self> {
        Self::new_with_tol(dims, vec, &Tolerances::default())
    }

    pub fn new_with_tol(dims: SystemDims, vec: CVec, tol: &Tolerances) -> Result<Self> {
        if vec.len() != dims.total() {
            return Err(Error::DimMismatch(format!(
                "vector has length {}, dims {} give total {}",
                vec.len(),
                dims,
                dims.total()
            )));
        }
        let norm = vec.norm();
        if (norm - 1.0).abs() > tol.trace {
            return Err(Error::BadNorm(norm));
        }
        Ok(Self { dims, vec })
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn vector(&self) -> &CVec {
        &self.vec
    }

    pub fn density(&self) -> DensityOp {
        let mat = &self.vec * self.vec.adjoint();
        DensityOp {
            op: HermOp::unchecked(self.dims.clone(), mat),
        }
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let pos = self.dims.position(from)?;
        Ok(Self {
            dims: self.dims.relabelled(pos, to)?,
            vec: self.vec.clone(),
        })
    }

    /// Schmidt decomposition across the bipartition whose left side is the
    /// named label set (order of appearance). Directions with squared
    /// coefficient below `tol.schmidt` are dropped from the reported rank.
    pub fn schmidt(&self, left: &[&str]) -> Result<Schmidt> {
        let tol = Tolerances::default();
        let left_pos = self.dims.positions(left)?;
        if left_pos.is_empty() || left_pos.len() == self.dims.len() {
            return Err(Error::InvalidArgument(
                "Schmidt cut must leave factors on both sides".into(),
            ));
        }
        let right_pos: Vec<usize> = (0..self.dims.len())
            .filter(|p| !left_pos.contains(p))
            .collect();
        let all = self.dims.dims();
        let dl: usize = left_pos.iter().map(|&p| all[p]).product();
        let dr: usize = right_pos.iter().map(|&p| all[p]).product();

        // reorder amplitudes to (left..., right...)
        let perm: Vec<usize> = left_pos.iter().chain(right_pos.iter()).copied().collect();
        let st = linalg::strides(&all);
        let new_dims: Vec<usize> = perm.iter().map(|&p| all[p]).collect();
        let new_st = linalg::strides(&new_dims);
        let mut m = DMatrix::<Complex64>::zeros(dl, dr);
        for idx in 0..self.vec.len() {
            let mut old = 0usize;
            for (k, &p) in perm.iter().enumerate() {
                old += (idx / new_st[k] % new_dims[k]) * st[p];
            }
            m[(idx / dr, idx % dr)] = self.vec[old];
        }

        // eigen-route: the left reduced state M M† has eigenpairs
        // (s_k^2, l_k); the right vectors follow as conj(M† l_k)/s_k
        let gram = &m * m.adjoint();
        let (weights, lvecs) = linalg::eigh(&gram);
        let mut coeffs = Vec::new();
        let mut left_basis = Vec::new();
        let mut right_basis = Vec::new();
        for (k, &w) in weights.iter().enumerate() {
            if w > tol.schmidt {
                let s = w.sqrt();
                let l: CVec = lvecs.column(k).into();
                let r = (m.adjoint() * &l).map(|z| z.conj() / Complex64::from(s));
                coeffs.push(s);
                left_basis.push(l);
                right_basis.push(r);
            }
        }
        Ok(Schmidt {
            rank: coeffs.len(),
            coefficients: coeffs,
            left: left_basis,
            right: right_basis,
        })
    }
}

/// Result of [`PureState::schmidt`]: `|phi> = sum_k c_k |left_k>|right_k>`
/// with `c_k` sorted descending.
#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Schmidt coefficients (square roots of the reduced-state spectrum).
    pub coefficients: Vec<f64>,
    pub left: Vec<CVec>,
    pub right: Vec<CVec>,
    pub rank: usize,
}

impl Schmidt {
    /// Squared coefficients, i.e. the reduced-state eigenvalues.
    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }
}

/// `|Phi+> = d^(-1/2) sum_i |i>|i>` with labels `A`, `B`.
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d < 1 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let dims = SystemDims::new([("A", d), ("B", d)])?;
    let mut v = CVec::zeros(d * d);
    let amp = Complex64::from(1.0 / (d as f64).sqrt());
    for i in 0..d {
        v[i * d + i] = amp;
    }
    PureState::new(dims, v)
}

/// Swap operator `F|ij> = |ji>` on two `d`-dimensional factors `A`, `B`.
pub fn swap_operator(d: usize) -> Result<HermOp> {
    if d < 1 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let dims = SystemDims::new([("A", d), ("B", d)])?;
    let mut m = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = Complex64::from(1.0);
        }
    }
    HermOp::new(dims, m)
}
