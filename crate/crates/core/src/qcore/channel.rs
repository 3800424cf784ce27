//! Completely positive trace-preserving maps with declared input/output
//! systems, stored as a Kraus list, a Choi matrix, or both.
//!
//! The Choi matrix lives on `in ⊗ out` and is unnormalized: its trace equals
//! the input dimension and its partial trace over the output is the input
//! identity.

use num_complex::Complex64;

use super::dims::SystemDims;
use super::herm::HermOp;
use super::linalg::{self, CMat, CVec};
use crate::tol::Tolerances;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Channel {
    in_dims: SystemDims,
    out_dims: SystemDims,
    kraus: Option<Vec<CMat>>,
    choi: Option<CMat>,
}

impl Channel {
    pub fn from_kraus(in_dims: SystemDims, out_dims: SystemDims, kraus: Vec<CMat>) -> Result<Self> {
        Self::from_kraus_with_tol(in_dims, out_dims, kraus, &Tolerances::default())
    }

    pub fn from_kraus_with_tol(
        in_dims: SystemDims,
        out_dims: SystemDims,
        kraus: Vec<CMat>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let din = in_dims.total();
        let dout = out_dims.total();
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus list".into()));
        }
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    dout,
                    din
                )));
            }
        }
        let mut sum = CMat::zeros(din, din);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let resid = linalg::max_abs(&(&sum - linalg::identity(din)));
        if resid > tol.cptp {
            return Err(Error::InvalidChannel(format!(
                "Kraus completeness residual {resid:.3e}"
            )));
        }
        Ok(Self {
            in_dims,
            out_dims,
            kraus: Some(kraus),
            choi: None,
        })
    }

    pub fn from_choi(in_dims: SystemDims, out_dims: SystemDims, choi: CMat) -> Result<Self> {
        Self::from_choi_with_tol(in_dims, out_dims, choi, &Tolerances::default())
    }

    pub fn from_choi_with_tol(
        in_dims: SystemDims,
        out_dims: SystemDims,
        choi: CMat,
        tol: &Tolerances,
    ) -> Result<Self> {
        let din = in_dims.total();
        let dout = out_dims.total();
        if choi.nrows() != din * dout {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is {}x{}, expected {}",
                choi.nrows(),
                choi.ncols(),
                din * dout
            )));
        }
        let herm = linalg::herm_residual(&choi);
        if herm > tol.herm {
            return Err(Error::NotHermitian(herm));
        }
        let min = linalg::min_eig(&choi);
        if min < -tol.psd {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix has eigenvalue {min:.3e}"
            )));
        }
        let marg = linalg::partial_trace(&choi, &[din, dout], &[0]);
        let resid = linalg::max_abs(&(&marg - linalg::identity(din)));
        if resid > tol.cptp {
            return Err(Error::InvalidChannel(format!(
                "Choi output-marginal residual {resid:.3e}"
            )));
        }
        Ok(Self {
            in_dims,
            out_dims,
            kraus: None,
            choi: Some(choi),
        })
    }

    /// Attach the other representation, checking the two agree.
    pub fn with_both(mut self, tol: &Tolerances) -> Result<Self> {
        match (&self.kraus, &self.choi) {
            (Some(_), None) => {
                self.choi = Some(self.choi_matrix());
            }
            (None, Some(choi)) => {
                let kraus = kraus_from_choi(choi, self.in_total(), self.out_total(), tol)?;
                self.kraus = Some(kraus);
            }
            _ => {}
        }
        let resid = self.representation_residual();
        if resid > tol.cptp {
            return Err(Error::InvalidChannel(format!(
                "Kraus and Choi representations disagree (residual {resid:.3e})"
            )));
        }
        Ok(self)
    }

    /// Max-abs difference between the stored Choi matrix and the one
    /// recomputed from the Kraus list (zero when only one is present).
    pub fn representation_residual(&self) -> f64 {
        match (&self.kraus, &self.choi) {
            (Some(_), Some(choi)) => {
                let from_kraus = self.choi_from_kraus_raw();
                linalg::max_abs(&(&from_kraus - choi))
            }
            _ => 0.0,
        }
    }

    pub fn in_dims(&self) -> &SystemDims {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &SystemDims {
        &self.out_dims
    }

    pub fn in_total(&self) -> usize {
        self.in_dims.total()
    }

    pub fn out_total(&self) -> usize {
        self.out_dims.total()
    }

    pub fn kraus(&self) -> Option<&[CMat]> {
        self.kraus.as_deref()
    }

    fn choi_from_kraus_raw(&self) -> CMat {
        let kraus = self.kraus.as_ref().expect("kraus present");
        let din = self.in_total();
        let dout = self.out_total();
        let mut j = CMat::zeros(din * dout, din * dout);
        for k in kraus {
            let mut v = CVec::zeros(din * dout);
            for i in 0..din {
                for o in 0..dout {
                    v[i * dout + o] = k[(o, i)];
                }
            }
            j += &v * v.adjoint();
        }
        j
    }

    /// Unnormalized Choi matrix on `in ⊗ out` (trace = input dimension).
    pub fn choi_matrix(&self) -> CMat {
        match &self.choi {
            Some(c) => c.clone(),
            None => self.choi_from_kraus_raw(),
        }
    }

    /// Choi matrix as a labelled operator on `in ⊗ out`.
    pub fn choi(&self) -> Result<HermOp> {
        let dims = self.in_dims.join(&self.out_dims)?;
        HermOp::new(dims, self.choi_matrix())
    }

    /// Action on a matrix over the channel's own input space.
    pub fn apply_raw(&self, x: &CMat) -> CMat {
        if let Some(kraus) = &self.kraus {
            let dout = self.out_total();
            let mut out = CMat::zeros(dout, dout);
            for k in kraus {
                out += k * x * k.adjoint();
            }
            out
        } else {
            let choi = self.choi.as_ref().expect("some representation present");
            let din = self.in_total();
            let dout = self.out_total();
            // E(x) = tr_in[(x^T ⊗ I_out) J]
            let xt = x.transpose();
            let lifted = linalg::kron(&xt, &linalg::identity(dout));
            linalg::partial_trace(&(lifted * choi), &[din, dout], &[1])
        }
    }

    /// `id ⊗ E` on the factor named `target`; the output factors take the
    /// channel's labels and the target's position.
    pub fn apply(&self, x: &HermOp, target: &str) -> Result<HermOp> {
        self.apply_impl(x, target, false)
    }

    /// Same contraction routed through the Choi matrix, regardless of which
    /// representation is stored. Used to cross-check `apply`.
    pub fn apply_via_choi(&self, x: &HermOp, target: &str) -> Result<HermOp> {
        self.apply_impl(x, target, true)
    }

    fn apply_impl(&self, x: &HermOp, target: &str, force_choi: bool) -> Result<HermOp> {
        let pos = x.dims().position(target)?;
        let din = self.in_total();
        if x.dims().dims()[pos] != din {
            return Err(Error::DimMismatch(format!(
                "target `{target}` has dimension {}, channel expects {din}",
                x.dims().dims()[pos]
            )));
        }
        for l in self.out_dims.labels() {
            if x.dims().contains(l) && l != target {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
        }

        let dims = x.dims().dims();
        let n = dims.len();
        let others: Vec<usize> = (0..n).filter(|&p| p != pos).collect();
        let rest_dim: usize = others.iter().map(|&p| dims[p]).product();
        // move target to the end
        let perm: Vec<usize> = others.iter().copied().chain([pos]).collect();
        let moved = linalg::reorder(x.matrix(), &dims, &perm);

        let dout = self.out_total();
        let out_mat = if force_choi || self.kraus.is_none() {
            // tr_target[(x^{T_target} ⊗ I_out)(I_rest ⊗ J)]
            let choi = self.choi_matrix();
            let full = [rest_dim, din, dout];
            let xt = linalg::partial_transpose(&moved, &[rest_dim, din], &[1]);
            let lifted = linalg::promote(&xt, &[rest_dim, din], &[0, 1], &full);
            let j = linalg::promote(&choi, &[din, dout], &[1, 2], &full);
            linalg::partial_trace(&(lifted * j), &full, &[0, 2])
        } else {
            let kraus = self.kraus.as_ref().unwrap();
            let mut acc = CMat::zeros(rest_dim * dout, rest_dim * dout);
            let id_rest = linalg::identity(rest_dim);
            for k in kraus {
                let big = linalg::kron(&id_rest, k);
                acc += &big * &moved * big.adjoint();
            }
            acc
        };

        // labels: x's factors with `target` replaced by the channel outputs,
        // in the target's original slot
        let mut factors: Vec<(String, usize)> = Vec::new();
        for (p, _) in dims.iter().enumerate() {
            if p == pos {
                for i in 0..self.out_dims.len() {
                    let (l, d) = self.out_dims.factor(i);
                    factors.push((l.to_string(), d));
                }
            } else {
                let (l, d) = x.dims().factor(p);
                factors.push((l.to_string(), d));
            }
        }
        let final_dims = SystemDims::new(factors)?;

        // current factor order: (others..., out...); permute into final order
        let mut current: Vec<(String, usize)> = others
            .iter()
            .map(|&p| {
                let (l, d) = x.dims().factor(p);
                (l.to_string(), d)
            })
            .collect();
        for i in 0..self.out_dims.len() {
            let (l, d) = self.out_dims.factor(i);
            current.push((l.to_string(), d));
        }
        let cur_dims: Vec<usize> = current.iter().map(|&(_, d)| d).collect();
        let perm_back: Vec<usize> = final_dims
            .labels()
            .map(|want| current.iter().position(|(l, _)| l == want).unwrap())
            .collect();
        let reordered = linalg::reorder(&out_mat, &cur_dims, &perm_back);
        Ok(HermOp::unchecked(final_dims, reordered))
    }

    /// Post-compose with a unitary on the output space.
    pub fn then_unitary(&self, u: &CMat) -> Result<Channel> {
        let dout = self.out_total();
        if u.nrows() != dout || u.ncols() != dout {
            return Err(Error::DimMismatch(format!(
                "unitary is {}x{}, output dimension is {dout}",
                u.nrows(),
                u.ncols()
            )));
        }
        let kraus = match &self.kraus {
            Some(ks) => ks.clone(),
            None => kraus_from_choi(
                self.choi.as_ref().unwrap(),
                self.in_total(),
                dout,
                &Tolerances::default(),
            )?,
        };
        Channel::from_kraus(
            self.in_dims.clone(),
            self.out_dims.clone(),
            kraus.into_iter().map(|k| u * k).collect(),
        )
    }

    pub fn identity(d: usize, in_label: &str, out_label: &str) -> Result<Channel> {
        Channel::from_kraus(
            SystemDims::single(in_label, d)?,
            SystemDims::single(out_label, d)?,
            vec![linalg::identity(d)],
        )
    }

    pub fn unitary(u: CMat, in_label: &str, out_label: &str) -> Result<Channel> {
        let d = u.nrows();
        let resid = linalg::max_abs(&(u.adjoint() * &u - linalg::identity(d)));
        if resid > 1e-9 {
            return Err(Error::InvalidChannel(format!(
                "matrix is not unitary (residual {resid:.3e})"
            )));
        }
        Channel::from_kraus(
            SystemDims::single(in_label, d)?,
            SystemDims::single(out_label, d)?,
            vec![u],
        )
    }

    /// `D(X) = tr[X] |v><v|`.
    pub fn prepare(din: usize, state: &CVec, in_label: &str, out_label: &str) -> Result<Channel> {
        let dout = state.len();
        if (state.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::BadNorm(state.norm()));
        }
        let mut kraus = Vec::with_capacity(din);
        for j in 0..din {
            let mut k = CMat::zeros(dout, din);
            for o in 0..dout {
                k[(o, j)] = state[o];
            }
            kraus.push(k);
        }
        Channel::from_kraus(
            SystemDims::single(in_label, din)?,
            SystemDims::single(out_label, dout)?,
            kraus,
        )
    }

    /// Prepares the computational basis state `|i>` of dimension `dout`.
    pub fn prepare_basis(
        din: usize,
        dout: usize,
        i: usize,
        in_label: &str,
        out_label: &str,
    ) -> Result<Channel> {
        let mut v = CVec::zeros(dout);
        v[i] = Complex64::from(1.0);
        Channel::prepare(din, &v, in_label, out_label)
    }

    /// `X -> tr[X] I/dout`.
    pub fn depolarizing(din: usize, dout: usize, in_label: &str, out_label: &str) -> Result<Channel> {
        let mut kraus = Vec::with_capacity(din * dout);
        let amp = Complex64::from(1.0 / (dout as f64).sqrt());
        for j in 0..din {
            for o in 0..dout {
                let mut k = CMat::zeros(dout, din);
                k[(o, j)] = amp;
                kraus.push(k);
            }
        }
        Channel::from_kraus(
            SystemDims::single(in_label, din)?,
            SystemDims::single(out_label, dout)?,
            kraus,
        )
    }

    /// Measures in the computational basis and reprepares the outcome.
    pub fn measure_prepare(d: usize, in_label: &str, out_label: &str) -> Result<Channel> {
        let mut kraus = Vec::with_capacity(d);
        for i in 0..d {
            let mut k = CMat::zeros(d, d);
            k[(i, i)] = Complex64::from(1.0);
            kraus.push(k);
        }
        Channel::from_kraus(
            SystemDims::single(in_label, d)?,
            SystemDims::single(out_label, d)?,
            kraus,
        )
    }
}

/// Kraus operators from an unnormalized Choi matrix on `in ⊗ out`.
pub fn kraus_from_choi(choi: &CMat, din: usize, dout: usize, tol: &Tolerances) -> Result<Vec<CMat>> {
    let (vals, vecs) = linalg::eigh(choi);
    let mut kraus = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        if v < -tol.psd {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix has eigenvalue {v:.3e}"
            )));
        }
        if v <= 0.0 {
            continue;
        }
        let s = v.sqrt();
        let col = vecs.column(k);
        let mut km = CMat::zeros(dout, din);
        for i in 0..din {
            for o in 0..dout {
                km[(o, i)] = Complex64::from(s) * col[i * dout + o];
            }
        }
        kraus.push(km);
    }
    if kraus.is_empty() {
        return Err(Error::InvalidChannel("Choi matrix is zero".into()));
    }
    Ok(kraus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::herm::{max_entangled, DensityOp};
    use crate::qcore::linalg::c;

    #[test]
    fn identity_channel_leaves_states_alone() {
        let mut rng = crate::random::rng_from_seed(1);
        let dims = SystemDims::new([("A", 2usize), ("B", 3usize)]).unwrap();
        let rho = crate::random::random_density(&dims, &mut rng).unwrap();
        let ch = Channel::identity(3, "B", "C").unwrap();
        let out = ch.apply(rho.herm(), "B").unwrap();
        assert!(linalg::frob_norm(&(out.matrix() - rho.matrix())) < 1e-13);
        assert_eq!(out.dims().labels().collect::<Vec<_>>(), vec!["A", "C"]);
    }

    #[test]
    fn choi_of_identity_is_unnormalized_max_entangled() {
        let ch = Channel::identity(3, "B", "C").unwrap();
        let j = ch.choi_matrix();
        let phi = max_entangled(3).unwrap().density();
        assert!(linalg::frob_norm(&(&j - phi.matrix().scale(3.0))) < 1e-12);
        assert!((linalg::trace(&j).re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn kraus_and_choi_paths_agree_on_random_inputs() {
        let mut rng = crate::random::rng_from_seed(42);
        for _ in 0..10 {
            let ch = crate::random::random_channel(3, 2, "B", "C", &mut rng).unwrap();
            let dims = SystemDims::new([("A", 2usize), ("B", 3usize)]).unwrap();
            let rho = crate::random::random_density(&dims, &mut rng).unwrap();
            let via_kraus = ch.apply(rho.herm(), "B").unwrap();
            let via_choi = ch.apply_via_choi(rho.herm(), "B").unwrap();
            let diff = linalg::frob_norm(&(via_kraus.matrix() - via_choi.matrix()));
            assert!(diff < 1e-9, "paths differ by {diff}");
            // trace preserved
            assert!((via_kraus.trace() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn apply_respects_factor_position() {
        // channel applied to the FIRST factor must leave the second alone
        let mut rng = crate::random::rng_from_seed(9);
        let a = crate::random::random_density(&SystemDims::new([("A", 2usize)]).unwrap(), &mut rng)
            .unwrap();
        let b = crate::random::random_density(&SystemDims::new([("B", 3usize)]).unwrap(), &mut rng)
            .unwrap();
        let joint = a.herm().tensor(b.herm()).unwrap();
        let ch = crate::random::random_channel(2, 2, "A", "C", &mut rng).unwrap();
        let out = ch.apply(&joint, "A").unwrap();
        assert_eq!(out.dims().labels().collect::<Vec<_>>(), vec!["C", "B"]);
        let out_b = out.partial_trace(&["C"]).unwrap();
        assert!(linalg::frob_norm(&(out_b.matrix() - b.matrix())) < 1e-10);
        let out_c = out.partial_trace(&["B"]).unwrap();
        let direct = ch.apply_raw(a.matrix());
        assert!(linalg::frob_norm(&(out_c.matrix() - &direct)) < 1e-10);
    }

    #[test]
    fn choi_roundtrip_through_kraus() {
        let mut rng = crate::random::rng_from_seed(7);
        let ch = crate::random::random_channel(2, 3, "B", "C", &mut rng).unwrap();
        let j = ch.choi_matrix();
        let rebuilt = Channel::from_choi(
            SystemDims::single("B", 2).unwrap(),
            SystemDims::single("C", 3).unwrap(),
            j.clone(),
        )
        .unwrap()
        .with_both(&Tolerances::default())
        .unwrap();
        let dims = SystemDims::new([("X", 2usize), ("B", 2usize)]).unwrap();
        let rho = crate::random::random_density(&dims, &mut rng).unwrap();
        let a = ch.apply(rho.herm(), "B").unwrap();
        let b = rebuilt.apply(rho.herm(), "B").unwrap();
        assert!(linalg::frob_norm(&(a.matrix() - b.matrix())) < 1e-9);
    }

    #[test]
    fn prepare_channel_discards_input() {
        let v = CVec::from_row_slice(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let ch = Channel::prepare(3, &v, "B", "C").unwrap();
        let mut rng = crate::random::rng_from_seed(2);
        let rho = crate::random::random_density(&SystemDims::single("B", 3).unwrap(), &mut rng)
            .unwrap();
        let out = ch.apply_raw(rho.matrix());
        assert!((out[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(out[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn depolarizing_outputs_maximally_mixed() {
        let ch = Channel::depolarizing(3, 2, "B", "C").unwrap();
        let mut rng = crate::random::rng_from_seed(4);
        let rho = crate::random::random_density(&SystemDims::single("B", 3).unwrap(), &mut rng)
            .unwrap();
        let out = ch.apply_raw(rho.matrix());
        assert!(linalg::frob_norm(&(&out - linalg::identity(2).scale(0.5))) < 1e-12);
    }

    #[test]
    fn bad_kraus_rejected() {
        let k = CMat::zeros(2, 2);
        let r = Channel::from_kraus(
            SystemDims::single("B", 2).unwrap(),
            SystemDims::single("C", 2).unwrap(),
            vec![k],
        );
        assert!(r.is_err());
    }

    #[test]
    fn density_from_channel_output_is_valid() {
        let mut rng = crate::random::rng_from_seed(31);
        let dims = SystemDims::new([("A", 3usize), ("B", 3usize)]).unwrap();
        let rho = crate::random::random_density(&dims, &mut rng).unwrap();
        let ch = crate::random::random_channel(3, 2, "B", "C", &mut rng).unwrap();
        let out = ch.apply(rho.herm(), "B").unwrap();
        assert!(DensityOp::from_herm(out).is_ok());
    }
}
