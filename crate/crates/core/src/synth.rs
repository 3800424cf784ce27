//! Constructive protocols that beat the classical fidelity: given a
//! reduction-criterion witness for a locally processed resource state, build
//! the complete `|C| + r` outcome measurement and decoder set whose fidelity
//! exceeds `1/|C|` by exactly `margin/|C|^2`.
//!
//! The effect formulas reference the witness's Schmidt bases on both sides,
//! so both bases are extended to full orthonormal bases (Gram-Schmidt
//! against the standard basis) and every operator is written in them.

use num_complex::Complex64;

use crate::qcore::linalg::{self, CMat, CVec};
use crate::qcore::{Channel, DensityOp, Povm, PureState, SystemDims};
use crate::teleport::TeleportProtocol;
use crate::tol::TOL_MARGIN;
use crate::{Error, Result};

/// Validated input for the constructive build.
#[derive(Debug, Clone)]
pub struct SynthesisInput {
    rho_ab: DensityOp,
    channel: Channel,
    witness: PureState,
    dim_c: usize,
    omega: DensityOp,
    margin: f64,
    weights: Vec<f64>,
    a_basis: Vec<CVec>,
    c_basis: Vec<CVec>,
    rank: usize,
}

impl SynthesisInput {
    /// Checks the strict witness inequality
    /// `<phi| (id ⊗ E)(rho) |phi> > <phi| rho_A ⊗ I |phi>` (margin above
    /// [`TOL_MARGIN`]) and a witness Schmidt rank of at least 2, then
    /// precomputes the aligned bases.
    pub fn new(
        rho_ab: DensityOp,
        channel: Channel,
        witness: PureState,
        dim_c: usize,
    ) -> Result<Self> {
        if rho_ab.dims().len() != 2 {
            return Err(Error::InvalidArgument(
                "resource state must be bipartite".into(),
            ));
        }
        let (label_a, dim_a) = rho_ab.dims().factor(0);
        let (label_b, dim_b) = rho_ab.dims().factor(1);
        let label_a = label_a.to_string();
        let label_b = label_b.to_string();
        if channel.in_total() != dim_b || channel.out_total() != dim_c {
            return Err(Error::DimMismatch(format!(
                "channel maps {} -> {}, resource/witness need {} -> {}",
                channel.in_total(),
                channel.out_total(),
                dim_b,
                dim_c
            )));
        }
        if witness.dims().len() != 2 {
            return Err(Error::InvalidArgument("witness must be bipartite".into()));
        }
        let (wl, wa) = witness.dims().factor(0);
        let (_, wc) = witness.dims().factor(1);
        let witness_left = wl.to_string();
        if wa != dim_a || wc != dim_c {
            return Err(Error::DimMismatch(format!(
                "witness lives on ({wa}, {wc}), expected ({dim_a}, {dim_c})"
            )));
        }

        let omega = DensityOp::from_herm(channel.apply(rho_ab.herm(), &label_b)?)?;
        let rho_a = rho_ab.marginal(&[label_a.as_str()])?;
        let lifted = linalg::kron(rho_a.matrix(), &linalg::identity(dim_c));
        let lhs = omega.herm().expectation(&witness_prob_space(&witness, omega.dims())?);
        let rhs_vec = witness.vector();
        let rhs = (rhs_vec.adjoint() * &lifted * rhs_vec)[(0, 0)].re;
        let margin = lhs - rhs;
        if margin <= TOL_MARGIN {
            return Err(Error::SynthesisPrecondition(format!(
                "witness margin {margin:.3e} below {TOL_MARGIN:.0e}"
            )));
        }

        let schmidt = witness.schmidt(&[witness_left.as_str()])?;
        let rank = schmidt.rank;
        if rank < 2 {
            return Err(Error::SynthesisPrecondition(
                "witness has Schmidt rank 1; product vectors cannot witness a violation".into(),
            ));
        }
        if rank > dim_c {
            return Err(Error::SynthesisPrecondition(format!(
                "witness Schmidt rank {rank} exceeds |C| = {dim_c}"
            )));
        }
        let a_basis = extend_basis(&schmidt.left, dim_a)?;
        let c_basis = extend_basis(&schmidt.right, dim_c)?;

        Ok(Self {
            rho_ab,
            channel,
            witness,
            dim_c,
            omega,
            margin,
            weights: schmidt.weights(),
            a_basis,
            c_basis,
            rank,
        })
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn omega(&self) -> &DensityOp {
        &self.omega
    }

    pub fn witness(&self) -> &PureState {
        &self.witness
    }

    fn dim_a(&self) -> usize {
        self.rho_ab.dims().factor(0).1
    }
}

/// The witness re-labelled onto the space of the processed state, so
/// expectation values can be taken directly.
fn witness_prob_space(witness: &PureState, dims: &SystemDims) -> Result<PureState> {
    PureState::new(dims.clone(), witness.vector().clone())
}

/// Extend `r` orthonormal vectors to a full orthonormal basis of dimension
/// `d` by Gram-Schmidt over the standard basis.
fn extend_basis(vs: &[CVec], d: usize) -> Result<Vec<CVec>> {
    let mut basis: Vec<CVec> = vs.to_vec();
    for (i, v) in basis.iter().enumerate() {
        if (v.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "basis vector {i} is not normalized"
            )));
        }
        for w in &basis[..i] {
            if (w.adjoint() * v)[(0, 0)].norm() > 1e-8 {
                return Err(Error::InvalidArgument(format!(
                    "basis vectors are not orthogonal (pair ending at {i})"
                )));
            }
        }
    }
    let mut j = 0usize;
    while basis.len() < d {
        if j >= d {
            return Err(Error::InvalidArgument(
                "failed to extend basis; input vectors are degenerate".into(),
            ));
        }
        let mut w = CVec::zeros(d);
        w[j] = Complex64::from(1.0);
        // two passes of orthogonalization for numerical stability
        for _ in 0..2 {
            for b in &basis {
                let overlap = (b.adjoint() * &w)[(0, 0)];
                w -= b * overlap;
            }
        }
        let norm = w.norm();
        if norm > 1e-7 {
            basis.push(w / Complex64::from(norm));
        }
        j += 1;
    }
    Ok(basis)
}

/// Diagonal phase unitary `U(n) = sum_k w^{kn} |b_k><b_k|` over the given
/// orthonormal vectors (`w = exp(2 pi i / r)`), identity on the orthogonal
/// complement. Returned as a unitary channel on the ambient space.
pub fn mub_unitary(n: usize, r: usize, basis: &[CVec]) -> Result<Channel> {
    if n >= r {
        return Err(Error::InvalidArgument(format!("n = {n} out of range 0..{r}")));
    }
    if basis.len() < r {
        return Err(Error::InvalidArgument(format!(
            "need {r} basis vectors, got {}",
            basis.len()
        )));
    }
    let d = basis[0].len();
    let u = phase_unitary(n, r, basis, d)?;
    Channel::unitary(u, "C", "C")
}

fn phase_unitary(n: usize, r: usize, basis: &[CVec], d: usize) -> Result<CMat> {
    let mut u = linalg::identity(d);
    // subtract the span projector, add back the phased one
    for (k, b) in basis.iter().take(r).enumerate() {
        for bb in basis.iter().take(k) {
            if (bb.adjoint() * b)[(0, 0)].norm() > 1e-8 {
                return Err(Error::InvalidArgument(
                    "basis vectors are not orthonormal".into(),
                ));
            }
        }
        let angle = 2.0 * std::f64::consts::PI * (k * n) as f64 / r as f64;
        let phase = Complex64::new(angle.cos(), angle.sin());
        let proj = b * b.adjoint();
        u += proj.scale_complex(phase - Complex64::from(1.0));
    }
    Ok(u)
}

trait ScaleComplex {
    fn scale_complex(&self, s: Complex64) -> CMat;
}

impl ScaleComplex for CMat {
    fn scale_complex(&self, s: Complex64) -> CMat {
        self.map(|z| z * s)
    }
}

/// The rotated witnesses `|alpha_n> = (U(n) ⊗ I)|phi>` for `n = 0..r-1`.
/// Each satisfies the invariance `(U(n) ⊗ U(n)^dagger)|phi> = |phi>` with
/// the matching phase unitary on the other side.
pub fn alpha_states(witness: &PureState, r: usize) -> Result<Vec<PureState>> {
    let (left_label, da) = witness.dims().factor(0);
    let (_, dc) = witness.dims().factor(1);
    let left_label = left_label.to_string();
    let schmidt = witness.schmidt(&[left_label.as_str()])?;
    if schmidt.rank != r {
        return Err(Error::InvalidArgument(format!(
            "witness has Schmidt rank {}, expected {r}",
            schmidt.rank
        )));
    }
    let mut out = Vec::with_capacity(r);
    for n in 0..r {
        let ua = phase_unitary(n, r, &schmidt.left, da)?;
        let uc = phase_unitary(n, r, &schmidt.right, dc)?;
        let lifted = linalg::kron(&ua, &linalg::identity(dc));
        let v = &lifted * witness.vector();
        // invariance check: (U_A(n) ⊗ U_C(n)^dagger) |phi> = |phi>
        let both = linalg::kron(&ua, &uc.adjoint());
        let invariant = &both * witness.vector();
        let resid = (invariant - witness.vector()).norm();
        if resid > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "phase-pair invariance violated (residual {resid:.3e})"
            )));
        }
        out.push(PureState::new(witness.dims().clone(), v)?);
    }
    Ok(out)
}

/// The complete `|C| + r` effect set on `(A, C)`: the `r` scaled rotated
/// witnesses, the `r` completion operators on the Schmidt block, and the
/// `|C| - r` detectors on the remaining basis states.
pub fn build_povm(input: &SynthesisInput) -> Result<Povm> {
    let a = input.dim_a();
    let c = input.dim_c;
    let r = input.rank;
    let alphas = alpha_states(&input.witness, r)?;
    let mut effects: Vec<CMat> = Vec::with_capacity(c + r);
    for alpha in &alphas {
        let v = alpha.vector();
        effects.push((v * v.adjoint()).scale(1.0 / r as f64));
    }
    let id_a = linalg::identity(a);
    for n in 0..r {
        let an = &input.a_basis[n];
        let cn = &input.c_basis[n];
        let proj_c = cn * cn.adjoint();
        let e = linalg::kron(&id_a, &proj_c)
            - linalg::kron(&(an * an.adjoint()), &proj_c).scale(input.weights[n]);
        effects.push(e);
    }
    for n in 0..(c - r) {
        let cn = &input.c_basis[r + n];
        effects.push(linalg::kron(&id_a, &(cn * cn.adjoint())));
    }
    Povm::new(input.omega.dims().clone(), effects).map_err(|e| {
        Error::SynthesisPrecondition(format!("constructed effect set is invalid: {e}"))
    })
}

/// Decoders matching [`build_povm`]: `r` phase-rotated copies of the input
/// channel followed by `|C|` preparation channels onto the witness's C-side
/// basis.
pub fn build_decoders(input: &SynthesisInput) -> Result<Vec<Channel>> {
    let c = input.dim_c;
    let r = input.rank;
    let dim_b = input.channel.in_total();
    let mut out = Vec::with_capacity(c + r);
    for n in 0..r {
        let uc = phase_unitary(n, r, &input.c_basis, c)?;
        out.push(input.channel.then_unitary(&uc)?);
    }
    for n in 0..c {
        out.push(Channel::prepare(dim_b, &input.c_basis[n], "B", "C")?);
    }
    Ok(out)
}

/// A synthesized protocol together with its Schmidt rank and the achieved
/// fidelity margin over the classical floor.
#[derive(Debug, Clone)]
pub struct SynthesizedProtocol {
    pub protocol: TeleportProtocol,
    pub r: usize,
    /// Achieved `F - 1/|C|`; equals `margin/|C|^2` of the witness.
    pub margin: f64,
}

/// Assembles the measurement and decoders into a protocol (measurement
/// reordered to the `(C', A)` convention) and verifies the strict fidelity
/// gain.
pub fn synthesize(input: SynthesisInput) -> Result<SynthesizedProtocol> {
    let povm_ac = build_povm(&input)?;
    let decoders = build_decoders(&input)?;
    let c = input.dim_c;
    let a_label = input.omega.dims().factor(0).0.to_string();
    let c_label = input.omega.dims().factor(1).0.to_string();
    let povm = povm_ac
        .reorder(&[c_label.as_str(), a_label.as_str()])?
        .relabel(&c_label, "C'")?;
    let protocol = TeleportProtocol::new(input.rho_ab.clone(), povm, decoders, c)?;
    let (f, _) = protocol.fidelity_via_discrimination()?;
    let margin = f - 1.0 / c as f64;
    if margin <= 0.0 {
        return Err(Error::SynthesisPrecondition(format!(
            "synthesized fidelity {f} does not exceed 1/{c}"
        )));
    }
    Ok(SynthesizedProtocol {
        protocol,
        r: input.rank,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_entangled, HermOp};
    use crate::witness::{qutrit_to_qubit_channel, reduction_check, werner_state};

    fn werner_input() -> SynthesisInput {
        let rho = werner_state(3, -1.0).unwrap();
        let channel = qutrit_to_qubit_channel();
        let omega = DensityOp::from_herm(channel.apply(rho.herm(), "B").unwrap()).unwrap();
        let report = reduction_check(&omega, &["A"]).unwrap();
        SynthesisInput::new(rho, channel, report.witness.unwrap(), 2).unwrap()
    }

    #[test]
    fn mub_unitary_cases() {
        let e0 = CVec::from_row_slice(&[Complex64::from(1.0), Complex64::from(0.0)]);
        let e1 = CVec::from_row_slice(&[Complex64::from(0.0), Complex64::from(1.0)]);
        let u0 = mub_unitary(0, 2, &[e0.clone(), e1.clone()]).unwrap();
        let id = linalg::identity(2);
        assert!(linalg::max_abs(&(u0.kraus().unwrap()[0].clone() - id)) < 1e-12);

        let u1 = mub_unitary(1, 2, &[e0, e1]).unwrap();
        let m = &u1.kraus().unwrap()[0];
        assert!((m[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((m[(1, 1)].re + 1.0).abs() < 1e-12);

        // orthogonality relation: sum_n w^{n(k-k')} = r delta
        let r = 5usize;
        for k in 0..r {
            for kp in 0..r {
                let mut s = Complex64::default();
                for n in 0..r {
                    let ang = 2.0 * std::f64::consts::PI * ((k + r - kp) % r * n) as f64 / r as f64;
                    s += Complex64::new(ang.cos(), ang.sin());
                }
                let want = if k == kp { r as f64 } else { 0.0 };
                assert!((s.re - want).abs() < 1e-10 && s.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mub_unitary_rejects_bad_inputs() {
        let e0 = CVec::from_row_slice(&[Complex64::from(1.0), Complex64::from(0.0)]);
        assert!(mub_unitary(2, 2, &[e0.clone(), e0.clone()]).is_err());
        // non-orthogonal pair
        let tilted = CVec::from_row_slice(&[
            Complex64::from(0.8f64.sqrt()),
            Complex64::from(0.2f64.sqrt()),
        ]);
        assert!(mub_unitary(1, 2, &[e0, tilted]).is_err());
    }

    #[test]
    fn alpha_states_start_at_witness_and_average_classically() {
        let input = werner_input();
        let r = input.rank();
        let alphas = alpha_states(input.witness(), r).unwrap();
        assert_eq!(alphas.len(), r);
        let overlap = (alphas[0].vector().adjoint() * input.witness().vector())[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-10);

        // ensemble average = sum_k sigma_k |a_k c_k><a_k c_k|
        let d = alphas[0].vector().len();
        let mut avg = CMat::zeros(d, d);
        for a in &alphas {
            avg += (a.vector() * a.vector().adjoint()).scale(1.0 / r as f64);
        }
        let mut want = CMat::zeros(d, d);
        for k in 0..r {
            let joint = linalg::kron(
                &(&input.a_basis[k] * input.a_basis[k].adjoint()),
                &(&input.c_basis[k] * input.c_basis[k].adjoint()),
            );
            want += joint.scale(input.weights[k]);
        }
        assert!(linalg::max_abs(&(avg - want)) < 1e-10);
    }

    #[test]
    fn alpha_state_overlaps_match_weights() {
        let input = werner_input();
        let r = input.rank();
        let alphas = alpha_states(input.witness(), r).unwrap();
        for m in 0..r {
            for n in 0..r {
                let got = (alphas[m].vector().adjoint() * alphas[n].vector())[(0, 0)].norm_sqr();
                let mut s = Complex64::default();
                for (k, w) in input.weights.iter().enumerate() {
                    let ang = 2.0 * std::f64::consts::PI * (k * (n + r - m) % r) as f64 / r as f64;
                    s += Complex64::new(ang.cos(), ang.sin()).scale(*w);
                }
                assert!((got - s.norm_sqr()).abs() < 1e-10, "pair ({m},{n})");
            }
        }
    }

    #[test]
    fn povm_counts_and_completeness() {
        let input = werner_input();
        let povm = build_povm(&input).unwrap();
        assert_eq!(povm.len(), input.dim_c + input.rank());
        assert!(povm.completeness_residual() <= 1e-10);
        for i in 0..povm.len() {
            assert!(linalg::min_eig(povm.effect(i)) > -1e-12);
        }
    }

    #[test]
    fn first_two_blocks_complete_the_schmidt_sector() {
        let input = werner_input();
        let r = input.rank();
        let povm = build_povm(&input).unwrap();
        let d = input.omega().dims().total();
        let mut partial = CMat::zeros(d, d);
        for i in 0..2 * r {
            partial += povm.effect(i);
        }
        let mut sector = CMat::zeros(input.dim_c, input.dim_c);
        for n in 0..r {
            sector += &input.c_basis[n] * input.c_basis[n].adjoint();
        }
        let want = linalg::kron(&linalg::identity(input.dim_a()), &sector);
        assert!(linalg::max_abs(&(partial - want)) < 1e-10);
    }

    #[test]
    fn decoder_zero_is_the_channel_itself() {
        let input = werner_input();
        let decoders = build_decoders(&input).unwrap();
        assert_eq!(decoders.len(), input.dim_c + input.rank());
        let diff = linalg::max_abs(
            &(decoders[0].choi_matrix() - qutrit_to_qubit_channel().choi_matrix()),
        );
        assert!(diff < 1e-12);
    }

    #[test]
    fn prepare_decoders_ignore_their_input() {
        let input = werner_input();
        let r = input.rank();
        let decoders = build_decoders(&input).unwrap();
        let mut rng = crate::random::rng_from_seed(3);
        let x = crate::random::random_density(&SystemDims::single("B", 3).unwrap(), &mut rng)
            .unwrap();
        let y = crate::random::random_density(&SystemDims::single("B", 3).unwrap(), &mut rng)
            .unwrap();
        for d in &decoders[r..] {
            let ox = d.apply_raw(x.matrix());
            let oy = d.apply_raw(y.matrix());
            assert!(linalg::max_abs(&(ox - oy)) < 1e-12);
        }
    }

    #[test]
    fn synthesis_beats_the_classical_floor_on_werner() {
        let input = werner_input();
        let witness_margin = input.margin();
        let built = synthesize(input).unwrap();
        assert_eq!(built.protocol.message_count(), 2 + built.r);
        let (f, _) = built.protocol.fidelity_via_discrimination().unwrap();
        assert!(f > 0.5, "F = {f}");
        assert!((built.margin - witness_margin / 4.0).abs() < 1e-10);

        // both fidelity paths agree
        let ch = built.protocol.teleportation_channel().unwrap();
        let f_chan = crate::teleport::entanglement_fidelity(&ch).unwrap();
        assert!((f - f_chan).abs() < 1e-9);
    }

    #[test]
    fn synthesis_from_max_entangled_with_identity_channel() {
        let rho = max_entangled(2).unwrap().density();
        let channel = Channel::identity(2, "B", "C").unwrap();
        let witness = max_entangled(2).unwrap().relabel("B", "C").unwrap();
        let input = SynthesisInput::new(rho, channel, witness, 2).unwrap();
        let built = synthesize(input).unwrap();
        let (f, _) = built.protocol.fidelity_via_discrimination().unwrap();
        assert!(f > 0.5);
        assert!((f - 0.625).abs() < 1e-10, "F = {f}");
    }

    #[test]
    fn boundary_margin_is_rejected() {
        // product resource: omega = rho_A ⊗ E(rho_B), never above the line
        let mut rng = crate::random::rng_from_seed(10);
        let a = crate::random::random_density(&SystemDims::single("A", 2).unwrap(), &mut rng)
            .unwrap();
        let b = crate::random::random_density(&SystemDims::single("B", 3).unwrap(), &mut rng)
            .unwrap();
        let rho = DensityOp::from_herm(a.herm().tensor(b.herm()).unwrap()).unwrap();
        let channel = qutrit_to_qubit_channel();
        let witness = max_entangled(2).unwrap().relabel("B", "C").unwrap();
        let err = SynthesisInput::new(rho, channel, witness, 2);
        assert!(matches!(err, Err(Error::SynthesisPrecondition(_))));
    }

    #[test]
    fn random_violating_inputs_always_gain() {
        // rotated max-entangled resources with identity channel: guaranteed
        // violations with varying witnesses
        let mut rng = crate::random::rng_from_seed(44);
        for _ in 0..5 {
            let u = crate::random::haar_unitary(2, &mut rng);
            let phi = max_entangled(2).unwrap();
            let lifted = linalg::kron(&linalg::identity(2), &u);
            let v = &lifted * phi.vector();
            let rho = DensityOp::from_herm(HermOp::unchecked(
                SystemDims::new([("A", 2usize), ("B", 2usize)]).unwrap(),
                &v * v.adjoint(),
            ))
            .unwrap();
            let channel = Channel::identity(2, "B", "C").unwrap();
            let omega = DensityOp::from_herm(channel.apply(rho.herm(), "B").unwrap()).unwrap();
            let report = reduction_check(&omega, &["A"]).unwrap();
            assert!(report.violated);
            let input =
                SynthesisInput::new(rho, channel, report.witness.unwrap(), 2).unwrap();
            let margin = input.margin();
            let built = synthesize(input).unwrap();
            assert!(built.margin > 0.0);
            assert!((built.margin - margin / 4.0).abs() < 1e-9);
        }
    }
}
