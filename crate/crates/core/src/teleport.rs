//! Teleportation protocols, the channels they realize, and the two fidelity
//! paths: the direct channel overlap and the discrimination identity.
//!
//! Label convention: the resource state lives on `(A, B)`, the measurement
//! on `(C', A)`, decoders map `B -> C`, and decoded states live on `(A, C)`.
//! Measurement effects are re-read on `(A, C)` by a pure factor reorder plus
//! the `C' -> C` relabelling; no transpose is involved. The regression tests
//! against the direct channel computation pin this convention down.

use num_complex::Complex64;

use crate::qcore::linalg::{self, CMat};
use crate::qcore::{max_entangled, Channel, DensityOp, Povm, SystemDims};
use crate::random::PortableRng;
use crate::tol::Tolerances;
use crate::{Error, Result};

/// Triple of resource state, encoding measurement, and decoder channels.
#[derive(Debug, Clone)]
pub struct TeleportProtocol {
    rho_ab: DensityOp,
    povm: Povm,
    decoders: Vec<Channel>,
    dim_c: usize,
}

impl TeleportProtocol {
    /// Validates and canonicalizes a protocol. The resource state must be
    /// bipartite, the measurement bipartite with factor dims `(|C|, |A|)`,
    /// and every decoder a `|B| -> |C|` channel. Labels are rewritten to the
    /// crate convention (`A`, `B`, `C'`, `C`).
    pub fn new(
        rho_ab: DensityOp,
        povm: Povm,
        decoders: Vec<Channel>,
        dim_c: usize,
    ) -> Result<Self> {
        if decoders.is_empty() {
            return Err(Error::InvalidProtocol("no decoders".into()));
        }
        if povm.len() != decoders.len() {
            return Err(Error::InvalidProtocol(format!(
                "{} effects but {} decoders",
                povm.len(),
                decoders.len()
            )));
        }
        if rho_ab.dims().len() != 2 {
            return Err(Error::InvalidProtocol(format!(
                "resource state has {} factors, expected 2",
                rho_ab.dims().len()
            )));
        }
        let (_, dim_a) = rho_ab.dims().factor(0);
        let (_, dim_b) = rho_ab.dims().factor(1);
        if povm.dims().len() != 2 {
            return Err(Error::InvalidProtocol(format!(
                "measurement has {} factors, expected 2",
                povm.dims().len()
            )));
        }
        let (_, pc) = povm.dims().factor(0);
        let (_, pa) = povm.dims().factor(1);
        if pc != dim_c || pa != dim_a {
            return Err(Error::InvalidProtocol(format!(
                "measurement factors are ({pc}, {pa}), expected ({dim_c}, {dim_a})"
            )));
        }
        for (i, d) in decoders.iter().enumerate() {
            if d.in_total() != dim_b {
                return Err(Error::InvalidProtocol(format!(
                    "decoder {i} expects input dimension {}, resource has {dim_b}",
                    d.in_total()
                )));
            }
            if d.out_total() != dim_c {
                return Err(Error::InvalidProtocol(format!(
                    "decoder {i} outputs dimension {}, protocol teleports {dim_c}",
                    d.out_total()
                )));
            }
        }

        // canonical labels
        let rho_ab = DensityOp::new_with_tol(
            SystemDims::new([("A", dim_a), ("B", dim_b)])?,
            rho_ab.matrix().clone(),
            &Tolerances::default(),
        )?;
        let povm = Povm::new_with_tol(
            SystemDims::new([("C'", dim_c), ("A", dim_a)])?,
            povm.effects().to_vec(),
            &Tolerances::default(),
        )?;
        let decoders = decoders
            .into_iter()
            .map(|d| {
                let kraus = d.kraus().map(|k| k.to_vec());
                match kraus {
                    Some(k) => Channel::from_kraus(
                        SystemDims::single("B", dim_b)?,
                        SystemDims::single("C", dim_c)?,
                        k,
                    ),
                    None => Channel::from_choi(
                        SystemDims::single("B", dim_b)?,
                        SystemDims::single("C", dim_c)?,
                        d.choi_matrix(),
                    ),
                }
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            rho_ab,
            povm,
            decoders,
            dim_c,
        })
    }

    pub fn resource(&self) -> &DensityOp {
        &self.rho_ab
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn decoders(&self) -> &[Channel] {
        &self.decoders
    }

    pub fn message_count(&self) -> usize {
        self.decoders.len()
    }

    pub fn dim_a(&self) -> usize {
        self.rho_ab.dims().factor(0).1
    }

    pub fn dim_b(&self) -> usize {
        self.rho_ab.dims().factor(1).1
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    /// Measurement effects re-read on `(A, C)`: factor reorder plus the
    /// `C' -> C` relabelling.
    pub fn effects_ac(&self) -> Vec<CMat> {
        let dims = [self.dim_c, self.dim_a()];
        self.povm
            .effects()
            .iter()
            .map(|e| linalg::reorder(e, &dims, &[1, 0]))
            .collect()
    }

    /// The decoded resource states `omega_i = (id ⊗ D_i)(rho)` on `(A, C)`.
    pub fn decoded_ensemble(&self) -> Result<DecodedEnsemble> {
        let states = self
            .decoders
            .iter()
            .map(|d| {
                let out = d.apply(self.rho_ab.herm(), "B")?;
                DensityOp::from_herm(out)
            })
            .collect::<Result<Vec<_>>>()?;
        DecodedEnsemble::new(states)
    }

    /// The channel `C' -> C` realized by the protocol, with both
    /// representations attached and validated.
    pub fn teleportation_channel(&self) -> Result<Channel> {
        let ensemble = self.decoded_ensemble()?;
        let c = self.dim_c;
        let a = self.dim_a();
        let full = [c, a, c];
        let promoted: Vec<CMat> = self
            .povm
            .effects()
            .iter()
            .map(|e| linalg::promote(e, &[c, a], &[0, 1], &full))
            .collect();

        let apply = |sigma: &CMat| -> CMat {
            let mut out = CMat::zeros(c, c);
            for (p, omega) in promoted.iter().zip(ensemble.states()) {
                let big = linalg::kron(sigma, omega.matrix());
                out += linalg::partial_trace(&(p * big), &full, &[2]);
            }
            out
        };

        // Choi matrix column by column from matrix units
        let mut choi = CMat::zeros(c * c, c * c);
        for i in 0..c {
            for j in 0..c {
                let mut unit = CMat::zeros(c, c);
                unit[(i, j)] = Complex64::from(1.0);
                let block = apply(&unit);
                for r in 0..c {
                    for s in 0..c {
                        choi[(i * c + r, j * c + s)] = block[(r, s)];
                    }
                }
            }
        }
        Channel::from_choi(
            SystemDims::single("C'", c)?,
            SystemDims::single("C", c)?,
            choi,
        )
        .map_err(|e| {
            Error::InvalidProtocol(format!("teleportation channel failed validation: {e}"))
        })?
        .with_both(&Tolerances::default())
    }

    /// Entanglement fidelity via the discrimination identity, together with
    /// the success probability of the underlying measurement.
    pub fn fidelity_via_discrimination(&self) -> Result<(f64, f64)> {
        let ensemble = self.decoded_ensemble()?;
        let effects = self.effects_ac();
        let mut total = 0.0;
        for (e, omega) in effects.iter().zip(ensemble.states()) {
            total += linalg::trace_product(e, omega.matrix()).re;
        }
        let n = self.message_count() as f64;
        let c2 = (self.dim_c * self.dim_c) as f64;
        Ok((total / c2, total / n))
    }

    /// Dimension bound `|A|/|C|` and whether the protocol saturates it
    /// (every decoded state pure and proportional to its effect).
    pub fn dim_bound_check(&self) -> Result<(f64, bool)> {
        let bound = self.dim_a() as f64 / self.dim_c as f64;
        let tol = 1e-8;
        let ensemble = self.decoded_ensemble()?;
        let effects = self.effects_ac();
        let mut saturated = true;
        for (e, omega) in effects.iter().zip(ensemble.states()) {
            if omega.purity() < 1.0 - tol {
                saturated = false;
                break;
            }
            let gamma = linalg::trace(e).re;
            if gamma <= tol {
                saturated = false;
                break;
            }
            let resid = linalg::max_abs(&(e - omega.matrix().scale(gamma)));
            if resid > tol * gamma.max(1.0) {
                saturated = false;
                break;
            }
        }
        Ok((bound, saturated))
    }
}

/// Decoded resource states under a uniform prior; all share the marginal of
/// the resource on `A`.
#[derive(Debug, Clone)]
pub struct DecodedEnsemble {
    states: Vec<DensityOp>,
}

impl DecodedEnsemble {
    pub fn new(states: Vec<DensityOp>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidArgument("empty ensemble".into()));
        }
        let first = states[0].marginal(&["A"])?;
        for s in states.iter().skip(1) {
            let m = s.marginal(&["A"])?;
            let diff = linalg::max_abs(&(m.matrix() - first.matrix()));
            if diff > 1e-9 {
                return Err(Error::InvalidProtocol(format!(
                    "decoded states disagree on the A marginal (residual {diff:.3e})"
                )));
            }
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[DensityOp] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn prior(&self) -> f64 {
        1.0 / self.states.len() as f64
    }
}

/// Entanglement fidelity `tr[Phi+ (id ⊗ ch)(Phi+)]` of a square channel.
pub fn entanglement_fidelity(ch: &Channel) -> Result<f64> {
    let d = ch.in_total();
    if ch.out_total() != d {
        return Err(Error::DimMismatch(format!(
            "channel maps dimension {} to {}, entanglement fidelity needs equal dims",
            d,
            ch.out_total()
        )));
    }
    // (id ⊗ ch)(Phi+) = J/d in the in ⊗ out factorization
    let j = ch.choi_matrix();
    let phi = max_entangled(d)?;
    let quad = (phi.vector().adjoint() * &j * phi.vector())[(0, 0)].re;
    Ok(quad / d as f64)
}

/// Average transmission fidelity from the entanglement fidelity:
/// `(F d + 1)/(d + 1)`.
pub fn average_fidelity(entanglement_fidelity: f64, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument(
            "average fidelity needs dimension >= 2".into(),
        ));
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&entanglement_fidelity) {
        return Err(Error::InvalidArgument(format!(
            "entanglement fidelity {entanglement_fidelity} out of [0, 1]"
        )));
    }
    let f = entanglement_fidelity.clamp(0.0, 1.0);
    Ok((f * d as f64 + 1.0) / (d as f64 + 1.0))
}

/// Shift-and-phase unitary `X^a Z^b` on dimension `d`.
pub fn weyl_unitary(d: usize, a: usize, b: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    for k in 0..d {
        let phase = 2.0 * std::f64::consts::PI * (k * b % d) as f64 / d as f64;
        m[((k + a) % d, k)] = Complex64::new(phase.cos(), phase.sin());
    }
    m
}

/// The perfect protocol on dimension `d`: maximally entangled resource, the
/// `d^2` projectors onto `(I ⊗ X^a Z^b)|Phi+>`, and matching correction
/// unitaries.
pub fn standard_protocol(d: usize) -> Result<TeleportProtocol> {
    if d < 2 {
        return Err(Error::InvalidArgument(
            "standard protocol needs dimension >= 2".into(),
        ));
    }
    let rho = max_entangled(d)?.density();
    let phi = max_entangled(d)?;
    let mut effects = Vec::with_capacity(d * d);
    let mut decoders = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let w = weyl_unitary(d, a, b);
            let lifted = linalg::kron(&linalg::identity(d), &w);
            let v = &lifted * phi.vector();
            effects.push(&v * v.adjoint());
            decoders.push(Channel::unitary(w.transpose(), "B", "C")?);
        }
    }
    let povm = Povm::new(SystemDims::new([("C'", d), ("A", d)])?, effects)?;
    TeleportProtocol::new(rho, povm, decoders, d)
}

/// Measure-and-prepare protocol achieving exactly the classical fidelity
/// `1/|C|` on any resource state.
pub fn classical_protocol_with_resource(
    rho_ab: &DensityOp,
    dim_c: usize,
) -> Result<TeleportProtocol> {
    if dim_c < 1 {
        return Err(Error::InvalidArgument("dim_c must be >= 1".into()));
    }
    let (_, dim_a) = rho_ab.dims().factor(0);
    let (_, dim_b) = rho_ab.dims().factor(1);
    let mut effects = Vec::with_capacity(dim_c);
    let mut decoders = Vec::with_capacity(dim_c);
    let id_a = linalg::identity(dim_a);
    for i in 0..dim_c {
        let mut det = CMat::zeros(dim_c, dim_c);
        det[(i, i)] = Complex64::from(1.0);
        effects.push(linalg::kron(&det, &id_a));
        decoders.push(Channel::prepare_basis(dim_b, dim_c, i, "B", "C")?);
    }
    let povm = Povm::new(SystemDims::new([("C'", dim_c), ("A", dim_a)])?, effects)?;
    TeleportProtocol::new(rho_ab.clone(), povm, decoders, dim_c)
}

/// Classical protocol over a maximally mixed resource with `|B| = |A| = dim_a`.
pub fn classical_protocol(dim_a: usize, dim_c: usize) -> Result<TeleportProtocol> {
    let dims = SystemDims::new([("A", dim_a), ("B", dim_a)])?;
    let d = dims.total();
    let rho = DensityOp::new(dims, linalg::identity(d).scale(1.0 / d as f64))?;
    classical_protocol_with_resource(&rho, dim_c)
}

/// Random protocol with the given dimensions and message count.
pub fn random_protocol(
    dim_a: usize,
    dim_b: usize,
    dim_c: usize,
    n: usize,
    rng: &mut PortableRng,
) -> Result<TeleportProtocol> {
    let rho = crate::random::random_density(&SystemDims::new([("A", dim_a), ("B", dim_b)])?, rng)?;
    let povm = crate::random::random_povm(&SystemDims::new([("C'", dim_c), ("A", dim_a)])?, n, rng)?;
    let decoders = (0..n)
        .map(|_| crate::random::random_channel(dim_b, dim_c, "B", "C", rng))
        .collect::<Result<Vec<_>>>()?;
    TeleportProtocol::new(rho, povm, decoders, dim_c)
}
