//! Optimization layer: optimal state discrimination with a dual
//! certificate, the pretty-good measurement, min-entropy, and the two
//! bilinear see-saws (conditional-state spectral radius and teleportation
//! fidelity).

mod project;
mod seesaw;

pub use seesaw::{lambda_star, maximize_teleportation_fidelity, SeesawOptions, SeesawResult};

use crate::qcore::linalg::{self, CMat};
use crate::qcore::{DensityOp, Povm, SystemDims};
use crate::{Error, Result};

pub(crate) use project::{ascend, AscentOptions, PovmAffine};

/// Finite ensemble of states with prior probabilities on a common space.
#[derive(Debug, Clone)]
pub struct Ensemble {
    priors: Vec<f64>,
    states: Vec<DensityOp>,
}

impl Ensemble {
    pub fn new(priors: Vec<f64>, states: Vec<DensityOp>) -> Result<Self> {
        if priors.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        if priors.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidArgument("negative prior".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "priors sum to {total}, expected 1"
            )));
        }
        let dims = states[0].dims().clone();
        for s in states.iter().skip(1) {
            if s.dims() != &dims {
                return Err(Error::DimMismatch(
                    "ensemble states live on different spaces".into(),
                ));
            }
        }
        Ok(Self { priors, states })
    }

    pub fn uniform(states: Vec<DensityOp>) -> Result<Self> {
        let n = states.len();
        Self::new(vec![1.0 / n as f64; n], states)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[DensityOp] {
        &self.states
    }

    pub fn dims(&self) -> &SystemDims {
        self.states[0].dims()
    }

    /// `p_x rho_x`, the coefficients of the discrimination functional.
    pub(crate) fn weighted(&self) -> Vec<CMat> {
        self.priors
            .iter()
            .zip(self.states.iter())
            .map(|(&p, s)| s.matrix().scale(p))
            .collect()
    }

    /// Ensemble average `sum_x p_x rho_x`.
    pub fn average(&self) -> CMat {
        let d = self.dims().total();
        let mut s = CMat::zeros(d, d);
        for (p, st) in self.priors.iter().zip(self.states.iter()) {
            s += st.matrix().scale(*p);
        }
        s
    }
}

/// Success probability `sum_x p_x tr(M_x rho_x)` of guessing the ensemble
/// label with the given measurement.
pub fn succ_prob(ens: &Ensemble, m: &Povm) -> Result<f64> {
    if m.len() != ens.len() {
        return Err(Error::DimMismatch(format!(
            "{} effects for {} states",
            m.len(),
            ens.len()
        )));
    }
    if m.dims().total() != ens.dims().total() {
        return Err(Error::DimMismatch(format!(
            "measurement on dimension {}, states on {}",
            m.dims().total(),
            ens.dims().total()
        )));
    }
    let mut p = 0.0;
    for ((prior, state), effect) in ens.priors.iter().zip(ens.states.iter()).zip(m.effects()) {
        p += prior * linalg::trace_product(effect, state.matrix()).re;
    }
    Ok(p)
}

/// The square-root measurement `M_x = S^(-1/2) p_x rho_x S^(-1/2)` with
/// `S` the ensemble average. Any weight off the support of `S` is folded
/// into the largest effect so the collection is complete.
pub fn pretty_good_measurement(ens: &Ensemble) -> Result<Povm> {
    let d = ens.dims().total();
    let s = ens.average();
    let si = linalg::inv_sqrt_on_support(&s, 1e-14);
    let mut effects: Vec<CMat> = ens
        .weighted()
        .iter()
        .map(|c| &si * c * &si)
        .collect();
    let mut sum = CMat::zeros(d, d);
    for e in &effects {
        sum += e;
    }
    let residual = linalg::identity(d) - sum;
    if linalg::max_abs(&residual) > 1e-13 {
        let largest = effects
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                linalg::trace(a)
                    .re
                    .partial_cmp(&linalg::trace(b).re)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i)
            .unwrap();
        effects[largest] += residual;
    }
    Povm::new(ens.dims().clone(), effects)
}

/// Output of [`optimal_discrimination`].
#[derive(Debug, Clone)]
pub struct DiscriminationResult {
    pub povm: Povm,
    /// Certified optimal success probability.
    pub p_star: f64,
    /// Value of the feasible dual point; `dual_value - p_star` is the gap.
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Upper bound on the discrimination value from the current measurement:
/// symmetrize `Y0 = sum_x C_x M_x`, lift it to feasibility by adding the
/// worst violation times the identity, and return its trace.
fn dual_bound(coeffs: &[CMat], m: &[CMat]) -> f64 {
    let d = coeffs[0].nrows();
    let mut y = CMat::zeros(d, d);
    for (c, mm) in coeffs.iter().zip(m.iter()) {
        y += c * mm;
    }
    let y = (&y + y.adjoint()).scale(0.5);
    let mut delta = 0.0f64;
    for c in coeffs {
        let ev = linalg::max_eig(&(c - &y));
        if ev > delta {
            delta = ev;
        }
    }
    linalg::trace(&y).re + delta * d as f64
}

/// Inner solver; `gap_met = false` means the certificate never reached
/// `gap_tol`, but the returned measurement and value are still feasible.
/// With `certified = false` the dual bound is only evaluated once at the
/// end, which is much cheaper inside see-saw loops.
pub(crate) fn optimal_discrimination_opts(
    ens: &Ensemble,
    warm: Option<&[CMat]>,
    opts: &AscentOptions,
    certified: bool,
) -> Result<(DiscriminationResult, bool)> {
    let d = ens.dims().total();
    if d > 36 {
        return Err(Error::InvalidArgument(format!(
            "discrimination solver is limited to total dimension 36, got {d}"
        )));
    }
    let coeffs = ens.weighted();
    let pgm = pretty_good_measurement(ens)?;
    let mut start: Vec<CMat> = pgm.effects().to_vec();
    if let Some(w) = warm {
        if project::objective(&coeffs, w) > project::objective(&coeffs, &start) {
            start = w.to_vec();
        }
    }
    let affine = PovmAffine { dim: d };
    let cert = |m: &[CMat]| dual_bound(&coeffs, m);
    let out = ascend(
        &coeffs,
        start,
        &affine,
        opts,
        certified.then_some(&cert as &dyn Fn(&[CMat]) -> f64),
    );
    let gap = if certified {
        out.gap
    } else {
        dual_bound(&coeffs, &out.x) - out.value
    };
    let povm = Povm::new(ens.dims().clone(), out.x)?;
    Ok((
        DiscriminationResult {
            povm,
            p_star: out.value,
            dual_value: out.value + gap,
            gap,
            iterations: out.iterations,
        },
        out.gap_met && certified,
    ))
}

/// Maximizes the guessing probability over all POVMs by projected-gradient
/// ascent, warm-started at the pretty-good measurement and certified by a
/// feasible dual point with gap at most `1e-6`.
pub fn optimal_discrimination(ens: &Ensemble) -> Result<DiscriminationResult> {
    let opts = AscentOptions {
        max_iter: 10_000,
        gap_tol: 1e-6,
        dykstra_tol: 1e-8,
        dykstra_iter: 120,
        ..AscentOptions::default()
    };
    let (res, gap_met) = optimal_discrimination_opts(ens, None, &opts, true)?;
    if !gap_met {
        return Err(Error::NonConvergence {
            iterations: res.iterations,
            gap: res.gap,
        });
    }
    Ok(res)
}

/// Min-entropy of the ensemble label given the quantum system, in bits:
/// `2^(-H_min)` is the certified optimal guessing probability.
pub fn min_entropy(ens: &Ensemble) -> Result<f64> {
    let res = optimal_discrimination(ens)?;
    Ok(-res.p_star.log2())
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.log2();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).log2();
    }
    Ok(h)
}
