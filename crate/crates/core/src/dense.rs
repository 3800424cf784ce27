//! Dense-coding figures of merit: the induced classical channel, the
//! correlation fidelity and its exact relation to the teleportation
//! fidelity, classical bounds, and the accessible-information sandwich.
//!
//! Information quantities are in bits throughout, with `0 log 0 = 0`.

use nalgebra::DMatrix;

use crate::optim::{binary_entropy, Ensemble};
use crate::qcore::linalg::{self, CMat};
use crate::qcore::Povm;
use crate::teleport::{entanglement_fidelity, TeleportProtocol};
use crate::{Error, Result};

/// Row-stochastic matrix `p[i][j] = p(j|i)` of the classical channel a
/// protocol induces when its decoders encode and its measurement decodes.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    p: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() != p.ncols() || p.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "transition matrix must be square and nonempty, got {}x{}",
                p.nrows(),
                p.ncols()
            )));
        }
        for i in 0..p.nrows() {
            let mut row = 0.0;
            for j in 0..p.ncols() {
                if p[(i, j)] < -1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "negative entry p({j}|{i}) = {}",
                        p[(i, j)]
                    )));
                }
                row += p[(i, j)];
            }
            if (row - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "row {i} sums to {row}"
                )));
            }
        }
        Ok(Self { p })
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }
}

/// Conditional outcome distribution `p(j|i) = tr(E_j omega_i)` of the
/// protocol's measurement against its decoded states, both taken on the
/// `(A, C)` convention shared with the fidelity identity.
pub fn transition_matrix(protocol: &TeleportProtocol) -> Result<TransitionMatrix> {
    let ensemble = protocol.decoded_ensemble()?;
    let effects = protocol.effects_ac();
    let n = effects.len();
    let mut p = DMatrix::<f64>::zeros(n, n);
    for (i, omega) in ensemble.states().iter().enumerate() {
        for (j, e) in effects.iter().enumerate() {
            p[(i, j)] = linalg::trace_product(e, omega.matrix()).re.max(0.0);
        }
    }
    TransitionMatrix::new(p).map_err(|e| {
        Error::InvalidPovm(format!("transition rows failed to normalize: {e}"))
    })
}

/// Diagonal average of the transition matrix: how well the channel
/// preserves perfect classical correlations. Equals the discrimination
/// success probability at uniform prior.
pub fn classical_correlation_fidelity(w: &TransitionMatrix) -> f64 {
    let n = w.n();
    (0..n).map(|i| w.entry(i, i)).sum::<f64>() / n as f64
}

/// Both sides of the exact duality `F = (N/|C|^2) F_cl`, computed through
/// independent code paths (channel overlap vs. transition diagonal).
#[derive(Debug, Clone, Copy)]
pub struct DualityReport {
    pub f: f64,
    pub f_cl: f64,
    pub residual: f64,
}

pub fn duality_check(protocol: &TeleportProtocol) -> Result<DualityReport> {
    let ch = protocol.teleportation_channel()?;
    let f = entanglement_fidelity(&ch)?;
    let w = transition_matrix(protocol)?;
    let f_cl = classical_correlation_fidelity(&w);
    let n = protocol.message_count() as f64;
    let c2 = (protocol.dim_c() * protocol.dim_c()) as f64;
    let residual = (f - n / c2 * f_cl).abs();
    Ok(DualityReport { f, f_cl, residual })
}

/// Classical ceiling `min(|C|/N, 1)` on the correlation fidelity of
/// `N`-message dense coding through a `|C|`-dimensional channel.
pub fn classical_bound_dc(n: usize, dim_c: usize) -> f64 {
    (dim_c as f64 / n as f64).min(1.0)
}

/// Mutual information of a joint distribution in bits.
pub fn mutual_information(joint: &DMatrix<f64>) -> Result<f64> {
    let mut total = 0.0;
    for v in joint.iter() {
        if *v < -1e-12 {
            return Err(Error::InvalidArgument(format!(
                "negative joint probability {v}"
            )));
        }
        total += v.max(0.0);
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "joint distribution sums to {total}"
        )));
    }
    let hx = shannon(&(0..joint.nrows())
        .map(|i| joint.row(i).iter().map(|v| v.max(0.0)).sum())
        .collect::<Vec<f64>>());
    let hy = shannon(&(0..joint.ncols())
        .map(|j| joint.column(j).iter().map(|v| v.max(0.0)).sum())
        .collect::<Vec<f64>>());
    let hxy = shannon(&joint.iter().map(|v| v.max(0.0)).collect::<Vec<f64>>());
    Ok((hx + hy - hxy).max(0.0))
}

fn shannon(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.log2())
        .sum::<f64>()
}

/// Mutual information between the ensemble label and the outcome of
/// measuring with `m`; a lower bound on the ensemble's accessible
/// information.
pub fn accessible_info_of_measurement(ens: &Ensemble, m: &Povm) -> Result<f64> {
    if m.dims().total() != ens.dims().total() {
        return Err(Error::DimMismatch(format!(
            "measurement on dimension {}, states on {}",
            m.dims().total(),
            ens.dims().total()
        )));
    }
    let n = ens.len();
    let k = m.len();
    let mut joint = DMatrix::<f64>::zeros(n, k);
    for (i, (prior, state)) in ens.priors().iter().zip(ens.states().iter()).enumerate() {
        for (j, e) in m.effects().iter().enumerate() {
            joint[(i, j)] = (prior * linalg::trace_product(e, state.matrix()).re).max(0.0);
        }
    }
    mutual_information(&joint)
}

/// Von Neumann entropy in bits; eigenvalues at or below round-off are
/// dropped.
pub fn von_neumann_entropy(m: &CMat) -> f64 {
    let (vals, _) = linalg::eigh(m);
    shannon(
        &vals
            .iter()
            .map(|&v| if v > 1e-12 { v } else { 0.0 })
            .collect::<Vec<f64>>(),
    )
}

/// Holevo bound `chi = H(avg) - sum_x p_x H(rho_x)` on the accessible
/// information, in bits.
pub fn holevo_chi(ens: &Ensemble) -> f64 {
    let avg = ens.average();
    let mut chi = von_neumann_entropy(&avg);
    for (p, s) in ens.priors().iter().zip(ens.states().iter()) {
        if *p > 0.0 {
            chi -= p * von_neumann_entropy(s.matrix());
        }
    }
    chi.max(0.0)
}

/// Two-sided estimate of the accessible information of a uniform
/// `n`-state ensemble whose optimal guessing probability is `p_succ`:
/// Fano below, min-entropy above. The upper bound assumes `p_succ` comes
/// from an optimal measurement.
#[derive(Debug, Clone, Copy)]
pub struct InfoBounds {
    pub lower: f64,
    pub upper: f64,
    pub p_succ: f64,
    pub n: usize,
    /// Channel dimension, when the bounds came from the fidelity form.
    pub d: Option<usize>,
}

pub fn accessible_info_bounds(n: usize, p_succ: f64) -> Result<InfoBounds> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    // measurements validated at the POVM tolerance can overshoot 1 by
    // round-off of that size
    if p_succ <= 0.0 || p_succ > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "success probability {p_succ} outside (0, 1]"
        )));
    }
    let p = p_succ.min(1.0);
    if n == 1 {
        return Ok(InfoBounds {
            lower: 0.0,
            upper: 0.0,
            p_succ: p,
            n,
            d: None,
        });
    }
    let logn = (n as f64).log2();
    let lower = logn - (1.0 - p) * ((n - 1) as f64).log2() - binary_entropy(p)?;
    let upper = logn + p.log2();
    // the ordering is only guaranteed under the theorem's hypothesis that
    // `p` comes from an optimal measurement, which forces p >= 1/n
    debug_assert!(p < 1.0 / n as f64 - 1e-12 || lower <= upper + 1e-9);
    Ok(InfoBounds {
        lower,
        upper,
        p_succ: p,
        n,
        d: None,
    })
}

/// The same bounds written in terms of the channel dimension and the
/// teleportation fidelity; requires `(d, F, p)` to be consistent with an
/// integer message count `N = d^2 F / p`.
pub fn accessible_info_bounds_df(d: usize, fidelity: f64, p_succ: f64) -> Result<InfoBounds> {
    if d < 1 {
        return Err(Error::InvalidArgument("d must be >= 1".into()));
    }
    if p_succ <= 0.0 || p_succ > 1.0 + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "success probability {p_succ} outside (0, 1]"
        )));
    }
    if fidelity <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "fidelity {fidelity} must be positive"
        )));
    }
    let p = p_succ.min(1.0);
    let n_real = (d * d) as f64 * fidelity / p;
    let n = n_real.round();
    if (n_real - n).abs() > 1e-6 * n.max(1.0) || n < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "(d, F, p) = ({d}, {fidelity}, {p}) implies non-integer message count {n_real}"
        )));
    }
    let n = n as usize;
    if n == 1 {
        return Ok(InfoBounds {
            lower: 0.0,
            upper: 0.0,
            p_succ: p,
            n,
            d: Some(d),
        });
    }
    let two_log_d = 2.0 * (d as f64).log2();
    let upper = two_log_d + fidelity.log2();
    let lower = if p >= 1.0 {
        upper
    } else {
        let d2f = (d * d) as f64 * fidelity;
        two_log_d + fidelity.log2() + (1.0 - p) * ((1.0 - p).log2() - (d2f - p).log2())
    };
    debug_assert!(p < 1.0 / n as f64 - 1e-12 || lower <= upper + 1e-9);
    Ok(InfoBounds {
        lower,
        upper,
        p_succ: p,
        n,
        d: Some(d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{optimal_discrimination, pretty_good_measurement, succ_prob};
    use crate::qcore::{DensityOp, PureState, SystemDims};
    use crate::random::rng_from_seed;
    use crate::teleport::{classical_protocol, random_protocol, standard_protocol};
    use nalgebra::DVector;
    use num_complex::Complex64;

    #[test]
    fn standard_protocol_transitions_are_identity() {
        let p = standard_protocol(2).unwrap();
        let w = transition_matrix(&p).unwrap();
        assert_eq!(w.n(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((w.entry(i, j) - want).abs() < 1e-10);
            }
        }
        assert!((classical_correlation_fidelity(&w) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn classical_protocol_transitions_are_identity_of_size_c() {
        let p = classical_protocol(2, 3).unwrap();
        let w = transition_matrix(&p).unwrap();
        assert_eq!(w.n(), 3);
        for i in 0..3 {
            assert!((w.entry(i, i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_are_stochastic_on_random_protocols() {
        let mut rng = rng_from_seed(31);
        for _ in 0..5 {
            let p = random_protocol(2, 3, 2, 5, &mut rng).unwrap();
            let w = transition_matrix(&p).unwrap();
            for i in 0..w.n() {
                let row: f64 = (0..w.n()).map(|j| w.entry(i, j)).sum();
                assert!((row - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn correlation_fidelity_equals_succ_prob_path() {
        let mut rng = rng_from_seed(17);
        let p = random_protocol(2, 2, 2, 4, &mut rng).unwrap();
        let w = transition_matrix(&p).unwrap();
        let f_cl = classical_correlation_fidelity(&w);

        let ens = Ensemble::uniform(p.decoded_ensemble().unwrap().states().to_vec()).unwrap();
        let dims = ens.dims().clone();
        let povm = Povm::new(dims, p.effects_ac()).unwrap();
        let p_succ = succ_prob(&ens, &povm).unwrap();
        assert!((f_cl - p_succ).abs() < 1e-12);
    }

    #[test]
    fn uniform_noise_matrix_fidelity() {
        let n = 4;
        let w = TransitionMatrix::new(DMatrix::from_element(n, n, 1.0 / n as f64)).unwrap();
        assert!((classical_correlation_fidelity(&w) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn duality_identity_on_reference_protocols() {
        let p = standard_protocol(2).unwrap();
        let rep = duality_check(&p).unwrap();
        assert!((rep.f - 1.0).abs() < 1e-9);
        assert!((rep.f_cl - 1.0).abs() < 1e-9);
        assert!(rep.residual <= 1e-9);

        let p = classical_protocol(2, 3).unwrap();
        let rep = duality_check(&p).unwrap();
        assert!((rep.f - 1.0 / 3.0).abs() < 1e-9);
        assert!((rep.f_cl - 1.0).abs() < 1e-9);
        assert!(rep.residual <= 1e-9);
    }

    #[test]
    fn duality_identity_on_random_protocols() {
        let mut rng = rng_from_seed(2);
        for trial in 0..30 {
            let dim_a = 1 + trial % 3;
            let dim_b = 1 + (trial / 3) % 3;
            let dim_c = 1 + (trial / 9) % 3;
            let n = 1 + trial % 9;
            let p = random_protocol(dim_a, dim_b, dim_c, n, &mut rng).unwrap();
            let rep = duality_check(&p).unwrap();
            assert!(rep.residual <= 1e-9, "trial {trial}: {}", rep.residual);
        }
    }

    #[test]
    fn classical_bound_values() {
        assert!((classical_bound_dc(4, 2) - 0.5).abs() < 1e-15);
        assert!((classical_bound_dc(2, 3) - 1.0).abs() < 1e-15);
        assert!((classical_bound_dc(5, 5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mutual_information_reference_values() {
        // perfectly correlated uniform
        let mut j = DMatrix::<f64>::zeros(4, 4);
        for i in 0..4 {
            j[(i, i)] = 0.25;
        }
        assert!((mutual_information(&j).unwrap() - 2.0).abs() < 1e-12);

        // product distribution
        let j = DMatrix::from_element(3, 3, 1.0 / 9.0);
        assert!(mutual_information(&j).unwrap().abs() < 1e-12);

        // binary symmetric channel, flip 0.1, uniform input
        let mut j = DMatrix::<f64>::zeros(2, 2);
        j[(0, 0)] = 0.45;
        j[(0, 1)] = 0.05;
        j[(1, 0)] = 0.05;
        j[(1, 1)] = 0.45;
        let want = 1.0 - binary_entropy(0.1).unwrap();
        assert!((mutual_information(&j).unwrap() - want).abs() < 1e-12);
        assert!((want - 0.5310).abs() < 1e-4);
    }

    fn basis_ensemble(n: usize, d: usize) -> Ensemble {
        let dims = SystemDims::single("Q", d).unwrap();
        let states: Vec<DensityOp> = (0..n)
            .map(|i| {
                let mut v = DVector::<Complex64>::zeros(d);
                v[i] = Complex64::from(1.0);
                PureState::new(dims.clone(), v).unwrap().density()
            })
            .collect();
        Ensemble::uniform(states).unwrap()
    }

    #[test]
    fn accessible_info_reference_points() {
        let ens = basis_ensemble(4, 4);
        let povm = pretty_good_measurement(&ens).unwrap();
        let i = accessible_info_of_measurement(&ens, &povm).unwrap();
        assert!((i - 2.0).abs() < 1e-10);

        // single-effect measurement reveals nothing
        let trivial = Povm::new(
            ens.dims().clone(),
            vec![linalg::identity(4)],
        )
        .unwrap();
        assert!(accessible_info_of_measurement(&ens, &trivial)
            .unwrap()
            .abs()
            < 1e-12);
    }

    #[test]
    fn pgm_info_is_bounded_by_holevo() {
        let mut rng = rng_from_seed(8);
        let dims = SystemDims::single("Q", 3).unwrap();
        for _ in 0..10 {
            let states: Vec<DensityOp> = (0..4)
                .map(|_| crate::random::random_density(&dims, &mut rng).unwrap())
                .collect();
            let ens = Ensemble::uniform(states).unwrap();
            let povm = pretty_good_measurement(&ens).unwrap();
            let i = accessible_info_of_measurement(&ens, &povm).unwrap();
            let chi = holevo_chi(&ens);
            assert!(i <= chi + 1e-9, "I = {i}, chi = {chi}");
        }
    }

    #[test]
    fn holevo_reference_values() {
        let s = basis_ensemble(1, 2).states()[0].clone();
        let ens = Ensemble::uniform(vec![s.clone(), s]).unwrap();
        assert!(holevo_chi(&ens).abs() < 1e-12);

        let ens = basis_ensemble(3, 3);
        assert!((holevo_chi(&ens) - 3.0f64.log2()).abs() < 1e-10);

        // qubit trine: average is maximally mixed (H = 1 bit), conditionals
        // pure (H = 0), so chi is exactly 1 bit; any measurement extracts
        // strictly less
        let dims = SystemDims::single("Q", 2).unwrap();
        let states: Vec<DensityOp> = (0..3)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let v = DVector::from_row_slice(&[
                    Complex64::from(t.cos()),
                    Complex64::from(t.sin()),
                ]);
                PureState::new(dims.clone(), v).unwrap().density()
            })
            .collect();
        let ens = Ensemble::uniform(states).unwrap();
        assert!((holevo_chi(&ens) - 1.0).abs() < 1e-10);
        // the anti-trine measurement attains the known accessible
        // information log2(3) - 1, strictly below chi
        let effects: Vec<CMat> = (0..3)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let v = DVector::from_row_slice(&[
                    Complex64::from(-t.sin()),
                    Complex64::from(t.cos()),
                ]);
                ((&v) * v.adjoint()).scale(2.0 / 3.0)
            })
            .collect();
        let anti = Povm::new(dims, effects).unwrap();
        let i = accessible_info_of_measurement(&ens, &anti).unwrap();
        assert!((i - (3.0f64.log2() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn info_bounds_boundary_cases() {
        let b = accessible_info_bounds(4, 1.0).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-12);
        assert!((b.upper - 2.0).abs() < 1e-12);

        let b = accessible_info_bounds(4, 0.25).unwrap();
        assert!(b.upper.abs() < 1e-12);
        assert!(b.lower.abs() < 1e-9, "Fano at p = 1/N is zero, got {}", b.lower);

        let b = accessible_info_bounds(1, 1.0).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));

        assert!(accessible_info_bounds(4, 0.0).is_err());
    }

    #[test]
    fn fidelity_form_matches_count_form() {
        let mut rng = rng_from_seed(3);
        use rand::Rng;
        for _ in 0..50 {
            let d = 2 + (rng.gen::<u32>() % 3) as usize;
            let n = 2 + (rng.gen::<u32>() % 8) as usize;
            // optimal-measurement success probabilities live in [1/n, 1]
            let floor = 1.0 / n as f64;
            let p: f64 = floor + (1.0 - floor) * rng.gen::<f64>();
            let f = n as f64 * p / (d * d) as f64;
            let a = accessible_info_bounds(n, p).unwrap();
            let b = accessible_info_bounds_df(d, f, p).unwrap();
            assert_eq!(b.n, n);
            assert!((a.lower - b.lower).abs() <= 1e-10);
            assert!((a.upper - b.upper).abs() <= 1e-10);
        }
    }

    #[test]
    fn fidelity_form_reference_values() {
        // perfect qubit protocol: 2 bits
        let b = accessible_info_bounds_df(2, 1.0, 1.0).unwrap();
        assert!((b.upper - 2.0).abs() < 1e-12);
        assert!((b.lower - 2.0).abs() < 1e-12);

        // bound-entangled ceiling F = 1/d
        for d in [2usize, 3] {
            let p = 0.5;
            let f = 1.0 / d as f64;
            // need integer N = d^2 F / p = 2d
            let b = accessible_info_bounds_df(d, f, p).unwrap();
            assert_eq!(b.n, 2 * d);
            assert!((b.upper - (d as f64).log2()).abs() < 1e-12);
        }

        assert!(accessible_info_bounds_df(2, 0.3, 0.9).is_err());
    }

    #[test]
    fn sandwich_holds_with_certified_measurement() {
        let mut rng = rng_from_seed(9);
        let dims = SystemDims::single("Q", 3).unwrap();
        for _ in 0..5 {
            let states: Vec<DensityOp> = (0..4)
                .map(|_| crate::random::random_density(&dims, &mut rng).unwrap())
                .collect();
            let ens = Ensemble::uniform(states).unwrap();
            let res = optimal_discrimination(&ens).unwrap();
            let bounds = accessible_info_bounds(4, res.p_star).unwrap();
            let i = accessible_info_of_measurement(&ens, &res.povm).unwrap();
            assert!(
                bounds.lower - 1e-9 <= i && i <= bounds.upper + 1e-9,
                "I = {i} outside [{}, {}]",
                bounds.lower,
                bounds.upper
            );
        }
    }
}
