//! Reduction-criterion machinery: the direct operator test, the
//! conditional-state formulation, the Werner family, and the explicit
//! qutrit-to-qubit processing that turns criterion-satisfying Werner states
//! into violating ones.

use num_complex::Complex64;

use crate::optim;
use crate::qcore::linalg::{self, CMat};
use crate::qcore::{Channel, DensityOp, HermOp, PureState, SystemDims};
use crate::tol::TOL_PSD;
use crate::{Error, Result};

/// Outcome of a reduction-criterion test on a bipartite state.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    /// `rho_L ⊗ I_R - rho` on the requested cut (left factors first).
    pub operator: HermOp,
    pub min_eigenvalue: f64,
    pub violated: bool,
    /// Eigenvector of the most negative eigenvalue, present iff violated.
    pub witness: Option<PureState>,
}

/// Tests `rho_L ⊗ I_R >= rho` across the cut whose left side is `left`.
///
/// The report's operator and witness live on the reordered system
/// `(left..., right...)`. Degenerate minimal eigenspaces are resolved by
/// lexicographic comparison of the candidate eigenvectors, so the witness is
/// deterministic.
pub fn reduction_check(rho: &DensityOp, left: &[&str]) -> Result<ReductionReport> {
    let right: Vec<&str> = rho.dims().labels().filter(|l| !left.contains(l)).collect();
    if left.is_empty() || right.is_empty() {
        return Err(Error::InvalidArgument(
            "reduction cut must leave factors on both sides".into(),
        ));
    }
    let order: Vec<&str> = left.iter().chain(right.iter()).copied().collect();
    let rho = rho.reorder(&order)?;
    let rho_l = rho.marginal(left)?;
    let dim_r: usize = right
        .iter()
        .map(|l| rho.dims().dim_of(l).unwrap())
        .product();
    let lifted = linalg::kron(rho_l.matrix(), &linalg::identity(dim_r));
    let op = HermOp::unchecked(rho.dims().clone(), lifted - rho.matrix());

    let (vals, vecs) = op.eig();
    let min = *vals.last().unwrap();
    let violated = min < -TOL_PSD;
    let witness = if violated {
        // candidates within round-off of the minimum, ties broken
        // lexicographically for reproducibility
        let n = vals.len();
        let mut best: Option<usize> = None;
        for k in (0..n).rev() {
            if vals[k] > min + 1e-12 {
                break;
            }
            best = match best {
                None => Some(k),
                Some(cur) => {
                    let a = vecs.column(k);
                    let b = vecs.column(cur);
                    let mut pick = cur;
                    for i in 0..a.len() {
                        let ord = (a[i].re, a[i].im)
                            .partial_cmp(&(b[i].re, b[i].im))
                            .unwrap_or(std::cmp::Ordering::Equal);
                        match ord {
                            std::cmp::Ordering::Less => {
                                pick = k;
                                break;
                            }
                            std::cmp::Ordering::Greater => break,
                            std::cmp::Ordering::Equal => {}
                        }
                    }
                    Some(pick)
                }
            };
        }
        let col = vecs.column(best.unwrap()).into();
        Some(PureState::new(op.dims().clone(), col)?)
    } else {
        None
    };
    Ok(ReductionReport {
        operator: op,
        min_eigenvalue: min,
        violated,
        witness,
    })
}

/// Conditional state `rho_A^(-1/2) rho rho_A^(-1/2)` of a bipartite state,
/// restricted to the support of the first marginal. Its trace equals the
/// support dimension, and the reduction criterion holds iff its largest
/// eigenvalue is at most 1.
#[derive(Debug, Clone)]
pub struct ConditionalState {
    op: HermOp,
    support_dim: usize,
}

impl ConditionalState {
    pub fn op(&self) -> &HermOp {
        &self.op
    }

    pub fn support_dim(&self) -> usize {
        self.support_dim
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.op.max_eigenvalue()
    }
}

pub fn conditional_state(rho: &DensityOp) -> Result<ConditionalState> {
    if rho.dims().len() != 2 {
        return Err(Error::InvalidArgument(
            "conditional state expects a bipartite operator".into(),
        ));
    }
    let (label_a, _) = rho.dims().factor(0);
    let (label_b, dim_b) = rho.dims().factor(1);
    let label_a = label_a.to_string();
    let label_b = label_b.to_string();
    let rho_a = rho.marginal(&[label_a.as_str()])?;
    let (evals, basis) = linalg::support_basis(rho_a.matrix(), 1e-12);
    let r = evals.len();
    // W = V diag(1/sqrt(lambda)); conditional = (W† ⊗ I) rho (W ⊗ I)
    let mut w = basis.clone();
    for (k, &v) in evals.iter().enumerate() {
        let s = Complex64::from(1.0 / v.sqrt());
        for i in 0..w.nrows() {
            w[(i, k)] *= s;
        }
    }
    let lift = linalg::kron(&w, &linalg::identity(dim_b));
    let cond = lift.adjoint() * rho.matrix() * &lift;
    let tr = linalg::trace(&cond).re;
    if (tr - r as f64).abs() > 1e-9 {
        return Err(Error::BadTrace {
            got: tr,
            expected: r as f64,
        });
    }
    let dims = SystemDims::new([(label_a, r), (label_b, dim_b)])?;
    Ok(ConditionalState {
        op: HermOp::unchecked(dims, cond),
        support_dim: r,
    })
}

/// Exchange-symmetric state family on two `d`-dimensional systems:
/// `rho = [(d - lambda) I + (d lambda - 1) F] / (d^3 - d)` with
/// `tr(rho F) = lambda` and invariance under `U ⊗ U`.
pub fn werner_state(d: usize, lambda: f64) -> Result<DensityOp> {
    if d < 2 {
        return Err(Error::InvalidArgument("werner_state needs d >= 2".into()));
    }
    if !(-1.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} outside [-1, 1]"
        )));
    }
    let swap = crate::qcore::swap_operator(d)?;
    let denom = (d * d * d - d) as f64;
    let mat = (linalg::identity(d * d).scale(d as f64 - lambda)
        + swap.matrix().scale(d as f64 * lambda - 1.0))
    .scale(1.0 / denom);
    DensityOp::new(SystemDims::new([("A", d), ("B", d)])?, mat)
}

/// The 3 -> 2 channel with Kraus operators
/// `P = |0><0| + |1><1|` and `Q = |0><2|`: the first two levels pass through
/// coherently, the third is folded onto `|0>`.
pub fn qutrit_to_qubit_channel() -> Channel {
    let mut p = CMat::zeros(2, 3);
    p[(0, 0)] = Complex64::from(1.0);
    p[(1, 1)] = Complex64::from(1.0);
    let mut q = CMat::zeros(2, 3);
    q[(0, 2)] = Complex64::from(1.0);
    Channel::from_kraus(
        SystemDims::single("B", 3).unwrap(),
        SystemDims::single("C", 2).unwrap(),
        vec![p, q],
    )
    .expect("fixed Kraus pair is trace preserving")
}

/// Smallest eigenvalue of `(id ⊗ E)(rho_lambda^{T_A})` for the Werner state
/// on two qutrits and the channel of [`qutrit_to_qubit_channel`]. The
/// processed state `(id ⊗ E)(rho_lambda)` violates the reduction criterion
/// exactly when this is negative.
pub fn processed_werner_min_eig(lambda: f64) -> Result<f64> {
    let rho = werner_state(3, lambda)?;
    let pt = rho.herm().partial_transpose(&["A"])?;
    let out = qutrit_to_qubit_channel().apply(&pt, "B")?;
    Ok(out.min_eigenvalue())
}

/// Search for a channel `B -> C` whose application to the second factor of
/// `rho` produces a reduction-criterion violation. Runs the bilinear
/// conditional-state see-saw with the given number of restarts; a `None`
/// result means the search failed, not that no such channel exists.
pub fn find_violating_channel(
    rho: &DensityOp,
    dim_c: usize,
    restarts: usize,
    base_seed: u64,
) -> Result<Option<(Channel, ReductionReport)>> {
    if dim_c < 2 {
        return Err(Error::InvalidArgument("dim_c must be >= 2".into()));
    }
    let result = optim::lambda_star(rho, dim_c, restarts, 200, base_seed)?;
    if result.value <= 1.0 + 1e-6 {
        return Ok(None);
    }
    let choi = result
        .choi
        .ok_or_else(|| Error::InvalidArgument("see-saw returned no channel".into()))?;
    let (_, dim_b) = rho.dims().factor(1);
    let channel = Channel::from_choi(
        SystemDims::single("B", dim_b)?,
        SystemDims::single("C", dim_c)?,
        choi,
    )?;
    let (label_b, _) = rho.dims().factor(1);
    let label_b = label_b.to_string();
    let omega = channel.apply(rho.herm(), &label_b)?;
    let omega = DensityOp::from_herm(omega)?;
    let (label_a, _) = omega.dims().factor(0);
    let label_a = label_a.to_string();
    let report = reduction_check(&omega, &[label_a.as_str()])?;
    if report.violated {
        Ok(Some((channel, report)))
    } else {
        Ok(None)
    }
}
