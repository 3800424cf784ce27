//! Projections onto the feasible sets of the solvers: products of PSD cones
//! intersected with an affine constraint (POVM completeness or the
//! trace-preserving Choi marginal), composed with Dykstra's alternating
//! scheme, plus the shared projected-ascent loop for linear objectives.

use crate::qcore::linalg::{self, CMat};

/// Affine part of a feasible set over a list of Hermitian matrices.
pub(crate) trait AffinePart {
    fn project(&self, x: &mut [CMat]);
    fn residual(&self, x: &[CMat]) -> f64;
}

/// `sum_x M_x = I` over `n` matrices of size `dim`.
pub(crate) struct PovmAffine {
    pub dim: usize,
}

impl AffinePart for PovmAffine {
    fn project(&self, x: &mut [CMat]) {
        let n = x.len() as f64;
        let mut sum = CMat::zeros(self.dim, self.dim);
        for m in x.iter() {
            sum += m;
        }
        let shift = (sum - linalg::identity(self.dim)).scale(1.0 / n);
        for m in x.iter_mut() {
            *m -= &shift;
        }
    }

    fn residual(&self, x: &[CMat]) -> f64 {
        let mut sum = CMat::zeros(self.dim, self.dim);
        for m in x.iter() {
            sum += m;
        }
        linalg::max_abs(&(sum - linalg::identity(self.dim)))
    }
}

/// `tr_out J = I_in` for a single Choi matrix on `in ⊗ out`.
pub(crate) struct ChoiAffine {
    pub din: usize,
    pub dout: usize,
}

impl AffinePart for ChoiAffine {
    fn project(&self, x: &mut [CMat]) {
        let j = &mut x[0];
        let marg = linalg::partial_trace(j, &[self.din, self.dout], &[0]);
        let deficit = (linalg::identity(self.din) - marg).scale(1.0 / self.dout as f64);
        *j += linalg::kron(&deficit, &linalg::identity(self.dout));
    }

    fn residual(&self, x: &[CMat]) -> f64 {
        let marg = linalg::partial_trace(&x[0], &[self.din, self.dout], &[0]);
        linalg::max_abs(&(marg - linalg::identity(self.din)))
    }
}

#[cfg(test)]
fn psd_residual(x: &[CMat]) -> f64 {
    x.iter()
        .map(|m| (-linalg::min_eig(m)).max(0.0))
        .fold(0.0, f64::max)
}

/// Dykstra's alternating projection onto `PSD^k ∩ affine`. Returns the
/// post-PSD iterate, so eigenvalues are exactly clamped and the affine
/// residual is below `tol` (or the iteration cap was hit).
pub(crate) fn dykstra(
    mut x: Vec<CMat>,
    affine: &impl AffinePart,
    tol: f64,
    max_iter: usize,
) -> Vec<CMat> {
    let k = x.len();
    let zero: Vec<CMat> = x
        .iter()
        .map(|m| CMat::zeros(m.nrows(), m.ncols()))
        .collect();
    let mut p = zero.clone();
    let mut q = zero;
    let mut best = x.clone();

    for _ in 0..max_iter {
        // PSD half-step
        let mut y = Vec::with_capacity(k);
        for (m, pi) in x.iter().zip(p.iter()) {
            y.push(linalg::psd_project(&(m + pi)));
        }
        for i in 0..k {
            p[i] = &x[i] + &p[i] - &y[i];
        }
        // affine half-step
        let mut z: Vec<CMat> = y.iter().zip(q.iter()).map(|(a, b)| a + b).collect();
        affine.project(&mut z);
        for i in 0..k {
            q[i] = &y[i] + &q[i] - &z[i];
        }
        x = z;

        let aff_res = affine.residual(&y);
        best = y;
        if aff_res < tol {
            return best;
        }
    }
    best
}

pub(crate) struct AscentOptions {
    pub max_iter: usize,
    /// Stop when the duality gap (if a certificate is given) drops below this.
    pub gap_tol: f64,
    /// Stop when the objective stalls below this relative improvement.
    pub stall_tol: f64,
    pub check_every: usize,
    /// Projection accuracy during the ascent; the returned point is
    /// re-projected to `polish_tol` and its value re-evaluated there.
    pub dykstra_tol: f64,
    pub dykstra_iter: usize,
    pub polish_tol: f64,
    pub polish_iter: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            gap_tol: 1e-6,
            stall_tol: 1e-12,
            check_every: 10,
            dykstra_tol: 1e-7,
            dykstra_iter: 40,
            polish_tol: 1e-11,
            polish_iter: 800,
        }
    }
}

pub(crate) struct AscentOutcome {
    pub x: Vec<CMat>,
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub gap_met: bool,
}

pub(crate) fn objective(coeffs: &[CMat], x: &[CMat]) -> f64 {
    coeffs
        .iter()
        .zip(x.iter())
        .map(|(c, m)| linalg::trace_product(c, m).re)
        .sum()
}

/// Projected-gradient ascent of the linear functional `sum_x tr(C_x M_x)`
/// over `PSD^k ∩ affine`, step `1/L` with `L` the largest coefficient norm.
///
/// Each step is nondecreasing up to the projection tolerance; the best
/// iterate is returned. `certificate` maps the current point to an upper
/// bound on the optimum; when provided, iteration stops once
/// `bound - value <= gap_tol`.
pub(crate) fn ascend(
    coeffs: &[CMat],
    start: Vec<CMat>,
    affine: &impl AffinePart,
    opts: &AscentOptions,
    certificate: Option<&dyn Fn(&[CMat]) -> f64>,
) -> AscentOutcome {
    let lipschitz = coeffs
        .iter()
        .map(|c| {
            let (vals, _) = linalg::eigh(c);
            vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
        })
        .fold(0.0f64, f64::max);

    let mut x = dykstra(start, affine, opts.polish_tol, opts.polish_iter);
    let mut value = objective(coeffs, &x);
    let mut best = x.clone();
    let mut best_value = value;
    let mut gap = f64::INFINITY;
    let mut gap_met = false;

    if lipschitz <= 0.0 {
        return AscentOutcome {
            x,
            value,
            gap,
            iterations: 0,
            gap_met: certificate.is_none(),
        };
    }
    let step = 1.0 / lipschitz;

    // inexact projections jitter the objective by roughly the projection
    // tolerance times the objective scale; progress below that level is
    // indistinguishable from noise
    let noise_floor = 4.0 * lipschitz * opts.dykstra_tol * coeffs.len() as f64;

    let mut iterations = 0;
    let mut last_checked = best_value;
    let mut last_gap = f64::INFINITY;
    let mut stalled_checks = 0usize;
    while iterations < opts.max_iter {
        iterations += 1;
        let proposal: Vec<CMat> = x
            .iter()
            .zip(coeffs.iter())
            .map(|(m, c)| m + c.scale(step))
            .collect();
        x = dykstra(proposal, affine, opts.dykstra_tol, opts.dykstra_iter);
        value = objective(coeffs, &x);
        if value > best_value {
            best_value = value;
            best = x.clone();
        }

        if iterations % opts.check_every == 0 {
            let threshold = (opts.stall_tol * best_value.abs().max(1.0)).max(noise_floor);
            let value_stuck = best_value - last_checked < threshold;
            if let Some(cert) = certificate {
                let bound = cert(&best);
                gap = bound - best_value;
                if gap <= opts.gap_tol {
                    gap_met = true;
                    break;
                }
                let gap_stuck = gap > last_gap - 1e-14;
                stalled_checks = if value_stuck && gap_stuck {
                    stalled_checks + 1
                } else {
                    0
                };
                if stalled_checks >= 4 {
                    break;
                }
                last_gap = last_gap.min(gap);
            } else if value_stuck {
                break;
            }
            last_checked = best_value;
        }
    }
    // the loop ran with loose projections; land the best point exactly in
    // the feasible set and report its value there
    let polished = dykstra(best, affine, opts.polish_tol, opts.polish_iter);
    let polished_value = objective(coeffs, &polished);
    if certificate.is_none() {
        gap = 0.0;
        gap_met = true;
    } else if let Some(cert) = certificate {
        let bound = cert(&polished);
        gap = bound - polished_value;
        gap_met = gap <= opts.gap_tol;
    }
    AscentOutcome {
        x: polished,
        value: polished_value,
        gap,
        iterations,
        gap_met,
    }
}
