//! Alternating maximization for the two bilinear programs: the spectral
//! radius of locally processed conditional states, and the teleportation
//! fidelity at a fixed message count.
//!
//! Both see-saws return achieved feasible values, i.e. certified *lower*
//! bounds. The per-iteration value trace is nondecreasing; restarts run
//! independently from seeds `base_seed + k` and the best one is reported.

use num_complex::Complex64;

use super::project::{ascend, AscentOptions, ChoiAffine};
use super::{optimal_discrimination_opts, Ensemble};
use crate::qcore::linalg::{self, CMat};
use crate::qcore::{Channel, DensityOp, Povm, SystemDims};
use crate::teleport::weyl_unitary;
use crate::witness::conditional_state;
use crate::{Error, Result};

/// Tuning knobs shared by the see-saws.
#[derive(Debug, Clone, Copy)]
pub struct SeesawOptions {
    /// Maximum outer alternations per restart.
    pub max_iter: usize,
    /// Projected-gradient iterations per linear step.
    pub inner_iters: usize,
    /// Relative improvement below which a restart is declared converged.
    pub rel_tol: f64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            inner_iters: 150,
            rel_tol: 1e-9,
        }
    }
}

/// Result of a see-saw run: the best restart's value, iteration trace, and
/// argmax objects (whichever apply to the program that produced it).
#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub value: f64,
    pub iterations: usize,
    /// Objective after each outer iteration of the best restart.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// Spectral-radius program: the optimal rank-one state on `A ⊗ C`.
    pub sigma: Option<DensityOp>,
    /// Spectral-radius program: the optimal channel's Choi matrix on `B ⊗ C`.
    pub choi: Option<CMat>,
    /// Fidelity program: the optimal measurement on `(C', A)`.
    pub povm: Option<Povm>,
    /// Fidelity program: the optimal decoders `B -> C`.
    pub decoders: Option<Vec<Channel>>,
    pub restart_seeds: Vec<u64>,
    pub restart_values: Vec<f64>,
}

/// Choi matrix of a canonical channel `din -> dout` that acts as the
/// identity where dimensions permit: an isometric embedding for
/// `din <= dout`, otherwise measure-and-prepare modulo `dout`.
fn embed_choi(din: usize, dout: usize) -> CMat {
    let kraus: Vec<CMat> = if din <= dout {
        let mut k = CMat::zeros(dout, din);
        for i in 0..din {
            k[(i, i)] = Complex64::from(1.0);
        }
        vec![k]
    } else {
        (0..din)
            .map(|j| {
                let mut k = CMat::zeros(dout, din);
                k[(j % dout, j)] = Complex64::from(1.0);
                k
            })
            .collect()
    };
    let ch = Channel::from_kraus(
        SystemDims::single("B", din).unwrap(),
        SystemDims::single("C", dout).unwrap(),
        kraus,
    )
    .expect("canonical Kraus set is trace preserving");
    ch.choi_matrix()
}

fn depolarizing_choi(din: usize, dout: usize) -> CMat {
    linalg::kron(
        &linalg::identity(din),
        &linalg::identity(dout).scale(1.0 / dout as f64),
    )
}

fn sym(m: CMat) -> CMat {
    let adj = m.adjoint();
    (m + adj).scale(0.5)
}

/// Lower bound on the spectral-radius program
/// `max tr[sigma tr_B(rho_cond^{T_B} J)]` over states `sigma` on `A ⊗ C` and
/// Choi matrices `J` of channels `B -> C`. A value above 1 certifies that
/// some local processing of `rho` violates the reduction criterion.
pub fn lambda_star(
    rho: &DensityOp,
    dim_c: usize,
    restarts: usize,
    max_iter: usize,
    base_seed: u64,
) -> Result<SeesawResult> {
    if dim_c < 2 {
        return Err(Error::InvalidArgument("dim_c must be >= 2".into()));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let cond = conditional_state(rho)?;
    let (label_b, dim_b) = cond.op().dims().factor(1);
    let label_b = label_b.to_string();
    let a = cond.support_dim();
    let b = dim_b;
    let c = dim_c;
    let rho_t = cond.op().partial_transpose(&[label_b.as_str()])?;
    let full = [a, b, c];
    let rho_t_prom = linalg::promote(rho_t.matrix(), &[a, b], &[0, 1], &full);

    let value_map = |j: &CMat| -> CMat {
        let j_prom = linalg::promote(j, &[b, c], &[1, 2], &full);
        linalg::partial_trace(&(&rho_t_prom * j_prom), &full, &[0, 2])
    };

    let opts = SeesawOptions {
        max_iter,
        ..SeesawOptions::default()
    };

    let mut best: Option<(f64, CMat, CMat, Vec<f64>, bool)> = None;
    let mut restart_seeds = Vec::with_capacity(restarts);
    let mut restart_values = Vec::with_capacity(restarts);

    for k in 0..restarts {
        let seed = base_seed.wrapping_add(k as u64);
        restart_seeds.push(seed);
        let j0 = match k {
            0 => embed_choi(b, c),
            1 => depolarizing_choi(b, c),
            _ => {
                let mut rng = crate::random::rng_from_seed(seed);
                crate::random::random_channel(b, c, "B", "C", &mut rng)?.choi_matrix()
            }
        };
        let (value, sigma, j, trace, converged) = seesaw_spectral(&j0, &value_map, |sigma| {
            let s_prom = linalg::promote(sigma, &[a, c], &[0, 2], &full);
            sym(linalg::partial_trace(&(s_prom * &rho_t_prom), &full, &[1, 2]))
        }, b, c, &opts);
        restart_values.push(value);
        let better = best.as_ref().map(|(v, ..)| value > *v).unwrap_or(true);
        if better {
            best = Some((value, sigma, j, trace, converged));
        }
    }

    let (value, sigma, choi, trace, converged) = best.unwrap();
    let (label_a, _) = cond.op().dims().factor(0);
    let sigma_dims = SystemDims::new([(label_a.to_string(), a), ("C".to_string(), c)])?;
    let iterations = trace.len().saturating_sub(1);
    Ok(SeesawResult {
        value,
        iterations,
        trace,
        converged,
        sigma: Some(DensityOp::from_herm(crate::qcore::HermOp::new(
            sigma_dims, sigma,
        )?)?),
        choi: Some(choi),
        povm: None,
        decoders: None,
        restart_seeds,
        restart_values,
    })
}

/// One restart of the spectral-radius see-saw: exact top-eigenvector
/// sigma-step, projected-gradient J-step.
fn seesaw_spectral(
    j0: &CMat,
    value_map: &impl Fn(&CMat) -> CMat,
    gradient: impl Fn(&CMat) -> CMat,
    din: usize,
    dout: usize,
    opts: &SeesawOptions,
) -> (f64, CMat, CMat, Vec<f64>, bool) {
    let affine = ChoiAffine { din, dout };
    let inner = AscentOptions {
        max_iter: opts.inner_iters,
        stall_tol: 1e-10,
        dykstra_tol: 1e-6,
        dykstra_iter: 12,
        ..AscentOptions::default()
    };

    let mut j = j0.clone();
    let top = |t: &CMat| -> (f64, CMat) {
        let (vals, vecs) = linalg::eigh(t);
        let v = vecs.column(0);
        (vals[0], &v * v.adjoint())
    };
    let (mut value, mut sigma) = top(&value_map(&j));
    let mut trace = vec![value];
    let mut converged = false;

    for _ in 0..opts.max_iter {
        let g = gradient(&sigma);
        let out = ascend(&[g], vec![j.clone()], &affine, &inner, None);
        let j_new = out.x.into_iter().next().unwrap();
        let (value_new, sigma_new) = top(&value_map(&j_new));
        if value_new < value - 1e-12 {
            // inexact projection produced a regression; keep the old point
            converged = true;
            break;
        }
        let improvement = value_new - value;
        j = j_new;
        sigma = sigma_new;
        value = value_new;
        trace.push(value);
        if improvement < opts.rel_tol * value.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    (value, sigma, j, trace, converged)
}

/// Lower bound on the teleportation fidelity of `rho` at channel dimension
/// `dim_c` and message count `n`, by alternating a certified discrimination
/// step over the measurement with independent Choi-matrix ascents over the
/// decoders. `warm_decoders`, when given, seeds the first restart.
pub fn maximize_teleportation_fidelity(
    rho: &DensityOp,
    dim_c: usize,
    n: usize,
    restarts: usize,
    max_iter: usize,
    base_seed: u64,
    warm_decoders: Option<&[Channel]>,
) -> Result<SeesawResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one message".into()));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let (_, a) = rho.dims().factor(0);
    let (label_b, b) = rho.dims().factor(1);
    let label_b = label_b.to_string();
    let c = dim_c;
    let rho_t = rho.herm().partial_transpose(&[label_b.as_str()])?;
    let full = [a, b, c];
    let rho_t_prom = linalg::promote(rho_t.matrix(), &[a, b], &[0, 1], &full);
    let ac_dims = SystemDims::new([("A", a), ("C", c)])?;

    let omega_of = |j: &CMat| -> CMat {
        let j_prom = linalg::promote(j, &[b, c], &[1, 2], &full);
        linalg::partial_trace(&(&rho_t_prom * j_prom), &full, &[0, 2])
    };
    let decoder_grad = |effect: &CMat| -> CMat {
        let e_prom = linalg::promote(effect, &[a, c], &[0, 2], &full);
        sym(linalg::partial_trace(&(e_prom * &rho_t_prom), &full, &[1, 2]))
    };

    if let Some(w) = warm_decoders {
        if w.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} warm decoders for {} messages",
                w.len(),
                n
            )));
        }
    }

    let opts = SeesawOptions {
        max_iter,
        ..SeesawOptions::default()
    };
    let affine = ChoiAffine { din: b, dout: c };
    let inner = AscentOptions {
        max_iter: opts.inner_iters,
        stall_tol: 1e-10,
        dykstra_tol: 1e-6,
        dykstra_iter: 12,
        ..AscentOptions::default()
    };
    let c2 = (c * c) as f64;

    let mut best: Option<(f64, Vec<CMat>, Vec<CMat>, Vec<f64>, bool)> = None;
    let mut restart_seeds = Vec::with_capacity(restarts);
    let mut restart_values = Vec::with_capacity(restarts);

    for k in 0..restarts {
        let seed = base_seed.wrapping_add(k as u64);
        restart_seeds.push(seed);
        let mut js: Vec<CMat> = if k == 0 && warm_decoders.is_some() {
            warm_decoders
                .unwrap()
                .iter()
                .map(|d| d.choi_matrix())
                .collect()
        } else {
            match k {
                0 if n == c * c && b == c => {
                    // correction unitaries of the perfect protocol
                    let mut out = Vec::with_capacity(n);
                    for x in 0..c {
                        for z in 0..c {
                            let w = weyl_unitary(c, x, z).transpose();
                            let ch = Channel::unitary(w, "B", "C")?;
                            out.push(ch.choi_matrix());
                        }
                    }
                    out
                }
                0 => vec![embed_choi(b, c); n],
                1 => vec![depolarizing_choi(b, c); n],
                _ => {
                    let mut rng = crate::random::rng_from_seed(seed);
                    (0..n)
                        .map(|_| {
                            crate::random::random_channel(b, c, "B", "C", &mut rng)
                                .map(|ch| ch.choi_matrix())
                        })
                        .collect::<Result<Vec<_>>>()?
                }
            }
        };

        let povm_step = |js: &[CMat], warm: Option<&[CMat]>| -> Result<(Vec<CMat>, f64)> {
            let omegas = js.iter().map(omega_of).collect::<Vec<_>>();
            let states = omegas
                .iter()
                .map(|m| {
                    DensityOp::from_herm(crate::qcore::HermOp::unchecked(ac_dims.clone(), m.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            let ens = Ensemble::uniform(states)?;
            // an uncertified coarse step is fine here: the polished value
            // stays feasible, and the outer loop handles convergence
            let step_opts = AscentOptions {
                max_iter: 200,
                dykstra_tol: 1e-6,
                dykstra_iter: 12,
                ..AscentOptions::default()
            };
            let (res, _) = optimal_discrimination_opts(&ens, warm, &step_opts, false)?;
            let f = res.p_star * n as f64 / c2;
            Ok((res.povm.effects().to_vec(), f))
        };

        let (mut effects, mut value) = povm_step(&js, None)?;
        let mut trace = vec![value];
        let mut converged = false;

        for _ in 0..opts.max_iter {
            let mut js_new = Vec::with_capacity(n);
            for (j, e) in js.iter().zip(effects.iter()) {
                let g = decoder_grad(e);
                let out = ascend(&[g], vec![j.clone()], &affine, &inner, None);
                js_new.push(out.x.into_iter().next().unwrap());
            }
            let (effects_new, value_new) = povm_step(&js_new, Some(&effects))?;
            if value_new < value - 1e-12 {
                converged = true;
                break;
            }
            let improvement = value_new - value;
            js = js_new;
            effects = effects_new;
            value = value_new;
            trace.push(value);
            if improvement < opts.rel_tol * value.abs().max(1.0) {
                converged = true;
                break;
            }
        }

        restart_values.push(value);
        let better = best.as_ref().map(|(v, ..)| value > *v).unwrap_or(true);
        if better {
            best = Some((value, effects, js, trace, converged));
        }
    }

    let (value, effects, js, trace, converged) = best.unwrap();
    // measurement back in the protocol's (C', A) convention
    let povm_ca: Vec<CMat> = effects
        .iter()
        .map(|e| linalg::reorder(e, &[a, c], &[1, 0]))
        .collect();
    let povm = Povm::new(SystemDims::new([("C'", c), ("A", a)])?, povm_ca)?;
    let decoders = js
        .into_iter()
        .map(|j| {
            Channel::from_choi(
                SystemDims::single("B", b)?,
                SystemDims::single("C", c)?,
                j,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let iterations = trace.len().saturating_sub(1);
    Ok(SeesawResult {
        value,
        iterations,
        trace,
        converged,
        sigma: None,
        choi: None,
        povm: Some(povm),
        decoders: Some(decoders),
        restart_seeds,
        restart_values,
    })
}
