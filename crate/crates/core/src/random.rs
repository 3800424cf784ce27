//! Seeded sampling of states, measurements, and channels.
//!
//! Everything takes an explicit [`PortableRng`] (ChaCha8): the same seed
//! produces the same objects on every platform, which the report fixtures
//! rely on.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::StandardNormal;

pub use rand::Rng;

use crate::qcore::linalg::{self, CMat, CVec};
use crate::qcore::{Channel, DensityOp, Povm, PureState, SystemDims};
use crate::Result;


/// The fixed RNG all randomized routines use.
pub type PortableRng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> PortableRng {
    PortableRng::seed_from_u64(seed)
}

fn cgauss(rng: &mut PortableRng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut PortableRng) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| cgauss(rng))
}

/// Haar-random unitary via QR of a Ginibre matrix with the standard phase
/// correction on the diagonal of R.
pub fn haar_unitary(d: usize, rng: &mut PortableRng) -> CMat {
    let g = gaussian_matrix(d, d, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::from(1.0)
        };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure(dims: &SystemDims, rng: &mut PortableRng) -> Result<PureState> {
    let d = dims.total();
    let mut v = CVec::zeros(d);
    for i in 0..d {
        v[i] = cgauss(rng);
    }
    let n = v.norm();
    PureState::new(dims.clone(), v / Complex64::from(n))
}

/// Full-rank random density operator (normalized Wishart).
pub fn random_density(dims: &SystemDims, rng: &mut PortableRng) -> Result<DensityOp> {
    let d = dims.total();
    let g = gaussian_matrix(d, d, rng);
    let w = &g * g.adjoint();
    let tr = linalg::trace(&w).re;
    DensityOp::new(dims.clone(), w.scale(1.0 / tr))
}

/// Random `n`-outcome POVM: Wishart effects symmetrized by `S^(-1/2)`.
pub fn random_povm(dims: &SystemDims, n: usize, rng: &mut PortableRng) -> Result<Povm> {
    let d = dims.total();
    let gs: Vec<CMat> = (0..n)
        .map(|_| {
            let g = gaussian_matrix(d, d, rng);
            &g * g.adjoint()
        })
        .collect();
    let mut s = CMat::zeros(d, d);
    for g in &gs {
        s += g;
    }
    let si = linalg::inv_sqrt_on_support(&s, 1e-12);
    let effects: Vec<CMat> = gs.iter().map(|g| &si * g * &si).collect();
    Povm::new(dims.clone(), effects)
}

/// Haar-random isometry channel `din -> dout` with environment dimension
/// `din` (Stinespring form).
pub fn random_channel(
    din: usize,
    dout: usize,
    in_label: &str,
    out_label: &str,
    rng: &mut PortableRng,
) -> Result<Channel> {
    let env = din;
    let big = haar_unitary(dout * env, rng);
    // isometry = first din columns; K_e = (I_out ⊗ <e|) V with env second
    let mut kraus = Vec::with_capacity(env);
    for e in 0..env {
        let mut k = CMat::zeros(dout, din);
        for o in 0..dout {
            for i in 0..din {
                k[(o, i)] = big[(o * env + e, i)];
            }
        }
        kraus.push(k);
    }
    Channel::from_kraus(
        SystemDims::single(in_label, din)?,
        SystemDims::single(out_label, dout)?,
        kraus,
    )
}

/// Random separable state: a mixture of `terms` product states.
pub fn random_separable(
    dims: &SystemDims,
    terms: usize,
    rng: &mut PortableRng,
) -> Result<DensityOp> {
    assert_eq!(dims.len(), 2, "separable sampling expects two factors");
    let (la, da) = dims.factor(0);
    let (lb, db) = dims.factor(1);
    let da_dims = SystemDims::single(la, da)?;
    let db_dims = SystemDims::single(lb, db)?;
    let d = dims.total();
    let mut m = CMat::zeros(d, d);
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    for w in weights {
        let a = random_density(&da_dims, rng)?;
        let b = random_density(&db_dims, rng)?;
        m += linalg::kron(a.matrix(), b.matrix()).scale(w);
    }
    DensityOp::new(dims.clone(), m)
}

/// Random bipartite state with positive partial transpose: a random state is
/// mixed toward the maximally mixed state until the partial transpose clears
/// `margin`.
pub fn random_ppt(dims: &SystemDims, margin: f64, rng: &mut PortableRng) -> Result<DensityOp> {
    assert_eq!(dims.len(), 2, "PPT sampling expects two factors");
    let d = dims.total();
    let labels: Vec<&str> = dims.labels().collect();
    loop {
        let rho = random_density(dims, rng)?;
        let pt = rho.herm().partial_transpose(&[labels[1]])?;
        let min = pt.min_eigenvalue();
        if min >= margin {
            return Ok(rho);
        }
        // mix toward I/d: eigenvalues of the partial transpose shift the same way
        let t = (margin - min) / (1.0 / d as f64 - min);
        if !(0.0..1.0).contains(&t) {
            continue;
        }
        let mixed = rho.matrix().scale(1.0 - t) + linalg::identity(d).scale(t / d as f64);
        let cand = DensityOp::new(dims.clone(), mixed)?;
        let pt = cand.herm().partial_transpose(&[labels[1]])?;
        if pt.min_eigenvalue() >= margin - 1e-12 {
            return Ok(cand);
        }
    }
}
