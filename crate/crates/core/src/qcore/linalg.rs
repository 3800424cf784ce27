//! Raw matrix kernels on bare `DMatrix<Complex64>` plus explicit factor-dim
//! lists. The typed layer ([`super::herm`], [`super::channel`]) wraps these;
//! the optimizers call them directly to avoid re-validating invariants in
//! inner loops.
//!
//! Index convention: for factor dims `[d0, d1, ..]` the flat index is
//! row-major with the *first* factor most significant, matching
//! `kron(a, b)[i*db + j, k*db + l] = a[i,k] * b[j,l]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Hermiticity residual `max |m - m†|`.
pub fn herm_residual(m: &CMat) -> f64 {
    let mut r = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > r {
                r = d;
            }
        }
    }
    r
}

pub fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

pub fn frob_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut s = Complex64::default();
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// Kronecker product (first factor most significant).
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Partial trace keeping the factors at `keep` (in their original order).
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let st = strides(dims);
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
    let keep_dim: usize = keep.iter().map(|&p| dims[p]).product();
    let tr_dim: usize = traced.iter().map(|&p| dims[p]).product();
    let keep_st = strides(&keep.iter().map(|&p| dims[p]).collect::<Vec<_>>());
    let tr_st = strides(&traced.iter().map(|&p| dims[p]).collect::<Vec<_>>());

    let mut out = CMat::zeros(keep_dim, keep_dim);
    for kr in 0..keep_dim {
        for kc in 0..keep_dim {
            let mut acc = Complex64::default();
            for t in 0..tr_dim {
                let mut row = 0usize;
                let mut col = 0usize;
                for (a, &p) in keep.iter().enumerate() {
                    let ir = kr / keep_st[a] % dims[p];
                    let ic = kc / keep_st[a] % dims[p];
                    row += ir * st[p];
                    col += ic * st[p];
                }
                for (a, &p) in traced.iter().enumerate() {
                    let it = t / tr_st[a] % dims[p];
                    row += it * st[p];
                    col += it * st[p];
                }
                acc += m[(row, col)];
            }
            out[(kr, kc)] = acc;
        }
    }
    out
}

/// Transpose applied to the factors at `which` in the canonical basis.
pub fn partial_transpose(m: &CMat, dims: &[usize], which: &[usize]) -> CMat {
    let st = strides(dims);
    let total: usize = dims.iter().product();
    let mut out = CMat::zeros(total, total);
    for r in 0..total {
        for cidx in 0..total {
            let mut nr = 0usize;
            let mut nc = 0usize;
            for p in 0..dims.len() {
                let ir = r / st[p] % dims[p];
                let ic = cidx / st[p] % dims[p];
                if which.contains(&p) {
                    nr += ic * st[p];
                    nc += ir * st[p];
                } else {
                    nr += ir * st[p];
                    nc += ic * st[p];
                }
            }
            out[(nr, nc)] = m[(r, cidx)];
        }
    }
    out
}

/// Permute tensor factors. `perm[k]` is the old position of new factor `k`.
pub fn reorder(m: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_st = strides(&new_dims);
    let total: usize = dims.iter().product();
    // map new flat index -> old flat index
    let mut map = vec![0usize; total];
    for (idx, slot) in map.iter_mut().enumerate() {
        let mut old = 0usize;
        for (k, &p) in perm.iter().enumerate() {
            let comp = idx / new_st[k] % new_dims[k];
            old += comp * st[p];
        }
        *slot = old;
    }
    let mut out = CMat::zeros(total, total);
    for r in 0..total {
        for cidx in 0..total {
            out[(r, cidx)] = m[(map[r], map[cidx])];
        }
    }
    out
}

/// Embed an operator acting on the factors `positions` of a larger system,
/// identity on the rest. `positions[j]` is where factor `j` of `m` sits.
pub fn promote(m: &CMat, sub_dims: &[usize], positions: &[usize], full_dims: &[usize]) -> CMat {
    debug_assert_eq!(sub_dims.len(), positions.len());
    let full_st = strides(full_dims);
    let sub_st = strides(sub_dims);
    let rest: Vec<usize> = (0..full_dims.len())
        .filter(|p| !positions.contains(p))
        .collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&p| full_dims[p]).collect();
    let rest_st = strides(&rest_dims);
    let sub_total: usize = sub_dims.iter().product();
    let rest_total: usize = rest_dims.iter().product();
    let total: usize = full_dims.iter().product();

    let mut out = CMat::zeros(total, total);
    for sr in 0..sub_total {
        for sc in 0..sub_total {
            let v = m[(sr, sc)];
            if v == Complex64::default() {
                continue;
            }
            for rdiag in 0..rest_total {
                let mut row = 0usize;
                let mut col = 0usize;
                for (j, &p) in positions.iter().enumerate() {
                    row += (sr / sub_st[j] % sub_dims[j]) * full_st[p];
                    col += (sc / sub_st[j] % sub_dims[j]) * full_st[p];
                }
                for (a, &p) in rest.iter().enumerate() {
                    let comp = rdiag / rest_st[a] % rest_dims[a];
                    row += comp * full_st[p];
                    col += comp * full_st[p];
                }
                out[(row, col)] = v;
            }
        }
    }
    out
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix. Each sweep
/// annihilates every off-diagonal pair with a complex plane rotation;
/// convergence is quadratic and backward stable at the dimensions used
/// here (a few dozen at most).
fn jacobi_hermitian(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let mut a = (m + m.adjoint()).scale(0.5);
    let mut v = identity(n);
    let scale = frob_norm(&a).max(1e-300);
    let tol = 1e-15 * scale;

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= 1e-300 {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let diff = app - aqq;
                let t = if diff == 0.0 {
                    1.0
                } else {
                    let tau = diff / (2.0 * g);
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = [[c, -s e^{i phi}], [s e^{-i phi}, c]] zeroes a_pq
                let cs = Complex64::from(c);
                let s_pos = phase * s; // s e^{i phi}
                let s_neg = phase.conj() * s; // s e^{-i phi}
                // A <- A U (columns p, q)
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * cs + aiq * s_neg;
                    a[(i, q)] = -aip * s_pos + aiq * cs;
                }
                // A <- U† A (rows p, q)
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * cs + aqj * s_pos;
                    a[(q, j)] = -apj * s_neg + aqj * cs;
                }
                // V <- V U
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * cs + viq * s_neg;
                    v[(i, q)] = -vip * s_pos + viq * cs;
                }
                // the pair is annihilated by construction
                a[(p, q)] = Complex64::default();
                a[(q, p)] = Complex64::default();
            }
        }
    }
    let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    (vals, v)
}

/// Hermitian eigendecomposition with eigenvalues sorted descending and a
/// deterministic phase fix (largest-modulus entry of each eigenvector made
/// real positive). The input is symmetrized first to shed round-off.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let (raw_vals, raw_vecs) = jacobi_hermitian(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        raw_vals[b]
            .partial_cmp(&raw_vals[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMat::zeros(n, n);
    for (k, &idx) in order.iter().enumerate() {
        vals.push(raw_vals[idx]);
        let mut col: CVec = raw_vecs.column(idx).into();
        // phase fix for determinism
        let mut best = 0usize;
        let mut best_mod = 0.0f64;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm();
            if m > best_mod + 1e-15 {
                best_mod = m;
                best = i;
            }
        }
        if best_mod > 0.0 {
            let phase = col[best] / best_mod;
            col *= phase.conj();
        }
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::from(norm);
        }
        vecs.set_column(k, &col);
    }
    (vals, vecs)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig(m: &CMat) -> f64 {
    let (vals, _) = eigh(m);
    *vals.last().unwrap_or(&0.0)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eig(m: &CMat) -> f64 {
    let (vals, _) = eigh(m);
    *vals.first().unwrap_or(&0.0)
}

/// Projection of a Hermitian matrix onto the PSD cone (eigenvalue clamp).
pub fn psd_project(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += Complex64::from(v) * col[i] * col[j].conj();
                }
            }
        }
    }
    out
}

/// Apply `f` to the eigenvalues of a Hermitian matrix (spectral calculus).
pub fn spectral_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        let fv = f(v);
        if fv != 0.0 {
            let col = vecs.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += Complex64::from(fv) * col[i] * col[j].conj();
                }
            }
        }
    }
    out
}

/// `m^(-1/2)` on its support: eigenvalues below `floor` are dropped.
pub fn inv_sqrt_on_support(m: &CMat, floor: f64) -> CMat {
    spectral_map(m, |v| if v > floor { 1.0 / v.sqrt() } else { 0.0 })
}

/// Columns of `m` restricted to eigenvectors with eigenvalue > `floor`,
/// paired with those eigenvalues (descending).
pub fn support_basis(m: &CMat, floor: f64) -> (Vec<f64>, CMat) {
    let (vals, vecs) = eigh(m);
    let r = vals.iter().take_while(|&&v| v > floor).count();
    (vals[..r].to_vec(), vecs.columns(0, r).into())
}
