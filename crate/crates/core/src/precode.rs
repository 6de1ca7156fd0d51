//! Zero-forcing baseline and the statistics-based anti-jamming precoder.
//!
//! Channel matrices here are `N_A x K` with column `k` equal to `h_k`, so the
//! received signal of user `k` is `h_k^H x`.

use nalgebra::linalg::{Cholesky, SymmetricEigen};

use crate::cplx::{CMat, CVec, C64, ZERO};
use crate::error::{Error, Result};
use crate::stats::AcaStatistics;

/// Relative tolerance under which two leading generalized eigenvalues are
/// reported as one degenerate eigenvalue.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Pivot ratio below which a Gram matrix is treated as singular.
const GRAM_PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix {
    /// `N_A x K`; column `k` is `w_k`.
    pub w: CMat,
    pub powers: Vec<f64>,
    /// Generalized eigenvalue per user (anti-jamming precoder only).
    pub lambda: Vec<f64>,
    /// Users whose leading eigenvalue was not simple.
    pub degenerate: Vec<usize>,
}

impl PrecodingMatrix {
    pub fn column(&self, k: usize) -> CVec {
        self.w.column(k).into_owned()
    }

    pub fn total_power(&self) -> f64 {
        self.w.norm_squared()
    }
}

/// The Hermitian pair `(A_k, B_k)` whose generalized Rayleigh quotient is the
/// statistical SJNR of user `k` at power `P0 / K`.
#[derive(Debug, Clone)]
pub struct SjnrOperands {
    pub a: CMat,
    pub b: CMat,
}

impl SjnrOperands {
    /// `A_k = h_k h_k^H + v_k I`,
    /// `B_k = sum_{u != k} h_u h_u^H + (sigma^2 K / P0 + sum_{u != k} v_u) I`.
    pub fn build(h: &CMat, variances: &[f64], noise: f64, p0: f64, k: usize) -> Result<Self> {
        let (n_a, users) = h.shape();
        if variances.len() != users {
            return Err(Error::DimensionMismatch(format!("{} variances for {users} users", variances.len())));
        }
        if k >= users {
            return Err(Error::IndexOutOfRange(format!("user {k} of {users}")));
        }
        let hk = h.column(k);
        let mut a = &hk * hk.adjoint();
        let mut b = CMat::zeros(n_a, n_a);
        let mut others = 0.0;
        for u in (0..users).filter(|&u| u != k) {
            let hu = h.column(u);
            b += &hu * hu.adjoint();
            others += variances[u];
        }
        let load = noise * users as f64 / p0 + others;
        for i in 0..n_a {
            a[(i, i)] += variances[k];
            b[(i, i)] += load;
        }
        Ok(Self { a, b })
    }

    pub fn quotient(&self, v: &CVec) -> f64 {
        rayleigh_quotient(&self.a, &self.b, v)
    }
}

pub fn rayleigh_quotient(a: &CMat, b: &CMat, v: &CVec) -> f64 {
    let num = v.dotc(&(a * v)).re;
    let den = v.dotc(&(b * v)).re;
    num / den
}

/// Leading generalized eigenpair of a Hermitian-definite pencil.
#[derive(Debug, Clone)]
pub struct GenEig {
    pub lambda: f64,
    /// Unit norm, largest-modulus component real and positive.
    pub vector: CVec,
    pub degenerate: bool,
    /// `||A v - lambda B v|| / (||A|| + |lambda| ||B||)`.
    pub residual: f64,
}

/// Cholesky factor of a Hermitian matrix, rejecting non-positive pivots
/// (the complex square root would otherwise accept them).
fn hermitian_cholesky(m: CMat) -> Option<Cholesky<C64, nalgebra::Dyn>> {
    let chol = Cholesky::new(m)?;
    let l = chol.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.im.abs() <= 1e-12 * d.re
    });
    ok.then_some(chol)
}

/// Largest `lambda` with `A v = lambda B v`, via `B = L L^H` and the
/// Hermitian eigenproblem of `L^-1 A L^-H`.
pub fn max_generalized_eigvec(a: &CMat, b: &CMat) -> Result<GenEig> {
    let n = a.nrows();
    if a.shape() != (n, n) || b.shape() != (n, n) || n == 0 {
        return Err(Error::DimensionMismatch(format!("A is {:?}, B is {:?}", a.shape(), b.shape())));
    }
    // common rescaling leaves the pencil unchanged and keeps entries near 1
    let scale = (0..n).map(|i| b[(i, i)].re.abs()).sum::<f64>() / n as f64;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::NotPositiveDefinite);
    }
    let a_s = a.unscale(scale);
    let b_s = b.unscale(scale);
    let chol = hermitian_cholesky(b_s.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&a_s).ok_or(Error::NotPositiveDefinite)?;
    let c = l.solve_lower_triangular(&x.adjoint()).ok_or(Error::NotPositiveDefinite)?;
    let c = (&c + c.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(c);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let top = order[0];
    let lambda = eig.eigenvalues[top];
    let degenerate = n > 1 && {
        let second = eig.eigenvalues[order[1]];
        (lambda - second).abs() <= DEGENERACY_TOL * lambda.abs().max(f64::MIN_POSITIVE)
    };

    let y = eig.eigenvectors.column(top).into_owned();
    let mut v = l.adjoint().solve_upper_triangular(&y).ok_or(Error::NotPositiveDefinite)?;
    v.unscale_mut(v.norm());
    fix_phase(&mut v);

    let r = &a_s * &v - (&b_s * &v).scale(lambda);
    let residual = r.norm() / (a_s.norm() + lambda.abs() * b_s.norm());
    Ok(GenEig { lambda, vector: v, degenerate, residual })
}

/// Rotate so the largest-modulus entry is real and positive.
pub fn fix_phase(v: &mut CVec) {
    let Some((idx, _)) = v.iter().enumerate().max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr())) else {
        return;
    };
    let pivot = v[idx];
    if pivot.norm() == 0.0 {
        return;
    }
    let rot = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[idx] = C64::new(v[idx].re, 0.0);
}

/// ZF precoder: directions of `H (H^H H)^-1`, each column rescaled to
/// norm `sqrt(p_k)`.
pub fn zf_precoder(h: &CMat, powers: &[f64]) -> Result<PrecodingMatrix> {
    let (n_a, users) = h.shape();
    if powers.len() != users {
        return Err(Error::DimensionMismatch(format!("{} powers for {users} users", powers.len())));
    }
    if users > n_a {
        return Err(Error::Singular(format!("{users} users exceed {n_a} antennas")));
    }
    let gram = h.adjoint() * h;
    let chol = hermitian_cholesky(gram).ok_or_else(|| Error::Singular("Gram matrix not positive definite".into()))?;
    let l = chol.l();
    let diag: Vec<f64> = (0..users).map(|i| l[(i, i)].re).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > GRAM_PIVOT_TOL * max) {
        return Err(Error::Singular(format!("Cholesky pivot ratio {:e}", min / max)));
    }
    let mut w = h * chol.inverse();
    for (k, &p) in powers.iter().enumerate() {
        let norm = w.column(k).norm();
        let mut col = w.column_mut(k);
        col.unscale_mut(norm);
        col.scale_mut(p.sqrt());
    }
    Ok(PrecodingMatrix { w, powers: powers.to_vec(), lambda: Vec::new(), degenerate: Vec::new() })
}

/// Per-user max-SJNR precoder with equal power `P0 / K`.
pub fn anti_jamming_precoder(h: &CMat, stats: &AcaStatistics, noise: f64, p0: f64) -> Result<PrecodingMatrix> {
    if !(noise > 0.0) {
        return Err(Error::InvalidConfig(format!("noise variance must be positive, got {noise}")));
    }
    let (n_a, users) = h.shape();
    let p = p0 / users as f64;
    let mut w = CMat::from_element(n_a, users, ZERO);
    let mut lambda = Vec::with_capacity(users);
    let mut degenerate = Vec::new();
    for k in 0..users {
        let ops = SjnrOperands::build(h, &stats.per_lu_variance, noise, p0, k)?;
        let eig = max_generalized_eigvec(&ops.a, &ops.b)?;
        w.set_column(k, &eig.vector.scale(p.sqrt()));
        lambda.push(eig.lambda);
        if eig.degenerate {
            degenerate.push(k);
        }
    }
    Ok(PrecodingMatrix { w, powers: vec![p; users], lambda, degenerate })
}
