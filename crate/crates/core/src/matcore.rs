//! Dense complex linear algebra.
//!
//! Everything downstream (lattices, precoders, receivers) works with
//! [`ComplexMatrix`] / [`ComplexVector`] and the factorizations here. The SVD
//! is delegated to nalgebra's bidiagonal implementation; QR, null space,
//! pseudoinverse and determinants are built on an in-house complex
//! Householder factorization so we control the full-Q form and the sign
//! convention on the R diagonal.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Thin SVD `H = U diag(S) V^H` with `S` non-negative and non-increasing.
#[derive(Debug, Clone)]
pub struct SvdDecomposition {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

fn check_finite_matrix(name: &'static str, m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

/// Thin SVD via nalgebra, sorted by descending singular value.
pub fn svd_decompose(h: &ComplexMatrix) -> Result<SvdDecomposition> {
    check_finite_matrix("svd input", h)?;
    let svd = h
        .clone()
        .try_svd(true, true, f64::EPSILON, tol::SVD_MAX_ITER)
        .ok_or(Error::FactorizationFailed {
            max_iter: tol::SVD_MAX_ITER,
        })?;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let s = svd.singular_values;

    // Sort descending; nalgebra does not guarantee an order.
    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
    let mut u_sorted = ComplexMatrix::zeros(u.nrows(), k);
    let mut v_sorted = ComplexMatrix::zeros(v_t.ncols(), k);
    let mut s_sorted = Vec::with_capacity(k);
    let v = v_t.adjoint();
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v.column(src));
        s_sorted.push(s[src]);
    }
    Ok(SvdDecomposition {
        u: u_sorted,
        singular_values: s_sorted,
        v: v_sorted,
    })
}

/// Complex Householder QR. Returns full `Q` (m x m) and `R` (m x n).
/// Diagonal signs are not normalized here; see [`qr_decompose`].
fn householder_qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(m, m);
    let mut v = vec![Complex64::new(0.0, 0.0); m];

    for j in 0..k {
        let mut norm_sq = 0.0;
        for i in j..m {
            norm_sq += r[(i, j)].norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r[(j, j)];
        let alpha = if x0.norm() > 0.0 {
            -(x0 / x0.norm()) * norm
        } else {
            Complex64::new(-norm, 0.0)
        };
        let len = m - j;
        for (idx, i) in (j..m).enumerate() {
            v[idx] = r[(i, j)];
        }
        v[0] -= alpha;
        let vnorm = v[..len].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm <= norm * 1e-300 {
            continue;
        }
        for z in v[..len].iter_mut() {
            *z /= vnorm;
        }
        // R[j.., j..] -= 2 v (v^H R[j.., j..])
        for col in j..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (idx, i) in (j..m).enumerate() {
                dot += v[idx].conj() * r[(i, col)];
            }
            let f = 2.0 * dot;
            for (idx, i) in (j..m).enumerate() {
                r[(i, col)] -= f * v[idx];
            }
        }
        // Q[:, j..] -= 2 (Q v) v^H
        for row in 0..m {
            let mut dot = Complex64::new(0.0, 0.0);
            for (idx, i) in (j..m).enumerate() {
                dot += q[(row, i)] * v[idx];
            }
            let f = 2.0 * dot;
            for (idx, i) in (j..m).enumerate() {
                q[(row, i)] -= f * v[idx].conj();
            }
        }
    }
    // Kill round-off below the diagonal.
    for j in 0..n {
        for i in (j + 1)..m {
            r[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    (q, r)
}

/// Thin QR `A = Q R` with orthonormal `Q` columns and a non-negative real
/// diagonal on `R`. Errors on rank deficiency.
pub fn qr_decompose(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    check_finite_matrix("qr input", a)?;
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::RankDeficient(format!(
            "{m}x{n} matrix cannot have full column rank"
        )));
    }
    let (q_full, r_full) = householder_qr(a);
    let mut q = q_full.columns(0, n).into_owned();
    let mut r = r_full.rows(0, n).into_owned();

    let max_diag = (0..n).map(|i| r[(i, i)].norm()).fold(0.0_f64, f64::max);
    for i in 0..n {
        let d = r[(i, i)];
        let ad = d.norm();
        if ad <= tol::RANK_RATIO * max_diag {
            return Err(Error::RankDeficient(format!(
                "R[{i},{i}] = {ad:.3e} below rank threshold"
            )));
        }
        let phase = d / ad;
        let scale = phase.conj();
        for col in i..n {
            r[(i, col)] *= scale;
        }
        r[(i, i)] = Complex64::new(ad, 0.0);
        for row in 0..m {
            q[(row, i)] *= phase;
        }
    }
    Ok((q, r))
}

fn rank_check(h: &ComplexMatrix, context: &str) -> Result<()> {
    let s = svd_decompose(h)?.singular_values;
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if smin <= tol::RANK_RATIO * smax {
        return Err(Error::RankDeficient(format!(
            "{context}: sigma_min/sigma_max = {:.3e}",
            if smax > 0.0 { smin / smax } else { 0.0 }
        )));
    }
    Ok(())
}

/// Orthonormal basis of the null space of a wide, full-row-rank `H`.
pub fn null_space(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_finite_matrix("null_space input", h)?;
    let (rows, cols) = h.shape();
    if rows >= cols {
        return Err(Error::DimensionMismatch(format!(
            "null_space needs rows < cols, got {rows}x{cols}"
        )));
    }
    rank_check(h, "null_space")?;
    let (q_full, _) = householder_qr(&h.adjoint());
    Ok(q_full.columns(rows, cols - rows).into_owned())
}

/// Minimum-norm right inverse `H^H (H H^H)^{-1}` of a wide full-row-rank `H`.
pub fn pseudoinverse(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_finite_matrix("pseudoinverse input", h)?;
    let (rows, cols) = h.shape();
    if rows > cols {
        return Err(Error::DimensionMismatch(format!(
            "pseudoinverse needs rows <= cols, got {rows}x{cols}"
        )));
    }
    let svd = svd_decompose(h)?;
    let smax = svd.singular_values[0];
    let smin = *svd.singular_values.last().unwrap();
    if smin <= tol::RANK_RATIO * smax {
        return Err(Error::RankDeficient(format!(
            "pseudoinverse: sigma_min/sigma_max = {:.3e}",
            if smax > 0.0 { smin / smax } else { 0.0 }
        )));
    }
    // H = U S V^H  =>  H† = V S^{-1} U^H
    let k = svd.singular_values.len();
    let mut vs = svd.v.clone();
    for j in 0..k {
        let inv = 1.0 / svd.singular_values[j];
        for i in 0..vs.nrows() {
            vs[(i, j)] *= inv;
        }
    }
    Ok(vs * svd.u.adjoint())
}

/// |det A| via Householder QR; 0 for singular input.
pub fn abs_det(a: &ComplexMatrix) -> Result<f64> {
    check_finite_matrix("abs_det input", a)?;
    let (m, n) = a.shape();
    if m != n {
        return Err(Error::NonSquare { rows: m, cols: n });
    }
    if n == 0 {
        return Ok(1.0);
    }
    let (_, r) = householder_qr(a);
    Ok((0..n).map(|i| r[(i, i)].norm()).product())
}

/// Real embedding: each entry `a + bi` becomes the 2x2 block
/// `[[a, -b], [b, a]]`, so an m x n complex matrix maps to 2m x 2n and the
/// Gaussian-integer lattice of `B` becomes an ordinary integer lattice.
pub fn real_embedding(b: &ComplexMatrix) -> DMatrix<f64> {
    let (m, n) = b.shape();
    let mut out = DMatrix::<f64>::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let z = b[(i, j)];
            out[(2 * i, 2 * j)] = z.re;
            out[(2 * i, 2 * j + 1)] = -z.im;
            out[(2 * i + 1, 2 * j)] = z.im;
            out[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    out
}

/// Interleaved real form (Re z_0, Im z_0, Re z_1, ...) of a complex vector.
pub fn embed_vector(v: &ComplexVector) -> DVector<f64> {
    let mut out = DVector::<f64>::zeros(2 * v.len());
    for (i, z) in v.iter().enumerate() {
        out[2 * i] = z.re;
        out[2 * i + 1] = z.im;
    }
    out
}

/// Inverse of [`embed_vector`].
pub fn unembed_vector(v: &DVector<f64>) -> ComplexVector {
    assert!(v.len() % 2 == 0, "real form must have even length");
    ComplexVector::from_fn(v.len() / 2, |i, _| Complex64::new(v[2 * i], v[2 * i + 1]))
}
