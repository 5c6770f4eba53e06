//! LLL reduction and Babai's nearest-plane algorithm.

use nalgebra::{DMatrix, DVector};

use super::{CvpResult, LatticeBasis};
use crate::error::{Error, Result};

/// Gram-Schmidt data of a real basis: orthogonal vectors, their squared
/// norms, and the mu coefficients (mu[i][j] for j < i).
pub(crate) struct Gso {
    pub bstar: Vec<DVector<f64>>,
    pub bstar_sq: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
}

pub(crate) fn gso(b: &DMatrix<f64>) -> Gso {
    let n = b.ncols();
    let mut bstar: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut bstar_sq = vec![0.0; n];
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut v = b.column(i).into_owned();
        for j in 0..i {
            let m = if bstar_sq[j] > 0.0 {
                b.column(i).dot(&bstar[j]) / bstar_sq[j]
            } else {
                0.0
            };
            mu[i][j] = m;
            v.axpy(-m, &bstar[j], 1.0);
        }
        bstar_sq[i] = v.norm_squared();
        bstar.push(v);
    }
    Gso {
        bstar,
        bstar_sq,
        mu,
    }
}

fn i64_matvec(m: &DMatrix<i64>, x: &[i64]) -> Vec<i64> {
    let (rows, cols) = m.shape();
    let mut out = vec![0i64; rows];
    for j in 0..cols {
        let xj = x[j];
        if xj == 0 {
            continue;
        }
        for i in 0..rows {
            out[i] += m[(i, j)] * xj;
        }
    }
    out
}

/// LLL-reduce a basis with the given Lovász parameter.
///
/// Returns the reduced basis and the unimodular transform `U` with
/// `reduced = original * U`.
pub fn lll_reduce(l: &LatticeBasis, delta: f64) -> Result<(LatticeBasis, DMatrix<i64>)> {
    if !(delta > 0.25 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "LLL delta must lie in (0.25, 1], got {delta}"
        )));
    }
    let mut b = l.real().clone();
    let n = b.ncols();
    let rows = b.nrows();
    let mut u = DMatrix::<i64>::identity(n, n);
    if n <= 1 {
        return Ok((LatticeBasis::from_real(b)?, u));
    }

    // Generous guard; the loop terminates for delta < 1 long before this.
    let iter_cap = 50_000 + 500 * n * n;
    let mut k = 1;
    let mut iter = 0;
    while k < n && iter < iter_cap {
        iter += 1;
        let g = gso(&b);
        let mut mu_k = g.mu[k].clone();
        for j in (0..k).rev() {
            let q = mu_k[j].round();
            if q != 0.0 {
                let qi = q as i64;
                for r in 0..rows {
                    let t = b[(r, j)];
                    b[(r, k)] -= q * t;
                }
                for r in 0..n {
                    let t = u[(r, j)];
                    u[(r, k)] -= qi * t;
                }
                for jp in 0..j {
                    mu_k[jp] -= q * g.mu[j][jp];
                }
                mu_k[j] -= q;
            }
        }
        let m = mu_k[k - 1];
        if g.bstar_sq[k] + 1e-12 * g.bstar_sq[k - 1] >= (delta - m * m) * g.bstar_sq[k - 1] {
            k += 1;
        } else {
            b.swap_columns(k - 1, k);
            u.swap_columns(k - 1, k);
            k = k.max(2) - 1;
        }
    }
    Ok((LatticeBasis::from_real(b)?, u))
}

/// Babai's nearest-plane approximation to the closest vector.
///
/// The basis is LLL-reduced (delta = 3/4) internally, so the classical
/// `2^(n/2)` distance guarantee holds for any input basis; coefficients are
/// mapped back to the caller's basis.
pub fn babai_nearest_plane(l: &LatticeBasis, target: &DVector<f64>) -> Result<CvpResult> {
    if target.len() != l.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has dim {}, ambient is {}",
            target.len(),
            l.ambient_dim()
        )));
    }
    if !target.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("babai target"));
    }
    let (lred, u) = lll_reduce(l, 0.75)?;
    let g = gso(lred.real());
    let n = lred.rank();
    let mut resid = target.clone();
    let mut x = vec![0i64; n];
    for i in (0..n).rev() {
        let c = resid.dot(&g.bstar[i]) / g.bstar_sq[i];
        let xi = c.round();
        x[i] = xi as i64;
        if xi != 0.0 {
            resid.axpy(-xi, &lred.real().column(i), 1.0);
        }
    }
    let coefficients = i64_matvec(&u, &x);
    let point = l.point(&coefficients);
    let distance = (target - &point).norm();
    Ok(CvpResult {
        coefficients,
        point,
        distance,
    })
}

/// Size-reduction check |mu[i][j]| <= 1/2 (with float slack).
pub fn is_size_reduced(l: &LatticeBasis) -> bool {
    let g = gso(l.real());
    let n = l.rank();
    (0..n).all(|i| (0..i).all(|j| g.mu[i][j].abs() <= 0.5 + 1e-8))
}

/// Lovász condition with the given delta (with float slack).
pub fn satisfies_lovasz(l: &LatticeBasis, delta: f64) -> bool {
    let g = gso(l.real());
    let n = l.rank();
    (1..n).all(|k| {
        let m = g.mu[k][k - 1];
        g.bstar_sq[k] >= (delta - m * m) * g.bstar_sq[k - 1] - 1e-9 * g.bstar_sq[k - 1]
    })
}
