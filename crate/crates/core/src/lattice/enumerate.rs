//! Exact CVP/SVP by Schnorr-Euchner enumeration with radius shrinking.

use nalgebra::{DMatrix, DVector};

use super::lll::lll_reduce;
use super::{CvpResult, LatticeBasis};
use crate::error::{Error, Result};
use crate::tol;

/// Depth-first enumeration over the upper-triangular system `R x ~ y`.
///
/// Candidates at each level are visited in the Schnorr-Euchner zig-zag
/// order, so the per-level contribution is non-decreasing and a level can be
/// abandoned at the first candidate past the current radius. Ties on the
/// final distance are broken toward the lexicographically smallest
/// coefficient vector in the *caller's* basis (reached through `map`).
struct Enumerator<'a> {
    r: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    map: &'a DMatrix<i64>,
    exclude_zero: bool,
    n: usize,
    x: Vec<i64>,
    best_sq: f64,
    best: Option<(Vec<i64>, f64)>,
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

impl<'a> Enumerator<'a> {
    fn run(mut self) -> Option<(Vec<i64>, f64)> {
        if self.n > 0 {
            self.descend(self.n - 1, 0.0);
        }
        self.best
    }

    fn descend(&mut self, level: usize, partial_sq: f64) {
        let mut s = self.y[level];
        for j in (level + 1)..self.n {
            s -= self.r[(level, j)] * self.x[j] as f64;
        }
        let r_ll = self.r[(level, level)];
        let center = s / r_ll;
        let base = center.round();
        let dir = if center >= base { 1.0 } else { -1.0 };

        for step in 0usize.. {
            let cand = if step == 0 {
                base
            } else {
                let j = ((step + 1) / 2) as f64;
                if step % 2 == 1 {
                    base + dir * j
                } else {
                    base - dir * j
                }
            };
            let diff = s - r_ll * cand;
            let total = partial_sq + diff * diff;
            if total > self.best_sq {
                // Zig-zag distances are monotone: nothing further fits.
                break;
            }
            self.x[level] = cand as i64;
            if level == 0 {
                self.record_leaf(total);
            } else {
                self.descend(level - 1, total);
            }
        }
    }

    fn record_leaf(&mut self, dist_sq: f64) {
        if self.exclude_zero && self.x.iter().all(|&v| v == 0) {
            return;
        }
        let better = match &self.best {
            None => dist_sq <= self.best_sq,
            Some((cur, cur_sq)) => {
                dist_sq < *cur_sq
                    || (dist_sq == *cur_sq && i64_matvec(self.map, &self.x) < *cur)
            }
        };
        if better {
            let mapped = i64_matvec(self.map, &self.x);
            self.best_sq = dist_sq;
            self.best = Some((mapped, dist_sq));
        }
    }
}

/// QR data of a reduced basis prepared for enumeration: `R` with positive
/// diagonal, the rotated target `y`, and the squared out-of-span offset.
pub(crate) fn reduce_system(
    basis: &DMatrix<f64>,
    target: &DVector<f64>,
) -> Result<(DMatrix<f64>, DVector<f64>, f64)> {
    let n = basis.ncols();
    let qr = basis.clone().qr();
    let q = qr.q();
    let mut r = qr.r();
    let mut y = q.transpose() * target;
    let max_diag = (0..n).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    for i in 0..n {
        if r[(i, i)].abs() <= 1e-14 * max_diag {
            return Err(Error::RankDeficient("degenerate R in enumeration".into()));
        }
        if r[(i, i)] < 0.0 {
            for j in i..n {
                r[(i, j)] = -r[(i, j)];
            }
            y[i] = -y[i];
        }
    }
    let offset_sq = (target.norm_squared() - y.norm_squared()).max(0.0);
    Ok((r, y, offset_sq))
}

/// Exact closest lattice point, ties broken toward the lexicographically
/// smallest coefficient vector. With `radius_hint`, a point within that
/// radius is required; none found is an error.
pub fn cvp_sphere_decode(
    l: &LatticeBasis,
    target: &DVector<f64>,
    radius_hint: Option<f64>,
) -> Result<CvpResult> {
    let n = l.rank();
    if n > tol::CVP_ENUM_CAP {
        return Err(Error::CapacityExceeded {
            dim: n,
            cap: tol::CVP_ENUM_CAP,
        });
    }
    if target.len() != l.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has dim {}, ambient is {}",
            target.len(),
            l.ambient_dim()
        )));
    }
    if !target.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("cvp target"));
    }
    if let Some(h) = radius_hint {
        if !(h >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "radius hint must be non-negative, got {h}"
            )));
        }
    }

    let (lred, u) = lll_reduce(l, 0.99)?;
    let (r, y, offset_sq) = reduce_system(lred.real(), target)?;

    let best_sq = match radius_hint {
        Some(h) => {
            let budget = h * h - offset_sq;
            if budget < 0.0 {
                return Err(Error::RadiusExceeded { radius: h });
            }
            budget * (1.0 + 1e-9) + 1e-12
        }
        None => f64::INFINITY,
    };

    let found = Enumerator {
        r: &r,
        y: &y,
        map: &u,
        exclude_zero: false,
        n,
        x: vec![0; n],
        best_sq,
        best: None,
    }
    .run();

    match found {
        None => Err(Error::RadiusExceeded {
            radius: radius_hint.unwrap_or(f64::INFINITY),
        }),
        Some((coefficients, _)) => {
            let point = l.point(&coefficients);
            let distance = (target - &point).norm();
            Ok(CvpResult {
                coefficients,
                point,
                distance,
            })
        }
    }
}

/// A shortest nonzero lattice vector and its norm, by LLL-preprocessed
/// enumeration.
pub fn svp_shortest(l: &LatticeBasis) -> Result<(DVector<f64>, f64)> {
    let n = l.rank();
    if n > tol::SVP_ENUM_CAP {
        return Err(Error::CapacityExceeded {
            dim: n,
            cap: tol::SVP_ENUM_CAP,
        });
    }
    let (lred, u) = lll_reduce(l, 0.99)?;
    let zero = DVector::<f64>::zeros(l.ambient_dim());
    let (r, y, _) = reduce_system(lred.real(), &zero)?;

    // A basis vector is a valid candidate; enumeration only improves on it.
    let min_col_sq = (0..n)
        .map(|j| (0..n).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);

    let found = Enumerator {
        r: &r,
        y: &y,
        map: &u,
        exclude_zero: true,
        n,
        x: vec![0; n],
        best_sq: min_col_sq * (1.0 + 1e-12),
        best: None,
    }
    .run()
    .expect("a shortest basis vector always qualifies");

    let vector = l.point(&found.0);
    let norm = vector.norm();
    Ok((vector, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cvp_identity_rounding() {
        let l = LatticeBasis::from_real(DMatrix::identity(2, 2)).unwrap();
        let r = cvp_sphere_decode(&l, &DVector::from_vec(vec![0.6, -1.2]), None).unwrap();
        assert_eq!(r.coefficients, vec![1, -1]);
        assert_relative_eq!(r.distance, 0.2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn cvp_skewed_basis_example() {
        let b = DMatrix::from_column_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]);
        let l = LatticeBasis::from_real(b).unwrap();
        let r = cvp_sphere_decode(&l, &DVector::from_vec(vec![1.9, 0.4]), None).unwrap();
        assert_eq!(r.coefficients, vec![1, 0]);
        assert_relative_eq!(r.point[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.point[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cvp_exact_on_lattice_point() {
        let b = DMatrix::from_column_slice(3, 2, &[1.0, 0.4, -0.3, 0.0, 2.0, 0.9]);
        let l = LatticeBasis::from_real(b.clone()).unwrap();
        let t = &b * DVector::from_vec(vec![-2.0, 5.0]);
        let r = cvp_sphere_decode(&l, &t, None).unwrap();
        assert_eq!(r.coefficients, vec![-2, 5]);
        assert!(r.distance < 1e-10);
    }

    #[test]
    fn cvp_tie_breaks_lexicographically() {
        let l = LatticeBasis::from_real(DMatrix::identity(2, 2)).unwrap();
        let r = cvp_sphere_decode(&l, &DVector::from_vec(vec![0.5, 0.5]), None).unwrap();
        assert_eq!(r.coefficients, vec![0, 0]);
    }

    #[test]
    fn cvp_radius_hint_behaviour() {
        let l = LatticeBasis::from_real(DMatrix::identity(2, 2)).unwrap();
        let t = DVector::from_vec(vec![0.6, -1.2]);
        // True distance is sqrt(0.2) ~ 0.447; a hint of 0.3 is too small.
        assert!(matches!(
            cvp_sphere_decode(&l, &t, Some(0.3)),
            Err(Error::RadiusExceeded { .. })
        ));
        let ok = cvp_sphere_decode(&l, &t, Some(0.5)).unwrap();
        assert_eq!(ok.coefficients, vec![1, -1]);
    }

    #[test]
    fn cvp_capacity_error() {
        let l = LatticeBasis::from_real(DMatrix::identity(41, 41)).unwrap();
        let t = DVector::zeros(41);
        assert!(matches!(
            cvp_sphere_decode(&l, &t, None),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn svp_known_lattices() {
        let zn = LatticeBasis::from_real(DMatrix::identity(5, 5)).unwrap();
        let (_, l1) = svp_shortest(&zn).unwrap();
        assert_relative_eq!(l1, 1.0, epsilon = 1e-12);

        let d = LatticeBasis::from_real(DMatrix::from_column_slice(
            2,
            2,
            &[3.0, 0.0, 0.0, 5.0],
        ))
        .unwrap();
        let (v, l1) = svp_shortest(&d).unwrap();
        assert_relative_eq!(l1, 3.0, epsilon = 1e-12);
        assert_relative_eq!(v.norm(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn svp_capacity_error() {
        let l = LatticeBasis::from_real(DMatrix::identity(25, 25)).unwrap();
        assert!(matches!(
            svp_shortest(&l),
            Err(Error::CapacityExceeded { .. })
        ));
    }
}
