//! Brute-force reference implementations.
//!
//! These are deliberately naive and independent of the enumeration code:
//! they bound the coefficients of an optimal solution through the
//! pseudoinverse and then try every integer vector in the box. Used by the
//! `lattice-selftest` experiment and by the test suites as oracles.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{cvp_sphere_decode, CvpResult, LatticeBasis};
use crate::error::{Error, Result};

fn pinv_rows(basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gram = basis.transpose() * basis;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient("oracle: singular Gram matrix".into()))?;
    Ok(inv * basis.transpose())
}

fn box_ranges(
    center: &DVector<f64>,
    pinv: &DMatrix<f64>,
    radius: f64,
    max_points: usize,
) -> Result<Vec<(i64, i64)>> {
    let n = center.len();
    let mut ranges = Vec::with_capacity(n);
    let mut volume = 1usize;
    for i in 0..n {
        let hw = pinv.row(i).norm() * radius * (1.0 + 1e-9);
        let lo = (center[i] - hw).ceil() as i64;
        let hi = (center[i] + hw).floor() as i64;
        let lo = lo.min(center[i].round() as i64);
        let hi = hi.max(center[i].round() as i64);
        let width = (hi - lo + 1) as usize;
        volume = volume.saturating_mul(width);
        if volume > max_points {
            return Err(Error::InvalidArgument(format!(
                "oracle box exceeds {max_points} points"
            )));
        }
        ranges.push((lo, hi));
    }
    Ok(ranges)
}

fn for_each_in_box(ranges: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    let n = ranges.len();
    let mut x: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&x);
        let mut level = 0;
        loop {
            if level == n {
                return;
            }
            x[level] += 1;
            if x[level] <= ranges[level].1 {
                break;
            }
            x[level] = ranges[level].0;
            level += 1;
        }
    }
}

/// Exhaustive CVP over a provably sufficient coefficient box, with the same
/// lexicographic tie rule as the sphere decoder.
pub fn cvp_bruteforce(
    basis: &DMatrix<f64>,
    target: &DVector<f64>,
    max_points: usize,
) -> Result<CvpResult> {
    let n = basis.ncols();
    let pinv = pinv_rows(basis)?;
    let center = &pinv * target;

    // Any valid lattice point bounds the optimum; rounding the center gives
    // one without touching the decoder under test.
    let rounded: Vec<i64> = center.iter().map(|c| c.round() as i64).collect();
    let p0 = basis
        * DVector::<f64>::from_iterator(n, rounded.iter().map(|&v| v as f64));
    let d0 = (target - p0).norm();

    let ranges = box_ranges(&center, &pinv, d0, max_points)?;
    let mut best: Option<(Vec<i64>, f64)> = None;
    for_each_in_box(&ranges, |x| {
        let point = basis * DVector::<f64>::from_iterator(n, x.iter().map(|&v| v as f64));
        let d_sq = (target - point).norm_squared();
        let take = match &best {
            None => true,
            Some((bx, bd)) => d_sq < *bd || (d_sq == *bd && x < bx.as_slice()),
        };
        if take {
            best = Some((x.to_vec(), d_sq));
        }
    });
    let (coefficients, d_sq) = best.expect("box contains at least the rounded center");
    let point = basis
        * DVector::<f64>::from_iterator(n, coefficients.iter().map(|&v| v as f64));
    Ok(CvpResult {
        coefficients,
        point,
        distance: d_sq.sqrt(),
    })
}

/// Exhaustive SVP over a coefficient box derived from the shortest basis
/// column (a valid upper bound on lambda_1).
pub fn svp_bruteforce(basis: &DMatrix<f64>, max_points: usize) -> Result<(Vec<i64>, f64)> {
    let n = basis.ncols();
    let pinv = pinv_rows(basis)?;
    let lambda_ub = (0..n)
        .map(|j| basis.column(j).norm())
        .fold(f64::INFINITY, f64::min);
    let center = DVector::<f64>::zeros(n);
    let ranges = box_ranges(&center, &pinv, lambda_ub, max_points)?;
    let mut best: Option<(Vec<i64>, f64)> = None;
    for_each_in_box(&ranges, |x| {
        if x.iter().all(|&v| v == 0) {
            return;
        }
        let d_sq = (basis
            * DVector::<f64>::from_iterator(n, x.iter().map(|&v| v as f64)))
        .norm_squared();
        let take = match &best {
            None => true,
            Some((bx, bd)) => d_sq < *bd || (d_sq == *bd && x < bx.as_slice()),
        };
        if take {
            best = Some((x.to_vec(), d_sq));
        }
    });
    let (coefficients, d_sq) = best.expect("box contains the shortest basis column");
    Ok((coefficients, d_sq.sqrt()))
}

/// Largest CVP distance over random targets drawn uniformly from the
/// fundamental parallelepiped: a sampled lower bound on the covering radius.
pub fn sampled_deep_hole<R: Rng>(l: &LatticeBasis, n_targets: usize, rng: &mut R) -> Result<f64> {
    let n = l.rank();
    let mut worst: f64 = 0.0;
    for _ in 0..n_targets {
        let frac = DVector::<f64>::from_fn(n, |_, _| rng.gen::<f64>());
        let target = l.real() * frac;
        let r = cvp_sphere_decode(l, &target, None)?;
        worst = worst.max(r.distance);
    }
    Ok(worst)
}
