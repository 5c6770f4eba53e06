//! Lattice geometry and algorithms.
//!
//! A [`LatticeBasis`] is stored in real form; complex bases are carried
//! through the block embedding from [`crate::matcore`] so that
//! Gaussian-integer lattices become ordinary integer lattices of twice the
//! dimension. CVP/SVP are exact Schnorr-Euchner enumerations with LLL
//! preprocessing; [`oracle`] holds independent brute-force references.

mod enumerate;
mod lll;
pub mod oracle;

pub use enumerate::{cvp_sphere_decode, svp_shortest};
pub use lll::{babai_nearest_plane, is_size_reduced, lll_reduce, satisfies_lovasz};

pub(crate) use enumerate::reduce_system;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::matcore::{real_embedding, ComplexMatrix};
use crate::tol;

/// A full-column-rank lattice basis with cached volume.
///
/// `real` is the working form: either the basis itself or the real embedding
/// of a complex basis. `log_volume` is ln sqrt(det(B^T B)) of the real form.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    complex: Option<ComplexMatrix>,
    real: DMatrix<f64>,
    log_volume: f64,
}

impl LatticeBasis {
    pub fn from_real(basis: DMatrix<f64>) -> Result<Self> {
        Self::build(None, basis)
    }

    pub fn from_complex(basis: ComplexMatrix) -> Result<Self> {
        let real = real_embedding(&basis);
        Self::build(Some(basis), real)
    }

    fn build(complex: Option<ComplexMatrix>, real: DMatrix<f64>) -> Result<Self> {
        let (m, n) = real.shape();
        if n == 0 || m < n {
            return Err(Error::DimensionMismatch(format!(
                "basis must be tall with at least one column, got {m}x{n}"
            )));
        }
        if !real.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("lattice basis"));
        }
        let sv = real.clone().svd(false, false).singular_values;
        let smax = sv.max();
        let smin = sv.min();
        if smin <= tol::RANK_RATIO * smax {
            return Err(Error::RankDeficient(format!(
                "lattice basis: sigma_min/sigma_max = {:.3e}",
                if smax > 0.0 { smin / smax } else { 0.0 }
            )));
        }
        let r = real.clone().qr().r();
        let log_volume = (0..n).map(|i| r[(i, i)].abs().ln()).sum();
        Ok(LatticeBasis {
            complex,
            real,
            log_volume,
        })
    }

    /// Real working basis (the embedding, for complex-born lattices).
    pub fn real(&self) -> &DMatrix<f64> {
        &self.real
    }

    /// The originating complex basis, when there is one.
    pub fn complex(&self) -> Option<&ComplexMatrix> {
        self.complex.as_ref()
    }

    /// Lattice rank = number of real basis vectors.
    pub fn rank(&self) -> usize {
        self.real.ncols()
    }

    /// Dimension of the ambient real space.
    pub fn ambient_dim(&self) -> usize {
        self.real.nrows()
    }

    /// Lattice volume sqrt(det(B^T B)) of the real form.
    pub fn volume(&self) -> f64 {
        self.log_volume.exp()
    }

    pub fn log_volume(&self) -> f64 {
        self.log_volume
    }

    /// The lattice point for an integer coefficient vector.
    pub fn point(&self, coefficients: &[i64]) -> DVector<f64> {
        let x = DVector::<f64>::from_iterator(
            coefficients.len(),
            coefficients.iter().map(|&c| c as f64),
        );
        &self.real * x
    }
}

/// Outcome of a closest-vector computation.
#[derive(Debug, Clone)]
pub struct CvpResult {
    /// Integer coefficients with respect to the queried basis.
    pub coefficients: Vec<i64>,
    /// The lattice point `basis * coefficients`.
    pub point: DVector<f64>,
    /// Euclidean distance from the target to `point`.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusMode {
    /// sqrt(n / 2*pi*e) * det^(1/n), the large-n ball-volume approximation.
    Asymptotic,
    /// (det / V_n)^(1/n) with V_n the exact unit-ball volume.
    ExactBall,
}

/// Radius of a ball whose volume equals the lattice cell volume.
pub fn effective_radius(l: &LatticeBasis, mode: RadiusMode) -> f64 {
    let n = l.rank() as f64;
    match mode {
        RadiusMode::Asymptotic => {
            (n / (2.0 * std::f64::consts::PI * std::f64::consts::E)).sqrt()
                * (l.log_volume / n).exp()
        }
        RadiusMode::ExactBall => {
            let ln_vn = 0.5 * n * std::f64::consts::PI.ln() - ln_gamma(0.5 * n + 1.0);
            ((l.log_volume - ln_vn) / n).exp()
        }
    }
}

/// Transference bound `N_B / lambda_1(dual)` on the covering radius of a
/// square complex basis; the dual is read as `(B^{-1})^H`.
pub fn covering_radius_upper_bound(l: &LatticeBasis) -> Result<f64> {
    let b = l
        .complex()
        .ok_or_else(|| Error::InvalidArgument("covering bound needs a complex basis".into()))?;
    let (m, n) = b.shape();
    if m != n {
        return Err(Error::NonSquare { rows: m, cols: n });
    }
    let inv = b
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient("singular basis in covering bound".into()))?;
    let dual = LatticeBasis::from_complex(inv.adjoint())?;
    let (_, lambda1) = svp_shortest(&dual)?;
    Ok(n as f64 / lambda1)
}

/// Exact covering radius of a rank-2 real lattice, via circumcenters of the
/// empty-circle (Delaunay) triangles incident to the origin.
pub fn covering_radius_exact_2d(l: &LatticeBasis) -> Result<f64> {
    if l.rank() != 2 {
        return Err(Error::InvalidArgument(format!(
            "exact covering radius needs real dimension 2, got {}",
            l.rank()
        )));
    }
    // Work in plane coordinates (the R factor), then Lagrange-reduce.
    let r = l.real.clone().qr().r();
    let mut a = [r[(0, 0)], 0.0];
    let mut b = [r[(0, 1)], r[(1, 1)]];
    lagrange_reduce(&mut a, &mut b);

    let point = |i: i64, j: i64| {
        [
            i as f64 * a[0] + j as f64 * b[0],
            i as f64 * a[1] + j as f64 * b[1],
        ]
    };
    let mut neighborhood = Vec::new();
    for i in -6i64..=6 {
        for j in -6i64..=6 {
            neighborhood.push(point(i, j));
        }
    }
    let mut candidates = Vec::new();
    for i in -3i64..=3 {
        for j in -3i64..=3 {
            if i != 0 || j != 0 {
                candidates.push(point(i, j));
            }
        }
    }

    let scale = (a[0] * a[0] + a[1] * a[1]).max(b[0] * b[0] + b[1] * b[1]);
    let mut best_sq: f64 = 0.0;
    for (pi, p) in candidates.iter().enumerate() {
        for q in candidates.iter().skip(pi + 1) {
            // Circumcenter of (0, p, q): 2 c.p = |p|^2, 2 c.q = |q|^2.
            let det = 2.0 * (p[0] * q[1] - p[1] * q[0]);
            if det.abs() < 1e-12 * scale {
                continue;
            }
            let pp = p[0] * p[0] + p[1] * p[1];
            let qq = q[0] * q[0] + q[1] * q[1];
            let cx = (q[1] * pp - p[1] * qq) / det;
            let cy = (p[0] * qq - q[0] * pp) / det;
            let r_sq = cx * cx + cy * cy;
            if r_sq <= best_sq {
                continue;
            }
            let empty = neighborhood.iter().all(|w| {
                let d_sq = (cx - w[0]) * (cx - w[0]) + (cy - w[1]) * (cy - w[1]);
                d_sq >= r_sq * (1.0 - 1e-9)
            });
            if empty {
                best_sq = r_sq;
            }
        }
    }
    Ok(best_sq.sqrt())
}

fn lagrange_reduce(a: &mut [f64; 2], b: &mut [f64; 2]) {
    for _ in 0..10_000 {
        let na = a[0] * a[0] + a[1] * a[1];
        let nb = b[0] * b[0] + b[1] * b[1];
        if na > nb {
            std::mem::swap(a, b);
            continue;
        }
        let mu = ((a[0] * b[0] + a[1] * b[1]) / na).round();
        if mu == 0.0 {
            return;
        }
        b[0] -= mu * a[0];
        b[1] -= mu * a[1];
    }
}
