//! The wiretap transmission model: Alice with `N_A` antennas sends an M-QAM
//! secret to Bob (`N_B < N_A`) while Eve listens with `N_E` antennas.
//!
//! Artificial noise `Zv` lives in the null space of Bob's channel, so it
//! degrades only Eve. Two precoders are implemented: SVD precoding
//! (`P = V_1`) and lattice (vector-perturbation) precoding
//! (`x = H^+(u - A w) + Zv`). Eve's receivers perform exact ML over her
//! observation: a finite-alphabet sphere decoder against `GP`, or an
//! unbounded-lattice CVP against `G H^+` for the perturbed scheme.

use nalgebra::DVector;
use num_complex::{Complex, Complex64};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{babai_nearest_plane, cvp_sphere_decode, reduce_system, LatticeBasis};
use crate::matcore::{
    embed_vector, null_space, pseudoinverse, real_embedding, svd_decompose, ComplexMatrix,
    ComplexVector,
};
use crate::tol;

// ---------------------------------------------------------------------------
// Scenario and constellation
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precoder {
    Svd,
    Lattice,
}

impl Precoder {
    pub fn label(self) -> &'static str {
        match self {
            Precoder::Svd => "svd",
            Precoder::Lattice => "lattice",
        }
    }
}

/// Antenna counts, constellation order and noise levels of one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WiretapScenario {
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    /// QAM order; must be an even perfect square so the per-dimension
    /// alphabet consists of odd integers.
    pub m: u32,
    #[serde(default)]
    pub sigma_b2: f64,
    #[serde(default)]
    pub sigma_e2: f64,
    pub beta: f64,
    pub precoder: Precoder,
    #[serde(default)]
    pub total_power_budget: Option<f64>,
}

impl WiretapScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n_b == 0 || self.n_e == 0 {
            return Err(Error::InvalidConfig("antenna counts must be positive".into()));
        }
        if self.n_b >= self.n_a {
            return Err(Error::InvalidConfig(format!(
                "need N_B < N_A, got N_B = {}, N_A = {}",
                self.n_b, self.n_a
            )));
        }
        Constellation::new(self.m)?;
        if !(self.sigma_b2 >= 0.0) || !(self.sigma_e2 >= 0.0) {
            return Err(Error::InvalidConfig("noise variances must be >= 0".into()));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidConfig("beta must be positive".into()));
        }
        if let Some(p) = self.total_power_budget {
            if !(p > 0.0) {
                return Err(Error::InvalidConfig("power budget must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::new(self.m)
    }

    /// Artificial-noise dimensions `N_A - N_B`.
    pub fn noise_dim(&self) -> usize {
        self.n_a - self.n_b
    }
}

/// Per-dimension M-QAM alphabet `{-sqrt(M)+1, ..., sqrt(M)-1}` and the
/// perturbation period `A = 2 sqrt(M)`.
#[derive(Clone, Debug)]
pub struct Constellation {
    m: u32,
    sqrt_m: u32,
    points: Vec<f64>,
    a: f64,
}

impl Constellation {
    pub fn new(m: u32) -> Result<Self> {
        let sqrt_m = (m as f64).sqrt().round() as u32;
        if m < 4 || sqrt_m * sqrt_m != m {
            return Err(Error::InvalidConfig(format!(
                "QAM order must be a perfect square >= 4, got {m}"
            )));
        }
        if sqrt_m % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "QAM order {m} has odd sqrt; the odd-integer alphabet needs an even sqrt(M)"
            )));
        }
        let points = (0..sqrt_m)
            .map(|i| (2 * i as i64 + 1 - sqrt_m as i64) as f64)
            .collect();
        Ok(Constellation {
            m,
            sqrt_m,
            points,
            a: 2.0 * sqrt_m as f64,
        })
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    /// Perturbation period `A = 2 sqrt(M)`.
    pub fn amplitude(&self) -> f64 {
        self.a
    }

    pub fn points_per_dim(&self) -> &[f64] {
        &self.points
    }

    /// Nearest odd integer (ties away from zero).
    pub fn round_odd(x: f64) -> f64 {
        2.0 * ((x - 1.0) / 2.0).round() + 1.0
    }

    /// Nearest alphabet value.
    pub fn quantize(&self, x: f64) -> f64 {
        let edge = (self.sqrt_m - 1) as f64;
        Self::round_odd(x).clamp(-edge, edge)
    }

    /// Reduce an odd integer into the alphabet window mod `A`.
    pub fn fold(&self, s: f64) -> f64 {
        let edge = (self.sqrt_m - 1) as f64;
        (s + edge).rem_euclid(self.a) - edge
    }

    pub fn quantize_symbol(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.quantize(z.re), self.quantize(z.im))
    }

    pub fn fold_symbol(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.fold(z.re), self.fold(z.im))
    }
}

/// One precoded transmission and its power split.
#[derive(Clone, Debug)]
pub struct TransmitRecord {
    pub u: ComplexVector,
    pub v: ComplexVector,
    /// Gaussian-integer perturbation (lattice precoder only).
    pub w_hat: Option<Vec<Complex<i64>>>,
    pub x: ComplexVector,
    pub data_power: f64,
    pub noise_power: f64,
}

impl TransmitRecord {
    pub fn total_power(&self) -> f64 {
        self.x.norm_squared()
    }

    /// Relative gap of the per-precoder power identity.
    pub fn power_identity_gap(&self) -> f64 {
        let total = self.total_power();
        (total - (self.data_power + self.noise_power)).abs() / total.max(1.0)
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// i.i.d. circularly symmetric complex Gaussian entries of unit variance.
pub fn sample_channel<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * s, im * s)
    })
}

/// Uniform M-QAM secret of length `n_b`.
pub fn sample_secret<R: Rng>(c: &Constellation, n_b: usize, rng: &mut R) -> ComplexVector {
    let pts = c.points_per_dim();
    ComplexVector::from_fn(n_b, |_, _| {
        let re = pts[rng.gen_range(0..pts.len())];
        let im = pts[rng.gen_range(0..pts.len())];
        Complex64::new(re, im)
    })
}

/// Continuous artificial noise: uniform direction from per-component
/// real/imag U(-1, 1), rescaled to `target_norm` exactly.
pub fn sample_artificial_noise<R: Rng>(
    dim: usize,
    target_norm: f64,
    rng: &mut R,
) -> Result<ComplexVector> {
    if dim == 0 {
        return Err(Error::InvalidArgument("noise dimension must be >= 1".into()));
    }
    if !(target_norm > 0.0) || !target_norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target norm must be positive, got {target_norm}"
        )));
    }
    loop {
        let v = ComplexVector::from_fn(dim, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let norm = v.norm();
        if norm > 1e-12 {
            return Ok(v * Complex64::new(target_norm / norm, 0.0));
        }
    }
}

// ---------------------------------------------------------------------------
// Precoding
// ---------------------------------------------------------------------------

/// SVD precoding `x = V_1 u + Z v`; data and noise subspaces orthogonal.
pub fn svd_precode(
    h: &ComplexMatrix,
    u: &ComplexVector,
    v: &ComplexVector,
) -> Result<TransmitRecord> {
    let (rows, cols) = h.shape();
    if rows >= cols || u.len() != rows || v.len() != cols - rows {
        return Err(Error::DimensionMismatch(format!(
            "svd_precode: u has {}, v has {}, channel is {rows}x{cols}",
            u.len(),
            v.len()
        )));
    }
    let p = svd_decompose(h)?.v;
    let z = null_space(h)?;
    let x = &p * u + &z * v;
    Ok(TransmitRecord {
        u: u.clone(),
        v: v.clone(),
        w_hat: None,
        x,
        data_power: u.norm_squared(),
        noise_power: v.norm_squared(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationMode {
    /// Sphere-decoder CVP: the power-minimizing perturbation.
    Exact,
    /// LLL-reduced Babai nearest plane (LR-SIC).
    Babai,
}

/// Lattice precoding `x = H^+ (u - A w) + Z v` with `w` chosen over the
/// Gaussian integers to minimize transmit power.
pub fn lattice_precode(
    h: &ComplexMatrix,
    u: &ComplexVector,
    v: &ComplexVector,
    c: &Constellation,
    mode: PerturbationMode,
) -> Result<TransmitRecord> {
    let (rows, cols) = h.shape();
    if rows >= cols || u.len() != rows || v.len() != cols - rows {
        return Err(Error::DimensionMismatch(format!(
            "lattice_precode: u has {}, v has {}, channel is {rows}x{cols}",
            u.len(),
            v.len()
        )));
    }
    let hd = pseudoinverse(h)?;
    let z = null_space(h)?;
    let a = c.amplitude();

    let target = embed_vector(&(&hd * u));
    let basis = LatticeBasis::from_complex(&hd * Complex64::new(a, 0.0))?;
    let coeffs = match mode {
        PerturbationMode::Exact => cvp_sphere_decode(&basis, &target, None)?.coefficients,
        PerturbationMode::Babai => babai_nearest_plane(&basis, &target)?.coefficients,
    };
    let w_hat: Vec<Complex<i64>> = (0..rows)
        .map(|i| Complex::new(coeffs[2 * i], coeffs[2 * i + 1]))
        .collect();
    let w = ComplexVector::from_fn(rows, |i, _| {
        Complex64::new(w_hat[i].re as f64, w_hat[i].im as f64)
    });

    let data = &hd * (u - w * Complex64::new(a, 0.0));
    let x = &data + &z * v;
    Ok(TransmitRecord {
        u: u.clone(),
        v: v.clone(),
        w_hat: Some(w_hat),
        x,
        data_power: data.norm_squared(),
        noise_power: v.norm_squared(),
    })
}

// ---------------------------------------------------------------------------
// Channel
// ---------------------------------------------------------------------------

/// `channel * x + n` with i.i.d. complex Gaussian noise of per-component
/// variance `sigma2`; `sigma2 = 0` is the noiseless worst case.
pub fn transmit_through<R: Rng>(
    channel: &ComplexMatrix,
    x: &ComplexVector,
    sigma2: f64,
    rng: &mut R,
) -> Result<ComplexVector> {
    if channel.ncols() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "transmit: channel is {}x{}, x has {}",
            channel.nrows(),
            channel.ncols(),
            x.len()
        )));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidArgument("sigma2 must be >= 0".into()));
    }
    let mut y = channel * x;
    if sigma2 > 0.0 {
        let s = (sigma2 / 2.0).sqrt();
        for i in 0..y.len() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            y[i] += Complex64::new(re * s, im * s);
        }
    }
    Ok(y)
}

// ---------------------------------------------------------------------------
// Bob's receivers
// ---------------------------------------------------------------------------

/// Equalize `z = H V_1 u + n` through `S^{-1} U^H` and quantize per
/// component.
pub fn bob_decode_svd(
    z: &ComplexVector,
    h: &ComplexMatrix,
    c: &Constellation,
) -> Result<ComplexVector> {
    let svd = svd_decompose(h)?;
    let smax = svd.singular_values[0];
    let smin = *svd.singular_values.last().unwrap();
    if smin <= tol::RANK_RATIO * smax {
        return Err(Error::RankDeficient("bob_decode_svd: channel".into()));
    }
    let mut w = svd.u.adjoint() * z;
    for i in 0..w.len() {
        w[i] /= svd.singular_values[i];
    }
    Ok(ComplexVector::from_fn(w.len(), |i, _| c.quantize_symbol(w[i])))
}

/// Mod-A receiver for lattice precoding: `z = (u - A w) + n`, so rounding to
/// the odd grid and folding mod A recovers `u` without channel knowledge.
pub fn bob_decode_lp(z: &ComplexVector, c: &Constellation) -> ComplexVector {
    ComplexVector::from_fn(z.len(), |i, _| {
        let s = Complex64::new(
            Constellation::round_odd(z[i].re),
            Constellation::round_odd(z[i].im),
        );
        c.fold_symbol(s)
    })
}

// ---------------------------------------------------------------------------
// Eve's maximum-likelihood receivers
// ---------------------------------------------------------------------------

/// Finite-alphabet sphere decoder: per real dimension the candidates are the
/// constellation points, visited outward from the per-level center.
fn alphabet_sphere_decode(
    r: &nalgebra::DMatrix<f64>,
    y: &DVector<f64>,
    alphabet: &[f64],
) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![0.0; n];
    let mut best = vec![alphabet[0]; n];
    let mut best_sq = f64::INFINITY;
    descend_alphabet(r, y, alphabet, n - 1, 0.0, &mut x, &mut best, &mut best_sq);
    best
}

#[allow(clippy::too_many_arguments)]
fn descend_alphabet(
    r: &nalgebra::DMatrix<f64>,
    y: &DVector<f64>,
    alphabet: &[f64],
    level: usize,
    partial_sq: f64,
    x: &mut [f64],
    best: &mut [f64],
    best_sq: &mut f64,
) {
    let n = y.len();
    let mut s = y[level];
    for j in (level + 1)..n {
        s -= r[(level, j)] * x[j];
    }
    let r_ll = r[(level, level)];
    let center = s / r_ll;

    // Visit alphabet values by increasing distance from the center: two
    // cursors expanding outward from the insertion point.
    let k = alphabet.len();
    let start = alphabet.partition_point(|&p| p < center);
    let mut lo = start as isize - 1;
    let mut hi = start;
    loop {
        let cand = if lo < 0 && hi >= k {
            break;
        } else if lo < 0 {
            let c = alphabet[hi];
            hi += 1;
            c
        } else if hi >= k {
            let c = alphabet[lo as usize];
            lo -= 1;
            c
        } else if center - alphabet[lo as usize] <= alphabet[hi] - center {
            let c = alphabet[lo as usize];
            lo -= 1;
            c
        } else {
            let c = alphabet[hi];
            hi += 1;
            c
        };
        let diff = s - r_ll * cand;
        let total = partial_sq + diff * diff;
        if total >= *best_sq {
            // Candidates only get farther from here.
            break;
        }
        x[level] = cand;
        if level == 0 {
            best.copy_from_slice(x);
            *best_sq = total;
        } else {
            descend_alphabet(r, y, alphabet, level - 1, total, x, best, best_sq);
        }
    }
}

/// Eve's exact ML against the SVD precoder: arg min over the finite M-QAM
/// alphabet of `|| y - G P u' ||`.
pub fn eve_decode_svd(
    y: &ComplexVector,
    g: &ComplexMatrix,
    p: &ComplexMatrix,
    c: &Constellation,
) -> Result<ComplexVector> {
    let b = g * p;
    let n_b = b.ncols();
    let n = 2 * n_b;
    if n > tol::CVP_ENUM_CAP {
        return Err(Error::CapacityExceeded {
            dim: n,
            cap: tol::CVP_ENUM_CAP,
        });
    }
    if y.len() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "eve_decode_svd: y has {}, expected {}",
            y.len(),
            b.nrows()
        )));
    }
    let br = real_embedding(&b);
    let t = embed_vector(y);
    let (r, yr, _) = reduce_system(&br, &t)?;
    let xs = alphabet_sphere_decode(&r, &yr, c.points_per_dim());
    Ok(ComplexVector::from_fn(n_b, |i, _| {
        Complex64::new(xs[2 * i], xs[2 * i + 1])
    }))
}

/// Eve's exact ML against the lattice precoder: the secret becomes
/// `s = u - A w` on the full odd Gaussian-integer grid, so she solves CVP on
/// the lattice `2 G H^+` (offset by `G H^+ (1+i) 1`) and folds back mod A.
pub fn eve_decode_lp(
    y: &ComplexVector,
    g: &ComplexMatrix,
    h: &ComplexMatrix,
    c: &Constellation,
) -> Result<ComplexVector> {
    let hd = pseudoinverse(h)?;
    let b = g * &hd;
    let n_b = b.ncols();
    if y.len() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "eve_decode_lp: y has {}, expected {}",
            y.len(),
            b.nrows()
        )));
    }
    let ones = ComplexVector::from_element(n_b, Complex64::new(1.0, 1.0));
    let offset = &b * ones;
    let target = embed_vector(&(y - offset));
    let basis = LatticeBasis::from_complex(&b * Complex64::new(2.0, 0.0))?;
    let k = cvp_sphere_decode(&basis, &target, None)?.coefficients;
    Ok(ComplexVector::from_fn(n_b, |i, _| {
        let s_re = 2 * k[2 * i] + 1;
        let s_im = 2 * k[2 * i + 1] + 1;
        Complex64::new(c.fold(s_re as f64), c.fold(s_im as f64))
    }))
}

/// Exact equality of two decoded symbol vectors (entries are exact integer
/// constellation values).
pub fn symbols_equal(a: &ComplexVector, b: &ComplexVector) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b.iter())
            .all(|(x, y)| (x.re - y.re).abs() < 0.5 && (x.im - y.im).abs() < 0.5)
}

/// Number of complex symbols that differ.
pub fn symbol_errors(a: &ComplexVector, b: &ComplexVector) -> usize {
    a.iter()
        .zip(b.iter())
        .filter(|(x, y)| (x.re - y.re).abs() >= 0.5 || (x.im - y.im).abs() >= 0.5)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario() -> WiretapScenario {
        WiretapScenario {
            n_a: 10,
            n_b: 9,
            n_e: 20,
            m: 64,
            sigma_b2: 0.0,
            sigma_e2: 0.0,
            beta: 1.0,
            precoder: Precoder::Lattice,
            total_power_budget: None,
        }
    }

    #[test]
    fn constellation_points() {
        let c4 = Constellation::new(4).unwrap();
        assert_eq!(c4.points_per_dim(), &[-1.0, 1.0]);
        assert_eq!(c4.amplitude(), 4.0);

        let c16 = Constellation::new(16).unwrap();
        assert_eq!(c16.points_per_dim(), &[-3.0, -1.0, 1.0, 3.0]);

        assert!(Constellation::new(8).is_err());
        assert!(Constellation::new(9).is_err());
        assert!(Constellation::new(2).is_err());
    }

    #[test]
    fn fold_wraps_past_window() {
        let c = Constellation::new(64).unwrap();
        // Just past the window: quantizes to 9, folds to the far side.
        let s = Constellation::round_odd(8.5);
        assert_eq!(s, 9.0);
        assert_eq!(c.fold(s), -7.0);
        assert_eq!(c.fold(-9.0), 7.0);
        assert_eq!(c.fold(7.0), 7.0);
        assert_eq!(c.fold(23.0), 7.0);
    }

    #[test]
    fn scenario_validation() {
        let mut s = scenario();
        s.validate().unwrap();
        s.n_b = 10;
        assert!(s.validate().is_err());
        s.n_b = 9;
        s.beta = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn channel_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let h = sample_channel(1000, 1000, &mut rng);
        let mean_sq = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e6;
        assert!((mean_sq - 1.0).abs() < 0.01);
        let var_re = h.iter().map(|z| z.re * z.re).sum::<f64>() / 1e6;
        let var_im = h.iter().map(|z| z.im * z.im).sum::<f64>() / 1e6;
        let cov = h.iter().map(|z| z.re * z.im).sum::<f64>() / 1e6;
        assert!((var_re - 0.5).abs() < 0.01);
        assert!((var_im - 0.5).abs() < 0.01);
        assert!(cov.abs() < 0.01);
    }

    #[test]
    fn channel_is_deterministic_under_seed() {
        let a = sample_channel(4, 4, &mut ChaCha8Rng::seed_from_u64(7));
        let b = sample_channel(4, 4, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
    }

    #[test]
    fn secret_symbols_uniform() {
        let c = Constellation::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            let u = sample_secret(&c, 1, &mut rng);
            for val in [u[0].re, u[0].im] {
                let idx = c
                    .points_per_dim()
                    .iter()
                    .position(|&p| p == val)
                    .expect("symbol in alphabet");
                counts[idx] += 1;
            }
        }
        // 3-sigma multinomial band around 2n/4.
        let expect = (2 * n) as f64 / 4.0;
        let sigma = ((2 * n) as f64 * 0.25 * 0.75).sqrt();
        for &cnt in &counts {
            assert!((cnt as f64 - expect).abs() < 3.0 * sigma, "counts {counts:?}");
        }
    }

    #[test]
    fn artificial_noise_norm_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v = sample_artificial_noise(1, 4.667, &mut rng).unwrap();
        assert_relative_eq!(v.norm(), 4.667, epsilon = 1e-12);
        let v = sample_artificial_noise(5, 1.0, &mut rng).unwrap();
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
        // Continuity: integer components have probability zero.
        for _ in 0..1000 {
            let v = sample_artificial_noise(2, 3.0, &mut rng).unwrap();
            assert!(v.iter().all(|z| z.re.fract() != 0.0 && z.im.fract() != 0.0));
        }
    }

    #[test]
    fn svd_precode_power_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = sample_channel(9, 10, &mut rng);
        let c = Constellation::new(64).unwrap();
        let u = sample_secret(&c, 9, &mut rng);
        let v0 = ComplexVector::zeros(1);
        let rec = svd_precode(&h, &u, &v0).unwrap();
        assert_relative_eq!(rec.total_power(), u.norm_squared(), max_relative = 1e-10);

        let u0 = ComplexVector::zeros(9);
        let v = sample_artificial_noise(1, 2.5, &mut rng).unwrap();
        let rec = svd_precode(&h, &u0, &v).unwrap();
        assert_relative_eq!(rec.total_power(), v.norm_squared(), max_relative = 1e-10);
        assert!((&h * &rec.x).norm() < 1e-9);

        let u = sample_secret(&c, 9, &mut rng);
        let rec = svd_precode(&h, &u, &v).unwrap();
        assert!(rec.power_identity_gap() <= tol::POWER_IDENTITY);
    }

    #[test]
    fn null_space_noise_invisible_to_bob() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = sample_channel(9, 10, &mut rng);
        let z = null_space(&h).unwrap();
        for _ in 0..100 {
            let v = sample_artificial_noise(1, 10.0, &mut rng).unwrap();
            let zv = &z * &v;
            assert!((&h * zv).norm() <= 1e-9 * v.norm());
        }
    }

    #[test]
    fn lattice_precode_zero_secret() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = sample_channel(3, 4, &mut rng);
        let c = Constellation::new(64).unwrap();
        let u0 = ComplexVector::zeros(3);
        let v = sample_artificial_noise(1, 1.5, &mut rng).unwrap();
        let rec = lattice_precode(&h, &u0, &v, &c, PerturbationMode::Exact).unwrap();
        assert!(rec.w_hat.unwrap().iter().all(|w| w.re == 0 && w.im == 0));
        let z = null_space(&h).unwrap();
        assert!((&rec.x - &z * &v).norm() < 1e-10);
    }

    #[test]
    fn lattice_precode_no_gain_inside_window() {
        // Orthonormal rows: H^+ = H^H preserves norms, so no perturbation
        // can help while ||u||_inf < A/2.
        let mut h = ComplexMatrix::zeros(3, 5);
        for i in 0..3 {
            h[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let c = Constellation::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = sample_secret(&c, 3, &mut rng);
        let v = sample_artificial_noise(2, 1.0, &mut rng).unwrap();
        let rec = lattice_precode(&h, &u, &v, &c, PerturbationMode::Exact).unwrap();
        assert!(rec.w_hat.unwrap().iter().all(|w| w.re == 0 && w.im == 0));
    }

    #[test]
    fn lattice_precode_exact_beats_babai() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = Constellation::new(64).unwrap();
        for _ in 0..20 {
            let h = sample_channel(5, 6, &mut rng);
            let u = sample_secret(&c, 5, &mut rng);
            let v = sample_artificial_noise(1, 1.0, &mut rng).unwrap();
            let exact = lattice_precode(&h, &u, &v, &c, PerturbationMode::Exact).unwrap();
            let babai = lattice_precode(&h, &u, &v, &c, PerturbationMode::Babai).unwrap();
            assert!(exact.data_power <= babai.data_power * (1.0 + 1e-9));
            let unperturbed = (pseudoinverse(&h).unwrap() * &u).norm_squared();
            assert!(exact.data_power <= unperturbed * (1.0 + 1e-9));
            assert!(exact.power_identity_gap() <= tol::POWER_IDENTITY);
            assert!(babai.power_identity_gap() <= tol::POWER_IDENTITY);
        }
    }

    #[test]
    fn transmit_moments_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = ComplexMatrix::identity(4, 4);
        let x = ComplexVector::zeros(4);
        let sigma2 = 0.7;
        let n = 25_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let y = transmit_through(&h, &x, sigma2, &mut rng).unwrap();
            acc += y.norm_squared();
        }
        let per_component = acc / (n as f64 * 4.0);
        assert!((per_component - sigma2).abs() < 0.03 * sigma2);

        let x = ComplexVector::from_element(4, Complex64::new(1.0, -2.0));
        let noiseless = transmit_through(&h, &x, 0.0, &mut rng).unwrap();
        assert!((noiseless - &x).norm() < 1e-15);

        let a = transmit_through(&h, &x, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = transmit_through(&h, &x, 1.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bob_svd_noiseless_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let c = Constellation::new(64).unwrap();
        let h = sample_channel(9, 10, &mut rng);
        let u = sample_secret(&c, 9, &mut rng);
        let v = sample_artificial_noise(1, 4.667, &mut rng).unwrap();
        let rec = svd_precode(&h, &u, &v).unwrap();
        let z = transmit_through(&h, &rec.x, 0.0, &mut rng).unwrap();
        let decoded = bob_decode_svd(&z, &h, &c).unwrap();
        assert!(symbols_equal(&decoded, &u));
    }

    #[test]
    fn bob_svd_saturating_noise_approaches_uniform_guess() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let c = Constellation::new(64).unwrap();
        let mut symbol_errs = 0usize;
        let mut total = 0usize;
        for _ in 0..300 {
            let h = sample_channel(4, 5, &mut rng);
            let u = sample_secret(&c, 4, &mut rng);
            let v0 = ComplexVector::zeros(1);
            let rec = svd_precode(&h, &u, &v0).unwrap();
            let z = transmit_through(&h, &rec.x, 1e9, &mut rng).unwrap();
            let decoded = bob_decode_svd(&z, &h, &c).unwrap();
            symbol_errs += symbol_errors(&decoded, &u);
            total += 4;
        }
        let rate = symbol_errs as f64 / total as f64;
        let expect = 1.0 - 1.0 / 64.0;
        assert!((rate - expect).abs() < 0.03, "rate {rate}");
    }

    #[test]
    fn bob_lp_noiseless_and_small_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let c = Constellation::new(64).unwrap();
        let h = sample_channel(9, 10, &mut rng);
        let u = sample_secret(&c, 9, &mut rng);
        let v = sample_artificial_noise(1, 4.667, &mut rng).unwrap();
        let rec = lattice_precode(&h, &u, &v, &c, PerturbationMode::Exact).unwrap();
        let z = transmit_through(&h, &rec.x, 0.0, &mut rng).unwrap();
        let decoded = bob_decode_lp(&z, &c);
        assert!(symbols_equal(&decoded, &u));

        // Noise strictly below half the symbol spacing cannot cause errors.
        for _ in 0..50 {
            let mut zz = z.clone();
            for i in 0..zz.len() {
                zz[i] += Complex64::new(rng.gen_range(-0.49..0.49), rng.gen_range(-0.49..0.49));
            }
            assert!(symbols_equal(&bob_decode_lp(&zz, &c), &u));
        }
    }

    #[test]
    fn eve_svd_unprotected_noiseless_recovers_secret() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let c = Constellation::new(64).unwrap();
        let h = sample_channel(9, 10, &mut rng);
        let g = sample_channel(20, 10, &mut rng);
        let u = sample_secret(&c, 9, &mut rng);
        let v0 = ComplexVector::zeros(1);
        let rec = svd_precode(&h, &u, &v0).unwrap();
        let y = transmit_through(&g, &rec.x, 0.0, &mut rng).unwrap();
        let p = svd_decompose(&h).unwrap().v;
        let decoded = eve_decode_svd(&y, &g, &p, &c).unwrap();
        assert!(symbols_equal(&decoded, &u));
    }

    #[test]
    fn eve_lp_unprotected_noiseless_recovers_secret() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let c = Constellation::new(64).unwrap();
        let h = sample_channel(9, 10, &mut rng);
        let g = sample_channel(20, 10, &mut rng);
        let u = sample_secret(&c, 9, &mut rng);
        let v0 = ComplexVector::zeros(1);
        let rec = lattice_precode(&h, &u, &v0, &c, PerturbationMode::Exact).unwrap();
        let y = transmit_through(&g, &rec.x, 0.0, &mut rng).unwrap();
        let decoded = eve_decode_lp(&y, &g, &h, &c).unwrap();
        assert!(symbols_equal(&decoded, &u));
    }

    #[test]
    fn eve_generalized_noise_second_moment() {
        // E ||G Z v||^2 = N_E ||v||^2 for fixed-norm artificial noise.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n_e = 20;
        let norm_v = 3.0;
        let h = sample_channel(9, 10, &mut rng);
        let z = null_space(&h).unwrap();
        let trials = 100_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let g = sample_channel(n_e, 10, &mut rng);
            let v = sample_artificial_noise(1, norm_v, &mut rng).unwrap();
            acc += (&g * (&z * &v)).norm_squared();
        }
        let mean = acc / trials as f64;
        let expect = n_e as f64 * norm_v * norm_v;
        assert!((mean - expect).abs() < 0.02 * expect, "mean {mean} vs {expect}");
    }
}
