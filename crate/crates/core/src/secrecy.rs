//! Covering-ratio secrecy machinery.
//!
//! The covering ratio `c_R = ||GZv|| / r_eff` measures how far the
//! artificial noise pushes Eve's observation relative to the effective
//! radius of her decoding lattice. The Φ formulas give the closed-form
//! noise-norm rule `||v|| = beta e / Φ`; the distribution checks validate
//! the chi and log-determinant limits that rule rests on.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Chi, ContinuousCDF, Normal};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::lattice::{effective_radius, LatticeBasis, RadiusMode};
use crate::matcore::{null_space, qr_decompose, ComplexMatrix, ComplexVector};
use crate::tol;
use crate::wiretap::{sample_artificial_noise, sample_channel};

/// Asymptotic Kolmogorov critical value at 1% significance, scaled by
/// 1/sqrt(n) before comparison.
const KS_CRITICAL_1PCT: f64 = 1.62762;

/// One covering-ratio measurement and its threshold flags.
#[derive(Debug, Clone, Serialize)]
pub struct SecrecyAssessment {
    pub c_r: f64,
    pub r_eff: f64,
    pub interference_norm: f64,
    /// `c_R >= pi e`: the error-floor condition.
    pub pi_e_threshold_met: bool,
    /// `c_R >= beta` for the configured beta.
    pub beta_met: bool,
}

/// Φ for lattice precoding:
/// `[(N_E-N_B)!/(N_A-N_B)! * N_A!/N_E!]^(1/(2 N_B))`, evaluated in the log
/// domain.
pub fn phi_lp(n_a: usize, n_b: usize, n_e: usize) -> Result<f64> {
    if n_b == 0 || n_b >= n_a || n_a > n_e {
        return Err(Error::InvalidArgument(format!(
            "phi_lp needs 1 <= N_B < N_A <= N_E, got ({n_a}, {n_b}, {n_e})"
        )));
    }
    let ln = ln_gamma((n_e - n_b + 1) as f64) - ln_gamma((n_a - n_b + 1) as f64)
        + ln_gamma((n_a + 1) as f64)
        - ln_gamma((n_e + 1) as f64);
    Ok((ln / (2.0 * n_b as f64)).exp())
}

/// Φ for SVD precoding: `[(N_E-N_B)!/N_E! * N_B^(1/2)]^(1/(2 N_B))`.
pub fn phi_svd(n_b: usize, n_e: usize) -> Result<f64> {
    if n_b == 0 || n_b > n_e {
        return Err(Error::InvalidArgument(format!(
            "phi_svd needs 1 <= N_B <= N_E, got ({n_b}, {n_e})"
        )));
    }
    let ln = ln_gamma((n_e - n_b + 1) as f64) - ln_gamma((n_e + 1) as f64)
        + 0.5 * (n_b as f64).ln();
    Ok((ln / (2.0 * n_b as f64)).exp())
}

/// The noise-power rule `||v|| = beta e / Φ`.
pub fn required_noise_norm(beta: f64, phi: f64) -> f64 {
    beta * std::f64::consts::E / phi
}

/// Covering ratio of an interference vector against Eve's effective lattice
/// (`GP` for SVD precoding, `G H^+` for lattice precoding).
pub fn covering_ratio(
    eff_basis: &LatticeBasis,
    interference: &ComplexVector,
    beta: f64,
) -> Result<SecrecyAssessment> {
    if 2 * interference.len() != eff_basis.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "interference has {} complex dims, basis ambient is {} real dims",
            interference.len(),
            eff_basis.ambient_dim()
        )));
    }
    let r_eff = effective_radius(eff_basis, RadiusMode::Asymptotic);
    let interference_norm = interference.norm();
    let c_r = interference_norm / r_eff;
    Ok(SecrecyAssessment {
        c_r,
        r_eff,
        interference_norm,
        pi_e_threshold_met: c_r >= tol::PI_E,
        beta_met: c_r >= beta,
    })
}

/// Covering ratio for lattice precoding through the QR route:
/// `c_R = ||GZv|| det(R_H)^(1/N_B) / (sqrt(N_B/pi e) |det(G Q_H)|^(1/N_B))`
/// with `H^H = Q_H R_H`. Algebraically identical to [`covering_ratio`] on
/// the basis `G H^+`; kept as an independent cross-check.
pub fn covering_ratio_lp_decomposed(
    g: &ComplexMatrix,
    h: &ComplexMatrix,
    v: &ComplexVector,
) -> Result<f64> {
    let n_b = h.nrows() as f64;
    let z = null_space(h)?;
    if v.len() != z.ncols() || g.ncols() != h.ncols() {
        return Err(Error::DimensionMismatch(
            "covering_ratio_lp_decomposed: shape mismatch".into(),
        ));
    }
    let interference_norm = (g * (&z * v)).norm();

    let (q_h, r_h) = qr_decompose(&h.adjoint())?;
    let ln_det_rh: f64 = (0..r_h.nrows()).map(|i| r_h[(i, i)].re.ln()).sum();

    // |det(G Q_H)| generalized to tall bases: the complex lattice volume
    // sqrt(det((GQ)^H GQ)), again read off a QR diagonal.
    let gq = g * q_h;
    let (_, r_gq) = qr_decompose(&gq)?;
    let ln_vol_gq: f64 = (0..r_gq.nrows()).map(|i| r_gq[(i, i)].re.ln()).sum();

    Ok(interference_norm * (ln_det_rh / n_b).exp()
        / ((n_b / tol::PI_E).sqrt() * (ln_vol_gq / n_b).exp()))
}

// ---------------------------------------------------------------------------
// Distribution checks
// ---------------------------------------------------------------------------

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiCheckReport {
    pub n_e: usize,
    pub noise_dim: usize,
    pub norm_v: f64,
    pub n_trials: usize,
    /// Mean of `(2/||v||^2) ||GZv||^2`; must match `2 N_E`.
    pub mean_normalized_sq: f64,
    pub expected_mean: f64,
    pub moment_rel_err: f64,
    pub moment_pass: bool,
    pub ks_statistic: f64,
    pub ks_critical_1pct: f64,
    pub ks_pass: bool,
}

/// Sample `(sqrt(2)/||v||) ||GZv||` and compare it against a chi
/// distribution with `2 N_E` degrees of freedom.
///
/// `GZ` has i.i.d. complex Gaussian entries whenever `Z` has orthonormal
/// columns, so sampling a fresh Gaussian `N_E x noise_dim` matrix against a
/// fixed-norm random-direction `v` reproduces the interference term exactly.
pub fn chi_convergence_check<R: Rng>(
    n_e: usize,
    noise_dim: usize,
    norm_v: f64,
    n_trials: usize,
    rng: &mut R,
) -> Result<ChiCheckReport> {
    if n_e == 0 || noise_dim == 0 {
        return Err(Error::InvalidArgument("chi check: dimensions must be >= 1".into()));
    }
    if n_trials == 0 {
        return Err(Error::InvalidConfig("chi check: n_trials must be >= 1".into()));
    }
    if !(norm_v > 0.0) {
        return Err(Error::InvalidArgument("chi check: norm_v must be > 0".into()));
    }
    let seeds: Vec<u64> = (0..n_trials).map(|_| rng.gen()).collect();
    let mut stats: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let mut trng = ChaCha8Rng::seed_from_u64(s);
            let v = sample_artificial_noise(noise_dim, norm_v, &mut trng)
                .expect("valid noise parameters");
            let g = sample_channel(n_e, noise_dim, &mut trng);
            std::f64::consts::SQRT_2 / norm_v * (g * v).norm()
        })
        .collect();

    let mean_normalized_sq = stats.iter().map(|x| x * x).sum::<f64>() / n_trials as f64;
    let expected_mean = 2.0 * n_e as f64;
    let moment_rel_err = (mean_normalized_sq - expected_mean).abs() / expected_mean;

    let chi = Chi::new(2.0 * n_e as f64).expect("valid dof");
    let ks = ks_statistic(&mut stats, |x| chi.cdf(x));
    let ks_critical = KS_CRITICAL_1PCT / (n_trials as f64).sqrt();

    Ok(ChiCheckReport {
        n_e,
        noise_dim,
        norm_v,
        n_trials,
        mean_normalized_sq,
        expected_mean,
        moment_rel_err,
        moment_pass: moment_rel_err <= 0.02,
        ks_statistic: ks,
        ks_critical_1pct: ks_critical,
        ks_pass: ks <= ks_critical,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LogDetCltReport {
    pub n_a: usize,
    pub n_b: usize,
    pub n_trials: usize,
    /// Sample moments of the standardized statistic.
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub ks_vs_normal: f64,
    pub ks_critical_1pct: f64,
    pub ks_pass: bool,
    /// Exact finite-dimension moments of the same statistic, from the
    /// Bartlett decomposition (digamma/trigamma sums). The asymptotic claim
    /// holds when these approach 0 and 1.
    pub analytic_mean: f64,
    pub analytic_variance: f64,
    /// False when `N_B = 1`: the standardization divides by sqrt(log N_B).
    pub normality_applicable: bool,
    /// Agreement of the QR determinant route with `abs_det` on square
    /// instances (max relative gap seen).
    pub det_route_max_gap: f64,
}

fn trigamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv * (1.0 + inv / 2.0 + inv2 / 6.0 - inv2 * inv2 / 30.0
        + inv2 * inv2 * inv2 / 42.0)
}

/// Monte Carlo of the standardized log-determinant statistic
/// `(log|det R_H| - 1/2 log(N_A!/(N_A-N_B)!) + 1/4 log N_B) / (1/2 sqrt(log N_B))`
/// where `H^H = Q_H R_H` for an `N_B x N_A` complex Gaussian channel.
pub fn logdet_clt_check<R: Rng>(
    n_a: usize,
    n_b: usize,
    n_trials: usize,
    rng: &mut R,
) -> Result<LogDetCltReport> {
    if n_b == 0 || n_b > n_a {
        return Err(Error::InvalidArgument(format!(
            "logdet check needs 1 <= N_B <= N_A, got ({n_a}, {n_b})"
        )));
    }
    if n_trials == 0 {
        return Err(Error::InvalidConfig("logdet check: n_trials must be >= 1".into()));
    }
    let normality_applicable = n_b >= 2;
    let centering = 0.5 * (ln_gamma((n_a + 1) as f64) - ln_gamma((n_a - n_b + 1) as f64))
        - 0.25 * (n_b as f64).ln();
    let denom = 0.5 * (n_b as f64).ln().sqrt();

    let seeds: Vec<u64> = (0..n_trials).map(|_| rng.gen()).collect();
    let samples: Vec<(f64, f64)> = seeds
        .par_iter()
        .map(|&s| {
            let mut trng = ChaCha8Rng::seed_from_u64(s);
            let h = sample_channel(n_b, n_a, &mut trng);
            let (_, r) = qr_decompose(&h.adjoint()).expect("random channel is full rank");
            let logdet: f64 = (0..n_b).map(|i| r[(i, i)].re.ln()).sum();
            // Cross-check the determinant route on square instances.
            let gap = if n_a == n_b {
                let direct = crate::matcore::abs_det(&h.adjoint()).expect("square");
                (direct.ln() - logdet).abs() / logdet.abs().max(1.0)
            } else {
                0.0
            };
            (logdet, gap)
        })
        .collect();

    let det_route_max_gap = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let mut stats: Vec<f64> = samples
        .iter()
        .map(|s| (s.0 - centering) / denom)
        .collect();

    let n = n_trials as f64;
    let (sample_mean, sample_variance) = if normality_applicable {
        let mean = stats.iter().sum::<f64>() / n;
        let var = stats.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        (mean, var)
    } else {
        (f64::NAN, f64::NAN)
    };

    let (ks, ks_critical, ks_pass) = if normality_applicable {
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let ks = ks_statistic(&mut stats, |x| normal.cdf(x));
        let crit = KS_CRITICAL_1PCT / n.sqrt();
        (ks, crit, ks <= crit)
    } else {
        (f64::NAN, f64::NAN, false)
    };

    // Exact moments through the Bartlett decomposition:
    // det(H H^H) ~ prod_{k=N_A-N_B+1}^{N_A} Gamma(k, 1).
    let mut mean_num = -centering;
    let mut var_num = 0.0;
    for k in (n_a - n_b + 1)..=n_a {
        mean_num += 0.5 * digamma(k as f64);
        var_num += 0.25 * trigamma(k as f64);
    }
    let (analytic_mean, analytic_variance) = if normality_applicable {
        (mean_num / denom, var_num / (denom * denom))
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(LogDetCltReport {
        n_a,
        n_b,
        n_trials,
        sample_mean,
        sample_variance,
        ks_vs_normal: ks,
        ks_critical_1pct: ks_critical,
        ks_pass,
        analytic_mean,
        analytic_variance,
        normality_applicable,
        det_route_max_gap,
    })
}

/// Decay exponent `min(N_B^2 / ln N_B, N_E)` of the covering-ratio tail
/// bound; the hidden constant is deliberately not reported.
pub fn bound_exponent(n_b: usize, n_e: usize) -> Result<f64> {
    if n_b < 2 {
        return Err(Error::InvalidArgument(format!(
            "bound exponent needs N_B >= 2, got {n_b}"
        )));
    }
    if n_e == 0 {
        return Err(Error::InvalidArgument("bound exponent needs N_E >= 1".into()));
    }
    let nb = n_b as f64;
    Ok((nb * nb / nb.ln()).min(n_e as f64))
}
