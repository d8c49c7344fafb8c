//! Plane-wave solutions of the real-coin walk and what they say about a wall.
//!
//! For the coin of parameter `ρ` the Bloch matrix is
//!
//! ```text
//! U_k = ( a e^{ik}   c e^{ik}  )
//!       ( b e^{−ik}  d e^{−ik} )
//! ```
//!
//! with eigenvalues `e^{−iω}`, `ω₊ = −sin⁻¹(√ρ sin k)`, `ω₋ = π − ω₊`.
//! Eigenvectors are normalized per unit cell, `A² + |B|² = 1`, with `A ≥ 0`.
//!
//! The escape probability past a wall at `M` is `(1/π)∫ ℒ_M(k) dk` over
//! `(−π/2, π/2)`; [`escape_density`] is that integrand split by start
//! component.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coin::{Coin, StartSpinor};
use crate::error::{Error, Result};
use crate::quad::{self, Adaptive};
use crate::simulate::BoundaryConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Plus,
    Minus,
}

impl Band {
    fn sign(self) -> f64 {
        match self {
            Band::Plus => 1.0,
            Band::Minus => -1.0,
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain("rho", format!("must satisfy 0 < rho < 1, got {rho}")));
    }
    Ok(())
}

/// `cos k / √(1/ρ − sin² k)`, minus the group velocity of the `+` band.
fn xi(rho: f64, k: f64) -> f64 {
    k.cos() / (1.0 / rho - k.sin().powi(2)).sqrt()
}

/// Frequency `ω` with `e^{−iω}` an eigenvalue of `U_k`.
pub fn dispersion(rho: f64, k: f64, band: Band) -> f64 {
    let w = -(rho.sqrt() * k.sin()).asin();
    match band {
        Band::Plus => w,
        Band::Minus => PI - w,
    }
}

/// `(A, B)`: `A = √((1 ± ξ)/2)`, `B = ±e^{−ik} √((1 ∓ ξ)/2)`.
pub fn eigvec(rho: f64, k: f64, band: Band) -> (f64, C64) {
    let s = band.sign();
    let x = xi(rho, k);
    let a = ((1.0 + s * x) / 2.0).max(0.0).sqrt();
    let b = C64::from_polar(s * ((1.0 - s * x) / 2.0).max(0.0).sqrt(), -k);
    (a, b)
}

/// `dω/dk = ∓ cos k / √(1/ρ − sin² k)`.
pub fn group_velocity(rho: f64, k: f64, band: Band) -> f64 {
    -band.sign() * xi(rho, k)
}

/// Probability that a plane wave of wavevector `k` is reflected by the wall.
pub fn reflection_prob(rho: f64, k: f64) -> f64 {
    let s = (1.0 / rho - 1.0).sqrt();
    let ck = k.cos().abs();
    ((1.0 + ck * ck / (s * s)).sqrt() - ck / s).powi(2)
}

/// `U_k` in row-major order.
pub fn bloch_matrix(rho: f64, k: f64) -> [[C64; 2]; 2] {
    let coin = Coin::rho_family(rho).expect("rho checked by caller");
    let (p, m) = (C64::from_polar(1.0, k), C64::from_polar(1.0, -k));
    [[coin.a() * p, coin.c() * p], [coin.b() * m, coin.d() * m]]
}

/// One band eigenmode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub k: f64,
    pub band: Band,
    pub omega: f64,
    pub a: f64,
    pub b: C64,
    pub v_group: f64,
}

impl EigenMode {
    pub fn new(rho: f64, k: f64, band: Band) -> Result<Self> {
        check_rho(rho)?;
        let (a, b) = eigvec(rho, k, band);
        Ok(EigenMode { k, band, omega: dispersion(rho, k, band), a, b, v_group: group_velocity(rho, k, band) })
    }

    /// `max |U_k v − e^{−iω} v|`
    pub fn residual(&self, rho: f64) -> f64 {
        let u = bloch_matrix(rho, self.k);
        let v = [C64::new(self.a, 0.0), self.b];
        let lam = C64::from_polar(1.0, -self.omega);
        (0..2).map(|i| (u[i][0] * v[0] + u[i][1] * v[1] - lam * v[i]).norm()).fold(0.0, f64::max)
    }
}

/// Escape probability and its decomposition
/// `Λ = ℓ² C_l + r² C_r + ℓ r cos Φ C_lr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeResult {
    pub lambda: f64,
    pub c_l: f64,
    pub c_r: f64,
    pub c_lr: f64,
}

impl EscapeResult {
    pub fn from_coefficients(c_l: f64, c_r: f64, c_lr: f64, start: StartSpinor) -> Self {
        let lambda = start.ell().powi(2) * c_l + start.r().powi(2) * c_r + start.cross() * c_lr;
        EscapeResult { lambda, c_l, c_r, c_lr }
    }
}

/// The three start-component parts of `ℒ_M(k)` (coefficients of `ℓ²`, `r²`
/// and `ℓ r cos Φ`).
pub fn escape_density(rho: f64, k: f64, m: u32) -> [f64; 3] {
    let x = xi(rho, k);
    let inv = 1.0 / rho;
    let sgn = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mf = m as f64;
    let w = 1.0 - x;
    let l = w * ((inv + (2.0 * k).cos()) / (inv - 1.0) + sgn * (2.0 * k * (mf - 1.0)).cos());
    let r = w * (1.0 - sgn * (2.0 * k * mf).cos());
    let lr = 2.0 * (k.cos() / (inv - 1.0).sqrt()) * w * (k.cos() - sgn * (k * (2.0 * mf - 1.0)).cos());
    [l, r, lr]
}

/// `(1/π) ∫_{−π/2}^{π/2} h(k) dk` for even `h`, with enough panels to
/// resolve oscillations like `cos(2kM)`.
fn k_integral<F: Fn(f64) -> f64>(h: F, m: u32) -> Result<f64> {
    let opts = Adaptive { tol: 1e-13, min_panels: 4 * m as usize + 4, max_depth: 40 };
    Ok(2.0 / PI * quad::integrate(h, 0.0, FRAC_PI_2, opts)?)
}

fn coefficients_one_wall(rho: f64, m: u32) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = k_integral(|k| escape_density(rho, k, m)[i], m)?;
    }
    Ok(out)
}

/// Probability of escaping to `n → −∞` with a wall at `M`, for the real
/// coin of parameter `rho`.
///
/// For `M = 1` the start touches the wall after one step; one hand step
/// gives `Λ₁ = |α√ρ + β√(1−ρ)|² Λ_{2L}` with `Λ_{2L}` the `ℓ²` coefficient
/// at `M = 2`.
pub fn escape_prob_one_wall(rho: f64, start: StartSpinor, m: u32) -> Result<EscapeResult> {
    check_rho(rho)?;
    if m < 1 {
        return Err(Error::domain("M", "wall position must satisfy M >= 1"));
    }
    let [c_l, c_r, c_lr] = if m == 1 {
        let l2 = coefficients_one_wall(rho, 2)?[0];
        [rho * l2, (1.0 - rho) * l2, 2.0 * (rho * (1.0 - rho)).sqrt() * l2]
    } else {
        coefficients_one_wall(rho, m)?
    };
    Ok(EscapeResult::from_coefficients(c_l, c_r, c_lr, start))
}

/// [`escape_prob_one_wall`] for a general coin. Only `ρ` and `φ` matter:
/// the relative phase of the start is shifted to `Φ + 2φ`.
pub fn escape_prob_coin(coin: &Coin, start: StartSpinor, m: u32) -> Result<EscapeResult> {
    let shifted = StartSpinor::new(start.alpha(), start.beta() * C64::from_polar(1.0, -2.0 * coin.phi()))?;
    escape_prob_one_wall(coin.rho(), shifted, m)
}

/// `ℓr cos Φ` coefficient of the `M → ∞` escape probability.
pub fn cross_coefficient_limit(rho: f64) -> f64 {
    let s = (1.0 / rho - 1.0).sqrt();
    1.0 / s - 2.0 / PI * (1.0 + (2.0 * rho - 1.0) / (rho * (1.0 - rho)).sqrt() * rho.sqrt().asin())
}

/// Closed-form `M → ∞` escape probability.
pub fn escape_limit(rho: f64, start: StartSpinor) -> Result<EscapeResult> {
    check_rho(rho)?;
    let s = (1.0 / rho - 1.0).sqrt();
    let asr = rho.sqrt().asin();
    let c_l = -2.0 / (PI * s) + (1.0 - 2.0 * rho / PI * asr) / (1.0 - rho);
    let c_r = 1.0 - 2.0 / PI * asr;
    Ok(EscapeResult::from_coefficients(c_l, c_r, cross_coefficient_limit(rho), start))
}

/// Hadamard walk with the left wall at `−∞`: probability of passing through
/// it when the right wall sits at `M_R`. Each left-moving component leaks
/// `1/(1 + P_r)` of its weight after repeated bounces between the walls.
pub fn transmission_two_wall(start: StartSpinor, m_right: u32) -> Result<EscapeResult> {
    if m_right < 1 {
        return Err(Error::domain("M_R", "right wall must satisfy M_R >= 1"));
    }
    let coeffs = |m: u32| -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = k_integral(
                |k| {
                    let ck = k.cos();
                    0.5 * escape_density(0.5, k, m)[i] * (1.0 + ck / (1.0 + ck * ck).sqrt())
                },
                m,
            )?;
        }
        Ok(out)
    };
    let [d_l, d_r, d_lr] = if m_right == 1 {
        let l2 = coeffs(2)?[0];
        [0.5 * l2, 0.5 * l2, l2]
    } else {
        coeffs(m_right)?
    };
    Ok(EscapeResult::from_coefficients(d_l, d_r, d_lr, start))
}

/// [`transmission_two_wall`] as `M_R → ∞`.
pub fn transmission_limit(start: StartSpinor) -> EscapeResult {
    let h = 1.0 / (2.0 * std::f64::consts::SQRT_2);
    EscapeResult::from_coefficients(1.0 - h, h, 1.0 - 2.0 * h, start)
}

/// Long-time survival: `√(M/(πt))` between two walls at distance `M`,
/// `P∞ + M²/(πt²)` with one wall.
pub fn survival_asymptote(config: BoundaryConfig, t: f64, p_inf: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::domain("t", format!("must be positive, got {t}")));
    }
    match config {
        BoundaryConfig::OneWall { m } if m >= 1 => Ok(p_inf + (m * m) as f64 / (PI * t * t)),
        BoundaryConfig::TwoWall { m_left, m_right } if m_left == m_right && m_left >= 1 => {
            Ok((m_left as f64 / (PI * t)).sqrt())
        }
        BoundaryConfig::TwoWall { .. } => {
            Err(Error::domain("M_L/M_R", "two-wall asymptote needs symmetric walls M_L = M_R >= 1"))
        }
        other => {
            other.validate()?;
            Err(Error::domain("boundary", "no survival law without walls"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

    #[test]
    fn dispersion_points() {
        assert_eq!(dispersion(0.5, 0.0, Band::Plus), 0.0);
        assert!((dispersion(0.5, FRAC_PI_2, Band::Plus) + FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn eigvec_points() {
        let (a, b) = eigvec(0.5, 0.0, Band::Plus);
        assert!((a - ((1.0 + FRAC_1_SQRT_2) / 2.0).sqrt()).abs() < 1e-15);
        assert!((b - C64::new(((1.0 - FRAC_1_SQRT_2) / 2.0).sqrt(), 0.0)).norm() < 1e-15);
        for band in [Band::Plus, Band::Minus] {
            let (a, b) = eigvec(0.5, FRAC_PI_2, band);
            assert!((a - FRAC_1_SQRT_2).abs() < 1e-15 && (b.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn velocity_points() {
        assert!((group_velocity(0.5, PI / 10.0, Band::Minus) - 0.689).abs() < 5e-4);
        assert!(group_velocity(0.3, FRAC_PI_2, Band::Plus).abs() < 1e-16);
        assert!((group_velocity(0.5, 0.0, Band::Minus) - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn reflection_points() {
        assert!((reflection_prob(0.5, PI / 10.0) - 0.184).abs() < 5e-4);
        assert!((reflection_prob(0.2, FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert!((reflection_prob(0.5, 0.0) - (SQRT_2 - 1.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn mode_residual() {
        let m = EigenMode::new(0.37, 2.1, Band::Minus).unwrap();
        assert!(m.residual(0.37) < 1e-14);
        assert!(EigenMode::new(1.0, 0.0, Band::Plus).is_err());
    }

    #[test]
    fn hadamard_escape_examples() {
        let l1 = escape_prob_one_wall(0.5, StartSpinor::left(), 1).unwrap();
        assert!((l1.lambda - (1.0 - 2.0 / PI)).abs() < 1e-10);
        let r4 = escape_prob_one_wall(0.5, StartSpinor::right(), 4).unwrap();
        assert!((r4.c_r - (65.0 - 608.0 / (3.0 * PI))).abs() < 1e-10);
        assert!(escape_prob_one_wall(0.5, StartSpinor::right(), 0).is_err());
    }

    #[test]
    fn transmission_examples() {
        let d1 = transmission_two_wall(StartSpinor::left(), 1).unwrap();
        assert!((d1.lambda - (1.0 - FRAC_1_SQRT_2)).abs() < 1e-10);
        let d3 = transmission_two_wall(StartSpinor::right(), 3).unwrap();
        assert!((d3.c_r - (35.0 - 49.0 / SQRT_2)).abs() < 1e-10);
    }

    #[test]
    fn transmission_approaches_its_limit() {
        let far = transmission_two_wall(StartSpinor::left(), 400).unwrap();
        let lim = transmission_limit(StartSpinor::left());
        for (a, b) in [(far.c_l, lim.c_l), (far.c_r, lim.c_r), (far.c_lr, lim.c_lr)] {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn asymptote_formulas() {
        let two = survival_asymptote(BoundaryConfig::TwoWall { m_left: 20, m_right: 20 }, 2e4, 0.0).unwrap();
        assert!((two - 0.017841).abs() < 1e-6);
        let one = survival_asymptote(BoundaryConfig::OneWall { m: 20 }, 1e4, 0.4).unwrap();
        assert_eq!(one, 0.4 + 400.0 / (PI * 1e8));
        assert!(survival_asymptote(BoundaryConfig::TwoWall { m_left: 2, m_right: 3 }, 5.0, 0.0).is_err());
        assert!(survival_asymptote(BoundaryConfig::OneWall { m: 3 }, 0.0, 0.0).is_err());
    }
}
