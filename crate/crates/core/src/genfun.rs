//! First-passage generating functions.
//!
//! `f(z)` (start `|0,L⟩`) and `g(z)` (start `|0,R⟩`) carry in their `z^t`
//! coefficient the amplitude of first reaching site 1 at step `t`. They
//! satisfy
//!
//! ```text
//! f = b z + a z f g,    g = d z + c z f g
//! ```
//!
//! and a wall at `M` is reached with amplitude series `f g^{M−1}` or `g^M`.
//! Summing squared moduli of coefficients is a circle integral:
//!
//! ```text
//! p_M = (1/2π) ∫ |F|² |G|^{2M−2} dθ,    F(θ) = f(e^{iθ}), G(θ) = g(e^{iθ})
//! ```

use std::f64::consts::{FRAC_1_PI, PI};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coin::{Coin, StartSpinor};
use crate::error::{Error, Result};
use crate::quad::{self, Adaptive};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A power series in `z` known up to and including `z^order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    coeffs: Vec<C64>,
}

impl PowerSeries {
    /// Series from coefficients `[z^0], [z^1], …`; the order is `len − 1`.
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a power series needs at least one coefficient");
        PowerSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        PowerSeries { coeffs: vec![ZERO; order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = PowerSeries::zero(order);
        s.coeffs[0] = ONE;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `[z^k]`, zero past the truncation order.
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn scale(&self, s: C64) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// `z^k · self`, keeping the same order.
    pub fn shift(&self, k: usize) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![ZERO; n];
        out[k.min(n)..].copy_from_slice(&self.coeffs[..n.saturating_sub(k)]);
        PowerSeries { coeffs: out }
    }

    /// `self^n` by repeated squaring.
    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = PowerSeries::one(self.order());
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Square root with constant term 1; requires `[z^0] = 1`.
    pub fn sqrt_unit(&self) -> Result<Self> {
        if (self.coeffs[0] - ONE).norm() > 1e-14 {
            return Err(Error::domain("series", "sqrt_unit needs constant term 1"));
        }
        let n = self.coeffs.len();
        let mut s = vec![ZERO; n];
        s[0] = ONE;
        for k in 1..n {
            let conv: C64 = (1..k).map(|j| s[j] * s[k - j]).sum();
            s[k] = (self.coeffs[k] - conv) * 0.5;
        }
        Ok(PowerSeries { coeffs: s })
    }

    /// `Σ |[z^t]|²` over the known coefficients.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl Add for &PowerSeries {
    type Output = PowerSeries;
    fn add(self, rhs: &PowerSeries) -> PowerSeries {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        PowerSeries { coeffs: (0..n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect() }
    }
}

impl Sub for &PowerSeries {
    type Output = PowerSeries;
    fn sub(self, rhs: &PowerSeries) -> PowerSeries {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        PowerSeries { coeffs: (0..n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect() }
    }
}

impl Mul for &PowerSeries {
    type Output = PowerSeries;
    /// Truncated Cauchy product, at the smaller of the two orders.
    fn mul(self, rhs: &PowerSeries) -> PowerSeries {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j]).sum())
            .collect();
        PowerSeries { coeffs }
    }
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::domain("order", "series order must be >= 1"));
    }
    Ok(())
}

/// `√(1 − 2(ad+bc) z² + (ad−bc)² z⁴)` to `z^order`.
fn disc_sqrt(coin: &Coin, order: usize) -> PowerSeries {
    let (a, b, c, d) = (coin.a(), coin.b(), coin.c(), coin.d());
    let det = a * d - b * c;
    let mut disc = PowerSeries::zero(order);
    disc.coeffs[0] = ONE;
    if order >= 2 {
        disc.coeffs[2] = -2.0 * (a * d + b * c);
    }
    if order >= 4 {
        disc.coeffs[4] = det * det;
    }
    disc.sqrt_unit().expect("constant term is 1")
}

/// `(1 + s·det z² − √D) / z` to `z^order`.
fn closed_form_numerator(coin: &Coin, sign: f64, order: usize) -> PowerSeries {
    let det = coin.a() * coin.d() - coin.b() * coin.c();
    let root = disc_sqrt(coin, order + 1);
    let mut num = PowerSeries::zero(order + 1);
    num.coeffs[0] = ONE;
    num.coeffs[2] += sign * det;
    let num = &num - &root;
    // constant term cancels; divide by z
    PowerSeries { coeffs: num.coeffs[1..].to_vec() }
}

/// Taylor coefficients of `f` from the closed form, falling back to the
/// functional equations when `c = 0`.
pub fn series_f(coin: &Coin, order: usize) -> Result<PowerSeries> {
    check_order(order)?;
    if coin.c().norm() < 1e-300 {
        return Ok(series_by_recurrence(coin, order)?.0);
    }
    Ok(closed_form_numerator(coin, -1.0, order).scale(1.0 / (2.0 * coin.c())))
}

/// Taylor coefficients of `g` from the closed form, falling back to the
/// functional equations when `a = 0`.
pub fn series_g(coin: &Coin, order: usize) -> Result<PowerSeries> {
    check_order(order)?;
    if coin.a().norm() < 1e-300 {
        return Ok(series_by_recurrence(coin, order)?.1);
    }
    Ok(closed_form_numerator(coin, 1.0, order).scale(1.0 / (2.0 * coin.a())))
}

/// `(f, g)` by solving `f = bz + az·fg`, `g = dz + cz·fg` order by order.
pub fn series_by_recurrence(coin: &Coin, order: usize) -> Result<(PowerSeries, PowerSeries)> {
    check_order(order)?;
    let (a, b, c, d) = (coin.a(), coin.b(), coin.c(), coin.d());
    let mut f = vec![ZERO; order + 1];
    let mut g = vec![ZERO; order + 1];
    for n in 1..=order {
        // [z^{n−1}](fg) only involves coefficients below n
        let fg: C64 = (0..n).map(|j| f[j] * g[n - 1 - j]).sum();
        f[n] = a * fg;
        g[n] = c * fg;
        if n == 1 {
            f[1] += b;
            g[1] += d;
        }
    }
    Ok((PowerSeries { coeffs: f }, PowerSeries { coeffs: g }))
}

/// Amplitude series of absorption at a wall at `m`: `α f g^{M−1} + β g^M`.
pub fn absorbed_series(coin: &Coin, start: StartSpinor, m: u32, order: usize) -> Result<PowerSeries> {
    if m < 1 {
        return Err(Error::domain("M", "wall position must satisfy M >= 1"));
    }
    let f = series_f(coin, order)?;
    let g = series_g(coin, order)?;
    let gm1 = g.pow(m - 1);
    Ok(&(&f * &gm1).scale(start.alpha()) + &(&gm1 * &g).scale(start.beta()))
}

/// `(F(θ), G(θ)) = (f(e^{iθ}), g(e^{iθ}))` for a coin of the real family,
/// using the principal square root.
pub fn fg_on_circle(rho: f64, theta: f64) -> (C64, C64) {
    let z = C64::from_polar(1.0, theta);
    let (num_f, num_g) = numerators(rho, 2.0 * theta);
    (num_f / (2.0 * (1.0 - rho).sqrt() * z), num_g / (2.0 * rho.sqrt() * z))
}

/// `(1 + w − √D, 1 − w − √D)` at `w = e^{iϑ}` for the real coin, where
/// `det = −1` and `ad + bc = 1 − 2ρ`.
fn numerators(rho: f64, vartheta: f64) -> (C64, C64) {
    let w = C64::from_polar(1.0, vartheta);
    let disc = ONE - 2.0 * (1.0 - 2.0 * rho) * w + w * w;
    let root = disc.sqrt();
    (ONE + w - root, ONE - w - root)
}

/// Exit probabilities for a wall at distance `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitProbabilities {
    /// Start `|0,L⟩`.
    pub p: f64,
    /// Start `|0,R⟩`.
    pub q: f64,
    /// Coefficient of `2 Re(α β̄)`.
    pub pq_cross: f64,
    /// Exit probability of the requested start.
    pub r: f64,
}

impl ExitProbabilities {
    fn assemble(p: f64, q: f64, pq_cross: f64, start: StartSpinor) -> Self {
        let r = start.ell().powi(2) * p + start.r().powi(2) * q + 2.0 * start.cross() * pq_cross;
        ExitProbabilities { p, q, pq_cross, r }
    }
}

fn tol_opts(m: u32) -> Adaptive {
    Adaptive { tol: 1e-13, min_panels: 2 + (m as usize / 50), max_depth: 48 }
}

/// Exit probabilities by quadrature of the generating functions on the
/// unit circle. General coins are reduced to the real coin of the same
/// `ρ` with a phase-compensated start.
pub fn exit_prob_one_wall(coin: &Coin, start: StartSpinor, m: u32) -> Result<ExitProbabilities> {
    if m < 1 {
        return Err(Error::domain("M", "wall position must satisfy M >= 1"));
    }
    let rho = coin.rho();
    let start = start.reduced_for(coin);
    if rho == 0.0 {
        // f = z, g = 0
        let p = if m == 1 { 1.0 } else { 0.0 };
        return Ok(ExitProbabilities::assemble(p, 0.0, 0.0, start));
    }
    if rho == 1.0 {
        // f = 0, g = −z
        return Ok(ExitProbabilities::assemble(0.0, 1.0, 0.0, start));
    }
    let (p, q, cross) = circle_integrals(rho, m)?;
    Ok(ExitProbabilities::assemble(p, q, cross, start))
}

/// `(p, q, cross)` as circle integrals in `ϑ = 2θ`. The integrands are even
/// in `ϑ`, so only `[0, π]` is integrated, split at the branch point
/// `ϑ₀ = cos⁻¹(1 − 2ρ)` where `√D` vanishes.
fn circle_integrals(rho: f64, m: u32) -> Result<(f64, f64, f64)> {
    let v0 = (1.0 - 2.0 * rho).acos();
    let k = (m - 1) as i32;
    let (ff, gg, fg) = (4.0 * (1.0 - rho), 4.0 * rho, 4.0 * (rho * (1.0 - rho)).sqrt());
    let opts = tol_opts(m);
    let one = |h: &dyn Fn(C64, C64) -> f64| -> Result<f64> {
        let integrand = |v: f64| {
            let (nf, ng) = numerators(rho, v);
            h(nf, ng)
        };
        let a = quad::integrate_sqrt_ends(integrand, 0.0, v0, opts)?;
        let b = quad::integrate_sqrt_ends(integrand, v0, PI, opts)?;
        Ok((a + b) * FRAC_1_PI)
    };
    let p = one(&|nf, ng| nf.norm_sqr() / ff * (ng.norm_sqr() / gg).powi(k))?;
    let q = one(&|_, ng| (ng.norm_sqr() / gg).powi(k + 1))?;
    let cross = one(&|nf, ng| (nf * ng.conj()).re / fg * (ng.norm_sqr() / gg).powi(k))?;
    Ok((p, q, cross))
}

/// Closed-form `M → ∞` limits for the real coin of parameter `rho`.
pub fn exit_prob_limit(rho: f64, start: StartSpinor) -> Result<ExitProbabilities> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain("rho", format!("limit needs 0 < rho < 1, got {rho}")));
    }
    let q = (2.0 * rho - 1.0).asin() / PI + 0.5;
    let p = 2.0 / (PI * (1.0 / rho - 1.0).sqrt()) + rho / ((1.0 - rho) * PI) * (1.0 - 2.0 * rho).acos()
        - rho / (1.0 - rho);
    let pq_cross = -0.5 * crate::eigen::cross_coefficient_limit(rho);
    Ok(ExitProbabilities::assemble(p, q, pq_cross, start))
}

/// Large-`M` expansion for the Hadamard coin, keeping the corrections in
/// `M^{-2} … M^{-(terms+1)}`.
pub fn asymptotic_exit(start: StartSpinor, m: u32, terms: u32) -> Result<ExitProbabilities> {
    if m < 2 {
        return Err(Error::domain("M", format!("asymptotic series needs M >= 2, got {m}")));
    }
    if !(1..=5).contains(&terms) {
        return Err(Error::domain("terms", format!("must lie in 1..=5, got {terms}")));
    }
    const P: [f64; 5] = [1.0 / 2.0, 1.0, 2.0, 4.0, 79.0 / 8.0];
    const Q: [f64; 5] = [1.0 / 2.0, 0.0, 1.0 / 2.0, 0.0, 19.0 / 8.0];
    const X: [f64; 5] = [0.0, -1.0 / 2.0, -3.0 / 4.0, -2.0, -15.0 / 4.0];
    let mf = m as f64;
    let tail = |c: &[f64; 5]| -> f64 {
        c.iter().take(terms as usize).enumerate().map(|(i, c)| c / (PI * mf.powi(i as i32 + 2))).sum()
    };
    let p = 2.0 / PI - 0.5 + tail(&P);
    let q = 0.5 + tail(&Q);
    let cross = 1.0 / PI - 0.5 + tail(&X);
    Ok(ExitProbabilities::assemble(p, q, cross, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8, SQRT_2};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn hadamard_leading_terms() {
        let f = series_f(&Coin::hadamard(), 9).unwrap();
        assert!((f.coeff(1) - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((f.coeff(3) - c(-1.0 / (2.0 * SQRT_2))).norm() < 1e-15);
        for k in (0..=9).step_by(2) {
            assert_eq!(f.coeff(k).norm(), 0.0);
        }
    }

    #[test]
    fn hadamard_g_is_f_shifted() {
        let h = Coin::hadamard();
        let f = series_f(&h, 30).unwrap();
        let g = series_g(&h, 30).unwrap();
        for k in 0..=30 {
            let want = if k == 1 { f.coeff(1) - SQRT_2 } else { f.coeff(k) };
            assert!((g.coeff(k) - want).norm() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn reflecting_coin() {
        let u = Coin::rho_family(1.0).unwrap();
        let f = series_f(&u, 10).unwrap();
        let g = series_g(&u, 10).unwrap();
        assert_eq!(f.mass(), 0.0);
        assert_eq!(g.coeff(1), c(-1.0));
        assert_eq!(g.mass(), 1.0);
    }

    #[test]
    fn order_zero_rejected() {
        assert!(series_f(&Coin::hadamard(), 0).is_err());
        assert!(series_by_recurrence(&Coin::hadamard(), 0).is_err());
    }

    #[test]
    fn series_arithmetic() {
        let s = PowerSeries::new(vec![c(1.0), c(2.0), c(0.0), c(-1.0)]);
        let sq = s.pow(2);
        assert_eq!(sq.coeffs(), &[c(1.0), c(4.0), c(4.0), c(-2.0)]);
        let root = sq.sqrt_unit().unwrap();
        assert!((&root - &s).mass() < 1e-28);
        assert_eq!(s.shift(2).coeffs(), &[c(0.0), c(0.0), c(1.0), c(2.0)]);
    }

    #[test]
    fn hadamard_one_step_exits() {
        let l = exit_prob_one_wall(&Coin::hadamard(), StartSpinor::left(), 1).unwrap();
        assert!((l.p - 2.0 / PI).abs() < 1e-10);
        assert!((l.q - 2.0 / PI).abs() < 1e-10);
        assert!((l.r - l.p).abs() < 1e-15);
    }

    #[test]
    fn table_values() {
        let h = Coin::hadamard();
        let e2 = exit_prob_one_wall(&h, StartSpinor::left(), 2).unwrap();
        assert!((e2.p - (4.0 / PI - 1.0)).abs() < 1e-10);
        let e3 = exit_prob_one_wall(&h, StartSpinor::right(), 3).unwrap();
        assert!((1.0 - e3.q - (13.0 - 118.0 / (3.0 * PI))).abs() < 1e-10);
    }

    #[test]
    fn degenerate_coins_are_exact() {
        let start = StartSpinor::new(c(0.6), c(0.8)).unwrap();
        let r0 = exit_prob_one_wall(&Coin::rho_family(0.0).unwrap(), start, 1).unwrap();
        assert_eq!((r0.p, r0.q), (1.0, 0.0));
        let r1 = exit_prob_one_wall(&Coin::rho_family(1.0).unwrap(), start, 4).unwrap();
        assert_eq!((r1.p, r1.q), (0.0, 1.0));
        assert!((r1.r - 0.64).abs() < 1e-15);
    }

    #[test]
    fn hadamard_limits() {
        let lim = |a: f64, b: f64| exit_prob_limit(0.5, StartSpinor::new(c(a), c(b)).unwrap()).unwrap();
        let r = lim(0.0, 1.0);
        assert!((r.q - 0.5).abs() < 1e-15);
        assert!((r.p - (2.0 / PI - 0.5)).abs() < 1e-15);
        assert!((r.pq_cross - (1.0 / PI - 0.5)).abs() < 1e-15);
        let best = lim(FRAC_PI_8.sin(), -FRAC_PI_8.cos());
        assert!((best.r - (FRAC_1_SQRT_2 + (1.0 - SQRT_2) / PI)).abs() < 1e-14);
        let worst = lim((3.0 * FRAC_PI_8).sin(), (3.0 * FRAC_PI_8).cos());
        assert!((worst.r - (-FRAC_1_SQRT_2 + (1.0 + SQRT_2) / PI)).abs() < 1e-14);
        assert!(exit_prob_limit(1.0, StartSpinor::left()).is_err());
    }

    #[test]
    fn asymptotic_one_term() {
        let a = asymptotic_exit(StartSpinor::right(), 2, 1).unwrap();
        assert!((a.q - (0.5 + 1.0 / (8.0 * PI))).abs() < 1e-15);
        assert!((a.pq_cross - (1.0 / PI - 0.5)).abs() < 1e-15);
        assert!(asymptotic_exit(StartSpinor::right(), 2, 6).is_err());
        assert!(asymptotic_exit(StartSpinor::right(), 1, 3).is_err());
    }

    #[test]
    fn modulus_of_g_on_circle() {
        for rho in [0.1f64, 0.5, 0.83] {
            let th_rho = (1.0 - 2.0 * rho).acos() / 2.0;
            for i in 0..2000 {
                let theta = -PI + 2.0 * PI * (i as f64 + 0.5) / 2000.0;
                let g = fg_on_circle(rho, theta).1.norm();
                assert!(g <= 1.0 + 1e-12);
                let in_gamma = theta.abs() < th_rho || (PI - theta.abs()) < th_rho;
                if in_gamma {
                    assert!((g - 1.0).abs() < 1e-10, "rho {rho} theta {theta}: |G| = {g}");
                }
            }
        }
    }
}
