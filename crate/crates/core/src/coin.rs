//! Coin operators and coin-space start states.
//!
//! A coin is the 2x2 unitary
//!
//! ```text
//! e^{iη} ( e^{i(φ+ψ)}√ρ     e^{i(ψ−φ)}√(1−ρ) )
//!        ( e^{i(φ−ψ)}√(1−ρ) −e^{−i(φ+ψ)}√ρ   )
//! ```
//!
//! stored column-wise: column `s` is the image of direction `s`, so that
//! `a = <L|U|L>`, `b = <R|U|L>`, `c = <L|U|R>`, `d = <R|U|R>`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2x2 unitary coin parameterized by `(rho, phi, psi, eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coin {
    rho: f64,
    phi: f64,
    psi: f64,
    eta: f64,
    a: C64,
    b: C64,
    c: C64,
    d: C64,
}

impl Coin {
    /// Builds the coin for the given parameters. `rho` must lie in `[0, 1]`.
    pub fn new(rho: f64, phi: f64, psi: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain("rho", format!("must lie in [0, 1], got {rho}")));
        }
        if !(phi.is_finite() && psi.is_finite() && eta.is_finite()) {
            return Err(Error::domain("phi/psi/eta", "phases must be finite"));
        }
        let sr = rho.sqrt();
        let sc = (1.0 - rho).sqrt();
        let g = C64::from_polar(1.0, eta);
        let a = g * C64::from_polar(sr, phi + psi);
        let b = g * C64::from_polar(sc, phi - psi);
        let c = g * C64::from_polar(sc, psi - phi);
        let d = -(g * C64::from_polar(sr, -(phi + psi)));
        Ok(Coin { rho, phi, psi, eta, a, b, c, d })
    }

    /// The Hadamard coin, `a = b = c = 1/√2`, `d = −1/√2`.
    pub fn hadamard() -> Self {
        Coin::rho_family(0.5).expect("1/2 lies in [0, 1]")
    }

    /// The real coin `(rho, 0, 0, 0)`.
    pub fn rho_family(rho: f64) -> Result<Self> {
        Coin::new(rho, 0.0, 0.0, 0.0)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn psi(&self) -> f64 {
        self.psi
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `<L|U|L>`
    pub fn a(&self) -> C64 {
        self.a
    }
    /// `<R|U|L>`
    pub fn b(&self) -> C64 {
        self.b
    }
    /// `<L|U|R>`
    pub fn c(&self) -> C64 {
        self.c
    }
    /// `<R|U|R>`
    pub fn d(&self) -> C64 {
        self.d
    }

    /// Matrix entries in row-major order, `[[a, c], [b, d]]`.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [[self.a, self.c], [self.b, self.d]]
    }

    /// Max-abs entry of `U†U − I`.
    pub fn unitarity_residual(&self) -> f64 {
        let m = self.matrix();
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = C64::new(0.0, 0.0);
                for row in &m {
                    s += row[i].conj() * row[j];
                }
                if i == j {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    /// True when the phases all vanish, i.e. the coin belongs to the real
    /// one-parameter family.
    pub fn is_rho_family(&self) -> bool {
        self.phi == 0.0 && self.psi == 0.0 && self.eta == 0.0
    }
}

/// Coin-space part `α|L> + β|R>` of a walker started at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartSpinor {
    alpha: C64,
    beta: C64,
}

impl StartSpinor {
    /// Normalizes `(alpha, beta)` to unit norm.
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !n.is_finite() {
            return Err(Error::domain("start", "amplitudes must be finite"));
        }
        if n == 0.0 {
            return Err(Error::domain("start", "(alpha, beta) must not be the zero vector"));
        }
        Ok(StartSpinor { alpha: alpha / n, beta: beta / n })
    }

    /// `|0, L>`
    pub fn left() -> Self {
        StartSpinor { alpha: C64::new(1.0, 0.0), beta: C64::new(0.0, 0.0) }
    }

    /// `|0, R>`
    pub fn right() -> Self {
        StartSpinor { alpha: C64::new(0.0, 0.0), beta: C64::new(1.0, 0.0) }
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }
    pub fn beta(&self) -> C64 {
        self.beta
    }

    /// `ℓ = |α|`
    pub fn ell(&self) -> f64 {
        self.alpha.norm()
    }

    /// `r = |β|`
    pub fn r(&self) -> f64 {
        self.beta.norm()
    }

    /// Relative phase `Φ = arg α − arg β`, wrapped to `(−π, π]`.
    pub fn relative_phase(&self) -> f64 {
        let p = (self.alpha * self.beta.conj()).arg();
        if p <= -PI {
            p + 2.0 * PI
        } else {
            p
        }
    }

    /// `ℓ r cos Φ = Re(α β̄)`
    pub fn cross(&self) -> f64 {
        (self.alpha * self.beta.conj()).re
    }

    /// The start that gives identical absorption statistics under the real
    /// coin `(coin.rho, 0, 0, 0)`: `α e^{i(φ−ψ)}`, `β e^{−i(φ+ψ)}`.
    pub fn reduced_for(&self, coin: &Coin) -> Self {
        let (phi, psi) = (coin.phi(), coin.psi());
        StartSpinor {
            alpha: self.alpha * C64::from_polar(1.0, phi - psi),
            beta: self.beta * C64::from_polar(1.0, -(phi + psi)),
        }
    }

    /// Inverse of [`StartSpinor::reduced_for`]: the start that, under `coin`,
    /// reproduces the statistics of `self` under the real coin.
    pub fn compensated_for(&self, coin: &Coin) -> Self {
        let (phi, psi) = (coin.phi(), coin.psi());
        StartSpinor {
            alpha: self.alpha * C64::from_polar(1.0, psi - phi),
            beta: self.beta * C64::from_polar(1.0, phi + psi),
        }
    }
}
