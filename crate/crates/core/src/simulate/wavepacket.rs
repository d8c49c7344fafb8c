use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{BoundaryConfig, Neumaier, Walker};
use crate::coin::Coin;
use crate::error::{Error, Result};
use crate::state::WalkState1D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketResult {
    /// Centroid speed of the right-moving half before it reaches the wall.
    pub speed: f64,
    /// Fraction of the incident packet that is not absorbed.
    pub reflection: f64,
}

/// Sends a Gaussian packet `R(n) ∝ exp(−n²/width²) cos(k0 n)`, `L = 0`,
/// at a wall at `m` and measures its speed and reflection.
///
/// The cosine splits the packet into a left- and a right-mover. Only the
/// probability on `n > 0` is tracked. Its centroid is sampled at `t_b/2`
/// and `t_b`, where `t_b = ⌊(m − 4·width)/√ρ⌋` is the last step at which
/// even the fastest component (speed `√ρ`) cannot have touched the wall.
/// The reflection is `1 − absorbed/P(n > 0, t_b)` after `steps` steps.
pub fn wavepacket_reflection(coin: Coin, k0: f64, width: f64, m: i64, steps: usize) -> Result<PacketResult> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::domain("width", format!("must be positive, got {width}")));
    }
    if !k0.is_finite() || k0.abs() > PI {
        return Err(Error::domain("k0", format!("must lie in [-pi, pi], got {k0}")));
    }
    if (m as f64) < 5.0 * width {
        return Err(Error::domain("M", format!("packet overlaps the wall: need M >= 5*width = {}, got {m}", 5.0 * width)));
    }
    let vmax = coin.rho().sqrt();
    if vmax == 0.0 {
        return Err(Error::domain("rho", "packets do not move for rho = 0"));
    }
    let t_b = ((m as f64 - 4.0 * width) / vmax).floor() as usize;
    let t_a = t_b / 2;
    if t_a == 0 || t_a == t_b {
        return Err(Error::domain("width", "packet too wide to measure a speed before contact"));
    }
    if steps <= t_b {
        return Err(Error::domain("T", format!("must exceed the pre-contact time {t_b}, got {steps}")));
    }

    let reach = ((6.0 * width).ceil() as i64).min(m - 1);
    let mut state = WalkState1D::zeros(-reach, reach);
    for n in -reach..=reach {
        let x = n as f64;
        let amp = (-(x * x) / (width * width)).exp() * (k0 * x).cos();
        state.set(n, C64::new(0.0, 0.0), C64::new(amp, 0.0));
    }
    let norm = state.norm_sqr().sqrt();
    let (offset, l, r) = (state.offset(), state.amp_l().to_vec(), state.amp_r().iter().map(|z| z / norm).collect());
    let state = WalkState1D::from_parts(offset, l, r)?;

    let mut walker = Walker::from_state(coin, state, BoundaryConfig::OneWall { m })?;
    let mut absorbed = Neumaier::default();
    let mut centroid_a = 0.0;
    let mut centroid_b = 0.0;
    let mut incident = 0.0;
    for t in 1..=steps {
        let (_, right) = walker.advance();
        absorbed.add(right);
        if t == t_a || t == t_b {
            let s = walker.state();
            let (mut mass, mut moment) = (0.0, 0.0);
            for n in 1..=s.last() {
                let (l, r) = s.amp(n);
                let p = l.norm_sqr() + r.norm_sqr();
                mass += p;
                moment += n as f64 * p;
            }
            if t == t_a {
                centroid_a = moment / mass;
            } else {
                centroid_b = moment / mass;
                incident = mass;
            }
        }
    }
    Ok(PacketResult {
        speed: (centroid_b - centroid_a) / (t_b - t_a) as f64,
        reflection: 1.0 - absorbed.value() / incident,
    })
}
