//! The walk on `Z^d` with one real 2×2 coin per axis.
//!
//! Directions are numbered from 0: `s = 2j` moves left along axis `j`,
//! `s = 2j + 1` moves right. A step applies the block-diagonal coin at every
//! site and then moves each direction component one site along its axis.
//!
//! Because the coin never mixes axes, a walker started at the origin stays
//! on the coordinate axes: each axis carries an independent 1D walk.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coin::Coin;
use crate::error::{Error, Result};
use crate::simulate::{flush, AbsorptionRecord};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `d` real orthogonal 2×2 blocks, `blocks[j] = [[C00, C01], [C10, C11]]`
/// acting on directions `(2j, 2j+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinBlocks {
    blocks: Vec<[[f64; 2]; 2]>,
}

impl CoinBlocks {
    pub fn new(blocks: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::domain("dim", "need at least one axis"));
        }
        for (j, m) in blocks.iter().enumerate() {
            let col0 = m[0][0] * m[0][0] + m[1][0] * m[1][0] - 1.0;
            let col1 = m[0][1] * m[0][1] + m[1][1] * m[1][1] - 1.0;
            let dot = m[0][0] * m[0][1] + m[1][0] * m[1][1];
            if col0.abs().max(col1.abs()).max(dot.abs()) > 1e-12 {
                return Err(Error::domain("coin", format!("block {j} is not orthogonal")));
            }
        }
        Ok(CoinBlocks { blocks })
    }

    /// Hadamard block `[[1, 1], [1, −1]]/√2` on every axis.
    pub fn hadamard(d: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CoinBlocks { blocks: vec![[[h, h], [h, -h]]; d.max(1)] }
    }

    /// Rotation `[[cos θ, −sin θ], [sin θ, cos θ]]` (determinant +1) on every axis.
    pub fn rotation(d: usize, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        CoinBlocks { blocks: vec![[[c, -s], [s, c]]; d.max(1)] }
    }

    /// The same real coin on all `d` axes: `[[a, c], [b, d]]`, so the 1D walk
    /// with `coin` is the `d = 1` case exactly.
    pub fn from_coin(coin: &Coin, d: usize) -> Result<Self> {
        let [[a, c], [b, dd]] = coin.matrix();
        if [a, b, c, dd].iter().any(|z| z.im != 0.0) {
            return Err(Error::domain("coin", "axis blocks must be real; use phases phi = psi = eta = 0"));
        }
        if d == 0 {
            return Err(Error::domain("dim", "need at least one axis"));
        }
        CoinBlocks::new(vec![[[a.re, c.re], [b.re, dd.re]]; d])
    }

    pub fn d(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, j: usize) -> [[f64; 2]; 2] {
        self.blocks[j]
    }

    pub fn det(&self, j: usize) -> f64 {
        let m = self.blocks[j];
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Largest group speed along axis `j`.
    pub fn v_max(&self, j: usize) -> f64 {
        self.blocks[j][0][0].abs()
    }

    /// The assembled `2d × 2d` coin.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = 2 * self.d();
        let mut m = DMatrix::zeros(n, n);
        for (j, b) in self.blocks.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    m[(2 * j + r, 2 * j + c)] = b[r][c];
                }
            }
        }
        m
    }

    /// `u_j(q)`: block `j` with rows scaled by `e^{iq}` and `e^{−iq}`.
    pub fn axis_bloch(&self, j: usize, q: f64) -> [[C64; 2]; 2] {
        let b = self.blocks[j];
        let (p, m) = (C64::from_polar(1.0, q), C64::from_polar(1.0, -q));
        [[p * b[0][0], p * b[0][1]], [m * b[1][0], m * b[1][1]]]
    }

    /// The full `U_q`.
    pub fn bloch_matrix(&self, q: &[f64]) -> DMatrix<C64> {
        let n = 2 * self.d();
        let mut u = DMatrix::from_element(n, n, ZERO);
        for j in 0..self.d() {
            let b = self.axis_bloch(j, q[j]);
            for r in 0..2 {
                for c in 0..2 {
                    u[(2 * j + r, 2 * j + c)] = b[r][c];
                }
            }
        }
        u
    }
}

/// Frequencies `ω ∈ (−π, π]` with `e^{−iω}` the eigenvalues of `U_q`,
/// by numerical diagonalization, in ascending order.
pub fn dispersion_ddim(coins: &CoinBlocks, q: &[f64]) -> Result<Vec<f64>> {
    if q.len() != coins.d() {
        return Err(Error::domain("q", format!("expected {} components, got {}", coins.d(), q.len())));
    }
    if let Some(bad) = q.iter().find(|x| x.is_nan() || x.abs() > PI) {
        return Err(Error::domain("q", format!("components must satisfy |q_i| <= pi, got {bad}")));
    }
    let eig = eigenvalues(coins, q)?;
    let mut w: Vec<f64> = eig.iter().map(|l| -l.arg()).map(|w| if w <= -PI { w + 2.0 * PI } else { w }).collect();
    w.sort_by(f64::total_cmp);
    Ok(w)
}

/// Eigenvalues of `U_q` from a complex Schur decomposition.
pub fn eigenvalues(coins: &CoinBlocks, q: &[f64]) -> Result<Vec<C64>> {
    let u = coins.bloch_matrix(q);
    let schur = nalgebra::linalg::Schur::try_new(u, 1e-15, 10_000).ok_or(Error::NonConvergence {
        what: "Schur decomposition",
        diagnostics: format!("U_q at q = {q:?}"),
    })?;
    let vals = schur.eigenvalues().ok_or(Error::NonConvergence {
        what: "Schur decomposition",
        diagnostics: "triangular factor not reached".into(),
    })?;
    Ok(vals.iter().copied().collect())
}

/// Amplitudes `Ψ(n, s)` on a box of `Z^d`.
///
/// `lo..=hi` is the allocated extent per axis; every nonzero amplitude lies
/// inside the `support` box.
#[derive(Debug, Clone, PartialEq)]
pub struct DdimState {
    d: usize,
    lo: Vec<i64>,
    hi: Vec<i64>,
    sup_lo: Vec<i64>,
    sup_hi: Vec<i64>,
    strides: Vec<usize>,
    amps: Vec<C64>,
}

impl DdimState {
    /// `δ_{n,0} Ψ₀(s)` on the extent `[lo_j, hi_j]`, normalized.
    pub fn point(psi0: &[C64], lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if !psi0.len().is_multiple_of(2) || psi0.is_empty() {
            return Err(Error::domain("start", "need 2d direction amplitudes"));
        }
        let d = psi0.len() / 2;
        if lo.len() != d || hi.len() != d || lo.iter().zip(&hi).any(|(l, h)| *l > 0 || *h < 0) {
            return Err(Error::domain("extent", "extent must contain the origin on every axis"));
        }
        let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::domain("start", "direction amplitudes must be finite and not all zero"));
        }
        let mut s = DdimState::zeros(d, lo, hi);
        let base = s.site_index(&vec![0; d]) * 2 * d;
        for (k, z) in psi0.iter().enumerate() {
            s.amps[base + k] = z / norm;
        }
        s.sup_lo = vec![0; d];
        s.sup_hi = vec![0; d];
        Ok(s)
    }

    fn zeros(d: usize, lo: Vec<i64>, hi: Vec<i64>) -> Self {
        let lens: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let mut strides = vec![1; d];
        for j in (0..d.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * lens[j + 1];
        }
        let sites: usize = lens.iter().product();
        DdimState {
            d,
            sup_lo: lo.clone(),
            sup_hi: lo.iter().map(|l| l - 1).collect(),
            lo,
            hi,
            strides,
            amps: vec![ZERO; sites * 2 * d],
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Allocated `(lo, hi)` per axis.
    pub fn extent(&self) -> (&[i64], &[i64]) {
        (&self.lo, &self.hi)
    }

    /// Box holding every nonzero amplitude.
    pub fn support(&self) -> (&[i64], &[i64]) {
        (&self.sup_lo, &self.sup_hi)
    }

    fn site_index(&self, n: &[i64]) -> usize {
        n.iter().zip(&self.lo).zip(&self.strides).map(|((n, l), s)| (n - l) as usize * s).sum()
    }

    /// `Ψ(n, s)`, zero outside the extent.
    pub fn amp(&self, n: &[i64], s: usize) -> C64 {
        if n.iter().zip(self.lo.iter().zip(&self.hi)).any(|(x, (l, h))| x < l || x > h) {
            return ZERO;
        }
        self.amps[self.site_index(n) * 2 * self.d + s]
    }

    /// Calls `f(n, probability at n)` for every site of the support box,
    /// in a fixed order.
    pub fn for_each_site(&self, mut f: impl FnMut(&[i64], f64)) {
        let nd = 2 * self.d;
        for_each_in_box(&self.sup_lo, &self.sup_hi, |n| {
            let i = self.site_index(n) * nd;
            let p = self.amps[i..i + nd].iter().map(|z| z.norm_sqr()).sum();
            f(n, p);
        });
    }

    /// `Σ |Ψ|²`, by pairwise summation in a fixed order.
    pub fn norm_sqr(&self) -> f64 {
        let mut ps = Vec::new();
        self.for_each_site(|_, p| ps.push(p));
        pairwise_sum(&ps)
    }

    /// `max |Ψ(n, s)|`
    pub fn peak_amp(&self) -> f64 {
        let nd = 2 * self.d;
        let mut best = 0.0f64;
        for_each_in_box(&self.sup_lo, &self.sup_hi, |n| {
            let i = self.site_index(n) * nd;
            for z in &self.amps[i..i + nd] {
                best = best.max(z.norm());
            }
        });
        best
    }

    /// Probability on sites where some `|n_j| > v_max_j · t + margin`.
    pub fn front_leakage(&self, coins: &CoinBlocks, t: usize, margin: f64) -> f64 {
        let mut ps = Vec::new();
        self.for_each_site(|n, p| {
            let outside = n.iter().enumerate().any(|(j, x)| (x.abs() as f64) > coins.v_max(j) * t as f64 + margin);
            if outside {
                ps.push(p);
            }
        });
        pairwise_sum(&ps)
    }

    /// Probability on sites with `n_j = 0` for every axis but `axis`.
    pub fn prob_on_axis(&self, axis: usize) -> f64 {
        let mut ps = Vec::new();
        self.for_each_site(|n, p| {
            if n.iter().enumerate().all(|(j, x)| j == axis || *x == 0) {
                ps.push(p);
            }
        });
        pairwise_sum(&ps)
    }

    /// Zeroes the slab `n_axis = x` and returns its probability.
    fn absorb_slab(&mut self, axis: usize, x: i64) -> f64 {
        if x < self.sup_lo[axis] || x > self.sup_hi[axis] {
            return 0.0;
        }
        let (mut lo, mut hi) = (self.sup_lo.clone(), self.sup_hi.clone());
        lo[axis] = x;
        hi[axis] = x;
        let nd = 2 * self.d;
        let mut ps = Vec::new();
        let idx: Vec<usize> = {
            let mut v = Vec::new();
            for_each_in_box(&lo, &hi, |n| v.push(self.site_index(n) * nd));
            v
        };
        for i in idx {
            let mut p = 0.0;
            for z in &mut self.amps[i..i + nd] {
                p += z.norm_sqr();
                *z = ZERO;
            }
            ps.push(p);
        }
        pairwise_sum(&ps)
    }

    /// Reallocates so the extent covers `[lo, hi]` as well.
    fn grow_to(&mut self, lo: &[i64], hi: &[i64]) {
        let new_lo: Vec<i64> = self.lo.iter().zip(lo).map(|(a, b)| *a.min(b)).collect();
        let new_hi: Vec<i64> = self.hi.iter().zip(hi).map(|(a, b)| *a.max(b)).collect();
        if new_lo == self.lo && new_hi == self.hi {
            return;
        }
        let mut out = DdimState::zeros(self.d, new_lo, new_hi);
        out.sup_lo = self.sup_lo.clone();
        out.sup_hi = self.sup_hi.clone();
        let nd = 2 * self.d;
        for_each_in_box(&self.sup_lo, &self.sup_hi, |n| {
            let (i, k) = (self.site_index(n) * nd, out.site_index(n) * nd);
            out.amps[k..k + nd].copy_from_slice(&self.amps[i..i + nd]);
        });
        *self = out;
    }
}

/// Visits every point of the box `lo..=hi` with the last axis fastest.
fn for_each_in_box(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut n = lo.to_vec();
    loop {
        f(&n);
        let mut j = n.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if n[j] < hi[j] {
                n[j] += 1;
                break;
            }
            n[j] = lo[j];
        }
    }
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// One step from `src` into `dst`, which must share its extent. The new
/// support is `src`'s widened by one site, clipped to `cap_hi`.
fn step_kernel(src: &DdimState, coins: &CoinBlocks, dst: &mut DdimState, cap_hi: &[i64]) {
    let d = src.d;
    let nd = 2 * d;
    let new_lo: Vec<i64> = src.sup_lo.iter().zip(&src.lo).map(|(s, l)| (s - 1).max(*l)).collect();
    let new_hi: Vec<i64> =
        src.sup_hi.iter().zip(&src.hi).zip(cap_hi).map(|((s, h), c)| (s + 1).min(*h).min(*c)).collect();
    let blocks: Vec<[[f64; 2]; 2]> = (0..d).map(|j| coins.block(j)).collect();
    let inner = d - 1;
    let run = new_hi[inner] - new_lo[inner] + 1;
    if run <= 0 || new_lo.iter().zip(&new_hi).any(|(l, h)| l > h) {
        dst.sup_lo = new_lo;
        dst.sup_hi = new_hi;
        return;
    }
    let (mut row_lo, mut row_hi) = (new_lo.clone(), new_hi.clone());
    row_hi[inner] = new_lo[inner];
    for_each_in_box(&new_lo.clone(), &{ row_hi.clone() }, |start| {
        row_lo.copy_from_slice(start);
        let first = src.site_index(&row_lo);
        for k in 0..run as usize {
            let site = first + k;
            let base = site * nd;
            for (j, b) in blocks.iter().enumerate() {
                let x_j = if j == inner { row_lo[j] + k as i64 } else { row_lo[j] };
                let stride = src.strides[j];
                // left mover arrives from n + e_j
                dst.amps[base + 2 * j] = if x_j < src.hi[j] {
                    let i = (site + stride) * nd + 2 * j;
                    let (x, y) = (src.amps[i], src.amps[i + 1]);
                    flush(x * b[0][0] + y * b[0][1])
                } else {
                    ZERO
                };
                // right mover arrives from n − e_j
                dst.amps[base + 2 * j + 1] = if x_j > src.lo[j] {
                    let i = (site - stride) * nd + 2 * j;
                    let (x, y) = (src.amps[i], src.amps[i + 1]);
                    flush(x * b[1][0] + y * b[1][1])
                } else {
                    ZERO
                };
            }
        }
    });
    dst.sup_lo = new_lo;
    dst.sup_hi = new_hi;
}

/// One coin toss and walk step. The extent grows when the support would
/// reach past it.
pub fn step_ddim(state: &DdimState, coins: &CoinBlocks) -> Result<DdimState> {
    if coins.d() != state.d {
        return Err(Error::domain("coin", format!("{} blocks for a {}-dimensional state", coins.d(), state.d)));
    }
    let mut src = state.clone();
    let want_lo: Vec<i64> = src.sup_lo.iter().map(|x| x - 1).collect();
    let want_hi: Vec<i64> = src.sup_hi.iter().map(|x| x + 1).collect();
    src.grow_to(&want_lo, &want_hi);
    let mut dst = DdimState::zeros(src.d, src.lo.clone(), src.hi.clone());
    let cap = src.hi.clone();
    step_kernel(&src, coins, &mut dst, &cap);
    Ok(dst)
}

/// Per-step record of a free run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeDiagnostics {
    pub t: usize,
    pub norm: f64,
    pub front_leakage: f64,
    pub peak_amp: f64,
}

/// Bytes needed by two state buffers for a `steps`-step run; `wall` caps
/// axis 0 at a hyperplane.
pub fn memory_estimate(d: usize, steps: usize, wall: Option<i64>) -> u128 {
    let full = 2 * steps as u128 + 1;
    let first = match wall {
        Some(m) => steps as u128 + (m.max(0) as u128).min(steps as u128 + 1) + 1,
        None => full,
    };
    let sites = first * full.pow(d.saturating_sub(1) as u32);
    2 * sites * 2 * d as u128 * std::mem::size_of::<C64>() as u128
}

fn check_start(coins: &CoinBlocks, psi0: &[C64]) -> Result<()> {
    if psi0.len() != 2 * coins.d() {
        return Err(Error::domain("start", format!("need {} direction amplitudes, got {}", 2 * coins.d(), psi0.len())));
    }
    Ok(())
}

/// Double-buffered evolution on a fixed extent.
#[derive(Debug, Clone)]
pub struct DdimWalker {
    coins: CoinBlocks,
    state: DdimState,
    scratch: DdimState,
    wall: Option<i64>,
    t: usize,
}

impl DdimWalker {
    /// Walker at the origin with room for `steps` steps; `wall` puts an
    /// absorbing hyperplane at `n_0 = wall`.
    pub fn new(coins: CoinBlocks, psi0: &[C64], steps: usize, wall: Option<i64>) -> Result<Self> {
        check_start(&coins, psi0)?;
        if let Some(m) = wall {
            if m < 1 {
                return Err(Error::domain("M", format!("wall position must satisfy M >= 1, got {m}")));
            }
        }
        let d = coins.d();
        let t = steps as i64;
        let lo = vec![-t; d];
        let mut hi = vec![t; d];
        if let Some(m) = wall {
            hi[0] = m.min(t + 1);
        }
        let state = DdimState::point(psi0, lo.clone(), hi.clone())?;
        let scratch = DdimState::zeros(d, lo, hi);
        Ok(DdimWalker { coins, state, scratch, wall, t: 0 })
    }

    pub fn state(&self) -> &DdimState {
        &self.state
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Advances one step and returns the probability absorbed at the wall.
    pub fn advance(&mut self) -> f64 {
        let cap = match self.wall {
            Some(m) => {
                let mut c = self.state.hi.clone();
                c[0] = c[0].min(m);
                c
            }
            None => self.state.hi.clone(),
        };
        step_kernel(&self.state, &self.coins, &mut self.scratch, &cap);
        std::mem::swap(&mut self.state, &mut self.scratch);
        self.t += 1;
        match self.wall {
            Some(m) => {
                let p = self.state.absorb_slab(0, m);
                if self.state.sup_hi[0] >= m {
                    self.state.sup_hi[0] = m - 1;
                }
                p
            }
            None => 0.0,
        }
    }
}

/// Evolves `δ_{n,0} Ψ₀` freely for `steps` steps. Leakage counts sites with
/// some `|n_j| > v_max_j t + front_margin`.
pub fn run_free(
    coins: &CoinBlocks,
    psi0: &[C64],
    steps: usize,
    front_margin: f64,
) -> Result<(DdimState, Vec<FreeDiagnostics>)> {
    if steps < 1 {
        return Err(Error::domain("T", "number of steps must satisfy T >= 1"));
    }
    let mut w = DdimWalker::new(coins.clone(), psi0, steps, None)?;
    let mut diags = Vec::with_capacity(steps);
    for _ in 0..steps {
        w.advance();
        let s = w.state();
        diags.push(FreeDiagnostics {
            t: w.t(),
            norm: s.norm_sqr(),
            front_leakage: s.front_leakage(coins, w.t(), front_margin),
            peak_amp: s.peak_amp(),
        });
    }
    Ok((w.state, diags))
}

/// Absorption at the hyperplane `n_0 = M`, recorded as right-wall absorption.
pub fn run_absorbing_hyperplane(coins: &CoinBlocks, psi0: &[C64], m: i64, steps: usize) -> Result<AbsorptionRecord> {
    if steps < 1 {
        return Err(Error::domain("T", "number of steps must satisfy T >= 1"));
    }
    let mut w = DdimWalker::new(coins.clone(), psi0, steps, Some(m))?;
    let initial = w.state().norm_sqr();
    let mut rec = AbsorptionRecord {
        per_step_left: Vec::new(),
        per_step_right: Vec::with_capacity(steps),
        remaining: Vec::with_capacity(steps),
        steps,
    };
    let mut absorbed = crate::simulate::Neumaier::default();
    let mut last = initial;
    for _ in 0..steps {
        let p = w.advance();
        absorbed.add(p);
        rec.per_step_right.push(p);
        last = last.min((initial - absorbed.value()).max(0.0));
        rec.remaining.push(last);
    }
    Ok(rec)
}

/// Survival extrapolated to `t → ∞` assuming `P(t) ≈ P∞ + A/t²` on the
/// last `tail` steps (least squares in `1/t²`).
pub fn extrapolate_survival(record: &AbsorptionRecord, tail: usize) -> Result<f64> {
    let n = record.steps;
    if tail < 3 || tail > n {
        return Err(Error::domain("tail", format!("need 3 <= tail <= T = {n}, got {tail}")));
    }
    let xs: Vec<f64> = (n - tail + 1..=n).map(|t| 1.0 / (t as f64).powi(2)).collect();
    let ys = &record.remaining[n - tail..];
    let mx = xs.iter().sum::<f64>() / tail as f64;
    let my = ys.iter().sum::<f64>() / tail as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(my - sxy / sxx * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn one_step_in_2d_fills_four_neighbours() {
        let coins = CoinBlocks::hadamard(2);
        let s0 = DdimState::point(&[c(1.0), c(0.0), c(1.0), c(0.0)], vec![-3, -3], vec![3, 3]).unwrap();
        let s1 = step_ddim(&s0, &coins).unwrap();
        let mut occupied = Vec::new();
        s1.for_each_site(|n, p| {
            if p > 0.0 {
                occupied.push(n.to_vec());
            }
        });
        occupied.sort();
        assert_eq!(occupied, vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
        assert!((s1.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extent_grows_on_demand() {
        let coins = CoinBlocks::hadamard(1);
        let mut s = DdimState::point(&[c(1.0), c(0.0)], vec![0], vec![0]).unwrap();
        for _ in 0..5 {
            s = step_ddim(&s, &coins).unwrap();
        }
        assert_eq!(s.extent(), (&[-5][..], &[5][..]));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn blocks_from_a_line_coin() {
        let b = CoinBlocks::from_coin(&Coin::hadamard(), 2).unwrap();
        assert_eq!(b, CoinBlocks::hadamard(2));
        assert!(CoinBlocks::from_coin(&Coin::new(0.5, 0.2, 0.0, 0.0).unwrap(), 1).is_err());
    }

    #[test]
    fn non_orthogonal_block_rejected() {
        assert!(CoinBlocks::new(vec![[[1.0, 0.1], [0.0, 1.0]]]).is_err());
        assert!(CoinBlocks::new(vec![]).is_err());
    }

    #[test]
    fn memory_estimate_counts_both_buffers() {
        // 201 sites × 2 directions × 16 bytes × 2 buffers
        assert_eq!(memory_estimate(1, 100, None), 201 * 2 * 16 * 2);
        assert!(memory_estimate(3, 10_000, None) > 4 << 30);
    }

    #[test]
    fn bad_dispersion_inputs() {
        let coins = CoinBlocks::hadamard(2);
        assert!(dispersion_ddim(&coins, &[0.1]).is_err());
        assert!(dispersion_ddim(&coins, &[0.1, 4.0]).is_err());
    }

    fn rho_blocks(rho: f64, d: usize) -> CoinBlocks {
        let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
        CoinBlocks::new(vec![[[a, b], [b, -a]]; d]).unwrap()
    }

    #[test]
    fn one_dimension_matches_line_walk_bit_for_bit() {
        use crate::coin::{Coin, StartSpinor};
        use crate::simulate::step;
        let rho = 0.3;
        let coin = Coin::rho_family(rho).unwrap();
        let coins = rho_blocks(rho, 1);
        let mut line = crate::state::WalkState1D::point(StartSpinor::left());
        let mut w = DdimWalker::new(coins, &[c(1.0), c(0.0)], 60, None).unwrap();
        for _ in 0..60 {
            line = step(&line, &coin);
            w.advance();
            for n in line.offset()..=line.last() {
                let (l, r) = line.amp(n);
                assert_eq!((l, r), (w.state().amp(&[n], 0), w.state().amp(&[n], 1)), "n = {n}");
            }
        }
    }

    #[test]
    fn hyperplane_in_one_dimension_is_the_one_wall_walk() {
        use crate::coin::{Coin, StartSpinor};
        let rho = 0.7;
        let line = crate::simulate::run_one_wall(Coin::rho_family(rho).unwrap(), StartSpinor::right(), 4, 300).unwrap();
        let plane = run_absorbing_hyperplane(&rho_blocks(rho, 1), &[c(0.0), c(1.0)], 4, 300).unwrap();
        assert_eq!(line.per_step_right, plane.per_step_right);
        assert_eq!(line.remaining, plane.remaining);
    }

    #[test]
    fn walker_stays_on_the_axes() {
        let psi0 = [c(0.5), c(0.5), c(0.5), C64::new(0.0, 0.5)];
        let (s, diags) = run_free(&CoinBlocks::hadamard(2), &psi0, 40, 10.0).unwrap();
        let mut off_axis = 0.0;
        s.for_each_site(|n, p| {
            if n[0] != 0 && n[1] != 0 {
                off_axis += p;
            }
        });
        assert_eq!(off_axis, 0.0);
        assert!(s.prob_on_axis(0) > 0.3 && s.prob_on_axis(1) > 0.3);
        assert!(diags.iter().all(|r| (r.norm - 1.0).abs() < 1e-13 && r.front_leakage < 1e-9));
    }

    #[test]
    fn hyperplane_conserves_norm_plus_absorbed() {
        let psi0 = [c(0.6), C64::new(0.0, 0.8), c(0.0), c(0.0), c(1.0), c(0.0)];
        let mut w = DdimWalker::new(rho_blocks(0.4, 3), &psi0, 30, Some(3)).unwrap();
        let mut gone = 0.0;
        for _ in 0..30 {
            gone += w.advance();
            assert!((w.state().norm_sqr() + gone - 1.0).abs() < 1e-13);
        }
        assert!(gone > 0.0);
    }

    #[test]
    fn partner_of_q_is_an_eigenvalue_too() {
        // R u(q) R⁻¹ = det · u(−q) with R = [[0, −1], [1, 0]]
        let r = [[c(0.0), c(-1.0)], [c(1.0), c(0.0)]];
        let r_inv = [[c(0.0), c(1.0)], [c(-1.0), c(0.0)]];
        let mul = |x: [[C64; 2]; 2], y: [[C64; 2]; 2]| {
            let mut z = [[ZERO; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
                }
            }
            z
        };
        for coins in [rho_blocks(0.3, 2), CoinBlocks::rotation(2, 0.9)] {
            for q in [0.2, -1.1, 2.9] {
                let lhs = mul(mul(r, coins.axis_bloch(0, q)), r_inv);
                let rhs = coins.axis_bloch(0, -q);
                let det = coins.det(0);
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((lhs[i][j] - rhs[i][j] * det).norm() < 1e-15);
                    }
                }
            }
        }
    }

    fn same_spectrum(a: &[C64], b: &[C64]) -> bool {
        let mut used = vec![false; b.len()];
        a.iter().all(|x| {
            match (0..b.len()).find(|&j| !used[j] && (b[j] - x).norm() < 1e-10) {
                Some(j) => {
                    used[j] = true;
                    true
                }
                None => false,
            }
        })
    }

    #[test]
    fn degenerate_momenta() {
        let q = [0.4, -1.3];
        // det = +1: q and −q share the spectrum
        let rot = CoinBlocks::rotation(2, 0.7);
        let e = eigenvalues(&rot, &q).unwrap();
        let neg: Vec<f64> = q.iter().map(|x| -x).collect();
        assert!(same_spectrum(&e, &eigenvalues(&rot, &neg).unwrap()));
        // det = −1: q and π − q do (with π − q folded into (−π, π])
        let refl = rho_blocks(0.35, 2);
        let e = eigenvalues(&refl, &q).unwrap();
        let mirror: Vec<f64> = q.iter().map(|x| if PI - x > PI { -PI - x } else { PI - x }).collect();
        assert!(same_spectrum(&e, &eigenvalues(&refl, &mirror).unwrap()));
        assert!(dispersion_ddim(&refl, &q).unwrap().iter().all(|w| w.abs() <= PI));
    }

    #[test]
    fn box_iteration_order() {
        let mut seen = Vec::new();
        for_each_in_box(&[0, 1], &[1, 2], |n| seen.push(n.to_vec()));
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![1, 1], vec![1, 2]]);
    }
}
