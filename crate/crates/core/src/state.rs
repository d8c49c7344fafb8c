//! Amplitudes of a 1D walker on a finite window of the integer lattice.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coin::StartSpinor;
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `(L(n), R(n))` for `n` in `offset .. offset + len`. Sites outside the
/// window hold zero amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkState1D {
    offset: i64,
    l: Vec<C64>,
    r: Vec<C64>,
}

impl WalkState1D {
    /// Walker at the origin with coin state `start`.
    pub fn point(start: StartSpinor) -> Self {
        WalkState1D { offset: 0, l: vec![start.alpha()], r: vec![start.beta()] }
    }

    /// All-zero state on `[lo, hi]`.
    pub fn zeros(lo: i64, hi: i64) -> Self {
        let len = (hi - lo + 1).max(0) as usize;
        WalkState1D { offset: lo, l: vec![ZERO; len], r: vec![ZERO; len] }
    }

    pub fn from_parts(offset: i64, l: Vec<C64>, r: Vec<C64>) -> Result<Self> {
        if l.len() != r.len() {
            return Err(Error::domain("state", format!("L has {} sites but R has {}", l.len(), r.len())));
        }
        Ok(WalkState1D { offset, l, r })
    }

    /// Lattice index of the first window cell.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Lattice index of the last window cell (`offset − 1` when empty).
    pub fn last(&self) -> i64 {
        self.offset + self.l.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.l.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l.is_empty()
    }

    pub fn amp_l(&self) -> &[C64] {
        &self.l
    }

    pub fn amp_r(&self) -> &[C64] {
        &self.r
    }

    fn index(&self, n: i64) -> Option<usize> {
        let i = n - self.offset;
        (i >= 0 && (i as usize) < self.l.len()).then_some(i as usize)
    }

    /// `(L(n), R(n))`, zero outside the window.
    pub fn amp(&self, n: i64) -> (C64, C64) {
        self.index(n).map_or((ZERO, ZERO), |i| (self.l[i], self.r[i]))
    }

    /// Sets the amplitudes at `n`, growing the window if needed.
    pub fn set(&mut self, n: i64, l: C64, r: C64) {
        if self.is_empty() {
            *self = WalkState1D { offset: n, l: vec![l], r: vec![r] };
            return;
        }
        self.grow_to(n.min(self.offset), n.max(self.last()));
        let i = self.index(n).expect("window covers n after growth");
        self.l[i] = l;
        self.r[i] = r;
    }

    /// Pads with zeros so the window covers `[lo, hi]`. Never shrinks.
    pub fn grow_to(&mut self, lo: i64, hi: i64) {
        if lo < self.offset {
            let pad = (self.offset - lo) as usize;
            self.l.splice(0..0, std::iter::repeat_n(ZERO, pad));
            self.r.splice(0..0, std::iter::repeat_n(ZERO, pad));
            self.offset = lo;
        }
        if hi > self.last() {
            let len = (hi - self.offset + 1) as usize;
            self.l.resize(len, ZERO);
            self.r.resize(len, ZERO);
        }
    }

    /// Drops every cell outside `[lo, hi]`.
    pub fn restrict(&mut self, lo: i64, hi: i64) {
        let first = (lo - self.offset).clamp(0, self.l.len() as i64) as usize;
        let end = (hi - self.offset + 1).clamp(first as i64, self.l.len() as i64) as usize;
        self.l.truncate(end);
        self.r.truncate(end);
        self.l.drain(..first);
        self.r.drain(..first);
        self.offset += first as i64;
    }

    /// `Σ_n |L(n)|² + |R(n)|²`
    pub fn norm_sqr(&self) -> f64 {
        self.l.iter().zip(&self.r).map(|(l, r)| l.norm_sqr() + r.norm_sqr()).sum()
    }

    /// Projects out both amplitudes at `n` and returns their probability.
    pub fn absorb(&mut self, n: i64) -> f64 {
        match self.index(n) {
            Some(i) => {
                let p = self.l[i].norm_sqr() + self.r[i].norm_sqr();
                self.l[i] = ZERO;
                self.r[i] = ZERO;
                p
            }
            None => 0.0,
        }
    }

    /// Probability on sites `n` with `lo ≤ n ≤ hi`.
    pub fn prob_between(&self, lo: i64, hi: i64) -> f64 {
        (lo.max(self.offset)..=hi.min(self.last()))
            .map(|n| {
                let (l, r) = self.amp(n);
                l.norm_sqr() + r.norm_sqr()
            })
            .sum()
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut i64, &mut Vec<C64>, &mut Vec<C64>) {
        (&mut self.offset, &mut self.l, &mut self.r)
    }
}
