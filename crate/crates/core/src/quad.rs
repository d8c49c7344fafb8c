//! Composite Gauss–Legendre quadrature with adaptive panel bisection.
//!
//! Integrands here are piecewise analytic. Callers split the domain at the
//! known break points; endpoints with square-root behaviour are handled by
//! [`integrate_sqrt_ends`], which maps them through a cosine change of
//! variables that makes `√(θ − a)` and `√(b − θ)` analytic in the new
//! variable.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the Legendre polynomial `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 20-point rule.
pub fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// Controls for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    /// Absolute tolerance on the whole interval.
    pub tol: f64,
    /// Number of equal panels the interval is cut into before refinement.
    pub min_panels: usize,
    /// Maximum bisection depth below each initial panel.
    pub max_depth: u32,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive { tol: 1e-13, min_panels: 1, max_depth: 40 }
    }
}

impl Adaptive {
    pub fn with_tol(tol: f64) -> Self {
        Adaptive { tol, ..Default::default() }
    }

    pub fn panels(mut self, n: usize) -> Self {
        self.min_panels = n.max(1);
        self
    }
}

/// Adaptive composite Gauss–Legendre integration of `f` over `[a, b]`.
///
/// Each panel is accepted once the single-panel estimate and the sum over
/// its two halves differ by less than the panel's share of `opts.tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: Adaptive) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let rule = gl20();
    let n = opts.min_panels.max(1);
    let width = (b - a) / n as f64;
    let len = (b - a).abs();
    let mut total = 0.0;
    for i in 0..n {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n { b } else { lo + width };
        let whole = rule.integrate(&f, lo, hi);
        total += refine(&f, rule, lo, hi, whole, opts.tol / len, opts.max_depth)?;
    }
    Ok(total)
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    lo: f64,
    hi: f64,
    whole: f64,
    tol_density: f64,
    depth: u32,
) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    let left = rule.integrate(f, lo, mid);
    let right = rule.integrate(f, mid, hi);
    let diff = (left + right - whole).abs();
    let budget = tol_density * (hi - lo).abs();
    if diff <= budget || diff <= 4.0 * f64::EPSILON * (left.abs() + right.abs()) {
        return Ok(left + right);
    }
    if !diff.is_finite() {
        return Err(Error::NonConvergence {
            what: "adaptive quadrature",
            diagnostics: format!("non-finite integrand on [{lo}, {hi}]"),
        });
    }
    if depth == 0 {
        return Err(Error::NonConvergence {
            what: "adaptive quadrature",
            diagnostics: format!(
                "depth limit reached on [{lo:.6e}, {hi:.6e}]: |Δ| = {diff:.3e} > {budget:.3e}"
            ),
        });
    }
    Ok(refine(f, rule, lo, mid, left, tol_density, depth - 1)?
        + refine(f, rule, mid, hi, right, tol_density, depth - 1)?)
}

/// Integrates `f` over `[a, b]` when `f` behaves like a power series in
/// `√(θ − a)` and `√(b − θ)` near the endpoints.
///
/// Uses `θ = a + (b − a)(1 − cos u)/2`, `u ∈ [0, π]`.
pub fn integrate_sqrt_ends<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: Adaptive) -> Result<f64> {
    let half = 0.5 * (b - a);
    integrate(
        |u| {
            let theta = a + half * (1.0 - u.cos());
            f(theta) * half * u.sin()
        },
        0.0,
        PI,
        opts,
    )
}
