//! Lebesgue–Stieltjes integrals `∫_{[0, r]} f dm` for integrands with
//! logarithmic singularities.
//!
//! An integrand announces points `x_i` where it behaves like
//! `w_i ln(1/|t - x_i|)`. On the absolutely continuous part that term is
//! integrated in closed form and only the bounded remainder goes through
//! quadrature.

use super::{CantorPart, Integrator};
use crate::error::{Error, Result};
use crate::quadrature::{self, Estimate, QuadOptions};

/// `f(t) ≈ weight · ln(1/|t - at|)` near `at`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSingularity {
    pub at: f64,
    pub weight: f64,
}

/// A function sampled by the Stieltjes integrator.
pub trait Integrand {
    fn eval(&self, x: f64) -> f64;

    fn log_singularities(&self) -> Vec<LogSingularity> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> Integrand for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Result of [`stieltjes_integral`]. `singular_jump` names a jump of `m`
/// sitting on a singularity of `f`; the value is then infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesValue {
    pub value: f64,
    pub error: f64,
    pub singular_jump: Option<f64>,
}

impl StieltjesValue {
    /// The value, or [`Error::SingularAtJump`] when it diverges at a jump.
    pub fn finite(self) -> Result<f64> {
        match self.singular_jump {
            Some(location) => Err(Error::SingularAtJump { location }),
            None => Ok(self.value),
        }
    }
}

/// `∫_u^v ln(1/|t - x|) dt`.
fn log_kernel_antiderivative(u: f64, v: f64, x: f64) -> f64 {
    let g = |s: f64| if s == 0.0 { 0.0 } else { s * s.abs().ln() - s };
    g(u - x) - g(v - x)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0)
}

/// `∫_u^v f(t) dt` with the announced singularities inside `[u, v]` split off.
fn lebesgue_piece<I: Integrand + ?Sized>(
    f: &I,
    sing: &[LogSingularity],
    u: f64,
    v: f64,
    tol: f64,
) -> Result<Estimate> {
    let inside: Vec<LogSingularity> = sing.iter().copied().filter(|s| s.at >= u && s.at <= v).collect();
    let regular = |t: f64| {
        let mut y = f.eval(t);
        for s in &inside {
            y += s.weight * (t - s.at).abs().ln();
        }
        y
    };
    let mut breaks = vec![u, v];
    breaks.extend(inside.iter().map(|s| s.at));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let opts = QuadOptions {
        abs_tol: 1e-3 * tol * (v - u),
        rel_tol: 0.1 * tol,
        max_panels: 20_000,
    };
    let est = quadrature::integrate(&regular, &breaks, opts).map_err(|e| Error::ToleranceNotReached {
        estimate: e.estimate.value,
        error: e.estimate.error,
        tolerance: e.tolerance,
    })?;
    let closed: f64 = inside
        .iter()
        .map(|s| s.weight * log_kernel_antiderivative(u, v, s.at))
        .sum();
    Ok(Estimate {
        value: est.value + closed,
        error: est.error,
    })
}

const CANTOR_MIN_LEVEL: u32 = 2;

struct CantorWalk<'a, I: Integrand + ?Sized> {
    f: &'a I,
    sing: &'a [LogSingularity],
    depth: u32,
    height: f64,
    tol_abs: f64,
    tol_rel: f64,
}

impl<I: Integrand + ?Sized> CantorWalk<'_, I> {
    fn near_singularity(&self, u: f64, v: f64) -> bool {
        let w = v - u;
        self.sing.iter().any(|s| s.at >= u - w && s.at <= v + w)
    }

    /// Integral over the level-`level` cell `[u, v]` carrying `mass`;
    /// `f_mid` is `f` at the cell centre when already known.
    fn cell(&self, u: f64, v: f64, mass: f64, level: u32, f_mid: Option<f64>) -> Result<Estimate> {
        if level == self.depth {
            let density = mass / (v - u);
            let est = lebesgue_piece(self.f, self.sing, u, v, self.tol_rel)?;
            return Ok(Estimate {
                value: est.value * density,
                error: est.error * density,
            });
        }
        let third = (v - u) / 3.0;
        let (l, r) = ((u, u + third), (v - third, v));
        let half = 0.5 * mass;
        if self.near_singularity(u, v) {
            return Ok(self.cell(l.0, l.1, half, level + 1, None)? + self.cell(r.0, r.1, half, level + 1, None)?);
        }
        let f_mid = f_mid.unwrap_or_else(|| self.f.eval(0.5 * (u + v)));
        let f1 = self.f.eval(0.5 * (l.0 + l.1));
        let f2 = self.f.eval(0.5 * (r.0 + r.1));
        let coarse = f_mid * mass;
        let fine = (f1 + f2) * half;
        let diff = fine - coarse;
        if level >= CANTOR_MIN_LEVEL && diff.abs() <= self.tol_abs * (mass / self.height) {
            // Midpoint error shrinks by the variance ratio 1/9 per level.
            return Ok(Estimate {
                value: fine + diff / 8.0,
                error: diff.abs() / 8.0,
            });
        }
        Ok(self.cell(l.0, l.1, half, level + 1, Some(f1))? + self.cell(r.0, r.1, half, level + 1, Some(f2))?)
    }
}

fn cantor_integral<I: Integrand + ?Sized>(
    f: &I,
    sing: &[LogSingularity],
    c: &CantorPart,
    tol_abs: f64,
    tol_rel: f64,
) -> Result<Estimate> {
    let walk = CantorWalk {
        f,
        sing,
        depth: c.depth,
        height: c.h,
        tol_abs,
        tol_rel,
    };
    walk.cell(c.a, c.b, c.h, 0, None)
}

/// `∫_{[0, r]} f dm` with relative accuracy about `tol`.
///
/// Jumps contribute `f(x_j) h_j`; a jump on a singularity of `f` makes the
/// integral infinite and is reported in `singular_jump`.
pub fn stieltjes_integral<I: Integrand + ?Sized>(f: &I, m: &Integrator, tol: f64) -> Result<StieltjesValue> {
    let sing: Vec<LogSingularity> = f
        .log_singularities()
        .into_iter()
        .filter(|s| s.weight != 0.0 && s.at >= 0.0 && s.at <= m.end())
        .collect();
    let mut total = Estimate::ZERO;
    for j in m.jumps() {
        if let Some(s) = sing.iter().find(|s| close(s.at, j.x)) {
            return Ok(StieltjesValue {
                value: if s.weight > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY },
                error: 0.0,
                singular_jump: Some(j.x),
            });
        }
        total.value += f.eval(j.x) * j.h;
    }
    for p in m.pieces().iter().filter(|p| p.slope > 0.0) {
        let est = lebesgue_piece(f, &sing, p.from, p.to, tol)?;
        total.value += p.slope * est.value;
        total.error += p.slope * est.error;
    }
    if let Some(c) = m.cantor().filter(|c| c.h > 0.0) {
        let probe = f.eval(0.5 * (c.a + c.b)).abs().max(1.0);
        total += cantor_integral(f, &sing, c, 0.1 * tol * c.h * probe, tol)?;
    }
    Ok(StieltjesValue {
        value: total.value,
        error: total.error,
        singular_jump: None,
    })
}

/// `∫_0^{upper} (m(x + u) - m(x - u))/u du`, exact for the depth-limited
/// integrator; `+∞` when `m` jumps at `x`.
pub fn centered_increment_integral(m: &Integrator, x: f64, upper: f64) -> f64 {
    let table = m.knots();
    if table.value(x) > table.value_left(x) {
        return f64::INFINITY;
    }
    let mut cuts: Vec<f64> = table
        .xs
        .iter()
        .map(|&k| (k - x).abs())
        .filter(|&u| u > 0.0 && u < upper)
        .collect();
    cuts.push(upper);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    // Increment just right of `ua` and just left of `ub`.
    let after = |u: f64| table.value(x + u) - table.value_left(x - u);
    let before = |u: f64| table.value_left(x + u) - table.value(x - u);
    let mut total = 0.0;
    let mut ua = 0.0;
    let mut ga = 0.0;
    for &ub in &cuts {
        let gb = before(ub);
        let beta = (gb - ga) / (ub - ua);
        let alpha = ga - beta * ua;
        if ua == 0.0 {
            total += gb;
        } else {
            total += alpha * (ub / ua).ln() + beta * (ub - ua);
        }
        ua = ub;
        ga = after(ub);
    }
    total
}

/// Both routes to `∫_0^r ln(2R/|t - x|) dm(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogKernel {
    /// `∫_0^{4R} (m(x + s/2) - m(x - s/2))/s ds`.
    pub substitution: f64,
    /// Stieltjes integral with the logarithm split off in closed form.
    pub direct: f64,
}

struct LogKernelIntegrand {
    two_r: f64,
    x: f64,
}

impl Integrand for LogKernelIntegrand {
    fn eval(&self, t: f64) -> f64 {
        (self.two_r / (t - self.x).abs()).ln()
    }

    fn log_singularities(&self) -> Vec<LogSingularity> {
        vec![LogSingularity { at: self.x, weight: 1.0 }]
    }
}

/// `∫_0^r ln(2R/|t - x|) dm(t)` for `x ∈ [0, R]`, by substitution and directly.
pub fn log_kernel_integral(m: &Integrator, x: f64, big_r: f64, tol: f64) -> Result<LogKernel> {
    if !(m.end() < big_r) {
        return Err(Error::InvalidWindow {
            inner: m.end(),
            outer: big_r,
        });
    }
    if !(0.0..=big_r).contains(&x) {
        return Err(Error::InvalidRadius(x));
    }
    let substitution = centered_increment_integral(m, x, 2.0 * big_r);
    let direct = stieltjes_integral(&LogKernelIntegrand { two_r: 2.0 * big_r, x }, m, tol)?.value;
    Ok(LogKernel { substitution, direct })
}
