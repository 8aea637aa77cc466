//! Modulus of continuity `ω_m(t) = sup_x (m(x + t/2) - m(x - t/2))`, the
//! stabilization diameter and the Dini-type integrals built on them.
//!
//! For a piecewise-linear integrator the window increment is piecewise
//! linear in the window position, so its supremum is attained (as a one-sided
//! limit) when a window edge sits on a knot. Scanning those positions gives
//! `ω` exactly up to rounding.

use super::{Integrator, KnotTable};
use crate::error::{Error, Result};

/// Cell increment bound used by the default refinement, relative to `M`.
const INCREMENT_TOL: f64 = 1e-3;
const MAX_NODES: usize = 1 << 16;

/// `ω_m(t)` by an exact scan over window positions anchored at knots.
pub(crate) fn omega(table: &KnotTable, t: f64, with_jumps: bool) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    let n = table.len();
    let mut best: f64 = 0.0;
    let mut ahead = table.cursor();
    for k in 0..n {
        let (v, v_left) = ahead.values(table.xs[k] + t);
        best = best.max(v - table.right[k]);
        if with_jumps {
            best = best.max(v_left - table.left[k]);
        }
    }
    let mut behind = table.cursor();
    for k in 0..n {
        let (v, v_left) = behind.values(table.xs[k] - t);
        best = best.max(table.right[k] - v);
        if with_jumps {
            best = best.max(table.left[k] - v_left);
        }
    }
    best.min(table.total_variation())
}

/// Sampled modulus of continuity on `(0, 4R]`.
///
/// Between consecutive grid points `ω` is bracketed by its values at the two
/// ends. Below `linear_limit` a jump-free integrator has `ω(t) = max_slope · t`
/// exactly, since no window of that width contains two knots.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusProfile {
    pub grid: Vec<f64>,
    pub omega_lower: Vec<f64>,
    pub omega_upper: Vec<f64>,
    pub total_variation: f64,
    pub stab_diameter: f64,
    /// Bisection bracket around `stab_diameter`.
    pub stab_bracket: (f64, f64),
    pub max_slope: f64,
    pub linear_limit: f64,
    pub continuous: bool,
    /// Right end `4R` of the profile.
    pub outer: f64,
}

impl ModulusProfile {
    /// Bracket `[lo, hi]` for `ω(t)` from the grid and the linear head.
    pub fn bracket(&self, t: f64) -> (f64, f64) {
        let m = self.total_variation;
        if t <= 0.0 {
            return (0.0, 0.0);
        }
        if t >= self.stab_diameter {
            return (m, m);
        }
        if self.continuous && t <= self.linear_limit {
            let v = (self.max_slope * t).min(m);
            return (v, v);
        }
        let k = self.grid.partition_point(|&g| g <= t);
        if k == 0 {
            return (0.0, self.omega_upper[0]);
        }
        if self.grid[k - 1] == t || k == self.grid.len() {
            return (self.omega_lower[k - 1], self.omega_upper[k - 1]);
        }
        (self.omega_lower[k - 1], self.omega_upper[k])
    }

    /// Grid cells `(a, b, ω(a), ω(b))` between the linear head and `d_m`.
    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let last = self.grid.partition_point(|&g| g <= self.stab_diameter);
        (1..last).map(move |k| {
            (
                self.grid[k - 1],
                self.grid[k],
                self.omega_upper[k - 1],
                self.omega_upper[k],
            )
        })
    }

    /// `∫_0^{d_m} ω(t)/t dt` with `ω` interpolated linearly between nodes.
    fn head_and_cells_over_t(&self) -> f64 {
        let head = self.max_slope * self.linear_limit;
        let body: f64 = self
            .cells()
            .map(|(a, b, wa, wb)| {
                let s = (wb - wa) / (b - a);
                (wa - s * a) * (b / a).ln() + s * (b - a)
            })
            .sum();
        head + body
    }

    /// `∫_0^{d_m} ln(4R/t) dω(t)` against the same interpolant.
    fn head_and_cells_log_stieltjes(&self) -> f64 {
        let four_r = self.outer;
        let big_f = |t: f64| t * (four_r / t).ln() + t;
        let head = self.max_slope * big_f(self.linear_limit);
        let body: f64 = self
            .cells()
            .map(|(a, b, wa, wb)| (wb - wa) / (b - a) * (big_f(b) - big_f(a)))
            .sum();
        head + body
    }

    /// Certified bounds for `∫_0^{4R} ω(t)/t dt` from the step brackets.
    pub fn dini_bracket(&self) -> (f64, f64) {
        if !self.continuous {
            return (f64::INFINITY, f64::INFINITY);
        }
        let m = self.total_variation;
        if m == 0.0 {
            return (0.0, 0.0);
        }
        let head = self.max_slope * self.linear_limit;
        let tail = m * (self.outer / self.stab_diameter).ln();
        let (mut lo, mut hi) = (head + tail, head + tail);
        for (a, b, wa, wb) in self.cells() {
            lo += wa * (b / a).ln();
            hi += wb * (b / a).ln();
        }
        (lo, hi)
    }
}

/// Stabilization diameter `d_m = inf{t : ω(t) = M}` by bisection.
fn bisect_stabilization(table: &KnotTable, end: f64, with_jumps: bool) -> (f64, f64) {
    let m = table.total_variation();
    let target = m * (1.0 - 8.0 * f64::EPSILON);
    let (mut lo, mut hi) = (0.0, end);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) || hi - lo <= 1e-14 * end {
            break;
        }
        if omega(table, mid, with_jumps) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

fn build_profile(m: &Integrator, big_r: f64, grid_size: usize, defect_tol: Option<f64>) -> ModulusProfile {
    let table = m.knots();
    let total = table.total_variation();
    let outer = 4.0 * big_r;
    let continuous = !table.has_jumps();
    if total == 0.0 {
        return ModulusProfile {
            grid: vec![outer],
            omega_lower: vec![0.0],
            omega_upper: vec![0.0],
            total_variation: 0.0,
            stab_diameter: 0.0,
            stab_bracket: (0.0, 0.0),
            max_slope: 0.0,
            linear_limit: 0.0,
            continuous,
            outer,
        };
    }
    let w = |t: f64| omega(&table, t, !continuous);
    let (lo, d_m) = bisect_stabilization(&table, m.end(), !continuous);
    let max_slope = table.max_slope();
    let gap = table.min_gap();
    let start = if continuous {
        gap.min(d_m)
    } else {
        (1e-3 * gap).min(1e-6 * d_m.max(gap))
    };
    // A head reaching d_m up to rounding leaves no cells.
    let start = if start >= d_m * (1.0 - 1e-9) { d_m } else { start };

    let mut nodes: Vec<(f64, f64)> = Vec::new();
    if start < d_m && d_m > 0.0 {
        let n = grid_size.max(16);
        let ratio = (d_m / start).ln();
        for k in 0..n {
            let t = if k + 1 == n {
                d_m
            } else {
                start * (ratio * k as f64 / (n - 1) as f64).exp()
            };
            nodes.push((t, w(t)));
        }
        let inc_tol = INCREMENT_TOL * total;
        let mut stack: Vec<((f64, f64), (f64, f64))> = nodes.windows(2).rev().map(|p| (p[0], p[1])).collect();
        let mut accepted = vec![nodes[0]];
        let mut evaluations = nodes.len();
        while let Some(((a, wa), (b, wb))) = stack.pop() {
            let c = (a * b).sqrt();
            if evaluations >= MAX_NODES || b - a <= 1e-12 * b || !(c > a && c < b) {
                accepted.push((b, wb));
                continue;
            }
            if wb - wa > inc_tol {
                evaluations += 1;
                let mid = (c, w(c));
                stack.push((mid, (b, wb)));
                stack.push(((a, wa), mid));
                continue;
            }
            match defect_tol {
                Some(tol) => {
                    evaluations += 1;
                    let wc = w(c);
                    let interp = wa + (wb - wa) * (c - a) / (b - a);
                    if (wc - interp).abs() > tol {
                        stack.push(((c, wc), (b, wb)));
                        stack.push(((a, wa), (c, wc)));
                    } else {
                        accepted.push((c, wc));
                        accepted.push((b, wb));
                    }
                }
                None => accepted.push((b, wb)),
            }
        }
        nodes = accepted;
    } else {
        nodes.push((d_m.max(start), total));
    }
    if let Some(last) = nodes.last_mut() {
        // ω reaches M at d_m up to the bisection width.
        if last.0 == d_m {
            last.1 = total;
        }
    }
    if outer > d_m {
        nodes.push((outer, total));
    }
    let (grid, omegas): (Vec<f64>, Vec<f64>) = nodes.into_iter().unzip();
    ModulusProfile {
        grid,
        omega_lower: omegas.clone(),
        omega_upper: omegas,
        total_variation: total,
        stab_diameter: d_m,
        stab_bracket: (lo, d_m),
        max_slope,
        linear_limit: if continuous { start } else { 0.0 },
        continuous,
        outer,
    }
}

/// Profile of `ω_m` on `(0, 4R]` starting from `grid_size` geometric nodes,
/// refined until every cell increment is at most `M · 10⁻³`.
pub fn modulus_of_continuity(m: &Integrator, big_r: f64, grid_size: usize) -> ModulusProfile {
    build_profile(m, big_r, grid_size, None)
}

pub fn stabilization_diameter(profile: &ModulusProfile) -> f64 {
    profile.stab_diameter
}

fn dini_profile(m: &Integrator, big_r: f64, tol: f64) -> ModulusProfile {
    let table_gap = m.knots().min_gap();
    let d = m.support_diameter().max(table_gap);
    let decades = (d / table_gap.min(d)).ln().max(1.0);
    let total = m.total_variation();
    build_profile(m, big_r, 64, Some(tol * total * 4f64.ln() / decades))
}

/// `∫_0^{4R} ω_m(t)/t dt`; `+∞` when `m` has a jump.
pub fn dini_integral(m: &Integrator, big_r: f64, tol: f64) -> f64 {
    if m.has_jumps() {
        return f64::INFINITY;
    }
    if m.total_variation() == 0.0 {
        return 0.0;
    }
    let p = dini_profile(m, big_r, tol);
    p.head_and_cells_over_t() + p.total_variation * (p.outer / p.stab_diameter).ln()
}

/// The two sides of the Dini-sum bound:
/// `lhs = ∫_0^{d_m} ln(4R/t) dω(t)` and
/// `rhs = ∫_0^{d_m} ω(t)/t dt + M ln(4R/d_m)`.
///
/// A constant integrator gives `(0, 0)`; an integrator with jumps gives
/// `(+∞, +∞)`.
pub fn kint_pair(m: &Integrator, big_r: f64, tol: f64) -> Result<(f64, f64)> {
    let total = m.total_variation();
    if total == 0.0 {
        return Ok((0.0, 0.0));
    }
    if m.support_diameter() == 0.0 {
        return Err(Error::DegenerateDm);
    }
    if m.has_jumps() {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let p = dini_profile(m, big_r, tol);
    let lhs = p.head_and_cells_log_stieltjes();
    let rhs = p.head_and_cells_over_t() + total * (p.outer / p.stab_diameter).ln();
    Ok((lhs, rhs))
}
