//! Increasing integrators on `[0, r]` built from absolutely continuous
//! pieces, a Cantor staircase and jumps, extended to `ℝ` by constants.

mod modulus;
mod stieltjes;

pub use modulus::{dini_integral, kint_pair, modulus_of_continuity, stabilization_diameter, ModulusProfile};
pub use stieltjes::{
    centered_increment_integral, log_kernel_integral, stieltjes_integral, Integrand, LogKernel, LogSingularity,
    StieltjesValue,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default recursion depth of the Cantor staircase.
pub const DEFAULT_CANTOR_DEPTH: u32 = 12;
/// Largest accepted recursion depth; the knot table has `2^(depth+1)` points.
pub const MAX_CANTOR_DEPTH: u32 = 20;

/// Linear piece of the absolutely continuous part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub from: f64,
    pub to: f64,
    pub slope: f64,
}

fn default_depth() -> u32 {
    DEFAULT_CANTOR_DEPTH
}

/// Cantor staircase of height `h` anchored on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorPart {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    #[serde(default = "default_depth")]
    pub depth: u32,
}

impl CantorPart {
    /// Depth-limited staircase value: exact on the triadic grid of level
    /// `depth`, linear inside each remaining interval.
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return self.h;
        }
        let mut s = (x - self.a) / (self.b - self.a);
        let mut lo = 0.0;
        let mut width = self.h;
        for _ in 0..self.depth {
            s *= 3.0;
            if s < 1.0 {
                width *= 0.5;
            } else if s < 2.0 {
                return lo + 0.5 * width;
            } else {
                width *= 0.5;
                lo += width;
                s -= 2.0;
            }
        }
        lo + width * s
    }

    /// The `2^depth` intervals on which the staircase rises, in order.
    pub fn rising_intervals(&self) -> Vec<(f64, f64)> {
        let mut cells = vec![(self.a, self.b)];
        for _ in 0..self.depth {
            let mut next = Vec::with_capacity(2 * cells.len());
            for (u, v) in cells {
                let third = (v - u) / 3.0;
                next.push((u, u + third));
                next.push((v - third, v));
            }
            cells = next;
        }
        cells
    }
}

/// Jump of height `h` at `x`; the integrator is right-continuous there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub x: f64,
    pub h: f64,
}

#[derive(Deserialize)]
struct IntegratorRecord {
    end: f64,
    #[serde(default)]
    pieces: Vec<Piece>,
    #[serde(default)]
    cantor: Option<CantorPart>,
    #[serde(default)]
    jumps: Vec<Jump>,
}

impl TryFrom<IntegratorRecord> for Integrator {
    type Error = Error;
    fn try_from(r: IntegratorRecord) -> Result<Self> {
        Integrator::new(r.end, r.pieces, r.cantor, r.jumps)
    }
}

/// Non-decreasing `m` on `[0, end]` with `m(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntegratorRecord")]
pub struct Integrator {
    end: f64,
    pieces: Vec<Piece>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cantor: Option<CantorPart>,
    jumps: Vec<Jump>,
}

impl Integrator {
    pub fn new(end: f64, pieces: Vec<Piece>, cantor: Option<CantorPart>, jumps: Vec<Jump>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidIntegrator(msg));
        if !(end > 0.0 && end.is_finite()) {
            return bad(format!("domain end {end} must be positive and finite"));
        }
        for p in &pieces {
            if !(0.0 <= p.from && p.from < p.to && p.to <= end) {
                return bad(format!("piece [{}, {}] outside [0, {end}]", p.from, p.to));
            }
            if !(p.slope >= 0.0 && p.slope.is_finite()) {
                return bad(format!("piece slope {} must be non-negative", p.slope));
            }
        }
        if let Some(c) = &cantor {
            if !(0.0 <= c.a && c.a < c.b && c.b <= end) {
                return bad(format!("Cantor interval [{}, {}] outside [0, {end}]", c.a, c.b));
            }
            if !(c.h >= 0.0 && c.h.is_finite()) {
                return bad(format!("Cantor height {} must be non-negative", c.h));
            }
            if c.depth > MAX_CANTOR_DEPTH {
                return bad(format!("Cantor depth {} exceeds {MAX_CANTOR_DEPTH}", c.depth));
            }
        }
        for j in &jumps {
            if !(0.0 < j.x && j.x < end) {
                return bad(format!("jump location {} outside (0, {end})", j.x));
            }
            if !(j.h > 0.0 && j.h.is_finite()) {
                return bad(format!("jump height {} must be positive", j.h));
            }
        }
        let mut jumps = jumps;
        jumps.sort_by(|a, b| a.x.total_cmp(&b.x));
        Ok(Integrator {
            end,
            pieces,
            cantor,
            jumps,
        })
    }

    /// `m(t) = slope · t` on `[0, end]`.
    pub fn linear(end: f64, slope: f64) -> Result<Self> {
        Self::new(
            end,
            vec![Piece {
                from: 0.0,
                to: end,
                slope,
            }],
            None,
            vec![],
        )
    }

    /// Zero integrator on `[0, end]`.
    pub fn constant(end: f64) -> Result<Self> {
        Self::new(end, vec![], None, vec![])
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn cantor(&self) -> Option<&CantorPart> {
        self.cantor.as_ref()
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn has_jumps(&self) -> bool {
        !self.jumps.is_empty()
    }

    /// `M = m(end) - m(0)`.
    pub fn total_variation(&self) -> f64 {
        self.pieces.iter().map(|p| p.slope * (p.to - p.from)).sum::<f64>()
            + self.cantor.map_or(0.0, |c| c.h)
            + self.jumps.iter().map(|j| j.h).sum::<f64>()
    }

    fn continuous_part(&self, x: f64) -> f64 {
        let ac: f64 = self
            .pieces
            .iter()
            .map(|p| p.slope * (x.clamp(p.from, p.to) - p.from))
            .sum();
        ac + self.cantor.map_or(0.0, |c| c.value(x))
    }

    /// Value of the extended integrator at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.end);
        self.continuous_part(x) + self.jumps.iter().take_while(|j| j.x <= x).map(|j| j.h).sum::<f64>()
    }

    /// Left limit `m(x-)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.end);
        self.continuous_part(x) + self.jumps.iter().take_while(|j| j.x < x).map(|j| j.h).sum::<f64>()
    }

    /// Support of non-constancy: closed intervals where `m` increases
    /// (degenerate intervals for jumps), merged and sorted.
    pub fn support(&self) -> Vec<(f64, f64)> {
        let mut parts: Vec<(f64, f64)> = self
            .pieces
            .iter()
            .filter(|p| p.slope > 0.0)
            .map(|p| (p.from, p.to))
            .collect();
        if let Some(c) = self.cantor.filter(|c| c.h > 0.0) {
            parts.extend(c.rising_intervals());
        }
        parts.extend(self.jumps.iter().map(|j| (j.x, j.x)));
        parts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(parts.len());
        for (lo, hi) in parts {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        merged
    }

    /// Diameter of the support of non-constancy; zero for constant `m`.
    pub fn support_diameter(&self) -> f64 {
        let s = self.support();
        match (s.first(), s.last()) {
            (Some(a), Some(b)) => b.1 - a.0,
            _ => 0.0,
        }
    }

    /// Knot table of the depth-limited integrator.
    pub fn knots(&self) -> KnotTable {
        let mut xs = vec![0.0, self.end];
        for p in &self.pieces {
            xs.push(p.from);
            xs.push(p.to);
        }
        if let Some(c) = &self.cantor {
            for (u, v) in c.rising_intervals() {
                xs.push(u);
                xs.push(v);
            }
        }
        xs.extend(self.jumps.iter().map(|j| j.x));
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let left = xs.iter().map(|&x| self.eval_left(x)).collect();
        let right = xs.iter().map(|&x| self.eval(x)).collect();
        KnotTable { xs, left, right }
    }
}

/// Piecewise-linear description of an integrator: linear from
/// `right[k]` at `xs[k]` to `left[k + 1]` at `xs[k + 1]`, constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotTable {
    pub xs: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl KnotTable {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn total_variation(&self) -> f64 {
        self.right[self.len() - 1] - self.left[0]
    }

    pub fn has_jumps(&self) -> bool {
        self.left.iter().zip(&self.right).any(|(l, r)| r > l)
    }

    /// Smallest distance between consecutive knots.
    pub fn min_gap(&self) -> f64 {
        self.xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Largest slope over the linear segments.
    pub fn max_slope(&self) -> f64 {
        (0..self.len() - 1)
            .map(|k| (self.left[k + 1] - self.right[k]) / (self.xs[k + 1] - self.xs[k]))
            .fold(0.0, f64::max)
    }

    /// Value on segment `k` (between knots `k` and `k + 1`) at `x`.
    #[inline]
    fn on_segment(&self, k: usize, x: f64) -> f64 {
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let (v0, v1) = (self.right[k], self.left[k + 1]);
        v0 + (v1 - v0) * ((x - x0) / (x1 - x0))
    }

    /// `m(x)` and `m(x-)` given the index `k` of the last knot `≤ x`
    /// (`None` when `x` precedes every knot).
    #[inline]
    fn values_at(&self, k: Option<usize>, x: f64) -> (f64, f64) {
        match k {
            None => (self.left[0], self.left[0]),
            Some(k) if self.xs[k] == x => (self.right[k], self.left[k]),
            Some(k) if k + 1 == self.len() => (self.right[k], self.right[k]),
            Some(k) => {
                let v = self.on_segment(k, x);
                (v, v)
            }
        }
    }

    fn locate(&self, x: f64) -> Option<usize> {
        self.xs.partition_point(|&k| k <= x).checked_sub(1)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.values_at(self.locate(x), x).0
    }

    pub fn value_left(&self, x: f64) -> f64 {
        self.values_at(self.locate(x), x).1
    }

    /// Forward cursor for non-decreasing query sequences.
    pub(crate) fn cursor(&self) -> Cursor<'_> {
        Cursor { table: self, next: 0 }
    }
}

pub(crate) struct Cursor<'a> {
    table: &'a KnotTable,
    next: usize,
}

impl Cursor<'_> {
    /// `(m(x), m(x-))`; queries must not decrease.
    #[inline]
    pub(crate) fn values(&mut self, x: f64) -> (f64, f64) {
        let xs = &self.table.xs;
        while self.next < xs.len() && xs[self.next] <= x {
            self.next += 1;
        }
        self.table.values_at(self.next.checked_sub(1), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cantor_unit(depth: u32) -> Integrator {
        Integrator::new(
            1.0,
            vec![],
            Some(CantorPart {
                a: 0.0,
                b: 1.0,
                h: 1.0,
                depth,
            }),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn linear_extension() {
        let m = Integrator::linear(2.0, 1.0).unwrap();
        assert_eq!(m.eval(5.0), 2.0);
        assert_eq!(m.eval(-1.0), 0.0);
        assert_eq!(m.eval(1.25), 1.25);
        assert_eq!(m.total_variation(), 2.0);
    }

    #[test]
    fn cantor_known_values() {
        let m = cantor_unit(12);
        assert_eq!(m.eval(1.0 / 3.0), 0.5);
        assert_eq!(m.eval(0.5), 0.5);
        assert_eq!(m.eval(2.0 / 3.0), 0.5);
        assert!((m.eval(1.0 / 9.0) - 0.25).abs() < 1e-15);
        assert!((m.eval(0.75) - 2.0 / 3.0).abs() < 2f64.powi(-12));
        assert_eq!(m.eval(1.0), 1.0);
    }

    #[test]
    fn cantor_matches_ternary_expansion() {
        // Exact staircase on points with finite ternary expansions avoiding 1.
        let c = cantor_unit(12);
        for digits in [[0u8, 2, 2, 0, 2], [2, 0, 0, 2, 2], [2, 2, 2, 0, 0]] {
            let x: f64 = digits.iter().enumerate().map(|(i, &d)| d as f64 / 3f64.powi(i as i32 + 1)).sum();
            let y: f64 = digits
                .iter()
                .enumerate()
                .map(|(i, &d)| (d / 2) as f64 / 2f64.powi(i as i32 + 1))
                .sum();
            assert!((c.eval(x) - y).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn jumps_are_right_continuous() {
        let m = Integrator::new(2.0, vec![], None, vec![Jump { x: 1.0, h: 0.5 }]).unwrap();
        assert_eq!(m.eval(1.0), 0.5);
        assert_eq!(m.eval_left(1.0), 0.0);
        let k = m.knots();
        assert_eq!(k.value(1.0), 0.5);
        assert_eq!(k.value_left(1.0), 0.0);
        assert!(k.has_jumps());
    }

    #[test]
    fn validation() {
        assert!(Integrator::linear(0.0, 1.0).is_err());
        assert!(Integrator::linear(1.0, -1.0).is_err());
        assert!(Integrator::new(1.0, vec![], None, vec![Jump { x: 1.0, h: 1.0 }]).is_err());
        assert!(Integrator::new(1.0, vec![], None, vec![Jump { x: 0.5, h: 0.0 }]).is_err());
        let deep = CantorPart {
            a: 0.0,
            b: 1.0,
            h: 1.0,
            depth: MAX_CANTOR_DEPTH + 1,
        };
        assert!(Integrator::new(1.0, vec![], Some(deep), vec![]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let text = r#"{"end": 2, "pieces": [{"from": 0, "to": 1, "slope": 0.5}],
                       "cantor": {"a": 1, "b": 2, "h": 1}, "jumps": [{"x": 1.5, "h": 0.25}]}"#;
        let m: Integrator = serde_json::from_str(text).unwrap();
        assert_eq!(m.cantor().unwrap().depth, DEFAULT_CANTOR_DEPTH);
        let back: Integrator = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
        assert!(serde_json::from_str::<Integrator>(r#"{"end": -1}"#).is_err());
    }

    #[test]
    fn support_of_non_constancy() {
        let m = Integrator::new(
            3.0,
            vec![
                Piece {
                    from: 0.5,
                    to: 1.0,
                    slope: 1.0,
                },
                Piece {
                    from: 0.8,
                    to: 1.2,
                    slope: 0.0,
                },
            ],
            None,
            vec![Jump { x: 2.5, h: 1.0 }],
        )
        .unwrap();
        assert_eq!(m.support(), vec![(0.5, 1.0), (2.5, 2.5)]);
        assert_eq!(m.support_diameter(), 2.0);
        assert_eq!(Integrator::constant(1.0).unwrap().support_diameter(), 0.0);
    }

    fn arb_integrator() -> impl Strategy<Value = Integrator> {
        (
            prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..3.0f64), 0..4),
            prop::option::of((0.0..1.0f64, 0.0..1.0f64, 0.0..2.0f64, 1u32..8)),
            prop::collection::vec((0.01..0.99f64, 0.01..1.0f64), 0..3),
        )
            .prop_map(|(pieces, cantor, jumps)| {
                let end = 2.0;
                let pieces = pieces
                    .into_iter()
                    .map(|(a, b, slope)| {
                        let (lo, hi) = (a.min(b) * end, a.max(b) * end + 1e-3);
                        Piece {
                            from: lo,
                            to: hi.min(end),
                            slope,
                        }
                    })
                    .collect();
                let cantor = cantor.map(|(a, b, h, depth)| CantorPart {
                    a: a.min(b) * end,
                    b: (a.max(b) * end + 1e-2).min(end),
                    h,
                    depth,
                });
                let jumps = jumps.into_iter().map(|(x, h)| Jump { x: x * end, h }).collect();
                Integrator::new(end, pieces, cantor, jumps).unwrap()
            })
    }

    proptest! {
        #[test]
        fn monotone_and_constant_outside(m in arb_integrator(), xs in prop::collection::vec(-1.0..3.0f64, 2..40)) {
            let mut xs = xs;
            xs.sort_by(f64::total_cmp);
            let vals: Vec<f64> = xs.iter().map(|&x| m.eval(x)).collect();
            for w in vals.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
            prop_assert_eq!(m.eval(-0.5), 0.0);
            prop_assert!((m.eval(2.5) - m.total_variation()).abs() < 1e-12);
        }

        #[test]
        fn knot_table_reproduces_eval(m in arb_integrator(), xs in prop::collection::vec(-0.5..2.5f64, 1..40)) {
            let table = m.knots();
            for &x in &xs {
                prop_assert!((table.value(x) - m.eval(x)).abs() < 1e-12);
                prop_assert!((table.value_left(x) - m.eval_left(x)).abs() < 1e-12);
            }
            prop_assert!((table.total_variation() - m.total_variation()).abs() < 1e-12);
        }
    }
}
