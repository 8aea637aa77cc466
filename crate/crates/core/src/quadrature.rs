//! One-dimensional quadrature and search primitives shared by the circle
//! means, the Stieltjes integrals and the modulus-of-continuity profile.
//!
//! The integrator is a globally adaptive Gauss–Kronrod (7, 15) scheme in the
//! style of QUADPACK `qag`: the interval with the largest error estimate is
//! bisected until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value and absolute error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
    };
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl std::ops::AddAssign for Estimate {
    fn add_assign(&mut self, rhs: Estimate) {
        self.value += rhs.value;
        self.error += rhs.error;
    }
}

/// Single Gauss–Kronrod 15-point panel on `[a, b]`.
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Estimate { value, error }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_panels: 20_000,
        }
    }
}

/// Failure of [`integrate`] to meet its tolerance within the panel budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exhausted {
    pub estimate: Estimate,
    pub tolerance: f64,
}

/// Globally adaptive integration of `f` over the partition given by the
/// sorted `breaks` (at least two points). Integrand singularities and kinks
/// should sit on break points; panel endpoints are never evaluated.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<Estimate, Exhausted> {
    let mut heap = BinaryHeap::new();
    let mut total = Estimate::ZERO;
    // Panels too narrow to bisect further keep their contribution here.
    let mut frozen = Estimate::ZERO;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let est = gauss_kronrod_15(f, a, b);
        total += est;
        heap.push(Panel { a, b, est });
    }
    let mut panels = heap.len();
    loop {
        let value = total.value + frozen.value;
        let tolerance = opts.abs_tol.max(opts.rel_tol * value.abs());
        let error = total.error + frozen.error;
        if error <= tolerance {
            return Ok(Estimate { value, error });
        }
        if heap.is_empty() || panels >= opts.max_panels {
            return Err(Exhausted {
                estimate: Estimate { value, error },
                tolerance,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        total.value -= worst.est.value;
        total.error -= worst.est.error;
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-15 * worst.a.abs().max(1e-300) {
            frozen += worst.est;
            continue;
        }
        let left = gauss_kronrod_15(f, worst.a, mid);
        let right = gauss_kronrod_15(f, mid, worst.b);
        total += left;
        total += right;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            est: right,
        });
        panels += 1;
        // Guard against drift of the running sums after many updates.
        if panels % 512 == 0 {
            total = heap.iter().fold(Estimate::ZERO, |acc, p| acc + p.est);
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[a, b]`, assuming the
/// bracket holds a single peak. Returns the best abscissa seen and its value.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (mut best_x, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    let x_tol = x_tol.max(4.0 * f64::EPSILON * a.abs().max(b.abs()));
    for _ in 0..200 {
        if (b - a) <= x_tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best_f {
                best_x = c;
                best_f = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best_f {
                best_x = d;
                best_f = fd;
            }
        }
        if best_f == f64::INFINITY {
            break;
        }
    }
    (best_x, best_f)
}

/// Bisection for a sign change of `f` on `[a, b]` where `f(a)` and `f(b)`
/// have opposite signs (`fa`, `fb` are those values).
pub fn bisect_root<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = (0..n)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp())
        .collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk_is_exact_on_polynomials() {
        let est = gauss_kronrod_15(&|x: f64| x.powi(9) - 3.0 * x * x + 1.0, -1.0, 2.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0) + 3.0;
        assert!((est.value - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_log_endpoint() {
        // ∫_0^1 ln x dx = -1
        let est = integrate(&|x: f64| x.ln(), &[0.0, 1.0], QuadOptions::default()).unwrap();
        assert!((est.value + 1.0).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn adaptive_with_kink_on_break() {
        let f = |x: f64| (x - 0.3).abs();
        let est = integrate(&f, &[0.0, 0.3, 1.0], QuadOptions::default()).unwrap();
        assert!((est.value - (0.045 + 0.245)).abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 0.0,
            max_panels: 3,
        };
        let err = integrate(&|x: f64| (50.0 * x).sin(), &[0.0, 10.0], opts).unwrap_err();
        assert!(err.estimate.error > err.tolerance);
    }

    #[test]
    fn golden_finds_peak() {
        let (x, fx) = golden_max(&|x: f64| (x - 1.0).cos(), 0.0, PI, 1e-12);
        assert!((x - 1.0).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_converges() {
        let f = |x: f64| x * x - 2.0;
        let root = bisect_root(&f, 0.0, 2.0, f(0.0));
        assert!((root - 2f64.sqrt()).abs() < 1e-15);
    }
}
