//! Verification harness for integral bounds on circle maxima: the
//! Poisson–Jensen pointwise bound, the counting bound, the main integral
//! inequality with its seeded random suite, the divergence family and the
//! classical-shape check.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::characteristics::{bold_nevanlinna, classical_characteristic, jitter_window, ChargeView};
use crate::error::{Error, Result};
use crate::integrators::{
    dini_integral, kint_pair, stieltjes_integral, CantorPart, Integrand, Integrator, LogSingularity, Piece,
};
use crate::potentials::{from_rational, DeltaSubharmonicModel, HarmonicPart, MaxOptions, RadialWindow, Rational, RieszAtom};

/// Default relative tolerance for quadrature-backed comparisons.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Cantor depth used by the random case generator.
pub const GENERATOR_CANTOR_DEPTH: u32 = 8;

/// Angular sampling for `M_U` inside integrals. Narrow peaks only occur
/// next to negative atoms, whose arguments are always sampled, so a coarser
/// uniform scan than the default suffices.
pub const INTEGRAND_MAX_OPTIONS: MaxOptions = MaxOptions {
    samples: 512,
    refine: 8,
};

/// `t ↦ M_U^+(t)` with its logarithmic singularities at the radii of
/// negative atoms.
pub struct CircleMaxPlus<'a> {
    pub model: &'a DeltaSubharmonicModel,
    pub opts: MaxOptions,
}

impl<'a> CircleMaxPlus<'a> {
    pub fn new(model: &'a DeltaSubharmonicModel) -> Self {
        CircleMaxPlus {
            model,
            opts: INTEGRAND_MAX_OPTIONS,
        }
    }
}

impl Integrand for CircleMaxPlus<'_> {
    fn eval(&self, t: f64) -> f64 {
        self.model
            .circle_max_with(t, &self.opts)
            .map_or(f64::NAN, |v| v.max(0.0))
    }

    fn log_singularities(&self) -> Vec<LogSingularity> {
        let mut out: Vec<LogSingularity> = Vec::new();
        for a in self.model.negative_atoms() {
            let rho = a.radius();
            match out.iter_mut().find(|s| (s.at - rho).abs() <= 1e-12 * rho.max(1.0)) {
                Some(s) => s.weight = s.weight.max(-a.mass),
                None => out.push(LogSingularity {
                    at: rho,
                    weight: -a.mass,
                }),
            }
        }
        out
    }
}

/// `0 · ∞ = 0` product used for the bound's right-hand side.
fn product(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// Pointwise bound `U(w) ≤ (R+r)/(R-r) C_{U+}(R) + Σ |m_j| ln(2R/|w - a_j|)`,
/// the sum running over negative atoms in `D(R)`. Returns `(lhs, rhs)`.
pub fn poisson_jensen_bound(
    model: &DeltaSubharmonicModel,
    w: Complex64,
    window: RadialWindow,
    tol: f64,
) -> Result<(f64, f64)> {
    let (r, big_r) = (window.inner(), window.outer());
    if w.norm() > r {
        return Err(Error::InvalidRadius(w.norm()));
    }
    let lhs = model.evaluate(w)?;
    if lhs == f64::INFINITY {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let c_plus = model.circle_mean_plus(big_r, tol)?;
    let poles: f64 = model
        .negative_atoms()
        .filter(|a| a.radius() < big_r)
        .map(|a| -a.mass * (2.0 * big_r / (w - a.location).norm()).ln())
        .sum();
    Ok((lhs, (big_r + r) / (big_r - r) * c_plus + poles))
}

/// Counting bound chain `(lhs, rhs1, rhs2)` with
/// `lhs = μ^rd(R*)`, `rhs1 = R/(R-R*) N(R*, R)`, `rhs2 = R/(R-R*) N(r, R)`.
pub fn counting_bound(view: &ChargeView, r_star: f64, big_r: f64, r: f64) -> Result<(f64, f64, f64)> {
    if !(0.0 < r && r < r_star && r_star < big_r) {
        return Err(Error::InvalidWindow { inner: r, outer: big_r });
    }
    let factor = big_r / (big_r - r_star);
    let lhs = view.radial_counting(r_star);
    let rhs1 = factor * view.integrated_counting(RadialWindow::new(r_star, big_r)?)?;
    let rhs2 = factor * view.integrated_counting(RadialWindow::new(r, big_r)?)?;
    Ok((lhs, rhs1, rhs2))
}

/// One instance of the integral inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationCase {
    pub model: DeltaSubharmonicModel,
    pub integrator: Integrator,
    pub window: RadialWindow,
    pub seed: u64,
    pub tol: f64,
}

impl VerificationCase {
    pub fn new(
        model: DeltaSubharmonicModel,
        integrator: Integrator,
        window: RadialWindow,
        seed: u64,
        tol: f64,
    ) -> Result<Self> {
        model.validate()?;
        if window.inner() <= 0.0 || (integrator.end() - window.inner()).abs() > 1e-12 * window.inner() {
            return Err(Error::InvalidIntegrator(format!(
                "integrator ends at {} but the window starts at {}",
                integrator.end(),
                window.inner()
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidRadius(tol));
        }
        Ok(VerificationCase {
            model,
            integrator,
            window,
            seed,
            tol,
        })
    }

    /// `ln(5/|z - 1|)` against `m(t) = t` on `[0, 2]` with `R = 4`.
    pub fn fixture() -> Self {
        let model = from_rational(&[], &[(Complex64::new(1.0, 0.0), 1)], Complex64::new(5.0, 0.0))
            .expect("valid fixture model");
        VerificationCase {
            model,
            integrator: Integrator::linear(2.0, 1.0).expect("valid fixture integrator"),
            window: RadialWindow::new(2.0, 4.0).expect("valid fixture window"),
            seed: 0,
            tol: DEFAULT_TOL,
        }
    }
}

/// Terms entering the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Components {
    pub c_plus_outer: f64,
    pub n_minus: f64,
    pub n_minus_origin: f64,
    pub total_variation: f64,
    pub stab_diameter: f64,
    pub dini: f64,
    pub kint_lhs: f64,
    pub kint_rhs: f64,
}

/// Right-hand sides of the bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Rhs {
    /// With `**T**_U(r, R)` and the Stieltjes form of the last factor.
    pub rhs: f64,
    /// With `**T**_U(0, R)`.
    pub rhs_origin: f64,
    /// With the Dini-sum form of the last factor.
    pub rhs_kint: f64,
    pub components: Components,
}

/// `6R/(R-r) · **T**_U(r, R) · max{M, ∫_0^{d_m} ln(4R/t) dω_m(t)}` and its
/// two looser variants.
pub fn theorem1_rhs(case: &VerificationCase) -> Result<Theorem1Rhs> {
    let (r, big_r) = (case.window.inner(), case.window.outer());
    let m = &case.integrator;
    let c_plus_outer = case.model.circle_mean_plus(big_r, 0.1 * case.tol)?;
    let negative = ChargeView::negative(&case.model);
    let n_minus = negative.integrated_counting(case.window)?;
    let n_minus_origin = negative.integrated_counting(RadialWindow::new(0.0, big_r)?)?;
    let total = m.total_variation();
    let (kint_lhs, kint_rhs) = match kint_pair(m, big_r, case.tol) {
        Ok(pair) => pair,
        Err(Error::DegenerateDm) => (f64::INFINITY, f64::INFINITY),
        Err(e) => return Err(e),
    };
    // Past d_m the modulus equals M, so the Dini integral is the kint sum.
    let dini = if m.has_jumps() { f64::INFINITY } else { kint_rhs };
    let stab_diameter = m.support_diameter();
    let factor = 6.0 * big_r / (big_r - r);
    let bold = c_plus_outer + n_minus;
    let bold_origin = c_plus_outer + n_minus_origin;
    Ok(Theorem1Rhs {
        rhs: product(factor * bold, total.max(kint_lhs)),
        rhs_origin: product(factor * bold_origin, total.max(kint_lhs)),
        rhs_kint: product(factor * bold, total.max(kint_rhs)),
        components: Components {
            c_plus_outer,
            n_minus,
            n_minus_origin,
            total_variation: total,
            stab_diameter,
            dini,
            kint_lhs,
            kint_rhs,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Divergent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Divergent => "divergent",
        })
    }
}

/// Which quantity became infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Divergence {
    /// The Dini integral of the integrator diverges.
    Dini,
    /// A jump of the integrator sits on a logarithmic singularity of `M_U^+`.
    SingularJump { location: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub rhs_origin: f64,
    pub rhs_kint: f64,
    pub ratio: Option<f64>,
    pub components: Components,
    pub verdict: Verdict,
    pub divergence: Vec<Divergence>,
}

/// Left-hand side `∫_0^r M_U^+ dm`.
pub fn theorem1_lhs(case: &VerificationCase) -> Result<(f64, Option<f64>)> {
    let f = CircleMaxPlus::new(&case.model);
    let v = stieltjes_integral(&f, &case.integrator, case.tol)?;
    Ok((v.value, v.singular_jump))
}

/// Evaluates both sides. Integrators with jumps are reported as divergent
/// together with the certificate of what blew up.
pub fn theorem1_verify(case: &VerificationCase) -> Result<VerificationReport> {
    let (lhs, singular_jump) = theorem1_lhs(case)?;
    let rhs = theorem1_rhs(case)?;
    let mut divergence = Vec::new();
    if case.integrator.has_jumps() {
        divergence.push(Divergence::Dini);
    }
    if let Some(location) = singular_jump {
        divergence.push(Divergence::SingularJump { location });
    }
    let ratio = (lhs.is_finite() && rhs.rhs.is_finite() && rhs.rhs > 0.0).then(|| lhs / rhs.rhs);
    let verdict = if !divergence.is_empty() {
        Verdict::Divergent
    } else if lhs.is_finite() && lhs <= rhs.rhs * (1.0 + case.tol) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerificationReport {
        seed: case.seed,
        lhs,
        rhs: rhs.rhs,
        rhs_origin: rhs.rhs_origin,
        rhs_kint: rhs.rhs_kint,
        ratio,
        components: rhs.components,
        verdict,
        divergence,
    })
}

/// Seed of case `index` in a suite seeded with `seed`.
pub fn case_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64)
}

fn random_atom(rng: &mut ChaCha8Rng, radius: f64) -> RieszAtom {
    let rho = radius * rng.gen::<f64>().sqrt();
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let mass = sign * rng.gen_range(1..=3) as f64 * rng.gen_range(0.2..1.0);
    RieszAtom::new(Complex64::from_polar(rho, phi), mass).expect("finite non-zero mass")
}

/// Random model with 1–8 atoms in `D(0.9 R)` and a small harmonic part.
pub fn random_model(rng: &mut ChaCha8Rng, big_r: f64) -> DeltaSubharmonicModel {
    let n = rng.gen_range(1..=8);
    let atoms = (0..n).map(|_| random_atom(rng, 0.9 * big_r)).collect();
    let mut coefficients = vec![Complex64::new(rng.gen_range(-1.0..1.0), 0.0)];
    if rng.gen_bool(0.5) {
        coefficients.push(Complex64::from_polar(
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.0..std::f64::consts::TAU),
        ));
    }
    DeltaSubharmonicModel {
        atoms,
        harmonic: HarmonicPart { coefficients },
    }
    .reduced()
}

/// Random jump-free integrator on `[0, end]`: 1–4 linear pieces and, with
/// probability one half, a Cantor staircase.
pub fn random_integrator(rng: &mut ChaCha8Rng, end: f64) -> Integrator {
    let n = rng.gen_range(1..=4);
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.0..end)).collect();
    cuts.extend([0.0, end]);
    cuts.sort_by(f64::total_cmp);
    let pieces = cuts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Piece {
            from: w[0],
            to: w[1],
            slope: rng.gen_range(0.0..2.0),
        })
        .collect();
    let cantor = rng.gen_bool(0.5).then(|| {
        let a = rng.gen_range(0.0..0.5 * end);
        let b = rng.gen_range(a + 0.1 * end..=end);
        CantorPart {
            a,
            b,
            h: rng.gen_range(0.2..2.0),
            depth: GENERATOR_CANTOR_DEPTH,
        }
    });
    Integrator::new(end, pieces, cantor, vec![]).expect("generated integrator is valid")
}

/// Reproducible random case for `seed`.
pub fn random_case(seed: u64, tol: f64) -> VerificationCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let big_r = rng.gen_range(1.0..4.0);
    let r = big_r * rng.gen_range(0.3..0.8);
    let model = random_model(&mut rng, big_r);
    let window = jitter_window(&model, RadialWindow::new(r, big_r).expect("0 < r < R"));
    let integrator = random_integrator(&mut rng, window.inner());
    VerificationCase {
        model,
        integrator,
        window,
        seed,
        tol,
    }
}

/// Thread pool honouring `NEVKIT_THREADS` (unset or `0` means the default).
pub fn harness_pool() -> rayon::ThreadPool {
    let threads = std::env::var("NEVKIT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

/// Runs `cases` random cases; reports come back in case order.
pub fn run_suite(seed: u64, cases: usize, tol: f64) -> Vec<Result<VerificationReport>> {
    harness_pool().install(|| {
        (0..cases)
            .into_par_iter()
            .map(|i| theorem1_verify(&random_case(case_seed(seed, i), tol)))
            .collect()
    })
}

/// Writes `case_id,seed,lhs,rhs,ratio,verdict,...` rows and a closing
/// `# passed/total` line.
pub fn write_reports<W: Write>(reports: &[VerificationReport], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "case_id,seed,lhs,rhs,ratio,verdict,rhs_origin,rhs_kint,c_plus_outer,n_minus,n_minus_origin,\
         total_variation,stab_diameter,dini,kint_lhs,kint_rhs"
    )?;
    for (i, r) in reports.iter().enumerate() {
        let c = &r.components;
        let ratio = r.ratio.map_or_else(|| "n/a".to_string(), |v| v.to_string());
        writeln!(
            out,
            "{i},{},{},{},{ratio},{},{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.lhs,
            r.rhs,
            r.verdict,
            r.rhs_origin,
            r.rhs_kint,
            c.c_plus_outer,
            c.n_minus,
            c.n_minus_origin,
            c.total_variation,
            c.stab_diameter,
            c.dini,
            c.kint_lhs,
            c.kint_rhs
        )?;
    }
    let passed = reports.iter().filter(|r| r.verdict == Verdict::Pass).count();
    writeln!(out, "# {passed}/{} passed", reports.len())
}

/// One row of the divergence family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub epsilon: f64,
    pub lhs: f64,
    pub dini: f64,
}

/// Default `ε` values `10⁻¹, …, 10⁻⁶`.
pub fn default_epsilons() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(-k)).collect()
}

fn counterexample_model() -> DeltaSubharmonicModel {
    from_rational(&[], &[(Complex64::new(1.0, 0.0), 1)], Complex64::new(5.0, 0.0)).expect("valid model")
}

/// `m_ε` on `[0, 2]`: unit rise, linear on `[1 - ε, 1 + ε]`; `ε = 0` gives
/// the unit jump at `1`.
pub fn smoothed_jump(epsilon: f64) -> Result<Integrator> {
    if epsilon == 0.0 {
        return Integrator::new(2.0, vec![], None, vec![crate::integrators::Jump { x: 1.0, h: 1.0 }]);
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidIntegrator(format!("epsilon {epsilon} outside (0, 1]")));
    }
    Integrator::new(
        2.0,
        vec![Piece {
            from: 1.0 - epsilon,
            to: 1.0 + epsilon,
            slope: 0.5 / epsilon,
        }],
        None,
        vec![],
    )
}

/// `∫_0^2 M_U^+ dm_ε` and the Dini integral of `m_ε` (with `R = 4`) for
/// `U = ln(5/|z - 1|)`; `ε = 0` is the jump limit.
pub fn counterexample_scan(epsilons: &[f64], tol: f64) -> Result<Vec<CounterexampleRow>> {
    let model = counterexample_model();
    let f = CircleMaxPlus::new(&model);
    epsilons
        .iter()
        .map(|&epsilon| {
            let m = smoothed_jump(epsilon)?;
            let lhs = stieltjes_integral(&f, &m, tol)?.value;
            Ok(CounterexampleRow {
                epsilon,
                lhs,
                dini: dini_integral(&m, 4.0, tol),
            })
        })
        .collect()
}

/// Least-squares slope of `lhs` against `ln(1/ε)` over the finite rows.
pub fn log_slope(rows: &[CounterexampleRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.epsilon > 0.0 && r.lhs.is_finite())
        .map(|r| ((1.0 / r.epsilon).ln(), r.lhs))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Outcome of the classical-shape check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalShape {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `T(kr, f) - T(r, f) + m(r, f)`.
    pub characteristic: f64,
    /// `∫_0^r ln(4kr/t) dω(t)` for `m(t) = t/r`.
    pub kint_lhs: f64,
}

/// `(1/r)∫_0^r ln⁺M(t, f) dt` against the bound with `R = k r`.
pub fn classical_shape_check(f: &Rational, r: f64, k: f64, tol: f64) -> Result<ClassicalShape> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::InvalidRadius(r));
    }
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::InvalidWindow {
            inner: r,
            outer: k * r,
        });
    }
    let big_r = k * r;
    let model = f.log_modulus();
    let m = Integrator::linear(r, 1.0 / r)?;
    let lhs = stieltjes_integral(&CircleMaxPlus::new(&model), &m, 0.1 * tol)?.value;
    let outer = classical_characteristic(f, big_r, 0.1 * tol)?;
    let inner = classical_characteristic(f, r, 0.1 * tol)?;
    let characteristic = outer.t_val - inner.t_val + inner.m_val;
    let (kint_lhs, _) = kint_pair(&m, big_r, tol)?;
    let rhs = 6.0 * k / (k - 1.0) * characteristic * kint_lhs.max(1.0);
    Ok(ClassicalShape {
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { f64::NAN },
        characteristic,
        kint_lhs,
    })
}

/// `**T**_{ln|f|}(r, R)` computed from the potential, for cross-checking the
/// classical route.
pub fn bold_characteristic_of(f: &Rational, window: RadialWindow, tol: f64) -> Result<f64> {
    bold_nevanlinna(&f.log_modulus(), window, tol)
}
