//! Finite-atom δ-subharmonic models
//!
//! A model is `U(z) = Re(Σ c_k z^k) + Σ_j m_j ln|z - a_j|`: a harmonic
//! polynomial plus a finite signed Riesz charge. Positive masses are the
//! subharmonic (zero-like) part, negative masses the superharmonic
//! (pole-like) part. For `ln|f|` of a rational `f` the masses are the
//! multiplicities of zeros and, negated, of poles.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};

/// Default relative radius tolerance deciding that an atom sits on a circle.
pub const RADIUS_TOL: f64 = 1e-12;

/// Point charge of a Riesz measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "AtomRecord", try_from = "AtomRecord")]
pub struct RieszAtom {
    pub location: Complex64,
    pub mass: f64,
}

#[derive(Serialize, Deserialize)]
struct AtomRecord {
    re: f64,
    im: f64,
    mass: f64,
}

impl From<RieszAtom> for AtomRecord {
    fn from(a: RieszAtom) -> Self {
        AtomRecord {
            re: a.location.re,
            im: a.location.im,
            mass: a.mass,
        }
    }
}

impl TryFrom<AtomRecord> for RieszAtom {
    type Error = Error;
    fn try_from(r: AtomRecord) -> Result<Self> {
        RieszAtom::new(Complex64::new(r.re, r.im), r.mass)
    }
}

impl RieszAtom {
    pub fn new(location: Complex64, mass: f64) -> Result<Self> {
        if !(location.re.is_finite() && location.im.is_finite()) {
            return Err(Error::InvalidAtom(format!("non-finite location {location}")));
        }
        if !mass.is_finite() || mass == 0.0 {
            return Err(Error::InvalidAtom(format!("mass must be finite and non-zero, got {mass}")));
        }
        Ok(RieszAtom { location, mass })
    }

    pub fn radius(&self) -> f64 {
        self.location.norm()
    }
}

/// Harmonic polynomial `z ↦ Re(Σ c_k z^k)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct HarmonicPart {
    pub coefficients: Vec<Complex64>,
}

impl From<Vec<[f64; 2]>> for HarmonicPart {
    fn from(v: Vec<[f64; 2]>) -> Self {
        HarmonicPart {
            coefficients: v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        }
    }
}

impl From<HarmonicPart> for Vec<[f64; 2]> {
    fn from(h: HarmonicPart) -> Self {
        h.coefficients.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl HarmonicPart {
    pub fn constant(c: f64) -> Self {
        HarmonicPart {
            coefficients: vec![Complex64::new(c, 0.0)],
        }
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
            .re
    }

    /// Value at the origin, which is also the mean over every centred circle.
    pub fn at_origin(&self) -> f64 {
        self.coefficients.first().map_or(0.0, |c| c.re)
    }

    fn negated(&self) -> Self {
        HarmonicPart {
            coefficients: self.coefficients.iter().map(|c| -c).collect(),
        }
    }
}

/// Pair of radii `0 ≤ inner < outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct RadialWindow {
    inner: f64,
    outer: f64,
}

impl RadialWindow {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if inner.is_finite() && outer.is_finite() && inner >= 0.0 && inner < outer {
            Ok(RadialWindow { inner, outer })
        } else {
            Err(Error::InvalidWindow { inner, outer })
        }
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }
}

impl TryFrom<[f64; 2]> for RadialWindow {
    type Error = Error;
    fn try_from([inner, outer]: [f64; 2]) -> Result<Self> {
        RadialWindow::new(inner, outer)
    }
}

impl From<RadialWindow> for [f64; 2] {
    fn from(w: RadialWindow) -> Self {
        [w.inner, w.outer]
    }
}

/// δ-subharmonic function with finite atomic Riesz charge.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeltaSubharmonicModel {
    #[serde(default)]
    pub atoms: Vec<RieszAtom>,
    #[serde(default)]
    pub harmonic: HarmonicPart,
}

/// Sampling controls for [`DeltaSubharmonicModel::circle_max_with`].
#[derive(Debug, Clone, Copy)]
pub struct MaxOptions {
    /// Uniform angular samples before refinement.
    pub samples: usize,
    /// Number of best local maxima refined by golden-section search.
    pub refine: usize,
}

impl Default for MaxOptions {
    fn default() -> Self {
        MaxOptions {
            samples: 2048,
            refine: 16,
        }
    }
}

/// Sign-change scan resolution for circle quadratures.
const MEAN_SAMPLES: usize = 512;

impl DeltaSubharmonicModel {
    pub fn new(atoms: Vec<RieszAtom>, harmonic: HarmonicPart) -> Result<Self> {
        let model = DeltaSubharmonicModel { atoms, harmonic };
        model.validate()?;
        Ok(model)
    }

    /// Checks atom invariants and that no two atoms of opposite sign coincide.
    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            RieszAtom::new(a.location, a.mass)?;
        }
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                if a.location == b.location && (a.mass > 0.0) != (b.mass > 0.0) {
                    return Err(Error::CoincidentOppositeAtoms {
                        location: a.location,
                    });
                }
            }
        }
        if self.harmonic.coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidAtom("non-finite harmonic coefficient".into()));
        }
        Ok(())
    }

    /// Merges atoms sharing a location and drops cancelled charges.
    pub fn reduced(&self) -> Self {
        let mut merged: Vec<RieszAtom> = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            match merged.iter_mut().find(|m| m.location == a.location) {
                Some(m) => m.mass += a.mass,
                None => merged.push(*a),
            }
        }
        merged.retain(|a| a.mass != 0.0);
        DeltaSubharmonicModel {
            atoms: merged,
            harmonic: self.harmonic.clone(),
        }
    }

    pub fn negated(&self) -> Self {
        DeltaSubharmonicModel {
            atoms: self
                .atoms
                .iter()
                .map(|a| RieszAtom {
                    location: a.location,
                    mass: -a.mass,
                })
                .collect(),
            harmonic: self.harmonic.negated(),
        }
    }

    pub fn is_subharmonic(&self) -> bool {
        self.atoms.iter().all(|a| a.mass > 0.0)
    }

    pub fn positive_atoms(&self) -> impl Iterator<Item = &RieszAtom> {
        self.atoms.iter().filter(|a| a.mass > 0.0)
    }

    pub fn negative_atoms(&self) -> impl Iterator<Item = &RieszAtom> {
        self.atoms.iter().filter(|a| a.mass < 0.0)
    }

    /// Raw value without the coincidence check; NaN if opposite infinities meet.
    #[inline]
    pub(crate) fn value_at(&self, z: Complex64) -> f64 {
        let mut v = self.harmonic.eval(z);
        for a in &self.atoms {
            v += 0.5 * a.mass * (z - a.location).norm_sqr().ln();
        }
        v
    }

    /// `U(z)`, with `-∞` at positive atoms and `+∞` at negative atoms.
    pub fn evaluate(&self, z: Complex64) -> Result<f64> {
        let (mut pos, mut neg) = (false, false);
        for a in &self.atoms {
            if a.location == z {
                if a.mass > 0.0 {
                    pos = true;
                } else {
                    neg = true;
                }
            }
        }
        match (pos, neg) {
            (true, true) => Err(Error::CoincidentOppositeAtoms { location: z }),
            (true, false) => Ok(f64::NEG_INFINITY),
            (false, true) => Ok(f64::INFINITY),
            (false, false) => Ok(self.value_at(z)),
        }
    }

    fn on_circle(&self, atom: &RieszAtom, t: f64) -> bool {
        (atom.radius() - t).abs() <= RADIUS_TOL * t.max(1.0)
    }

    /// First atom lying on the circle `|z| = t`, if any.
    pub fn atom_on_circle(&self, t: f64) -> Option<&RieszAtom> {
        self.atoms.iter().find(|a| self.on_circle(a, t))
    }

    fn check_radius(t: f64) -> Result<()> {
        if t.is_finite() && t >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidRadius(t))
        }
    }

    /// `M_U(t) = sup_θ U(t e^{iθ})` with default sampling.
    pub fn circle_max(&self, t: f64) -> Result<f64> {
        self.circle_max_with(t, &MaxOptions::default())
    }

    pub fn circle_max_with(&self, t: f64, opts: &MaxOptions) -> Result<f64> {
        Self::check_radius(t)?;
        if t == 0.0 {
            return self.evaluate(Complex64::new(0.0, 0.0));
        }
        if self.negative_atoms().any(|a| self.on_circle(a, t)) {
            return Ok(f64::INFINITY);
        }
        let f = |theta: f64| self.value_at(Complex64::from_polar(t, theta));

        let mut angles = uniform_angles(opts.samples.max(8));
        let seeds: Vec<f64> = self
            .atoms
            .iter()
            .filter(|a| a.location.norm() > 0.0)
            .map(|a| a.location.arg().rem_euclid(TAU))
            .collect();
        angles.extend_from_slice(&seeds);
        angles.sort_by(f64::total_cmp);
        angles.dedup();

        let n = angles.len();
        let values: Vec<f64> = angles.iter().map(|&th| f(th)).collect();
        let mut best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let mut peaks: Vec<usize> = (0..n)
            .filter(|&i| {
                let prev = values[(i + n - 1) % n];
                let next = values[(i + 1) % n];
                values[i] >= prev && values[i] >= next && values[i] > f64::NEG_INFINITY
            })
            .collect();
        peaks.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        peaks.truncate(opts.refine.max(1));

        for i in peaks {
            let lo = angles[(i + n - 1) % n];
            let hi = angles[(i + 1) % n];
            let lo = if lo > angles[i] { lo - TAU } else { lo };
            let hi = if hi < angles[i] { hi + TAU } else { hi };
            let (_, v) = quadrature::golden_max(&f, lo, hi, 1e-13 * (hi - lo).max(1e-3));
            best = best.max(v);
        }
        Ok(best)
    }

    /// `M_U^+(t) = max(M_U(t), 0)`.
    pub fn circle_max_plus(&self, t: f64) -> Result<f64> {
        Ok(self.circle_max(t)?.max(0.0))
    }

    /// Exact circle mean `Re c_0 + Σ m_j ln max(t, |a_j|)`.
    pub fn circle_mean(&self, t: f64) -> Result<f64> {
        Self::check_radius(t)?;
        if t == 0.0 {
            return Err(Error::InvalidRadius(t));
        }
        if let Some(a) = self.atom_on_circle(t) {
            return Err(Error::AtomOnCircle { radius: a.radius() });
        }
        Ok(self.harmonic.at_origin()
            + self
                .atoms
                .iter()
                .map(|a| a.mass * t.max(a.radius()).ln())
                .sum::<f64>())
    }

    /// Circle mean of `U^+` by piecewise adaptive quadrature, absolute error ≤ `tol`.
    pub fn circle_mean_plus(&self, t: f64, tol: f64) -> Result<f64> {
        self.circle_quadrature(t, tol, |z| self.value_at(z).max(0.0), |z| self.value_at(z))
    }

    /// Circle mean of `U^- = (-U)^+`.
    pub fn circle_mean_minus(&self, t: f64, tol: f64) -> Result<f64> {
        self.circle_quadrature(t, tol, |z| (-self.value_at(z)).max(0.0), |z| self.value_at(z))
    }

    /// Circle mean of `sup{u_U, v_U}` for the canonical split, integrated
    /// directly from the two subharmonic parts.
    pub fn circle_mean_sup_split(&self, t: f64, tol: f64) -> Result<f64> {
        let (u, v) = self.canonical_split();
        self.circle_quadrature(t, tol, |z| u.value_at(z).max(v.value_at(z)), |z| self.value_at(z))
    }

    /// Mean over `|z| = t` of `integrand`, whose only kinks are sign changes
    /// of `kink`. Break points go at every located sign change and at the
    /// arguments of the atoms, where steep peaks live.
    fn circle_quadrature<F, G>(&self, t: f64, tol: f64, integrand: F, kink: G) -> Result<f64>
    where
        F: Fn(Complex64) -> f64,
        G: Fn(Complex64) -> f64,
    {
        Self::check_radius(t)?;
        if t == 0.0 || !(tol > 0.0) {
            return Err(Error::InvalidRadius(t));
        }
        if let Some(a) = self.atom_on_circle(t) {
            return Err(Error::AtomOnCircle { radius: a.radius() });
        }
        let g = |theta: f64| kink(Complex64::from_polar(t, theta));

        let mut angles = uniform_angles(MEAN_SAMPLES);
        let seeds: Vec<f64> = self
            .atoms
            .iter()
            .filter(|a| a.location.norm() > 0.0)
            .map(|a| a.location.arg().rem_euclid(TAU))
            .collect();
        angles.extend_from_slice(&seeds);
        angles.push(TAU);
        angles.sort_by(f64::total_cmp);
        angles.dedup();

        let signs: Vec<f64> = angles.iter().map(|&th| g(th)).collect();
        let mut breaks = angles.clone();
        for k in 0..angles.len() - 1 {
            let (sa, sb) = (signs[k], signs[k + 1]);
            if (sa > 0.0) != (sb > 0.0) && sa.is_finite() && sb.is_finite() {
                breaks.push(quadrature::bisect_root(&g, angles[k], angles[k + 1], sa));
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let h = |theta: f64| integrand(Complex64::from_polar(t, theta));
        let opts = QuadOptions {
            abs_tol: 0.5 * tol * TAU,
            rel_tol: 0.0,
            max_panels: 40_000,
        };
        match quadrature::integrate(&h, &breaks, opts) {
            Ok(est) => Ok(est.value / TAU),
            Err(e) => Err(Error::ToleranceNotReached {
                estimate: e.estimate.value / TAU,
                error: e.estimate.error / TAU,
                tolerance: tol,
            }),
        }
    }

    /// Canonical representation `U = u_U - v_U` with both parts subharmonic;
    /// the harmonic part stays with `u_U`.
    pub fn canonical_split(&self) -> (DeltaSubharmonicModel, DeltaSubharmonicModel) {
        let u = DeltaSubharmonicModel {
            atoms: self.positive_atoms().copied().collect(),
            harmonic: self.harmonic.clone(),
        };
        let v = DeltaSubharmonicModel {
            atoms: self
                .negative_atoms()
                .map(|a| RieszAtom {
                    location: a.location,
                    mass: -a.mass,
                })
                .collect(),
            harmonic: HarmonicPart::default(),
        };
        (u, v)
    }
}

fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Zero or pole of a rational function with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "FactorRecord", from = "FactorRecord")]
pub struct Factor {
    pub location: Complex64,
    pub multiplicity: u32,
}

#[derive(Serialize, Deserialize)]
struct FactorRecord {
    re: f64,
    im: f64,
    #[serde(default = "one")]
    mult: u32,
}

fn one() -> u32 {
    1
}

impl From<Factor> for FactorRecord {
    fn from(f: Factor) -> Self {
        FactorRecord {
            re: f.location.re,
            im: f.location.im,
            mult: f.multiplicity,
        }
    }
}

impl From<FactorRecord> for Factor {
    fn from(r: FactorRecord) -> Self {
        Factor {
            location: Complex64::new(r.re, r.im),
            multiplicity: r.mult,
        }
    }
}

impl Factor {
    pub fn new(location: Complex64, multiplicity: u32) -> Self {
        Factor {
            location,
            multiplicity,
        }
    }
}

/// `f(z) = scale · Π (z - zero)^mult / Π (z - pole)^mult`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rational {
    #[serde(default)]
    pub zeros: Vec<Factor>,
    #[serde(default)]
    pub poles: Vec<Factor>,
    #[serde(with = "complex_pair")]
    pub scale: Complex64,
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

impl Rational {
    pub fn new(zeros: Vec<Factor>, poles: Vec<Factor>, scale: Complex64) -> Result<Self> {
        let r = Rational {
            zeros,
            poles,
            scale,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale.norm() == 0.0 || !self.scale.norm().is_finite() {
            return Err(Error::InvalidRational("scale must be finite and non-zero".into()));
        }
        for f in self.zeros.iter().chain(&self.poles) {
            if f.multiplicity == 0 {
                return Err(Error::InvalidRational(format!(
                    "zero multiplicity at {}",
                    f.location
                )));
            }
            if !(f.location.re.is_finite() && f.location.im.is_finite()) {
                return Err(Error::InvalidRational("non-finite location".into()));
            }
        }
        for z in &self.zeros {
            if self.poles.iter().any(|p| p.location == z.location) {
                return Err(Error::SharedZeroPole {
                    location: z.location,
                });
            }
        }
        Ok(())
    }

    /// Direct complex evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let num = self
            .zeros
            .iter()
            .fold(self.scale, |acc, f| acc * (z - f.location).powu(f.multiplicity));
        let den = self
            .poles
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, f| acc * (z - f.location).powu(f.multiplicity));
        num / den
    }

    /// The model of `ln|f|`.
    pub fn log_modulus(&self) -> DeltaSubharmonicModel {
        let atoms = self
            .zeros
            .iter()
            .map(|f| RieszAtom {
                location: f.location,
                mass: f.multiplicity as f64,
            })
            .chain(self.poles.iter().map(|f| RieszAtom {
                location: f.location,
                mass: -(f.multiplicity as f64),
            }))
            .collect();
        DeltaSubharmonicModel {
            atoms,
            harmonic: HarmonicPart::constant(self.scale.norm().ln()),
        }
    }

    /// Pole count `n(t, f)` in the closed disk of radius `t`.
    pub fn pole_count(&self, t: f64) -> u32 {
        self.poles
            .iter()
            .filter(|p| p.location.norm() <= t)
            .map(|p| p.multiplicity)
            .sum()
    }

    /// Proximity `m(t, f)`: the circle mean of `ln⁺|f|`, with `f` evaluated as
    /// a complex product rather than through its potential.
    pub fn proximity(&self, t: f64, tol: f64) -> Result<f64> {
        let log_abs = |z: Complex64| self.eval(z).norm().ln();
        self.log_modulus()
            .circle_quadrature(t, tol, |z| log_abs(z).max(0.0), log_abs)
    }
}

/// Model of `ln|f|` for `f = scale · Π(z - zero)^mult / Π(z - pole)^mult`.
pub fn from_rational(
    zeros: &[(Complex64, u32)],
    poles: &[(Complex64, u32)],
    scale: Complex64,
) -> Result<DeltaSubharmonicModel> {
    let to_factors = |v: &[(Complex64, u32)]| v.iter().map(|&(z, m)| Factor::new(z, m)).collect();
    Ok(Rational::new(to_factors(zeros), to_factors(poles), scale)?.log_modulus())
}
