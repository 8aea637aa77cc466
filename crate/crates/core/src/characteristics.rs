//! Counting functions and Nevanlinna-type characteristics.
//!
//! Everything that has a closed form for atomic charges is computed in
//! closed form; only circle means of positive parts go through quadrature.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{DeltaSubharmonicModel, RadialWindow, Rational, RADIUS_TOL};

/// Radial projection of a charge: `(|a_j|, mass_j)` sorted by radius.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChargeView {
    atoms: Vec<(f64, f64)>,
}

impl ChargeView {
    pub fn from_pairs(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        ChargeView { atoms }
    }

    /// The full signed charge `Δ_U`.
    pub fn signed(model: &DeltaSubharmonicModel) -> Self {
        Self::from_pairs(model.atoms.iter().map(|a| (a.radius(), a.mass)).collect())
    }

    /// Upper variation `Δ_U^+`.
    pub fn positive(model: &DeltaSubharmonicModel) -> Self {
        Self::from_pairs(model.positive_atoms().map(|a| (a.radius(), a.mass)).collect())
    }

    /// Lower variation `Δ_U^-`, stored with positive masses.
    pub fn negative(model: &DeltaSubharmonicModel) -> Self {
        Self::from_pairs(model.negative_atoms().map(|a| (a.radius(), -a.mass)).collect())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `μ^rd(t)`: mass of the closed disk of radius `t`.
    pub fn radial_counting(&self, t: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.0 <= t).fold(0.0, |acc, a| acc + a.1)
    }

    /// `N_μ(r, R) = ∫_r^R μ^rd(t)/t dt` for a positive view.
    pub fn integrated_counting(&self, window: RadialWindow) -> Result<f64> {
        if let Some(&(radius, mass)) = self.atoms.iter().find(|a| a.1 < 0.0) {
            return Err(Error::NegativeMassInView { radius, mass });
        }
        let (r, big_r) = (window.inner(), window.outer());
        let mut total = 0.0;
        for &(rho, mass) in self.atoms.iter().take_while(|a| a.0 <= big_r) {
            if r == 0.0 && rho == 0.0 {
                return Ok(f64::INFINITY);
            }
            total += mass * (big_r / rho.max(r)).ln();
        }
        Ok(total)
    }
}

pub fn radial_counting(view: &ChargeView, t: f64) -> f64 {
    view.radial_counting(t)
}

pub fn integrated_counting(view: &ChargeView, window: RadialWindow) -> Result<f64> {
    view.integrated_counting(window)
}

fn require_positive_inner(window: RadialWindow) -> Result<()> {
    if window.inner() > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRadius(window.inner()))
    }
}

/// `C_v(R) - C_v(r) - N_{Δv}(r, R)` for subharmonic `v`; zero up to rounding.
pub fn jensen_residual(model: &DeltaSubharmonicModel, window: RadialWindow) -> Result<f64> {
    if let Some(a) = model.negative_atoms().next() {
        return Err(Error::NotSubharmonic {
            location: a.location,
            mass: a.mass,
        });
    }
    require_positive_inner(window)?;
    let outer = model.circle_mean(window.outer())?;
    let inner = model.circle_mean(window.inner())?;
    let counting = ChargeView::positive(model).integrated_counting(window)?;
    Ok(outer - inner - counting)
}

/// `T_U(r, R) = C_{U+}(R) - C_{U+}(r) + N_{Δ_U^-}(r, R)`.
pub fn diff_nevanlinna(model: &DeltaSubharmonicModel, window: RadialWindow, tol: f64) -> Result<f64> {
    require_positive_inner(window)?;
    let outer = model.circle_mean_plus(window.outer(), tol)?;
    let inner = model.circle_mean_plus(window.inner(), tol)?;
    let counting = ChargeView::negative(model).integrated_counting(window)?;
    Ok(outer - inner + counting)
}

/// `T_U(r, R)` through the circle means of the subharmonic function
/// `sup{u_U, v_U}`; no counting function is involved.
pub fn diff_nevanlinna_sup_route(model: &DeltaSubharmonicModel, window: RadialWindow, tol: f64) -> Result<f64> {
    require_positive_inner(window)?;
    Ok(model.circle_mean_sup_split(window.outer(), tol)? - model.circle_mean_sup_split(window.inner(), tol)?)
}

/// `**T**_U(r, R) = C_{U+}(R) + N_{Δ_U^-}(r, R)`; `r = 0` is allowed and gives
/// `+∞` exactly when a negative atom sits at the origin.
pub fn bold_nevanlinna(model: &DeltaSubharmonicModel, window: RadialWindow, tol: f64) -> Result<f64> {
    let outer = model.circle_mean_plus(window.outer(), tol)?;
    let counting = ChargeView::negative(model).integrated_counting(window)?;
    Ok(outer + counting)
}

/// Classical characteristic `T(r, f) = m(r, f) + N(r, f)` of a rational function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalCharacteristic {
    pub r: f64,
    pub m_val: f64,
    pub n_val: f64,
    pub t_val: f64,
}

/// `N(r, f) = ∫_0^r (n(t) - n(0))/t dt + n(0) ln r`, in closed form.
pub fn integrated_pole_count(f: &Rational, r: f64) -> f64 {
    let at_origin = f.pole_count(0.0) as f64;
    let rest: f64 = f
        .poles
        .iter()
        .filter(|p| {
            let rho = p.location.norm();
            rho > 0.0 && rho <= r
        })
        .map(|p| p.multiplicity as f64 * (r / p.location.norm()).ln())
        .sum();
    rest + at_origin * r.ln()
}

pub fn classical_characteristic(f: &Rational, r: f64, tol: f64) -> Result<ClassicalCharacteristic> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidRadius(r));
    }
    if let Some(p) = f
        .poles
        .iter()
        .find(|p| (p.location.norm() - r).abs() <= RADIUS_TOL * r.max(1.0))
    {
        return Err(Error::PoleOnCircle {
            radius: p.location.norm(),
        });
    }
    let m_val = f.proximity(r, tol)?;
    let n_val = integrated_pole_count(f, r);
    Ok(ClassicalCharacteristic {
        r,
        m_val,
        n_val,
        t_val: m_val + n_val,
    })
}

/// Enlarges both radii by a relative `1e-6` step until no atom lies on
/// either circle.
pub fn jitter_window(model: &DeltaSubharmonicModel, window: RadialWindow) -> RadialWindow {
    let collides = |t: f64| t > 0.0 && model.atoms.iter().any(|a| (a.radius() - t).abs() <= 1e-9 * t.max(1.0));
    let (mut r, mut big_r) = (window.inner(), window.outer());
    while collides(r) {
        r *= 1.0 + 1e-6;
    }
    while collides(big_r) || big_r <= r {
        big_r *= 1.0 + 1e-6;
    }
    RadialWindow::new(r, big_r).expect("jitter keeps the window ordered")
}

/// One line of a characteristics report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub quantity: String,
    pub r: f64,
    #[serde(rename = "R")]
    pub outer: Option<f64>,
    pub value: f64,
    pub route: String,
    /// Target absolute error; empty for closed forms and sampled maxima.
    pub tolerance: Option<f64>,
}

impl ReportRow {
    pub fn new(quantity: &str, r: f64, outer: Option<f64>, value: f64, route: &str, tolerance: Option<f64>) -> Self {
        ReportRow {
            quantity: quantity.to_string(),
            r,
            outer,
            value,
            route: route.to_string(),
            tolerance,
        }
    }
}

/// Writes rows as CSV with header `quantity,r,R,value,route,tolerance`.
pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{from_rational, Factor, HarmonicPart, RieszAtom};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn w(r: f64, big_r: f64) -> RadialWindow {
        RadialWindow::new(r, big_r).unwrap()
    }

    fn u5() -> DeltaSubharmonicModel {
        from_rational(&[], &[(c(1.0, 0.0), 1)], c(5.0, 0.0)).unwrap()
    }

    fn ln_abs_z() -> DeltaSubharmonicModel {
        from_rational(&[(c(0.0, 0.0), 1)], &[], c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn radial_counting_examples() {
        let v = ChargeView::from_pairs(vec![(1.5, 1.0), (0.5, 1.0)]);
        assert_eq!(radial_counting(&v, 1.0), 1.0);
        let delta = ChargeView::from_pairs(vec![(1.0, 1.0)]);
        assert_eq!(delta.radial_counting(0.999), 0.0);
        assert_eq!(delta.radial_counting(1.0), 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs: Vec<(f64, f64)> = (0..20).map(|_| (rng.gen_range(0.0..4.0), rng.gen_range(0.1..3.0))).collect();
        let direct: f64 = pairs.iter().filter(|p| p.0 <= 2.0).map(|p| p.1).sum();
        assert_abs_diff_eq!(ChargeView::from_pairs(pairs).radial_counting(2.0), direct, epsilon = 1e-12);
    }

    #[test]
    fn integrated_counting_examples() {
        let delta = ChargeView::from_pairs(vec![(1.0, 1.0)]);
        assert_abs_diff_eq!(delta.integrated_counting(w(0.5, 2.0)).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(delta.integrated_counting(w(0.0, 4.0)).unwrap(), 4f64.ln(), epsilon = 1e-15);
        let at_origin = ChargeView::from_pairs(vec![(0.0, 1.0)]);
        assert_eq!(at_origin.integrated_counting(w(0.0, 4.0)).unwrap(), f64::INFINITY);
        assert!(matches!(
            ChargeView::from_pairs(vec![(1.0, -1.0)]).integrated_counting(w(0.5, 2.0)),
            Err(Error::NegativeMassInView { .. })
        ));
    }

    #[test]
    fn integrated_counting_matches_riemann_sum() {
        // μ = 2δ_{0.5} + δ_3 on [1, 2]
        let view = ChargeView::from_pairs(vec![(0.5, 2.0), (3.0, 1.0)]);
        let n = 200_000;
        let h = 1.0 / n as f64;
        let riemann: f64 = (0..n)
            .map(|k| {
                let t = 1.0 + (k as f64 + 0.5) * h;
                view.radial_counting(t) / t * h
            })
            .sum();
        assert_abs_diff_eq!(riemann, 2.0 * 2f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(view.integrated_counting(w(1.0, 2.0)).unwrap(), 2.0 * 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn jensen_examples() {
        let v = from_rational(&[(c(1.0, 0.0), 1)], &[], c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(jensen_residual(&v, w(0.5, 2.0)).unwrap(), 0.0, epsilon = 1e-15);
        let v = DeltaSubharmonicModel::new(
            vec![RieszAtom::new(c(0.0, 0.0), 1.0).unwrap()],
            HarmonicPart {
                coefficients: vec![c(0.0, 0.0), c(1.0, 0.0)],
            },
        )
        .unwrap();
        assert_abs_diff_eq!(jensen_residual(&v, w(1.0, std::f64::consts::E)).unwrap(), 0.0, epsilon = 1e-15);
        assert!(matches!(jensen_residual(&u5(), w(0.5, 2.0)), Err(Error::NotSubharmonic { .. })));
        assert!(matches!(jensen_residual(&v, w(0.0, 2.0)), Err(Error::InvalidRadius(_))));
    }

    #[test]
    fn diff_nevanlinna_examples() {
        let t = diff_nevanlinna(&ln_abs_z(), w(1.0, std::f64::consts::E), 1e-10).unwrap();
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-9);

        let cp2 = u5().circle_mean_plus(2.0, 1e-10).unwrap();
        let expected = (5f64.ln() - 4f64.ln()) - cp2 + 2f64.ln();
        let t = diff_nevanlinna(&u5(), w(2.0, 4.0), 1e-10).unwrap();
        assert_abs_diff_eq!(t, expected, epsilon = 4e-10);
        // U5 is positive on the closed disk of radius 4, so C_{U+} = C_U there.
        assert_abs_diff_eq!(t, 0.0, epsilon = 4e-10);

        let sup = diff_nevanlinna_sup_route(&u5(), w(2.0, 4.0), 1e-10).unwrap();
        assert_abs_diff_eq!(sup, t, epsilon = 4e-10);
    }

    #[test]
    fn bold_nevanlinna_examples() {
        for (r, big_r) in [(0.5, 2.0), (1.5, 3.0), (0.1, 0.9)] {
            let t = bold_nevanlinna(&ln_abs_z(), w(r, big_r), 1e-10).unwrap();
            assert_abs_diff_eq!(t, big_r.ln().max(0.0), epsilon = 1e-9);
        }
        let t = bold_nevanlinna(&u5(), w(2.0, 4.0), 1e-10).unwrap();
        assert_abs_diff_eq!(t, 0.916_290_731_874_155, epsilon = 1e-9);
        let t0 = bold_nevanlinna(&u5(), w(0.0, 4.0), 1e-10).unwrap();
        assert_abs_diff_eq!(t0, 5f64.ln(), epsilon = 1e-9);

        let pole_at_origin = from_rational(&[], &[(c(0.0, 0.0), 1)], c(1.0, 0.0)).unwrap();
        assert_eq!(bold_nevanlinna(&pole_at_origin, w(0.0, 2.0), 1e-8).unwrap(), f64::INFINITY);
    }

    #[test]
    fn classical_examples() {
        let z = Rational::new(vec![Factor::new(c(0.0, 0.0), 1)], vec![], c(1.0, 0.0)).unwrap();
        let ch = classical_characteristic(&z, 2.0, 1e-10).unwrap();
        assert_abs_diff_eq!(ch.m_val, 2f64.ln(), epsilon = 1e-9);
        assert_eq!(ch.n_val, 0.0);
        assert_eq!(ch.t_val, ch.m_val + ch.n_val);

        let f = Rational::new(vec![], vec![Factor::new(c(1.0, 0.0), 1)], c(5.0, 0.0)).unwrap();
        let ch = classical_characteristic(&f, 2.0, 1e-10).unwrap();
        assert_abs_diff_eq!(ch.n_val, 2f64.ln(), epsilon = 1e-15);
        // |5/(2e^{iθ}-1)| ≥ 5/3 > 1 on the whole circle.
        assert_abs_diff_eq!(ch.m_val, 5f64.ln() - 2f64.ln(), epsilon = 1e-9);
        assert!(matches!(
            classical_characteristic(&f, 1.0, 1e-8),
            Err(Error::PoleOnCircle { .. })
        ));
    }

    #[test]
    fn csv_report_header() {
        let rows = vec![
            ReportRow::new("T_U", 1.0, Some(2.0), 0.5, "quadrature", Some(1e-10)),
            ReportRow::new("C_U", 1.0, None, 0.25, "closed_form", None),
        ];
        let mut buf = Vec::new();
        write_report(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "quantity,r,R,value,route,tolerance\nT_U,1.0,2.0,0.5,quadrature,1e-10\nC_U,1.0,,0.25,closed_form,\n"
        );
    }

    #[test]
    fn jitter_moves_off_atoms() {
        let win = jitter_window(&u5(), w(1.0, 2.0));
        assert!(win.inner() > 1.0 && win.inner() < 1.0 + 1e-5);
        assert_eq!(win.outer(), 2.0);
    }
}
