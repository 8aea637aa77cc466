//! The four batch commands. Each returns the CSV body and whether every
//! check held.

use std::io::Write;

use nevkit::bounds::{
    classical_shape_check, counterexample_scan, default_epsilons, log_slope, run_suite, theorem1_verify,
    write_reports, VerificationCase, VerificationReport, Verdict,
};
use nevkit::characteristics::{
    bold_nevanlinna, diff_nevanlinna, diff_nevanlinna_sup_route, write_report, ReportRow,
};
use nevkit::io::{load_integrator, load_model, load_rational};
use nevkit::{ChargeView, RadialWindow};

use crate::config::{CommandKind, RunConfig};
use crate::error::CliError;

pub struct Output {
    pub body: Vec<u8>,
    pub passed: bool,
    /// One-line summary for standard error.
    pub summary: String,
}

pub fn run(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.command {
        CommandKind::Characteristics => run_characteristics(cfg),
        CommandKind::Verify => run_verify(cfg),
        CommandKind::Counterexample => run_counterexample(cfg),
        CommandKind::Classical => run_classical(cfg),
    }
}

fn load<T>(path: &std::path::Path, f: impl Fn(&std::path::Path) -> std::io::Result<nevkit::Result<T>>) -> Result<T, CliError> {
    Ok(f(path).map_err(|e| CliError::io(path, e))??)
}

fn windows_for(cfg: &RunConfig) -> Vec<[f64; 2]> {
    if !cfg.windows.is_empty() {
        return cfg.windows.clone();
    }
    let lo = cfg.radii.iter().copied().fold(f64::INFINITY, f64::min);
    let mut outer: Vec<f64> = cfg.radii.iter().copied().filter(|&t| t > lo).collect();
    outer.sort_by(f64::total_cmp);
    outer.dedup();
    outer.into_iter().map(|t| [lo, t]).collect()
}

pub fn run_characteristics(cfg: &RunConfig) -> Result<Output, CliError> {
    let path = cfg.model.as_deref().expect("validated");
    let model = load(path, load_model)?;
    let tol = cfg.tol;
    let signed = ChargeView::signed(&model);
    let mut rows = Vec::new();
    for &t in &cfg.radii {
        rows.push(ReportRow::new("M_U", t, None, model.circle_max(t)?, "scan", None));
        rows.push(ReportRow::new("C_U", t, None, model.circle_mean(t)?, "closed_form", None));
        rows.push(ReportRow::new("C_U+", t, None, model.circle_mean_plus(t, tol)?, "quadrature", Some(tol)));
        rows.push(ReportRow::new("mu_rd", t, None, signed.radial_counting(t), "closed_form", None));
    }
    for [r, big_r] in windows_for(cfg) {
        let w = RadialWindow::new(r, big_r)?;
        rows.push(ReportRow::new("T_U", r, Some(big_r), diff_nevanlinna(&model, w, tol)?, "positive_part", Some(tol)));
        rows.push(ReportRow::new(
            "T_U",
            r,
            Some(big_r),
            diff_nevanlinna_sup_route(&model, w, tol)?,
            "sup_split",
            Some(tol),
        ));
        rows.push(ReportRow::new("T_bold_U", r, Some(big_r), bold_nevanlinna(&model, w, tol)?, "positive_part", Some(tol)));
    }
    let mut body = Vec::new();
    write_report(&rows, &mut body).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Output {
        body,
        passed: true,
        summary: format!("characteristics: {} rows", rows.len()),
    })
}

fn single_case(cfg: &RunConfig) -> Result<Option<VerificationCase>, CliError> {
    if cfg.fixture {
        let mut case = VerificationCase::fixture();
        case.tol = cfg.tol;
        return Ok(Some(case));
    }
    let (Some(model), Some(integrator), Some([r, big_r])) = (&cfg.model, &cfg.integrator, cfg.window) else {
        return Ok(None);
    };
    let model = load(model, load_model)?;
    let integrator = load(integrator, load_integrator)?;
    let window = RadialWindow::new(r, big_r)?;
    Ok(Some(VerificationCase::new(model, integrator, window, cfg.seed, cfg.tol)?))
}

pub fn run_verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let reports: Vec<VerificationReport> = match single_case(cfg)? {
        Some(case) => vec![theorem1_verify(&case)?],
        None => run_suite(cfg.seed, cfg.cases, cfg.tol)
            .into_iter()
            .collect::<nevkit::Result<_>>()?,
    };
    let mut body = Vec::new();
    write_reports(&reports, &mut body).map_err(|e| CliError::Io(e.to_string()))?;
    let passed = reports.iter().filter(|r| r.verdict == Verdict::Pass).count();
    let worst = reports.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    Ok(Output {
        body,
        passed: passed == reports.len(),
        summary: format!("verify: {passed}/{} passed, worst ratio {worst:.6}", reports.len()),
    })
}

pub fn run_counterexample(cfg: &RunConfig) -> Result<Output, CliError> {
    let eps = if cfg.epsilons.is_empty() {
        default_epsilons()
    } else {
        cfg.epsilons.clone()
    };
    let rows = counterexample_scan(&eps, cfg.tol)?;
    let slope = log_slope(&rows);
    let mut body = Vec::new();
    writeln!(body, "epsilon,lhs,dini").expect("writing to memory");
    for r in &rows {
        writeln!(body, "{},{},{}", r.epsilon, r.lhs, r.dini).expect("writing to memory");
    }
    let slope_text = slope.map_or_else(|| "n/a".to_string(), |s| s.to_string());
    writeln!(body, "# log_slope={slope_text} jump_height=1").expect("writing to memory");
    Ok(Output {
        body,
        passed: true,
        summary: format!("counterexample: {} rows, log slope {slope_text}", rows.len()),
    })
}

pub fn run_classical(cfg: &RunConfig) -> Result<Output, CliError> {
    let path = cfg.rational.as_deref().expect("validated");
    let f = load(path, load_rational)?;
    let s = classical_shape_check(&f, cfg.r, cfg.k, cfg.tol)?;
    let passed = s.lhs <= s.rhs * (1.0 + cfg.tol);
    let mut body = Vec::new();
    writeln!(body, "r,R,lhs,rhs,ratio,characteristic,kint_lhs,verdict").expect("writing to memory");
    writeln!(
        body,
        "{},{},{},{},{},{},{},{}",
        cfg.r,
        cfg.k * cfg.r,
        s.lhs,
        s.rhs,
        s.ratio,
        s.characteristic,
        s.kint_lhs,
        if passed { "pass" } else { "fail" }
    )
    .expect("writing to memory");
    Ok(Output {
        body,
        passed,
        summary: format!("classical: ratio {:.6}", s.ratio),
    })
}
