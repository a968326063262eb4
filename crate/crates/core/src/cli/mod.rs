//! Job configuration, pipelines and reports behind the `drinfeld` binary.

mod config;
mod expr;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use config::{parse_config, Args, ConfigError, Grid, JobConfig, JobMode};
pub use expr::{parse_rational, ExprError, RationalFunction};

use crate::analytic::{
    reconstruct_period, verify_torsion_from_period, AnalyticConfig, ExpLogSeries, PeriodCandidate,
};
use crate::exec::Mode;
use crate::field_tower::{q_str, series_from_rational, FieldDescriptor, Puiseux};
use crate::newton_polygon::{polygon_of, root_valuations, PolygonJson};
use crate::roots::{all_roots, SolverConfig};
use crate::skew::{to_additive, DrinfeldModule};
use crate::torsion_tower::{
    build_basis_towers, classify_module, degree_bounds, field_surrogate, stabilization_check,
    theta_torsion_basis, torsion_counts, BoundCertificate, CaseClassification, FieldSurrogate,
    TowerReport,
};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleSummary {
    pub q: u64,
    pub rank: usize,
    pub coefficients: Vec<String>,
    /// v(a_i), "inf" for a_i = 0.
    pub valuations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub module: ModuleSummary,
    pub classification: Option<CaseClassification>,
    pub bounds: Option<BoundCertificate>,
    pub polygons: Vec<PolygonJson>,
    pub towers: Vec<TowerReport>,
    pub field: Option<FieldSurrogate>,
    pub periods: Vec<PeriodCandidate>,
    pub torsion_counts: Vec<u64>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: JobConfig,
    pub runs: Vec<RunReport>,
    pub passed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Wall-clock time per stage; kept out of the JSON report.
pub type Timings = Vec<(String, Duration)>;

pub struct Outcome {
    pub report: Report,
    pub timings: Timings,
    pub exit_code: i32,
}

fn grid_coefficient(v: i64) -> String {
    match v {
        0 => "1".to_string(),
        v if v < 0 => format!("theta^{}", -v),
        v => format!("1/theta^{v}"),
    }
}

/// Build the module; coefficients are expanded to `precision` terms.
pub fn build_module(
    p: u32,
    m: u32,
    coefficients: &[String],
    precision: u32,
) -> Result<DrinfeldModule, String> {
    let field = FieldDescriptor::canonical(p, m).map_err(|e| e.to_string())?;
    let a = coefficients
        .iter()
        .map(|s| {
            let r = parse_rational(s, &field).map_err(|e| e.to_string())?;
            series_from_rational(&r.num, &r.den, precision).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<Puiseux>, String>>()?;
    DrinfeldModule::new(&field, a).map_err(|e| e.to_string())
}

pub fn run(cfg: &JobConfig) -> Outcome {
    let mut timings = Vec::new();
    let jobs: Vec<Vec<String>> = match cfg.grid {
        Some(g) => g
            .pairs()
            .into_iter()
            .map(|(v1, v2)| vec![grid_coefficient(v1), grid_coefficient(v2)])
            .collect(),
        None => vec![cfg.coefficients.clone()],
    };
    let runs: Vec<RunReport> = jobs
        .iter()
        .map(|coeffs| run_one(cfg, coeffs, &mut timings))
        .collect();
    let passed = runs.iter().all(RunReport::passed);
    Outcome {
        report: Report {
            schema: SCHEMA,
            config: cfg.clone(),
            runs,
            passed,
        },
        timings,
        exit_code: if passed { 0 } else { 1 },
    }
}

fn check(checks: &mut Vec<Check>, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
    checks.push(Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    });
}

fn timed<T>(timings: &mut Timings, label: String, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    timings.push((label, t.elapsed()));
    out
}

fn run_one(cfg: &JobConfig, coeffs: &[String], timings: &mut Timings) -> RunReport {
    let q = (cfg.p as u64).pow(cfg.m);
    let mut report = RunReport {
        module: ModuleSummary {
            q,
            rank: coeffs.len(),
            coefficients: coeffs.to_vec(),
            valuations: Vec::new(),
        },
        classification: None,
        bounds: None,
        polygons: Vec::new(),
        towers: Vec::new(),
        field: None,
        periods: Vec::new(),
        torsion_counts: Vec::new(),
        checks: Vec::new(),
    };
    let checks = &mut report.checks;
    let tag = coeffs.join(", ");
    let d = match build_module(cfg.p, cfg.m, coeffs, cfg.precision) {
        Ok(d) => d,
        Err(e) => {
            check(checks, "module", false, e);
            return report;
        }
    };
    report.module.valuations = (1..=d.rank())
        .map(|i| d.valuation_of(i).finite().map_or("inf".to_string(), q_str))
        .collect();
    let solver = SolverConfig {
        caps: cfg.caps,
        terms: cfg.precision,
        mode: if cfg.sequential {
            Mode::Sequential
        } else {
            Mode::Parallel
        },
        ..SolverConfig::default()
    };
    let g = to_additive(&d.phi_theta(), &Puiseux::zero(d.base()));

    // classification and the polygon of phi_theta(X)/X
    report.classification = classify_module(&d);
    report.bounds = report.classification.as_ref().map(degree_bounds);
    let predicted = match polygon_of(&g, true).and_then(|p| Ok((root_valuations(&p)?, p))) {
        Ok((vals, poly)) => {
            report.polygons.push(poly.to_json());
            let total: u64 = vals.iter().map(|v| v.1).sum();
            let want = q.pow(d.rank() as u32) - 1;
            check(
                checks,
                "polygon.multiplicity",
                total == want,
                format!("{total} nonzero roots, q^r - 1 = {want}"),
            );
            vals
        }
        Err(e) => {
            check(checks, "polygon", false, e.to_string());
            return report;
        }
    };
    if cfg.mode == JobMode::Classify {
        return report;
    }

    if cfg.mode == JobMode::VerifyAll {
        let found = timed(timings, format!("[{tag}] roots"), || all_roots(&g, &solver));
        match found {
            Ok(batches) => {
                let mut got: Vec<_> = batches
                    .iter()
                    .filter_map(|b| {
                        b.segment
                            .as_ref()
                            .map(|s| (s.root_valuation(), b.roots.len() as u64))
                    })
                    .collect();
                let mut want = predicted.clone();
                got.sort();
                want.sort();
                check(
                    checks,
                    "roots.polygon",
                    got == want,
                    "root valuations against the polygon",
                );
                let ok = batches
                    .iter()
                    .flat_map(|b| &b.roots)
                    .all(|r| crate::roots::residual_ok(&g, r));
                check(
                    checks,
                    "roots.residual",
                    ok,
                    "phi_theta vanishes on every root to precision",
                );
            }
            Err(e) => check(checks, "roots", false, e.to_string()),
        }
        let r = d.rank() as u32;
        if q.pow(2 * r) <= 256 {
            let counts = timed(timings, format!("[{tag}] torsion counts"), || {
                torsion_counts(&d, 2, &solver)
            });
            match counts {
                Ok(c) => {
                    let want = vec![q.pow(r), q.pow(2 * r)];
                    check(
                        checks,
                        "torsion.count",
                        c == want,
                        format!("|phi[theta^k]| = {c:?}, expected {want:?}"),
                    );
                    report.torsion_counts = c;
                }
                Err(e) => check(checks, "torsion.count", false, e.to_string()),
            }
        }
    }

    let n = report.classification.as_ref().and_then(|c| c.n);
    let depth = cfg.depth.unwrap_or(match n {
        Some(n) => n + 4,
        None => 6,
    });
    let towers = match timed(timings, format!("[{tag}] towers"), || {
        build_basis_towers(&d, depth, &solver)
    }) {
        Ok(t) => t,
        Err(e) => {
            check(checks, "tower", false, e.to_string());
            return report;
        }
    };
    check(
        checks,
        "tower.predictions",
        true,
        "measured valuations equal the predicted ones at every level",
    );
    for (i, t) in towers.iter().enumerate() {
        let fibers = t.report.levels.iter().all(|l| l.fiber_matches_polygon);
        check(
            checks,
            format!("tower[{i}].fibers"),
            fibers,
            "fibers of phi_theta match the polygon",
        );
        match stabilization_check(&t.report) {
            Ok(l) => check(
                checks,
                format!("tower[{i}].stabilization"),
                true,
                format!("level {l}"),
            ),
            Err(e) => check(
                checks,
                format!("tower[{i}].stabilization"),
                false,
                e.to_string(),
            ),
        }
    }
    let surrogate = field_surrogate(&towers);
    if let Some(b) = &report.bounds {
        let deg = surrogate.degree;
        check(
            checks,
            "degree.upper",
            b.upper_divisor % deg == 0,
            format!("e*f = {deg} divides {}", b.upper_divisor),
        );
        if let Some(lower) = b.lower_divisor {
            check(
                checks,
                "degree.lower",
                deg.is_multiple_of(lower),
                format!("{lower} divides e*f = {deg}"),
            );
        }
    }
    report.field = Some(surrogate);
    report.towers = towers.iter().map(|t| t.report.clone()).collect();
    if cfg.mode == JobMode::Tower {
        return report;
    }

    let acfg = AnalyticConfig {
        rel: aconfig_rel(cfg.precision),
        ..AnalyticConfig::default()
    };
    let basis = theta_torsion_basis(&d, &solver).unwrap_or_default();
    let mut series = match ExpLogSeries::new(&d, acfg.count, acfg.rel) {
        Ok(s) => s,
        Err(e) => {
            check(checks, "period", false, e.to_string());
            return report;
        }
    };
    let started = Instant::now();
    for (i, t) in towers.iter().enumerate() {
        match reconstruct_period(&d, t, &mut series, &acfg) {
            Ok((cand, lambda)) => {
                check(
                    checks,
                    format!("period[{i}].certified"),
                    cand.certified,
                    format!(
                        "v(exp(lambda)) >= {} (bound {})",
                        cand.residual.map_or("inf".to_string(), q_str),
                        q_str(cand.bound)
                    ),
                );
                match verify_torsion_from_period(&d, &lambda, 1, &mut series, &acfg) {
                    Ok((ok, z)) => {
                        let hit =
                            z.is_nonzero() && basis_span_contains(&basis, &d, &z, solver.mode);
                        check(
                            checks,
                            format!("period[{i}].torsion"),
                            ok && hit,
                            "exp(lambda/theta) is a theta-torsion point found by the solver",
                        );
                    }
                    Err(e) => check(checks, format!("period[{i}].torsion"), false, e.to_string()),
                }
                report.periods.push(cand);
            }
            Err(e) => check(checks, format!("period[{i}]"), false, e.to_string()),
        }
    }
    timings.push((format!("[{tag}] periods"), started.elapsed()));
    report
}

fn aconfig_rel(precision: u32) -> crate::field_tower::Q {
    crate::field_tower::Q::from_integer(2 * precision as i64)
}

fn basis_span_contains(basis: &[Puiseux], d: &DrinfeldModule, z: &Puiseux, mode: Mode) -> bool {
    crate::roots::span(basis, d.base(), mode)
        .iter()
        .any(|t| t.is_nonzero() && z.eq_to_precision(t))
}

/// Human-readable summary with timings.
pub fn render(out: &Outcome) -> String {
    let mut s = String::new();
    let r = &out.report;
    for run in &r.runs {
        let m = &run.module;
        let _ = writeln!(
            s,
            "module q={} rank={} a=[{}]",
            m.q,
            m.rank,
            m.coefficients.join(", ")
        );
        let _ = writeln!(s, "  v(a_i) = [{}]", m.valuations.join(", "));
        if let Some(c) = &run.classification {
            let n = c.n.map_or(String::new(), |n| format!(", n = {n}"));
            let _ = writeln!(
                s,
                "  case {:?}{n}, threshold {}",
                c.case,
                q_str(c.threshold)
            );
        }
        if let Some(b) = &run.bounds {
            let lower = b
                .lower_divisor
                .map_or("none".to_string(), |l| l.to_string());
            let _ = writeln!(
                s,
                "  degree bounds: upper divisor {}, lower divisor {lower}",
                b.upper_divisor
            );
        }
        for (i, t) in run.towers.iter().enumerate() {
            let vals: Vec<String> = t.measured().into_iter().map(q_str).collect();
            let _ = writeln!(
                s,
                "  tower {i} ({:?}): v(e_i) = [{}], e = {}, f = {}, stabilizes at {}",
                t.branch,
                vals.join(", "),
                t.ramification(),
                t.residue_degree(),
                t.stabilization_level.unwrap_or(0)
            );
        }
        if let Some(f) = &run.field {
            let _ = writeln!(s, "  degree surrogate e*f = {}", f.degree);
        }
        for (i, p) in run.periods.iter().enumerate() {
            let _ = writeln!(
                s,
                "  period {i}: v(lambda) = {}, certified {}",
                q_str(p.valuation),
                p.certified
            );
        }
        if !run.torsion_counts.is_empty() {
            let _ = writeln!(s, "  torsion counts {:?}", run.torsion_counts);
        }
        for c in &run.checks {
            let _ = writeln!(
                s,
                "  [{}] {}: {}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
    }
    for (label, t) in &out.timings {
        let _ = writeln!(s, "time {label}: {:.3}s", t.as_secs_f64());
    }
    let _ = writeln!(
        s,
        "{}",
        if r.passed {
            "all checks passed"
        } else {
            "some checks failed"
        }
    );
    s
}

#[cfg(test)]
mod tests;
