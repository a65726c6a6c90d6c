//! Check execution and reports.

use std::time::Instant;

use serde::Serialize;

use jetphys::continuum;
use jetphys::dynamics;
use jetphys::em;
use jetphys::jet::{self, JetSection};
use jetphys::lagrangian::{self, LagrangianDensity};
use jetphys::mechanics::{self, BalanceFrame, RigidSection};
use jetphys::wave;
use jetphys::{Expr, GridMax};

use crate::model::{Check, CheckKind, ContinuumLaw, Model, Op};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub label: String,
    pub max_abs: f64,
    pub argmax: Vec<f64>,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub operation: &'static str,
    pub tolerance: f64,
    pub pass: bool,
    pub max_residual: Option<f64>,
    pub argmax: Option<Vec<f64>>,
    pub residuals: Vec<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// One row per check: name, largest residual, tolerance, verdict.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0).max(24);
        let mut out = format!("{:<width$}  {:>12}  {:>10}  {}\n", "name", "max_residual", "tol", "status");
        for c in &self.checks {
            let residual = match c.max_residual {
                Some(r) => format!("{r:.3e}"),
                None => "error".to_string(),
            };
            let status = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{:<width$}  {residual:>12}  {:>10.1e}  {status}\n", c.name, c.tolerance));
        }
        out
    }
}

pub struct RunOptions {
    pub default_tol: f64,
    pub timestamp: bool,
    /// Restrict to checks of this operation.
    pub only: Option<Op>,
}

pub fn run(model: &Model, opts: &RunOptions) -> Report {
    let checks: Vec<CheckRecord> = model
        .checks
        .iter()
        .filter(|c| opts.only.map_or(true, |op| c.op == op))
        .map(|c| run_check(c, opts.default_tol, opts.timestamp))
        .collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    let generated_at = opts.timestamp.then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    Report {
        schema_version: SCHEMA_VERSION,
        generated_at,
        summary: Summary {
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
        },
        checks,
    }
}

fn named(label: &str, g: GridMax) -> (String, GridMax) {
    (label.to_string(), g)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn sources(s: &JetSection) -> Vec<&str> {
    s.coords().source_refs()
}

fn evaluate(check: &Check) -> Result<Vec<(String, GridMax)>, String> {
    let d = &check.domain;
    Ok(match &check.kind {
        CheckKind::Integrability { section } => {
            vec![named("spencer", jet::spencer(section).max_abs(&sources(section), d).map_err(err)?)]
        }
        CheckKind::Constraints { set, section } => jet::constraint_residual(set, section, d)
            .map_err(err)?
            .into_iter()
            .map(|r| (r.name, r.max))
            .collect(),
        CheckKind::Balance {
            form,
            section,
            connection,
        } => {
            let adj = match connection {
                Some(w) => dynamics::covariant_adjoint(form, section, w),
                None => dynamics::adjoint(form, section),
            }
            .map_err(err)?;
            vec![named("adjoint", adj.max_abs(&sources(section), d).map_err(err)?)]
        }
        CheckKind::EulerLagrange { lagrangian: l, section } => {
            let v = lagrangian::variational_derivative(l, section).map_err(err)?;
            vec![named("euler-lagrange", v.max_abs(&sources(section), d).map_err(err)?)]
        }
        CheckKind::PointBalance { model, section } => {
            let r = match model.spin() {
                Some(_) => mechanics::covariant_newton_residual(model, section, d),
                None => mechanics::newton_residual(model, section, d),
            };
            vec![named("newton", r.map_err(err)?)]
        }
        CheckKind::RigidBody { curve, frame, dynamics } => {
            curve.check(d).map_err(err)?;
            let section = match frame {
                BalanceFrame::Inertial => RigidSection::inertial(curve),
                BalanceFrame::CoMoving => RigidSection::comoving(curve, d).map_err(err)?,
            };
            let (tr, rot) = mechanics::rigid_spencer(&section).max_abs(d).map_err(err)?;
            let mut out = vec![named("spencer.translational", tr), named("spencer.rotational", rot)];
            if let Some(state) = dynamics {
                state.check(d).map_err(err)?;
                let spin = match frame {
                    BalanceFrame::Inertial => None,
                    BalanceFrame::CoMoving => Some(mechanics::body_velocity(curve, d).map_err(err)?.angular),
                };
                let b = mechanics::rigid_balance_residual(state, *frame, spin.as_ref(), d).map_err(err)?;
                out.push(named("balance.linear", b.linear));
                out.push(named("balance.angular", b.angular));
            }
            out
        }
        CheckKind::Strain { displacement, expected } => {
            let split = continuum::strain_rotation_split(displacement);
            let space: Vec<&str> = displacement.space().iter().map(String::as_str).collect();
            match expected {
                Some(e) => {
                    let gap: Vec<Expr> = split
                        .strain
                        .iter()
                        .zip(e)
                        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
                        .collect();
                    vec![named("strain", jetphys::grid::max_abs(&gap, &space, d).map_err(err)?)]
                }
                None => vec![named(
                    "saint-venant",
                    continuum::saint_venant_residual(&split.strain, &space, d).map_err(err)?,
                )],
            }
        }
        CheckKind::SaintVenant { strain, space, form } => {
            let space: Vec<&str> = space.iter().map(String::as_str).collect();
            vec![named(
                "compatibility",
                continuum::saint_venant_residual_form(strain, &space, d, *form).map_err(err)?,
            )]
        }
        CheckKind::ContinuumBalance { medium, law } => match law {
            ContinuumLaw::Lagrangian => {
                let b = continuum::lagrangian_balance_residual(medium, d).map_err(err)?;
                vec![named("momentum", b.momentum), named("mass", b.mass)]
            }
            ContinuumLaw::Eulerian => {
                vec![named("eulerian", continuum::eulerian_balance_residual(medium, d).map_err(err)?)]
            }
            ContinuumLaw::Unified => continuum::unified_balance_residual(medium, d)
                .map_err(err)?
                .into_iter()
                .enumerate()
                .map(|(row, g)| (format!("row{row}"), g))
                .collect(),
            ContinuumLaw::Cosserat => {
                let c = continuum::cosserat_balance_residual(medium, d).map_err(err)?;
                vec![named("force", c.force), named("couple", c.couple)]
            }
        },
        CheckKind::WaveCheck { state, eta, params } => {
            let r = wave::amplitude_phase_residuals(state, eta, params, d).map_err(err)?;
            vec![
                named("amplitude", r.amplitude),
                named("orthogonality", r.orthogonality),
                named("phase", r.phase),
                named("dispersion", r.dispersion),
            ]
        }
        CheckKind::Maxwell {
            field,
            excitation,
            current,
            chi,
        } => {
            let r = em::maxwell_residuals(field, excitation, current, chi, d).map_err(err)?;
            vec![
                named("closure", r.closure),
                named("source", r.source),
                named("constitutive", r.constitutive),
                named("charge", r.charge),
            ]
        }
    })
}

pub fn run_check(check: &Check, default_tol: f64, timed: bool) -> CheckRecord {
    let tol = check.tol.unwrap_or(default_tol);
    let start = Instant::now();
    let outcome = evaluate(check);
    let wall_time_s = timed.then(|| start.elapsed().as_secs_f64());
    let equation = match &check.kind {
        CheckKind::EulerLagrange { lagrangian, .. } => Some(render_euler_lagrange(lagrangian)),
        _ => None,
    };
    let mut record = CheckRecord {
        name: check.name.clone(),
        operation: check.op.name(),
        tolerance: tol,
        pass: false,
        max_residual: None,
        argmax: None,
        residuals: Vec::new(),
        equation,
        error: None,
        wall_time_s,
    };
    match outcome {
        Ok(list) => {
            let worst = list
                .iter()
                .map(|(_, g)| g)
                .fold(None::<&GridMax>, |best, g| match best {
                    Some(b) if !(g.max_abs > b.max_abs) => Some(b),
                    _ => Some(g),
                });
            record.max_residual = Some(worst.map_or(0.0, |g| g.max_abs));
            record.argmax = worst.map(|g| g.argmax.clone());
            record.pass = list.iter().all(|(_, g)| g.within(tol));
            record.residuals = list
                .into_iter()
                .map(|(label, g)| Residual {
                    label,
                    max_abs: g.max_abs,
                    argmax: g.argmax,
                    component: g.component,
                })
                .collect();
        }
        Err(e) => record.error = Some(e),
    }
    record
}

fn pretty(e: &Expr) -> String {
    let s = e.to_string().replace(" - ", " − ");
    match s.strip_prefix('-') {
        Some(rest) => format!("−{rest}"),
        None => s,
    }
}

/// `∂ℒ/∂xⁱ − Σₐ d/duᵃ(∂ℒ/∂xᵢᵃ) = 0`, one line per target coordinate.
pub fn render_euler_lagrange(l: &LagrangianDensity) -> String {
    let source = l.coords().source();
    lagrangian::euler_lagrange_parts(l)
        .iter()
        .map(|(force, stress)| {
            let mut line = if force.is_zero() { String::new() } else { pretty(force) };
            for (pi, u) in stress.iter().zip(source) {
                if !pi.is_zero() {
                    line.push_str(if line.is_empty() { "−" } else { " − " });
                    line.push_str(&format!("d/d{u}({})", pretty(pi)));
                }
            }
            if line.is_empty() {
                line.push('0');
            }
            line + " = 0"
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// JSON Schema of the report written by `--out`.
pub fn report_schema() -> serde_json::Value {
    let residual = serde_json::json!({
        "type": "object",
        "required": ["label", "max_abs", "argmax", "component"],
        "properties": {
            "label": {"type": "string"},
            "max_abs": {"type": ["number", "null"]},
            "argmax": {"type": "array", "items": {"type": "number"}},
            "component": {"type": "integer", "minimum": 0}
        }
    });
    let ops: Vec<&str> = Op::ALL.iter().map(|o| o.name()).collect();
    serde_json::json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "jetphys report",
        "type": "object",
        "required": ["schema_version", "checks", "summary"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "generated_at": {"type": "integer", "description": "unix seconds; absent with --no-timestamp"},
            "checks": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "operation", "tolerance", "pass", "max_residual", "argmax", "residuals"],
                    "properties": {
                        "name": {"type": "string"},
                        "operation": {"enum": ops},
                        "tolerance": {"type": "number"},
                        "pass": {"type": "boolean"},
                        "max_residual": {"type": ["number", "null"]},
                        "argmax": {"type": ["array", "null"], "items": {"type": "number"}},
                        "residuals": {"type": "array", "items": residual},
                        "equation": {"type": "string"},
                        "error": {"type": "string"},
                        "wall_time_s": {"type": "number", "description": "absent with --no-timestamp"}
                    }
                }
            },
            "summary": {
                "type": "object",
                "required": ["total", "passed", "failed"],
                "properties": {
                    "total": {"type": "integer"},
                    "passed": {"type": "integer"},
                    "failed": {"type": "integer"}
                }
            }
        }
    })
}
