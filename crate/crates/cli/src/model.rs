//! Model files: JSON input, validated and resolved into library objects
//! before any numeric work.

use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use jetphys::continuum::{self, CompatibilityForm, DisplacementField, MediumState};
use jetphys::dynamics::{Connection, DynamicalForm};
use jetphys::em::{self, ConstitutiveTensor, Field2, Metric4, Variance};
use jetphys::jet::{prolong, Constraint, ConstraintSet, JetCoords, JetSection, SmoothMap};
use jetphys::lagrangian::LagrangianDensity;
use jetphys::mechanics::{BalanceFrame, PointModel, RigidDynamicalState, RigidMotionCurve};
use jetphys::wave::{self, Minkowski, WaveParameters, WaveState};
use jetphys::{Axis, Expr, ParamDomain};

/// Anything wrong with the input, found before evaluation starts.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{location}: {message}")]
pub struct InputError {
    pub location: String,
    pub message: String,
}

impl InputError {
    pub fn new(location: impl Into<String>, message: impl fmt::Display) -> InputError {
        InputError {
            location: location.into(),
            message: message.to_string(),
        }
    }
}

/// The operations a check can invoke. Each one is also a subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Op {
    CheckIntegrability,
    Constraints,
    Balance,
    EulerLagrange,
    PointBalance,
    RigidBody,
    Strain,
    SaintVenant,
    ContinuumBalance,
    WaveCheck,
    Maxwell,
}

impl Op {
    pub const ALL: [Op; 11] = [
        Op::CheckIntegrability,
        Op::Constraints,
        Op::Balance,
        Op::EulerLagrange,
        Op::PointBalance,
        Op::RigidBody,
        Op::Strain,
        Op::SaintVenant,
        Op::ContinuumBalance,
        Op::WaveCheck,
        Op::Maxwell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::CheckIntegrability => "check-integrability",
            Op::Constraints => "constraints",
            Op::Balance => "balance",
            Op::EulerLagrange => "euler-lagrange",
            Op::PointBalance => "point-balance",
            Op::RigidBody => "rigid-body",
            Op::Strain => "strain",
            Op::SaintVenant => "saint-venant",
            Op::ContinuumBalance => "continuum-balance",
            Op::WaveCheck => "wave-check",
            Op::Maxwell => "maxwell",
        }
    }
}

type Formula = String;
type FMatrix = Vec<Vec<Formula>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariables {
    source: Vec<String>,
    target: Vec<String>,
    jet_names: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    lo: f64,
    hi: f64,
    samples: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    variables: String,
    position: Vec<Formula>,
    /// Omitted for the prolongation of `position`.
    jet: Option<FMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForm {
    variables: String,
    force: Vec<Formula>,
    stress: FMatrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    name: String,
    function: Formula,
    #[serde(default)]
    level: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraintSet {
    variables: String,
    functions: Vec<RawConstraint>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLagrangian {
    variables: String,
    density: Formula,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPointModel {
    variables: String,
    mass: Formula,
    metric: Option<FMatrix>,
    force: Vec<Formula>,
    spin: Option<FMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRigidCurve {
    translation: Vec<Formula>,
    rotation: FMatrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisplacement {
    space: Vec<String>,
    components: Vec<Formula>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrain {
    space: Vec<String>,
    components: FMatrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCouples {
    couple: Vec<FMatrix>,
    torque: FMatrix,
    spin: FMatrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMedium {
    space: Vec<String>,
    density: Formula,
    momentum: Vec<Formula>,
    stress: FMatrix,
    force: Vec<Formula>,
    velocity: Option<Vec<Formula>>,
    couples: Option<RawCouples>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawWaveParameters {
    lambda_a: f64,
    alpha0_sq: f64,
    rho_theta: f64,
    k0_sq: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaveState {
    amplitude: Formula,
    phase: Formula,
    amplitude_gradient: Option<Vec<Formula>>,
    wavevector: Option<Vec<Formula>>,
    speed: Option<f64>,
    #[serde(default)]
    parameters: RawWaveParameters,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmField {
    potential: Option<Vec<Formula>>,
    field: Option<Vec<Formula>>,
    excitation: Option<Vec<Formula>>,
    current: Option<Vec<Formula>>,
    metric: Option<FMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRigidDynamics {
    force: Vec<Formula>,
    torque: FMatrix,
    momentum: Vec<Formula>,
    angular_momentum: FMatrix,
}

#[derive(Debug, Deserialize)]
struct RawCheck {
    name: String,
    op: Op,
    domain: String,
    tol: Option<f64>,
    section: Option<String>,
    form: Option<String>,
    connection: Option<Vec<FMatrix>>,
    lagrangian: Option<String>,
    constraints: Option<String>,
    point_model: Option<String>,
    rigid_curve: Option<String>,
    frame: Option<String>,
    dynamics: Option<RawRigidDynamics>,
    displacement: Option<String>,
    expected: Option<FMatrix>,
    strain: Option<String>,
    compatibility: Option<String>,
    medium: Option<String>,
    law: Option<String>,
    wave_state: Option<String>,
    em_field: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default)]
    variables: BTreeMap<String, RawVariables>,
    #[serde(default)]
    domains: BTreeMap<String, Vec<RawAxis>>,
    #[serde(default)]
    sections: BTreeMap<String, RawSection>,
    #[serde(default)]
    dynamical_forms: BTreeMap<String, RawForm>,
    #[serde(default)]
    constraints: BTreeMap<String, RawConstraintSet>,
    #[serde(default)]
    lagrangians: BTreeMap<String, RawLagrangian>,
    #[serde(default)]
    point_models: BTreeMap<String, RawPointModel>,
    #[serde(default)]
    rigid_curves: BTreeMap<String, RawRigidCurve>,
    #[serde(default)]
    displacements: BTreeMap<String, RawDisplacement>,
    #[serde(default)]
    strains: BTreeMap<String, RawStrain>,
    #[serde(default)]
    media: BTreeMap<String, RawMedium>,
    #[serde(default)]
    wave_states: BTreeMap<String, RawWaveState>,
    #[serde(default)]
    em_fields: BTreeMap<String, RawEmField>,
    #[serde(default)]
    checks: Vec<RawCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuumLaw {
    Lagrangian,
    Eulerian,
    Unified,
    Cosserat,
}

#[derive(Debug, Clone)]
pub enum CheckKind {
    Integrability {
        section: JetSection,
    },
    Constraints {
        set: ConstraintSet,
        section: JetSection,
    },
    Balance {
        form: DynamicalForm,
        section: JetSection,
        connection: Option<Connection>,
    },
    EulerLagrange {
        lagrangian: LagrangianDensity,
        section: JetSection,
    },
    PointBalance {
        model: PointModel,
        section: JetSection,
    },
    RigidBody {
        curve: RigidMotionCurve,
        frame: BalanceFrame,
        dynamics: Option<RigidDynamicalState>,
    },
    Strain {
        displacement: DisplacementField,
        expected: Option<Vec<Vec<Expr>>>,
    },
    SaintVenant {
        strain: Vec<Vec<Expr>>,
        space: Vec<String>,
        form: CompatibilityForm,
    },
    ContinuumBalance {
        medium: MediumState,
        law: ContinuumLaw,
    },
    WaveCheck {
        state: WaveState,
        eta: Minkowski,
        params: WaveParameters,
    },
    Maxwell {
        field: Field2,
        excitation: Field2,
        current: Vec<Expr>,
        chi: ConstitutiveTensor,
    },
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub op: Op,
    pub tol: Option<f64>,
    pub domain: ParamDomain,
    pub kind: CheckKind,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub checks: Vec<Check>,
}

/// Parse and validate a model. Every formula is parsed, every reference
/// resolved and every shape checked; nothing is evaluated.
pub fn load(text: &str, parallel: bool) -> Result<Model, InputError> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| {
        InputError::new(format!("line {} column {}", e.line(), e.column()), e)
    })?;
    Builder { raw: &raw, parallel }.build()
}

fn formula(at: &str, src: &str) -> Result<Expr, InputError> {
    Expr::parse(src).map_err(|e| InputError::new(at, format!("{e} in \"{src}\"")))
}

fn formulas(at: &str, srcs: &[Formula]) -> Result<Vec<Expr>, InputError> {
    srcs.iter()
        .enumerate()
        .map(|(i, s)| formula(&format!("{at}[{i}]"), s))
        .collect()
}

fn matrix(at: &str, rows: &[Vec<Formula>]) -> Result<Vec<Vec<Expr>>, InputError> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| formulas(&format!("{at}[{i}]"), r))
        .collect()
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: &str, at: &str) -> Result<&'a T, InputError> {
    map.get(name)
        .ok_or_else(|| InputError::new(at, format!("unknown {kind} `{name}`")))
}

fn required<'a>(field: &'a Option<String>, what: &str, at: &str) -> Result<&'a str, InputError> {
    field
        .as_deref()
        .ok_or_else(|| InputError::new(at, format!("missing field `{what}`")))
}

fn refs(names: &[String]) -> Vec<&str> {
    names.iter().map(String::as_str).collect()
}

struct Builder<'a> {
    raw: &'a RawModel,
    parallel: bool,
}

impl Builder<'_> {
    fn build(&self) -> Result<Model, InputError> {
        // Everything declared is validated, referenced or not.
        for name in self.raw.variables.keys() {
            self.coords(name, "variables")?;
        }
        for name in self.raw.domains.keys() {
            self.domain(name, "domains")?;
        }
        for name in self.raw.sections.keys() {
            self.section(name, "sections")?;
        }
        for name in self.raw.dynamical_forms.keys() {
            self.form(name, "dynamical_forms")?;
        }
        for name in self.raw.constraints.keys() {
            self.constraint_set(name, "constraints")?;
        }
        for name in self.raw.lagrangians.keys() {
            self.lagrangian(name, "lagrangians")?;
        }
        for name in self.raw.point_models.keys() {
            self.point_model(name, "point_models")?;
        }
        for name in self.raw.rigid_curves.keys() {
            self.rigid_curve(name, "rigid_curves")?;
        }
        for name in self.raw.displacements.keys() {
            self.displacement(name, "displacements")?;
        }
        for name in self.raw.strains.keys() {
            self.strain(name, "strains")?;
        }
        for name in self.raw.media.keys() {
            self.medium(name, "media")?;
        }
        for name in self.raw.wave_states.keys() {
            self.wave_state(name, "wave_states")?;
        }
        for name in self.raw.em_fields.keys() {
            self.em_field(name, "em_fields")?;
        }
        let mut seen = std::collections::BTreeSet::new();
        let checks = self
            .raw
            .checks
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let at = format!("checks[{i}] ({})", c.name);
                if !seen.insert(c.name.clone()) {
                    return Err(InputError::new(&at, "duplicate check name"));
                }
                self.check(c, &at)
            })
            .collect::<Result<_, _>>()?;
        Ok(Model { checks })
    }

    fn coords(&self, name: &str, at: &str) -> Result<JetCoords, InputError> {
        let v = lookup(&self.raw.variables, "variables", name, at)?;
        let at = format!("variables.{name}");
        let c = match &v.jet_names {
            Some(j) => JetCoords::with_jet_names(v.source.clone(), v.target.clone(), j.clone()),
            None => JetCoords::new(&refs(&v.source), &refs(&v.target)),
        };
        c.map_err(|e| InputError::new(at, e))
    }

    fn domain(&self, name: &str, at: &str) -> Result<ParamDomain, InputError> {
        let axes = lookup(&self.raw.domains, "domain", name, at)?;
        let axes = axes
            .iter()
            .map(|a| Axis {
                lo: a.lo,
                hi: a.hi,
                samples: a.samples,
            })
            .collect();
        ParamDomain::new(axes)
            .map(|d| d.parallel(self.parallel))
            .map_err(|e| InputError::new(format!("domains.{name}"), e))
    }

    fn section(&self, name: &str, at: &str) -> Result<JetSection, InputError> {
        let s = lookup(&self.raw.sections, "section", name, at)?;
        let at = format!("sections.{name}");
        let coords = self.coords(&s.variables, &at)?;
        let position = formulas(&format!("{at}.position"), &s.position)?;
        match &s.jet {
            Some(jet) => {
                let jet = matrix(&format!("{at}.jet"), jet)?;
                JetSection::new(coords, position, jet).map_err(|e| InputError::new(at, e))
            }
            None => SmoothMap::new(coords, position)
                .map(|f| prolong(&f))
                .map_err(|e| InputError::new(at, e)),
        }
    }

    fn form(&self, name: &str, at: &str) -> Result<DynamicalForm, InputError> {
        let f = lookup(&self.raw.dynamical_forms, "dynamical form", name, at)?;
        let at = format!("dynamical_forms.{name}");
        let coords = self.coords(&f.variables, &at)?;
        let force = formulas(&format!("{at}.force"), &f.force)?;
        let stress = matrix(&format!("{at}.stress"), &f.stress)?;
        DynamicalForm::new(coords, force, stress).map_err(|e| InputError::new(at, e))
    }

    fn constraint_set(&self, name: &str, at: &str) -> Result<(JetCoords, ConstraintSet), InputError> {
        let c = lookup(&self.raw.constraints, "constraint set", name, at)?;
        let at = format!("constraints.{name}");
        let coords = self.coords(&c.variables, &at)?;
        let list = c
            .functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                Ok(Constraint {
                    name: f.name.clone(),
                    function: formula(&format!("{at}.functions[{i}]"), &f.function)?,
                    level: f.level,
                })
            })
            .collect::<Result<_, InputError>>()?;
        let set = ConstraintSet::new(&coords, list).map_err(|e| InputError::new(at, e))?;
        Ok((coords, set))
    }

    fn lagrangian(&self, name: &str, at: &str) -> Result<LagrangianDensity, InputError> {
        let l = lookup(&self.raw.lagrangians, "lagrangian", name, at)?;
        let at = format!("lagrangians.{name}");
        let coords = self.coords(&l.variables, &at)?;
        let density = formula(&format!("{at}.density"), &l.density)?;
        LagrangianDensity::new(coords, density).map_err(|e| InputError::new(at, e))
    }

    fn point_model(&self, name: &str, at: &str) -> Result<PointModel, InputError> {
        let p = lookup(&self.raw.point_models, "point model", name, at)?;
        let at = format!("point_models.{name}");
        let coords = self.coords(&p.variables, &at)?;
        let n = coords.target_dim();
        let mass = formula(&format!("{at}.mass"), &p.mass)?;
        let force = formulas(&format!("{at}.force"), &p.force)?;
        let metric = match &p.metric {
            Some(g) => matrix(&format!("{at}.metric"), g)?,
            None => (0..n)
                .map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect())
                .collect(),
        };
        let spin = p
            .spin
            .as_ref()
            .map(|w| matrix(&format!("{at}.spin"), w))
            .transpose()?;
        PointModel::new(coords, mass, metric, force, spin).map_err(|e| InputError::new(at, e))
    }

    fn rigid_curve(&self, name: &str, at: &str) -> Result<RigidMotionCurve, InputError> {
        let r = lookup(&self.raw.rigid_curves, "rigid curve", name, at)?;
        let at = format!("rigid_curves.{name}");
        let translation = formulas(&format!("{at}.translation"), &r.translation)?;
        let rotation = matrix(&format!("{at}.rotation"), &r.rotation)?;
        RigidMotionCurve::new(translation, rotation).map_err(|e| InputError::new(at, e))
    }

    fn displacement(&self, name: &str, at: &str) -> Result<DisplacementField, InputError> {
        let d = lookup(&self.raw.displacements, "displacement", name, at)?;
        let at = format!("displacements.{name}");
        let comps = formulas(&format!("{at}.components"), &d.components)?;
        DisplacementField::new(&refs(&d.space), comps).map_err(|e| InputError::new(at, e))
    }

    fn strain(&self, name: &str, at: &str) -> Result<(Vec<String>, Vec<Vec<Expr>>), InputError> {
        let s = lookup(&self.raw.strains, "strain", name, at)?;
        let at = format!("strains.{name}");
        let e = matrix(&format!("{at}.components"), &s.components)?;
        // shape, variables and symmetry are checked by building the operator
        continuum::compatibility_operator(&e, &refs(&s.space), CompatibilityForm::Standard)
            .map_err(|err| InputError::new(at, err))?;
        Ok((s.space.clone(), e))
    }

    fn medium(&self, name: &str, at: &str) -> Result<MediumState, InputError> {
        let m = lookup(&self.raw.media, "medium", name, at)?;
        let at = format!("media.{name}");
        let err = |e| InputError::new(&at, e);
        let mut state = MediumState::new(
            &refs(&m.space),
            formula(&format!("{at}.density"), &m.density)?,
            formulas(&format!("{at}.momentum"), &m.momentum)?,
            matrix(&format!("{at}.stress"), &m.stress)?,
            formulas(&format!("{at}.force"), &m.force)?,
        )
        .map_err(err)?;
        if let Some(v) = &m.velocity {
            state = state
                .with_velocity(formulas(&format!("{at}.velocity"), v)?)
                .map_err(err)?;
        }
        if let Some(c) = &m.couples {
            let couple = c
                .couple
                .iter()
                .enumerate()
                .map(|(j, mu)| matrix(&format!("{at}.couples.couple[{j}]"), mu))
                .collect::<Result<_, _>>()?;
            state = state
                .with_couples(
                    couple,
                    matrix(&format!("{at}.couples.torque"), &c.torque)?,
                    matrix(&format!("{at}.couples.spin"), &c.spin)?,
                )
                .map_err(err)?;
        }
        Ok(state)
    }

    fn wave_state(&self, name: &str, at: &str) -> Result<(WaveState, Minkowski, WaveParameters), InputError> {
        let w = lookup(&self.raw.wave_states, "wave state", name, at)?;
        let at = format!("wave_states.{name}");
        let a = formula(&format!("{at}.amplitude"), &w.amplitude)?;
        let theta = formula(&format!("{at}.phase"), &w.phase)?;
        let state = match (&w.amplitude_gradient, &w.wavevector) {
            (None, None) => wave::wave_section(a, theta),
            (Some(ag), Some(k)) => WaveState::new(
                a,
                theta,
                formulas(&format!("{at}.amplitude_gradient"), ag)?,
                formulas(&format!("{at}.wavevector"), k)?,
            ),
            _ => {
                return Err(InputError::new(
                    at,
                    "give both `amplitude_gradient` and `wavevector`, or neither",
                ))
            }
        }
        .map_err(|e| InputError::new(&at, e))?;
        let eta = match w.speed {
            Some(c) if !(c > 0.0) => return Err(InputError::new(at, format!("speed {c} is not positive"))),
            Some(c) => Minkowski::with_speed(c),
            None => Minkowski::default(),
        };
        let p = &w.parameters;
        let params = WaveParameters {
            lambda_a: p.lambda_a,
            alpha0_sq: p.alpha0_sq,
            rho_theta: p.rho_theta,
            k0_sq: p.k0_sq,
        };
        Ok((state, eta, params))
    }

    fn em_field(&self, name: &str, at: &str) -> Result<(Field2, Field2, Vec<Expr>, ConstitutiveTensor), InputError> {
        let f = lookup(&self.raw.em_fields, "em field", name, at)?;
        let at = format!("em_fields.{name}");
        let err = |e: em::EmError| InputError::new(&at, e);
        let field = match (&f.potential, &f.field) {
            (Some(a), None) => em::field_from_potential(&formulas(&format!("{at}.potential"), a)?).map_err(err)?,
            (None, Some(c)) => Field2::new(Variance::Covariant, formulas(&format!("{at}.field"), c)?).map_err(err)?,
            _ => return Err(InputError::new(at, "give exactly one of `potential` and `field`")),
        };
        let metric = match &f.metric {
            Some(g) => Metric4::new(matrix(&format!("{at}.metric"), g)?).map_err(err)?,
            None => Metric4::minkowski(),
        };
        let chi = ConstitutiveTensor::vacuum(&metric);
        let excitation = match &f.excitation {
            Some(h) => Field2::new(Variance::Contravariant, formulas(&format!("{at}.excitation"), h)?).map_err(err)?,
            None => chi.apply(&field).map_err(err)?,
        };
        let current = match &f.current {
            Some(j) if j.len() == 4 => formulas(&format!("{at}.current"), j)?,
            Some(j) => return Err(InputError::new(at, format!("current has {} components, expected 4", j.len()))),
            None => vec![Expr::zero(); 4],
        };
        Ok((field, excitation, current, chi))
    }

    fn check(&self, c: &RawCheck, at: &str) -> Result<Check, InputError> {
        let domain = self.domain(&c.domain, at)?;
        if let Some(t) = c.tol {
            if !(t >= 0.0) {
                return Err(InputError::new(at, format!("tolerance {t} is negative")));
            }
        }
        let section = || self.section(required(&c.section, "section", at)?, at);
        let (kind, dim) = match c.op {
            Op::CheckIntegrability => {
                let section = section()?;
                let dim = section.source_dim();
                (CheckKind::Integrability { section }, dim)
            }
            Op::Constraints => {
                let (coords, set) = self.constraint_set(required(&c.constraints, "constraints", at)?, at)?;
                let section = section()?;
                same_coords(&coords, section.coords(), at)?;
                let dim = section.source_dim();
                (CheckKind::Constraints { set, section }, dim)
            }
            Op::Balance => {
                let form = self.form(required(&c.form, "form", at)?, at)?;
                let section = section()?;
                same_coords(form.coords(), section.coords(), at)?;
                let connection = c
                    .connection
                    .as_ref()
                    .map(|w| {
                        let coeffs = w
                            .iter()
                            .enumerate()
                            .map(|(i, r)| matrix(&format!("{at}.connection[{i}]"), r))
                            .collect::<Result<_, _>>()?;
                        Connection::new(form.coords(), coeffs).map_err(|e| InputError::new(at, e))
                    })
                    .transpose()?;
                let dim = section.source_dim();
                (CheckKind::Balance { form, section, connection }, dim)
            }
            Op::EulerLagrange => {
                let lagrangian = self.lagrangian(required(&c.lagrangian, "lagrangian", at)?, at)?;
                let section = section()?;
                same_coords(lagrangian.coords(), section.coords(), at)?;
                let dim = section.source_dim();
                (CheckKind::EulerLagrange { lagrangian, section }, dim)
            }
            Op::PointBalance => {
                let model = self.point_model(required(&c.point_model, "point_model", at)?, at)?;
                let section = section()?;
                same_coords(model.coords(), section.coords(), at)?;
                (CheckKind::PointBalance { model, section }, 1)
            }
            Op::RigidBody => {
                let curve = self.rigid_curve(required(&c.rigid_curve, "rigid_curve", at)?, at)?;
                let frame = match c.frame.as_deref() {
                    None | Some("inertial") => BalanceFrame::Inertial,
                    Some("co-moving") => BalanceFrame::CoMoving,
                    Some(other) => {
                        return Err(InputError::new(
                            at,
                            format!("unknown frame `{other}`, expected `inertial` or `co-moving`"),
                        ))
                    }
                };
                let dynamics = c
                    .dynamics
                    .as_ref()
                    .map(|d| {
                        RigidDynamicalState::new(
                            formulas(&format!("{at}.dynamics.force"), &d.force)?,
                            matrix(&format!("{at}.dynamics.torque"), &d.torque)?,
                            formulas(&format!("{at}.dynamics.momentum"), &d.momentum)?,
                            matrix(&format!("{at}.dynamics.angular_momentum"), &d.angular_momentum)?,
                        )
                        .map_err(|e| InputError::new(at, e))
                    })
                    .transpose()?;
                (CheckKind::RigidBody { curve, frame, dynamics }, 1)
            }
            Op::Strain => {
                let displacement = self.displacement(required(&c.displacement, "displacement", at)?, at)?;
                let m = displacement.space().len();
                let expected = c
                    .expected
                    .as_ref()
                    .map(|e| matrix(&format!("{at}.expected"), e))
                    .transpose()?;
                if let Some(e) = &expected {
                    if e.len() != m || e.iter().any(|r| r.len() != m) {
                        return Err(InputError::new(at, format!("expected strain must be {m}x{m}")));
                    }
                }
                (CheckKind::Strain { displacement, expected }, m)
            }
            Op::SaintVenant => {
                let (space, strain) = self.strain(required(&c.strain, "strain", at)?, at)?;
                let form = match c.compatibility.as_deref() {
                    None | Some("standard") => CompatibilityForm::Standard,
                    Some("cyclic") => CompatibilityForm::Cyclic,
                    Some(other) => {
                        return Err(InputError::new(
                            at,
                            format!("unknown compatibility form `{other}`, expected `standard` or `cyclic`"),
                        ))
                    }
                };
                let dim = space.len();
                (CheckKind::SaintVenant { strain, space, form }, dim)
            }
            Op::ContinuumBalance => {
                let medium = self.medium(required(&c.medium, "medium", at)?, at)?;
                let law = match c.law.as_deref() {
                    None | Some("lagrangian") => ContinuumLaw::Lagrangian,
                    Some("eulerian") => ContinuumLaw::Eulerian,
                    Some("unified") => ContinuumLaw::Unified,
                    Some("cosserat") => ContinuumLaw::Cosserat,
                    Some(other) => {
                        return Err(InputError::new(
                            at,
                            format!("unknown law `{other}`, expected lagrangian, eulerian, unified or cosserat"),
                        ))
                    }
                };
                if law == ContinuumLaw::Cosserat && medium.couple.is_none() {
                    return Err(InputError::new(at, "the cosserat law needs a medium with `couples`"));
                }
                let dim = medium.dim() + 1;
                (CheckKind::ContinuumBalance { medium, law }, dim)
            }
            Op::WaveCheck => {
                let (state, eta, params) = self.wave_state(required(&c.wave_state, "wave_state", at)?, at)?;
                (CheckKind::WaveCheck { state, eta, params }, 4)
            }
            Op::Maxwell => {
                let (field, excitation, current, chi) = self.em_field(required(&c.em_field, "em_field", at)?, at)?;
                (
                    CheckKind::Maxwell {
                        field,
                        excitation,
                        current,
                        chi,
                    },
                    4,
                )
            }
        };
        if domain.dim() != dim {
            return Err(InputError::new(
                at,
                format!("domain `{}` has {} axes, the operation needs {dim}", c.domain, domain.dim()),
            ));
        }
        Ok(Check {
            name: c.name.clone(),
            op: c.op,
            tol: c.tol,
            domain,
            kind,
        })
    }
}

fn same_coords(a: &JetCoords, b: &JetCoords, at: &str) -> Result<(), InputError> {
    if a == b {
        Ok(())
    } else {
        Err(InputError::new(at, "the referenced objects use different variables"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operation_names_are_distinct() {
        let mut names: Vec<&str> = Op::ALL.iter().map(|op| op.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), Op::ALL.len());
    }

    #[test]
    fn empty_model_has_no_checks() {
        let m = load(r#"{"variables": {}, "checks": []}"#, false).unwrap();
        assert!(m.checks.is_empty());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(load(r#"{"bogus": 1}"#, false).is_err());
        assert!(load("not json", false).is_err());
    }
}
