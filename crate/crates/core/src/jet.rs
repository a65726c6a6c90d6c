//! First-order jets: sections of the source projection of J¹(M, N), their
//! prolongation, contact-form pullbacks, the Spencer operator, and
//! constraint evaluation.
//!
//! A chart of J¹(M, N) has coordinates `(uᵃ, xⁱ, xᵢᵃ)`. A section assigns to
//! each `u` a position `xⁱ(u)` and jet components `xᵢᵃ(u)`; it is integrable
//! exactly when the jet components are the partial derivatives of the
//! position. Two equivalent measures of the failure of integrability are
//! provided, with opposite signs:
//!
//! * [`spencer`]: `xᵢᵃ − ∂ₐxⁱ`
//! * [`contact_pullback`]: `∂ₐxⁱ − xᵢᵃ`

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::grid::{self, DomainError, GridMax, ParamDomain};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("component {component} depends on `{name}`, which is not a source coordinate")]
    ForeignVariable { component: String, name: String },
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
    #[error("duplicate coordinate name `{0}`")]
    DuplicateName(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

pub(crate) fn shape_err(expected: impl ToString, got: impl ToString) -> JetError {
    JetError::Shape {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}

/// Names of the coordinates `(uᵃ, xⁱ, xᵢᵃ)` of a jet manifold chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetCoords {
    source: Vec<String>,
    target: Vec<String>,
    jet: Vec<Vec<String>>,
}

impl JetCoords {
    /// Jet coordinates default to `{target}_{source}`, e.g. `x_t`.
    pub fn new(source: &[&str], target: &[&str]) -> Result<JetCoords, JetError> {
        let jet = target
            .iter()
            .map(|x| source.iter().map(|u| format!("{x}_{u}")).collect())
            .collect();
        JetCoords::with_jet_names(
            source.iter().map(|s| s.to_string()).collect(),
            target.iter().map(|s| s.to_string()).collect(),
            jet,
        )
    }

    /// Explicit jet coordinate names, `jet[i][a]` naming `xᵢᵃ`.
    pub fn with_jet_names(
        source: Vec<String>,
        target: Vec<String>,
        jet: Vec<Vec<String>>,
    ) -> Result<JetCoords, JetError> {
        if jet.len() != target.len() || jet.iter().any(|row| row.len() != source.len()) {
            return Err(shape_err(
                format!("{}x{} jet names", target.len(), source.len()),
                format!("{} rows", jet.len()),
            ));
        }
        let mut seen = BTreeSet::new();
        for name in source.iter().chain(&target).chain(jet.iter().flatten()) {
            if !seen.insert(name.clone()) {
                return Err(JetError::DuplicateName(name.clone()));
            }
        }
        Ok(JetCoords {
            source,
            target,
            jet,
        })
    }

    pub fn source_dim(&self) -> usize {
        self.source.len()
    }

    pub fn target_dim(&self) -> usize {
        self.target.len()
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn target(&self) -> &[String] {
        &self.target
    }

    pub fn jet_name(&self, i: usize, a: usize) -> &str {
        &self.jet[i][a]
    }

    pub fn source_refs(&self) -> Vec<&str> {
        self.source.iter().map(String::as_str).collect()
    }

    pub fn is_jet_name(&self, name: &str) -> bool {
        self.jet.iter().flatten().any(|n| n == name)
    }

    pub fn is_coordinate(&self, name: &str) -> bool {
        self.source.iter().any(|n| n == name)
            || self.target.iter().any(|n| n == name)
            || self.is_jet_name(name)
    }

    pub(crate) fn check_over_source(&self, what: &str, e: &Expr) -> Result<(), JetError> {
        if let Some(name) = e.free_vars().into_iter().find(|v| !self.source.contains(v)) {
            return Err(JetError::ForeignVariable {
                component: what.to_string(),
                name,
            });
        }
        Ok(())
    }

    pub(crate) fn check_over_jet(&self, what: &str, e: &Expr) -> Result<(), JetError> {
        if let Some(name) = e.free_vars().into_iter().find(|v| !self.is_coordinate(v)) {
            return Err(JetError::ForeignVariable {
                component: what.to_string(),
                name,
            });
        }
        Ok(())
    }
}

/// A C¹ map `u ↦ xⁱ(u)` from the source to the target chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    coords: JetCoords,
    position: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(coords: JetCoords, position: Vec<Expr>) -> Result<SmoothMap, JetError> {
        if position.len() != coords.target_dim() {
            return Err(shape_err(coords.target_dim(), position.len()));
        }
        for (i, x) in position.iter().enumerate() {
            coords.check_over_source(&coords.target[i], x)?;
        }
        let position = position.iter().map(Expr::simplify).collect();
        Ok(SmoothMap { coords, position })
    }

    pub fn coords(&self) -> &JetCoords {
        &self.coords
    }

    pub fn position(&self) -> &[Expr] {
        &self.position
    }
}

/// A section `u ↦ (uᵃ, xⁱ(u), xᵢᵃ(u))` of the source projection.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSection {
    coords: JetCoords,
    position: Vec<Expr>,
    jet: Vec<Vec<Expr>>,
}

impl JetSection {
    /// `jet[i][a]` is the component `xᵢᵃ(u)`.
    pub fn new(
        coords: JetCoords,
        position: Vec<Expr>,
        jet: Vec<Vec<Expr>>,
    ) -> Result<JetSection, JetError> {
        let (n, m) = (coords.target_dim(), coords.source_dim());
        if position.len() != n || jet.len() != n || jet.iter().any(|r| r.len() != m) {
            return Err(shape_err(
                format!("{n} positions and {n}x{m} jet components"),
                format!("{} positions and {} jet rows", position.len(), jet.len()),
            ));
        }
        for (i, x) in position.iter().enumerate() {
            coords.check_over_source(&coords.target[i], x)?;
        }
        for (i, row) in jet.iter().enumerate() {
            for (a, e) in row.iter().enumerate() {
                coords.check_over_source(&coords.jet[i][a], e)?;
            }
        }
        Ok(JetSection {
            coords,
            position: position.iter().map(Expr::simplify).collect(),
            jet: jet
                .iter()
                .map(|row| row.iter().map(Expr::simplify).collect())
                .collect(),
        })
    }

    pub fn coords(&self) -> &JetCoords {
        &self.coords
    }

    pub fn source_dim(&self) -> usize {
        self.coords.source_dim()
    }

    pub fn target_dim(&self) -> usize {
        self.coords.target_dim()
    }

    pub fn position(&self) -> &[Expr] {
        &self.position
    }

    pub fn jet(&self) -> &[Vec<Expr>] {
        &self.jet
    }

    /// Map from target and jet coordinate names to this section's
    /// component expressions.
    pub fn substitution(&self) -> HashMap<String, Expr> {
        let mut map = HashMap::new();
        for (i, x) in self.position.iter().enumerate() {
            map.insert(self.coords.target[i].clone(), x.clone());
            for (a, xa) in self.jet[i].iter().enumerate() {
                map.insert(self.coords.jet[i][a].clone(), xa.clone());
            }
        }
        map
    }

    /// Compose a function on the jet manifold with this section, giving a
    /// function of `u` alone.
    pub fn restrict(&self, e: &Expr) -> Expr {
        e.substitute(&self.substitution())
    }
}

/// A 1-form on the source with values in target vectors; `[i][a]` is the
/// coefficient of `duᵃ ⊗ ∂/∂xⁱ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CotargetField {
    comps: Vec<Vec<Expr>>,
}

impl CotargetField {
    pub fn new(comps: Vec<Vec<Expr>>) -> CotargetField {
        CotargetField { comps }
    }

    pub fn zeros(n: usize, m: usize) -> CotargetField {
        CotargetField {
            comps: vec![vec![Expr::zero(); m]; n],
        }
    }

    pub fn component(&self, i: usize, a: usize) -> &Expr {
        &self.comps[i][a]
    }

    pub fn rows(&self) -> &[Vec<Expr>] {
        &self.comps
    }

    pub fn shape(&self) -> (usize, usize) {
        (
            self.comps.len(),
            self.comps.first().map_or(0, |r| r.len()),
        )
    }

    /// Components in row-major order `(i, a)`.
    pub fn flat(&self) -> Vec<Expr> {
        self.comps.iter().flatten().cloned().collect()
    }

    pub fn is_symbolically_zero(&self) -> bool {
        self.comps.iter().flatten().all(Expr::is_zero)
    }

    fn zip_with(&self, other: &CotargetField, f: impl Fn(&Expr, &Expr) -> Expr) -> CotargetField {
        CotargetField {
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(a, b)).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &CotargetField) -> CotargetField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CotargetField) -> CotargetField {
        self.zip_with(other, |a, b| a - b)
    }

    /// Grid maximum of all components; `component` in the report is the
    /// row-major index `i * m + a`.
    pub fn max_abs(&self, source: &[&str], domain: &ParamDomain) -> Result<GridMax, JetError> {
        domain.expect_dim(source.len())?;
        Ok(grid::max_abs(&self.flat(), source, domain)?)
    }
}

/// Antisymmetric 2-form components `[i][a][b]`, the coefficient of
/// `duᵃ ∧ duᵇ` in the full (unordered) double sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactCurvature {
    comps: Vec<Vec<Vec<Expr>>>,
}

impl ContactCurvature {
    pub fn component(&self, i: usize, a: usize, b: usize) -> &Expr {
        &self.comps[i][a][b]
    }

    pub fn flat(&self) -> Vec<Expr> {
        self.comps.iter().flatten().flatten().cloned().collect()
    }

    pub fn is_symbolically_zero(&self) -> bool {
        self.comps.iter().flatten().flatten().all(Expr::is_zero)
    }

    pub fn max_abs(&self, source: &[&str], domain: &ParamDomain) -> Result<GridMax, JetError> {
        domain.expect_dim(source.len())?;
        Ok(grid::max_abs(&self.flat(), source, domain)?)
    }
}

/// 1-jet prolongation: jet components are the partials of the map.
pub fn prolong(f: &SmoothMap) -> JetSection {
    let source = f.coords.source.clone();
    let jet = f
        .position
        .iter()
        .map(|x| source.iter().map(|u| x.diff(u)).collect())
        .collect();
    JetSection {
        coords: f.coords.clone(),
        position: f.position.clone(),
        jet,
    }
}

/// Spencer operator: `(Ds)ᵢᵃ = xᵢᵃ(u) − ∂ₐxⁱ(u)`.
pub fn spencer(s: &JetSection) -> CotargetField {
    let source = &s.coords.source;
    CotargetField {
        comps: s
            .position
            .iter()
            .zip(&s.jet)
            .map(|(x, row)| {
                row.iter()
                    .zip(source)
                    .map(|(xa, u)| xa - &x.diff(u))
                    .collect()
            })
            .collect(),
    }
}

/// Pullback of the contact forms `Θⁱ = dxⁱ − xᵢᵃ duᵃ` along the section:
/// `(s*Θⁱ)ₐ = ∂ₐxⁱ(u) − xᵢᵃ(u)`.
pub fn contact_pullback(s: &JetSection) -> CotargetField {
    let source = &s.coords.source;
    CotargetField {
        comps: s
            .position
            .iter()
            .zip(&s.jet)
            .map(|(x, row)| {
                row.iter()
                    .zip(source)
                    .map(|(xa, u)| x.diff(u) - xa.clone())
                    .collect()
            })
            .collect(),
    }
}

/// Pullback of `dΘⁱ`: component `(i, a, b) = ½(∂_b xᵢᵃ − ∂ₐ xᵢᵇ)`.
pub fn contact_curvature(s: &JetSection) -> ContactCurvature {
    let source = &s.coords.source;
    let m = source.len();
    ContactCurvature {
        comps: s
            .jet
            .iter()
            .map(|row| {
                (0..m)
                    .map(|a| {
                        (0..m)
                            .map(|b| 0.5 * (row[a].diff(&source[b]) - row[b].diff(&source[a])))
                            .collect()
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Exterior derivative of a target-valued 1-form on the source:
/// `(dα)ᵢ[a][b] = ½(∂ₐ αᵢ_b − ∂_b αᵢₐ)`.
pub fn exterior_derivative(alpha: &CotargetField, source: &[&str]) -> ContactCurvature {
    let m = source.len();
    ContactCurvature {
        comps: alpha
            .comps
            .iter()
            .map(|row| {
                (0..m)
                    .map(|a| {
                        (0..m)
                            .map(|b| 0.5 * (row[b].diff(source[a]) - row[a].diff(source[b])))
                            .collect()
                    })
                    .collect()
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub integrable: bool,
    pub tol: f64,
    /// Largest Spencer component on the grid; `component = i * m + a`.
    pub max: GridMax,
}

/// Default tolerance for integrability verdicts.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Grid test of `Ds = 0`. A verdict, not a proof: only grid points are
/// inspected.
pub fn is_integrable(
    s: &JetSection,
    domain: &ParamDomain,
    tol: f64,
) -> Result<IntegrabilityReport, JetError> {
    let max = spencer(s).max_abs(&s.coords.source_refs(), domain)?;
    Ok(IntegrabilityReport {
        integrable: max.max_abs <= tol,
        tol,
        max,
    })
}

/// `s*Θ − α`; vanishes exactly when the section satisfies the generalized
/// integrability condition `s*Θⁱ = αⁱ`.
pub fn anholonomy_residual(s: &JetSection, alpha: &CotargetField) -> Result<CotargetField, JetError> {
    let shape = (s.target_dim(), s.source_dim());
    if alpha.shape() != shape || alpha.comps.iter().any(|r| r.len() != shape.1) {
        return Err(shape_err(
            format!("{}x{}", shape.0, shape.1),
            format!("{}x{}", alpha.shape().0, alpha.shape().1),
        ));
    }
    Ok(contact_pullback(s).sub(alpha))
}

/// A function on the jet manifold together with the level it must take.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub function: Expr,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(coords: &JetCoords, constraints: Vec<Constraint>) -> Result<ConstraintSet, JetError> {
        for c in &constraints {
            coords.check_over_jet(&c.name, &c.function)?;
        }
        Ok(ConstraintSet { constraints })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub name: String,
    /// Grid maximum of `|C(s(u)) − c|`.
    pub max: GridMax,
    /// True when the simplified constraint mentions no jet coordinate. This
    /// is syntactic: a jet variable that cancels only after identities the
    /// simplifier does not know still counts as present.
    pub holonomic: bool,
}

pub fn constraint_residual(
    set: &ConstraintSet,
    s: &JetSection,
    domain: &ParamDomain,
) -> Result<Vec<ConstraintReport>, JetError> {
    let source = s.coords.source_refs();
    domain.expect_dim(source.len())?;
    set.constraints
        .iter()
        .map(|c| {
            s.coords.check_over_jet(&c.name, &c.function)?;
            let residual = s.restrict(&c.function) - c.level;
            let max = grid::max_abs(&[residual], &source, domain)?;
            let holonomic = !c
                .function
                .simplify()
                .free_vars()
                .iter()
                .any(|v| s.coords.is_jet_name(v));
            Ok(ConstraintReport {
                name: c.name.clone(),
                max,
                holonomic,
            })
        })
        .collect()
}
