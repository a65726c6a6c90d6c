//! Dynamical states and virtual work.
//!
//! A dynamical state is a 1-form `φ = Fᵢ dxⁱ + Πᵢᵃ dxᵢᵃ` on the jet manifold,
//! stored through its component functions. There is deliberately no slot
//! for a `duᵃ` term. Pairing `φ` with a virtual displacement of a section
//! gives the virtual work density; integrating by parts along the section
//! splits it into the adjoint `D*φ = (Fᵢ − ∂ₐΠᵢᵃ) dxⁱ` paired with `δxⁱ` and
//! a divergence that becomes a boundary flux.
//!
//! All `∂ₐ` here are total derivatives: `φ` is first restricted to the
//! section, and the result is differentiated as a function of `u` alone.

use crate::expr::Expr;
use crate::grid::{self, GridMax, ParamDomain};
use crate::jet::{shape_err, JetCoords, JetError, JetSection};

/// Components `(Fᵢ, Πᵢᵃ)` of a dynamical state, as functions of the jet
/// coordinates. Their functional form is the constitutive law.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalForm {
    coords: JetCoords,
    force: Vec<Expr>,
    stress: Vec<Vec<Expr>>,
}

impl DynamicalForm {
    /// `stress[i][a]` is `Πᵢᵃ`.
    pub fn new(
        coords: JetCoords,
        force: Vec<Expr>,
        stress: Vec<Vec<Expr>>,
    ) -> Result<DynamicalForm, JetError> {
        let (n, m) = (coords.target_dim(), coords.source_dim());
        if force.len() != n || stress.len() != n || stress.iter().any(|r| r.len() != m) {
            return Err(shape_err(
                format!("{n} forces and {n}x{m} stresses"),
                format!("{} forces and {} stress rows", force.len(), stress.len()),
            ));
        }
        for (i, f) in force.iter().enumerate() {
            coords.check_over_jet(&format!("F[{i}]"), f)?;
        }
        for (i, row) in stress.iter().enumerate() {
            for (a, p) in row.iter().enumerate() {
                coords.check_over_jet(&format!("Pi[{i}][{a}]"), p)?;
            }
        }
        Ok(DynamicalForm {
            coords,
            force,
            stress,
        })
    }

    pub fn coords(&self) -> &JetCoords {
        &self.coords
    }

    pub fn force(&self) -> &[Expr] {
        &self.force
    }

    pub fn stress(&self) -> &[Vec<Expr>] {
        &self.stress
    }
}

/// A dynamical state composed with a section: functions of `u` only.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedForm {
    pub force: Vec<Expr>,
    pub stress: Vec<Vec<Expr>>,
}

/// A virtual displacement `δξ = δxⁱ ∂/∂xⁱ + δxᵢᵃ ∂/∂xᵢᵃ` along a section.
#[derive(Debug, Clone, PartialEq)]
pub struct Variation {
    pub dx: Vec<Expr>,
    pub djet: Vec<Vec<Expr>>,
}

/// Coefficients `ωⁱⱼₐ` (`[i][j][a]`) of a generalized connection. They may
/// depend on `u` and `x` but not on jet coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    coeffs: Vec<Vec<Vec<Expr>>>,
}

impl Connection {
    pub fn new(coords: &JetCoords, coeffs: Vec<Vec<Vec<Expr>>>) -> Result<Connection, JetError> {
        let (n, m) = (coords.target_dim(), coords.source_dim());
        if coeffs.len() != n
            || coeffs
                .iter()
                .any(|r| r.len() != n || r.iter().any(|c| c.len() != m))
        {
            return Err(shape_err(format!("{n}x{n}x{m}"), "ragged connection"));
        }
        for (i, r) in coeffs.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                for (a, w) in c.iter().enumerate() {
                    let what = format!("omega[{i}][{j}][{a}]");
                    coords.check_over_jet(&what, w)?;
                    if let Some(v) = w.free_vars().into_iter().find(|v| coords.is_jet_name(v)) {
                        return Err(JetError::ForeignVariable {
                            component: what,
                            name: v,
                        });
                    }
                }
            }
        }
        Ok(Connection { coeffs })
    }

    pub fn zero(coords: &JetCoords) -> Connection {
        let (n, m) = (coords.target_dim(), coords.source_dim());
        Connection {
            coeffs: vec![vec![vec![Expr::zero(); m]; n]; n],
        }
    }

    pub fn coeff(&self, i: usize, j: usize, a: usize) -> &Expr {
        &self.coeffs[i][j][a]
    }

    fn restrict(&self, s: &JetSection) -> Vec<Vec<Vec<Expr>>> {
        let sub = s.substitution();
        self.coeffs
            .iter()
            .map(|r| r.iter().map(|c| c.iter().map(|w| w.substitute(&sub)).collect()).collect())
            .collect()
    }
}

/// Components of a 1-form on the target along a section, functions of `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetOneForm(pub Vec<Expr>);

impl TargetOneForm {
    pub fn components(&self) -> &[Expr] {
        &self.0
    }

    /// `Σᵢ αᵢ δxⁱ`.
    pub fn pair(&self, dx: &[Expr]) -> Expr {
        Expr::sum(self.0.iter().zip(dx).map(|(a, d)| a * d))
    }

    pub fn max_abs(&self, source: &[&str], domain: &ParamDomain) -> Result<GridMax, JetError> {
        domain.expect_dim(source.len())?;
        Ok(grid::max_abs(&self.0, source, domain)?)
    }
}

fn check_compatible(phi: &DynamicalForm, s: &JetSection) -> Result<(), JetError> {
    if phi.coords != *s.coords() {
        return Err(shape_err(
            format!("{:?}", s.coords()),
            format!("{:?}", phi.coords),
        ));
    }
    Ok(())
}

fn check_variation(s: &JetSection, dx: &[Expr], djet: Option<&[Vec<Expr>]>) -> Result<(), JetError> {
    let (n, m) = (s.target_dim(), s.source_dim());
    if dx.len() != n {
        return Err(shape_err(format!("{n} displacement components"), dx.len()));
    }
    if let Some(dj) = djet {
        if dj.len() != n || dj.iter().any(|r| r.len() != m) {
            return Err(shape_err(format!("{n}x{m} jet displacements"), dj.len()));
        }
    }
    let coords = s.coords();
    for (i, d) in dx.iter().enumerate() {
        coords.check_over_source(&format!("dx[{i}]"), d)?;
    }
    Ok(())
}

/// Compose `φ` with the section `s`.
pub fn restrict(phi: &DynamicalForm, s: &JetSection) -> Result<RestrictedForm, JetError> {
    check_compatible(phi, s)?;
    let sub = s.substitution();
    Ok(RestrictedForm {
        force: phi.force.iter().map(|f| f.substitute(&sub)).collect(),
        stress: phi
            .stress
            .iter()
            .map(|r| r.iter().map(|p| p.substitute(&sub)).collect())
            .collect(),
    })
}

/// `φ[δξ] = Fᵢ δxⁱ + Πᵢᵃ δxᵢᵃ`, with `φ` restricted to `s`.
pub fn virtual_work_density(
    phi: &DynamicalForm,
    var: &Variation,
    s: &JetSection,
) -> Result<Expr, JetError> {
    check_variation(s, &var.dx, Some(&var.djet))?;
    let r = restrict(phi, s)?;
    let forces = r.force.iter().zip(&var.dx).map(|(f, d)| f * d);
    let stresses = r
        .stress
        .iter()
        .zip(&var.djet)
        .flat_map(|(pr, dr)| pr.iter().zip(dr).map(|(p, d)| p * d));
    Ok(Expr::sum(forces.chain(stresses)))
}

/// The 1-jet prolongation `δ¹x` of a displacement `δxⁱ(u)`.
pub fn prolong_variation(coords: &JetCoords, dx: Vec<Expr>) -> Variation {
    let djet = dx
        .iter()
        .map(|d| coords.source().iter().map(|u| d.diff(u)).collect())
        .collect();
    Variation { dx, djet }
}

/// `Dξ = δxᵢᵃ − ∂ₐδxⁱ`; zero exactly for prolonged variations.
pub fn variation_spencer(var: &Variation, coords: &JetCoords) -> Vec<Vec<Expr>> {
    var.dx
        .iter()
        .zip(&var.djet)
        .map(|(d, row)| {
            row.iter()
                .zip(coords.source())
                .map(|(dj, u)| dj - &d.diff(u))
                .collect()
        })
        .collect()
}

/// Variation built from a connection: `δxᵢᵃ = ∂ₐδxⁱ + ωⁱⱼₐ δxʲ` with `ω`
/// restricted to `s`.
pub fn covariant_variation(
    dx: Vec<Expr>,
    omega: &Connection,
    s: &JetSection,
) -> Result<Variation, JetError> {
    check_variation(s, &dx, None)?;
    let w = omega.restrict(s);
    let source = s.coords().source();
    let djet = (0..dx.len())
        .map(|i| {
            source
                .iter()
                .enumerate()
                .map(|(a, u)| {
                    let twist = Expr::sum(dx.iter().enumerate().map(|(j, d)| &w[i][j][a] * d));
                    dx[i].diff(u) + twist
                })
                .collect()
        })
        .collect();
    Ok(Variation { dx, djet })
}

/// `D*φ = (Fᵢ − ∂ₐΠᵢᵃ) dxⁱ` along `s`.
pub fn adjoint(phi: &DynamicalForm, s: &JetSection) -> Result<TargetOneForm, JetError> {
    let r = restrict(phi, s)?;
    let source = s.coords().source();
    Ok(TargetOneForm(
        r.force
            .iter()
            .zip(&r.stress)
            .map(|(f, row)| {
                let div = Expr::sum(row.iter().zip(source).map(|(p, u)| p.diff(u)));
                f - &div
            })
            .collect(),
    ))
}

/// `D̄*φ = (Fᵢ − ∇ₐΠᵢᵃ) dxⁱ` with `∇ₐΠᵢᵃ = ∂ₐΠᵢᵃ − ωʲᵢₐ Πⱼᵃ`.
pub fn covariant_adjoint(
    phi: &DynamicalForm,
    s: &JetSection,
    omega: &Connection,
) -> Result<TargetOneForm, JetError> {
    let r = restrict(phi, s)?;
    let w = omega.restrict(s);
    let source = s.coords().source();
    let n = r.force.len();
    Ok(TargetOneForm(
        (0..n)
            .map(|i| {
                let cov_div = Expr::sum(source.iter().enumerate().map(|(a, u)| {
                    let correction =
                        Expr::sum((0..n).map(|j| &w[j][i][a] * &r.stress[j][a]));
                    r.stress[i][a].diff(u) - correction
                }));
                &r.force[i] - &cov_div
            })
            .collect(),
    ))
}

/// The divergence `∂ₐ(Πᵢᵃ δxⁱ)` along `s`.
pub fn divergence_term(phi: &DynamicalForm, s: &JetSection, dx: &[Expr]) -> Result<Expr, JetError> {
    check_variation(s, dx, None)?;
    let r = restrict(phi, s)?;
    Ok(Expr::sum(s.coords().source().iter().enumerate().map(|(a, u)| {
        Expr::sum(r.stress.iter().zip(dx).map(|(row, d)| &row[a] * d)).diff(u)
    })))
}

/// Grid maximum of `|(D*φ)ᵢ|`; zero certifies `Fᵢ = ∂ₐΠᵢᵃ` on the grid.
pub fn balance_residual(
    phi: &DynamicalForm,
    s: &JetSection,
    domain: &ParamDomain,
) -> Result<GridMax, JetError> {
    adjoint(phi, s)?.max_abs(&s.coords().source_refs(), domain)
}

/// Total virtual work split by integration by parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualWork {
    /// `∫ Σᵢ (D*φ)ᵢ δxⁱ`
    pub interior: f64,
    /// `Σₐ ∫_{∂ₐ} Πᵢᵃ δxⁱ`, upper faces positive and lower faces negative.
    pub boundary: f64,
    /// `∫ φ[δ¹x]` computed directly.
    pub total: f64,
}

impl VirtualWork {
    /// Quadrature defect of the integration-by-parts identity.
    pub fn defect(&self) -> f64 {
        (self.total - self.interior - self.boundary).abs()
    }
}

/// Integrate a function of `u` over one face of the domain.
pub(crate) fn face_integral(
    integrand: &Expr,
    source: &[&str],
    domain: &ParamDomain,
    axis: usize,
    upper: bool,
) -> Result<f64, JetError> {
    let (face, value) = domain.face(axis, upper);
    let mut pin = std::collections::HashMap::new();
    pin.insert(source[axis].to_string(), Expr::constant(value));
    let on_face = integrand.substitute(&pin);
    let rest: Vec<&str> = source
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != axis)
        .map(|(_, u)| *u)
        .collect();
    Ok(match face {
        Some(face) => grid::integrate(&on_face, &rest, &face)?,
        None => on_face.eval(&crate::expr::Binding::new())?,
    })
}

pub fn total_virtual_work(
    phi: &DynamicalForm,
    s: &JetSection,
    dx: &[Expr],
    domain: &ParamDomain,
) -> Result<VirtualWork, JetError> {
    check_variation(s, dx, None)?;
    let source = s.coords().source_refs();
    domain.expect_dim(source.len())?;
    let r = restrict(phi, s)?;

    let interior_density = adjoint(phi, s)?.pair(dx);
    let interior = grid::integrate(&interior_density, &source, domain)?;

    let mut boundary = 0.0;
    for a in 0..source.len() {
        let flux = Expr::sum(r.stress.iter().zip(dx).map(|(row, d)| &row[a] * d));
        boundary += face_integral(&flux, &source, domain, a, true)?;
        boundary -= face_integral(&flux, &source, domain, a, false)?;
    }

    let var = prolong_variation(s.coords(), dx.to_vec());
    let total = grid::integrate(&virtual_work_density(phi, &var, s)?, &source, domain)?;
    Ok(VirtualWork {
        interior,
        boundary,
        total,
    })
}
