//! Least action as a special dynamical state `φ = dℒ`.

use crate::dynamics::{self, DynamicalForm, TargetOneForm, VirtualWork};
use crate::expr::Expr;
use crate::grid::{self, ParamDomain};
use crate::jet::{prolong, shape_err, JetCoords, JetError, JetSection, SmoothMap};

/// A scalar `ℒ(u, x, xᵤ)` on the jet manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianDensity {
    coords: JetCoords,
    density: Expr,
}

impl LagrangianDensity {
    pub fn new(coords: JetCoords, density: Expr) -> Result<LagrangianDensity, JetError> {
        coords.check_over_jet("L", &density)?;
        Ok(LagrangianDensity { coords, density })
    }

    pub fn coords(&self) -> &JetCoords {
        &self.coords
    }

    pub fn density(&self) -> &Expr {
        &self.density
    }
}

/// `dℒ` read as a dynamical state: `Fᵢ = ∂ℒ/∂xⁱ`, `Πᵢᵃ = ∂ℒ/∂xᵢᵃ`.
pub fn exterior_of_lagrangian(l: &LagrangianDensity) -> DynamicalForm {
    let c = &l.coords;
    let force = c.target().iter().map(|x| l.density.diff(x)).collect();
    let stress = (0..c.target_dim())
        .map(|i| {
            (0..c.source_dim())
                .map(|a| l.density.diff(c.jet_name(i, a)))
                .collect()
        })
        .collect();
    DynamicalForm::new(c.clone(), force, stress).expect("partials stay over the jet coordinates")
}

/// `δℒ/δxⁱ = ∂ℒ/∂xⁱ − dₐ(∂ℒ/∂xᵢᵃ)` along `s`, computed from the partials
/// of `ℒ` directly rather than through [`dynamics::adjoint`].
pub fn variational_derivative(
    l: &LagrangianDensity,
    s: &JetSection,
) -> Result<TargetOneForm, JetError> {
    if l.coords != *s.coords() {
        return Err(shape_err(format!("{:?}", s.coords()), format!("{:?}", l.coords)));
    }
    let c = &l.coords;
    let comps = c
        .target()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let direct = s.restrict(&l.density.diff(x));
            let flux = Expr::sum(c.source().iter().enumerate().map(|(a, u)| {
                s.restrict(&l.density.diff(c.jet_name(i, a))).diff(u)
            }));
            direct - flux
        })
        .collect();
    Ok(TargetOneForm(comps))
}

/// `S[f] = ∫ ℒ(j¹f)` by the trapezoid rule.
pub fn action(l: &LagrangianDensity, f: &SmoothMap, domain: &ParamDomain) -> Result<f64, JetError> {
    let s = prolong(f);
    if l.coords != *s.coords() {
        return Err(shape_err(format!("{:?}", s.coords()), format!("{:?}", l.coords)));
    }
    let source = l.coords.source_refs();
    domain.expect_dim(source.len())?;
    Ok(grid::integrate(&s.restrict(&l.density), &source, domain)?)
}

/// The first variation `δS[f](δx)`, split into interior and boundary parts.
pub fn first_variation(
    l: &LagrangianDensity,
    f: &SmoothMap,
    dx: &[Expr],
    domain: &ParamDomain,
) -> Result<VirtualWork, JetError> {
    dynamics::total_virtual_work(&exterior_of_lagrangian(l), &prolong(f), dx, domain)
}

/// Central difference `(S[f + εδx] − S[f − εδx]) / 2ε`.
pub fn action_directional_derivative(
    l: &LagrangianDensity,
    f: &SmoothMap,
    dx: &[Expr],
    domain: &ParamDomain,
    eps: f64,
) -> Result<f64, JetError> {
    if dx.len() != f.position().len() {
        return Err(shape_err(f.position().len(), dx.len()));
    }
    let shifted = |sign: f64| {
        let pos = f
            .position()
            .iter()
            .zip(dx)
            .map(|(x, d)| x + &(sign * eps * d))
            .collect();
        SmoothMap::new(f.coords().clone(), pos)
    };
    let plus = action(l, &shifted(1.0)?, domain)?;
    let minus = action(l, &shifted(-1.0)?, domain)?;
    Ok((plus - minus) / (2.0 * eps))
}

/// The Euler-Lagrange operator in jet coordinates, one entry per target
/// coordinate: `(∂ℒ/∂xⁱ, [∂ℒ/∂xᵢᵃ]ₐ)`.
pub fn euler_lagrange_parts(l: &LagrangianDensity) -> Vec<(Expr, Vec<Expr>)> {
    let phi = exterior_of_lagrangian(l);
    phi.force()
        .iter()
        .cloned()
        .zip(phi.stress().iter().cloned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Binding;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn line() -> JetCoords {
        JetCoords::with_jet_names(vec!["t".into()], vec!["x".into()], vec![vec!["v".into()]]).unwrap()
    }

    fn lag(src: &str) -> LagrangianDensity {
        LagrangianDensity::new(line(), p(src)).unwrap()
    }

    fn path(x: &str) -> SmoothMap {
        SmoothMap::new(line(), vec![p(x)]).unwrap()
    }

    fn at(e: &Expr, t: f64) -> f64 {
        e.eval(&Binding::from_pairs(&[("t", t)])).unwrap()
    }

    #[test]
    fn partials_of_oscillator() {
        let phi = exterior_of_lagrangian(&lag("v^2/2 - x^2/2"));
        assert_eq!(phi.force()[0], p("-x").simplify());
        assert_eq!(phi.stress()[0][0], Expr::var("v"));
        let phi = exterior_of_lagrangian(&lag("v^2/2"));
        assert!(phi.force()[0].is_zero());
    }

    #[test]
    fn partials_of_string() {
        let c = JetCoords::new(&["t", "x"], &["psi"]).unwrap();
        let l = LagrangianDensity::new(c, p("(psi_t^2 - psi_x^2)/2")).unwrap();
        let phi = exterior_of_lagrangian(&l);
        let b = Binding::from_pairs(&[("psi_t", 0.3), ("psi_x", -1.1)]);
        assert_eq!(phi.stress()[0][0].eval(&b).unwrap(), 0.3);
        assert_eq!(phi.stress()[0][1].eval(&b).unwrap(), 1.1);
    }

    #[test]
    fn euler_lagrange_along_sections() {
        let l = lag("v^2/2 - x^2/2");
        let on = JetSection::new(line(), vec![p("cos(t)")], vec![vec![p("-sin(t)")]]).unwrap();
        let d = variational_derivative(&l, &on).unwrap();
        for t in [0.0, 0.4, 2.0] {
            assert!(at(&d.0[0], t).abs() < 1e-15);
        }
        let off = JetSection::new(line(), vec![p("t")], vec![vec![p("1")]]).unwrap();
        let d = variational_derivative(&l, &off).unwrap();
        assert_eq!(at(&d.0[0], 0.6), -0.6);
    }

    #[test]
    fn actions() {
        let d = ParamDomain::interval(0.0, 1.0, 201).unwrap();
        assert!((action(&lag("1"), &path("t"), &d).unwrap() - 1.0).abs() < 1e-13);
        assert!((action(&lag("v^2/2"), &path("t"), &d).unwrap() - 0.5).abs() < 1e-13);
        let s = action(&lag("v^2/2"), &path("t^2"), &d).unwrap();
        // trapezoid error for 2t^2 is h^2/3 * (f'(1) - f'(0)) / 4
        assert!((s - 2.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn first_variations() {
        let d = ParamDomain::interval(0.0, 1.0, 401).unwrap();
        let w = first_variation(&lag("v^2/2"), &path("t^2"), &[Expr::zero()], &d).unwrap();
        assert_eq!((w.interior, w.boundary), (0.0, 0.0));

        let w = first_variation(&lag("v^2/2"), &path("t^2"), &[p("t*(1-t)")], &d).unwrap();
        assert!((w.interior + 1.0 / 3.0).abs() < 1e-5);
        assert!(w.boundary.abs() < 1e-15);

        let w = first_variation(&lag("v^2/2 - x^2/2"), &path("sin(t)"), &[p("t*(1-t)")], &d).unwrap();
        assert!(w.interior.abs() <= 1e-8);
    }

    #[test]
    fn interior_matches_finite_difference() {
        let d = ParamDomain::interval(0.0, 1.0, 401).unwrap();
        let l = lag("v^2/2 - x^4/4 + t*x*v");
        let f = path("t^2 + 0.3*t");
        let dx = [p("sin(3.14159265358979*t)")];
        let w = first_variation(&l, &f, &dx, &d).unwrap();
        let fd = action_directional_derivative(&l, &f, &dx, &d, 1e-5).unwrap();
        assert!((w.interior + w.boundary - fd).abs() <= 1e-5 * (1.0 + fd.abs()));
    }

    #[test]
    fn unknown_symbols_rejected() {
        let l = LagrangianDensity::new(line(), p("m*v^2/2")).unwrap_err();
        assert!(matches!(l, JetError::ForeignVariable { .. }));
    }
}
