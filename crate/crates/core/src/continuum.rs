//! Deformable media: strain, compatibility and balance laws.
//!
//! Spatial indices are raised and lowered with the Euclidean metric, so
//! `σⁱⱼ` and `σᵢⱼ` are the same array `stress[i][j]`. Strains follow the
//! convention `2uᵢ,ⱼ = eᵢⱼ + θᵢⱼ`, which makes `e` twice the engineering
//! small strain. Medium fields depend on the time variable `t` and the
//! spatial coordinates.

use thiserror::Error;

use crate::expr::{Binding, EvalError, Expr};
use crate::grid::{self, DomainError, GridMax, ParamDomain};
use crate::jet::JetError;

pub type Matrix = Vec<Vec<Expr>>;

/// Name of the time variable for media.
pub const TIME: &str = "t";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContinuumError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("{what} is not symmetric: defect {defect:e} at {at:?}")]
    NotSymmetric { what: String, defect: f64, at: Vec<f64> },
    #[error("momentum differs from density times velocity by {defect:e} at {at:?}")]
    InconsistentMomentum { defect: f64, at: Vec<f64> },
    #[error("medium has no {0}")]
    MissingField(&'static str),
}

impl From<EvalError> for ContinuumError {
    fn from(e: EvalError) -> Self {
        ContinuumError::Jet(e.into())
    }
}

impl From<DomainError> for ContinuumError {
    fn from(e: DomainError) -> Self {
        ContinuumError::Jet(e.into())
    }
}

fn shape(expected: impl ToString, got: impl ToString) -> ContinuumError {
    crate::jet::shape_err(expected, got).into()
}

fn check_vars<'a>(
    allowed: &[String],
    named: impl IntoIterator<Item = (String, &'a Expr)>,
) -> Result<(), ContinuumError> {
    for (what, e) in named {
        if let Some(name) = e.free_vars().into_iter().find(|v| !allowed.contains(v)) {
            return Err(JetError::ForeignVariable {
                component: what,
                name,
            }
            .into());
        }
    }
    Ok(())
}

fn matrix_entries<'a>(what: &'a str, m: &'a Matrix) -> impl Iterator<Item = (String, &'a Expr)> + 'a {
    m.iter().enumerate().flat_map(move |(i, r)| {
        r.iter()
            .enumerate()
            .map(move |(j, e)| (format!("{what}[{i}][{j}]"), e))
    })
}

fn is_square(m: &Matrix, n: usize) -> bool {
    m.len() == n && m.iter().all(|r| r.len() == n)
}

/// Deterministic sample points in `[-1, 1]^dim`.
fn probe_points(dim: usize, count: usize) -> impl Iterator<Item = Vec<f64>> {
    (0..count).map(move |k| {
        (0..dim)
            .map(|i| {
                let phase = (k as f64 + 0.5) * (0.618_033_988_75 + 0.137 * i as f64);
                2.0 * phase.fract() - 1.0
            })
            .collect()
    })
}

fn bind(vars: &[String], at: &[f64]) -> Binding {
    let mut b = Binding::new();
    for (v, x) in vars.iter().zip(at) {
        b.set(v, *x);
    }
    b
}

/// Reject `m` unless `m = mᵀ`, symbolically or at 50 probe points.
fn check_symmetric(what: &str, m: &Matrix, vars: &[String]) -> Result<(), ContinuumError> {
    let n = m.len();
    let pairs: Vec<Expr> = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| &m[i][j] - &m[j][i])
        .filter(|d| !d.simplify().is_zero())
        .collect();
    if pairs.is_empty() {
        return Ok(());
    }
    for at in probe_points(vars.len(), 50) {
        let b = bind(vars, &at);
        for d in &pairs {
            let Ok(v) = d.eval(&b) else { continue };
            if v.abs() > 1e-12 {
                return Err(ContinuumError::NotSymmetric {
                    what: what.into(),
                    defect: v.abs(),
                    at,
                });
            }
        }
    }
    Ok(())
}

/// A displacement field `uⁱ(x)` on `m`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    space: Vec<String>,
    components: Vec<Expr>,
}

impl DisplacementField {
    pub fn new(space: &[&str], components: Vec<Expr>) -> Result<DisplacementField, ContinuumError> {
        let space: Vec<String> = space.iter().map(|s| s.to_string()).collect();
        if components.len() != space.len() || space.is_empty() {
            return Err(shape(format!("{} components", space.len()), components.len()));
        }
        check_vars(
            &space,
            components.iter().enumerate().map(|(i, e)| (format!("u[{i}]"), e)),
        )?;
        Ok(DisplacementField { space, components })
    }

    pub fn space(&self) -> &[String] {
        &self.space
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }
}

/// Strain `eᵢⱼ = uᵢ,ⱼ + uⱼ,ᵢ` and rotation `θᵢⱼ = uᵢ,ⱼ − uⱼ,ᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainState {
    pub strain: Matrix,
    pub rotation: Matrix,
}

fn gradient(v: &[Expr], space: &[String]) -> Matrix {
    v.iter()
        .map(|c| space.iter().map(|x| c.diff(x)).collect())
        .collect()
}

pub fn strain_rotation_split(u: &DisplacementField) -> StrainState {
    let g = gradient(&u.components, &u.space);
    let m = g.len();
    let strain = (0..m)
        .map(|i| (0..m).map(|j| &g[i][j] + &g[j][i]).collect())
        .collect();
    let rotation = (0..m)
        .map(|i| (0..m).map(|j| &g[i][j] - &g[j][i]).collect())
        .collect();
    StrainState { strain, rotation }
}

/// `(L_v g)ᵢⱼ = vᵏ∂ₖgᵢⱼ + gₖⱼ∂ᵢvᵏ + gᵢₖ∂ⱼvᵏ`.
pub fn lie_strain(v: &[Expr], g: &Matrix, space: &[&str]) -> Result<Matrix, ContinuumError> {
    let space: Vec<String> = space.iter().map(|s| s.to_string()).collect();
    let m = space.len();
    if v.len() != m || !is_square(g, m) {
        return Err(shape(format!("{m} components and {m}x{m} metric"), v.len()));
    }
    check_vars(&space, v.iter().enumerate().map(|(i, e)| (format!("v[{i}]"), e)))?;
    check_vars(&space, matrix_entries("g", g))?;
    check_symmetric("metric", g, &space)?;
    let dv = gradient(v, &space);
    Ok((0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let transport = Expr::sum((0..m).map(|k| &v[k] * &g[i][j].diff(&space[k])));
                    let left = Expr::sum((0..m).map(|k| &g[k][j] * &dv[k][i]));
                    let right = Expr::sum((0..m).map(|k| &g[i][k] * &dv[k][j]));
                    transport + left + right
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompatibilityForm {
    /// `eᵢⱼ,ₖₗ + eₖₗ,ᵢⱼ − eᵢₖ,ⱼₗ − eⱼₗ,ᵢₖ`, annihilated by every strain.
    Standard,
    /// The cyclic sum `eᵢⱼ,ₖₗ + eⱼₖ,ₗᵢ + eₗᵢ,ⱼₖ`, kept for comparison only.
    Cyclic,
}

/// All `m⁴` components `R[i][j][k][l]`, flattened row-major.
pub fn compatibility_operator(
    e: &Matrix,
    space: &[&str],
    form: CompatibilityForm,
) -> Result<Vec<Expr>, ContinuumError> {
    let owned: Vec<String> = space.iter().map(|s| s.to_string()).collect();
    let m = space.len();
    if !is_square(e, m) {
        return Err(shape(format!("{m}x{m} strain"), e.len()));
    }
    check_vars(&owned, matrix_entries("e", e))?;
    check_symmetric("strain", e, &owned)?;
    let d2 = |a: usize, b: usize, c: usize, d: usize| e[a][b].diff(space[c]).diff(space[d]);
    let mut out = Vec::with_capacity(m.pow(4));
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    out.push(match form {
                        CompatibilityForm::Standard => {
                            d2(i, j, k, l) + d2(k, l, i, j) - d2(i, k, j, l) - d2(j, l, i, k)
                        }
                        CompatibilityForm::Cyclic => d2(i, j, k, l) + d2(j, k, l, i) + d2(l, i, j, k),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Grid maximum of the standard compatibility operator. The reported
/// component is the flat index `((i m + j) m + k) m + l`.
pub fn saint_venant_residual(e: &Matrix, space: &[&str], domain: &ParamDomain) -> Result<GridMax, ContinuumError> {
    saint_venant_residual_form(e, space, domain, CompatibilityForm::Standard)
}

pub fn saint_venant_residual_form(
    e: &Matrix,
    space: &[&str],
    domain: &ParamDomain,
    form: CompatibilityForm,
) -> Result<GridMax, ContinuumError> {
    domain.expect_dim(space.len())?;
    let ops = compatibility_operator(e, space, form)?;
    Ok(grid::max_abs(&ops, space, domain)?)
}

/// Fields of a medium over `(t, x¹..xᵐ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumState {
    space: Vec<String>,
    pub density: Expr,
    pub momentum: Vec<Expr>,
    pub velocity: Option<Vec<Expr>>,
    /// `stress[i][j] = σⁱⱼ`; divergence is taken over `j`.
    pub stress: Matrix,
    pub force: Vec<Expr>,
    /// `couple[j][i][k] = μⱼⁱᵏ`
    pub couple: Option<Vec<Matrix>>,
    /// `torque[j][i] = τⱼⁱ`
    pub torque: Option<Matrix>,
    /// `spin[j][i] = Lⱼⁱ`
    pub spin: Option<Matrix>,
}

impl MediumState {
    pub fn new(
        space: &[&str],
        density: Expr,
        momentum: Vec<Expr>,
        stress: Matrix,
        force: Vec<Expr>,
    ) -> Result<MediumState, ContinuumError> {
        let m = space.len();
        if momentum.len() != m || force.len() != m || !is_square(&stress, m) {
            return Err(shape(format!("{m}-vectors and {m}x{m} stress"), "mismatched fields"));
        }
        let state = MediumState {
            space: space.iter().map(|s| s.to_string()).collect(),
            density,
            momentum,
            velocity: None,
            stress,
            force,
            couple: None,
            torque: None,
            spin: None,
        };
        let vars = state.vars();
        check_vars(&vars, [("rho".to_string(), &state.density)])?;
        check_vars(&vars, state.momentum.iter().enumerate().map(|(i, e)| (format!("p[{i}]"), e)))?;
        check_vars(&vars, state.force.iter().enumerate().map(|(i, e)| (format!("f[{i}]"), e)))?;
        check_vars(&vars, matrix_entries("sigma", &state.stress))?;
        Ok(state)
    }

    pub fn with_velocity(mut self, velocity: Vec<Expr>) -> Result<MediumState, ContinuumError> {
        if velocity.len() != self.dim() {
            return Err(shape(format!("{} velocity components", self.dim()), velocity.len()));
        }
        check_vars(&self.vars(), velocity.iter().enumerate().map(|(i, e)| (format!("v[{i}]"), e)))?;
        self.velocity = Some(velocity);
        Ok(self)
    }

    pub fn with_couples(mut self, couple: Vec<Matrix>, torque: Matrix, spin: Matrix) -> Result<MediumState, ContinuumError> {
        let m = self.dim();
        if couple.len() != m || !couple.iter().all(|c| is_square(c, m)) || !is_square(&torque, m) || !is_square(&spin, m) {
            return Err(shape(format!("{m}x{m}x{m} couple stress and {m}x{m} torque and spin"), "mismatched fields"));
        }
        let vars = self.vars();
        for (j, c) in couple.iter().enumerate() {
            check_vars(&vars, matrix_entries("mu", c).map(|(w, e)| (format!("{w}@{j}"), e)))?;
        }
        check_vars(&vars, matrix_entries("tau", &torque))?;
        check_vars(&vars, matrix_entries("L", &spin))?;
        self.couple = Some(couple);
        self.torque = Some(torque);
        self.spin = Some(spin);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn space(&self) -> &[String] {
        &self.space
    }

    /// `[t, x¹, …, xᵐ]`
    pub fn vars(&self) -> Vec<String> {
        std::iter::once(TIME.to_string()).chain(self.space.iter().cloned()).collect()
    }

    fn stress_divergence(&self) -> Vec<Expr> {
        self.stress
            .iter()
            .map(|row| Expr::sum(row.iter().zip(&self.space).map(|(s, x)| s.diff(x))))
            .collect()
    }
}

fn sweep(exprs: &[Expr], state: &MediumState, domain: &ParamDomain) -> Result<GridMax, ContinuumError> {
    let vars = state.vars();
    let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
    domain.expect_dim(refs.len())?;
    Ok(grid::max_abs(exprs, &refs, domain)?)
}

/// `fᵢ − ∂ₜpᵢ − σⁱⱼ,ⱼ`
pub fn momentum_defect(m: &MediumState) -> Vec<Expr> {
    m.force
        .iter()
        .zip(&m.momentum)
        .zip(m.stress_divergence())
        .map(|((f, p), div)| f - &p.diff(TIME) - div)
        .collect()
}

/// `∂ₜρ + pⁱ,ᵢ`
pub fn mass_defect(m: &MediumState) -> Expr {
    m.density.diff(TIME) + Expr::sum(m.momentum.iter().zip(&m.space).map(|(p, x)| p.diff(x)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceDefects {
    pub momentum: GridMax,
    pub mass: GridMax,
}

/// Grid maxima of the Lagrangian momentum and mass defects.
pub fn lagrangian_balance_residual(m: &MediumState, domain: &ParamDomain) -> Result<BalanceDefects, ContinuumError> {
    Ok(BalanceDefects {
        momentum: sweep(&momentum_defect(m), m, domain)?,
        mass: sweep(&[mass_defect(m)], m, domain)?,
    })
}

/// `L_v pᵢ + σⁱⱼ,ⱼ − fᵢ` with `L_v pᵢ = ∂ₜpᵢ + vʲ ∂ⱼpᵢ`.
pub fn eulerian_defect(m: &MediumState) -> Result<Vec<Expr>, ContinuumError> {
    let v = m.velocity.as_ref().ok_or(ContinuumError::MissingField("velocity"))?;
    Ok(m.momentum
        .iter()
        .zip(m.stress_divergence())
        .zip(&m.force)
        .map(|((p, div), f)| {
            let advected = p.diff(TIME) + Expr::sum(v.iter().zip(&m.space).map(|(vj, x)| vj * &p.diff(x)));
            advected + div - f
        })
        .collect())
}

pub fn eulerian_balance_residual(m: &MediumState, domain: &ParamDomain) -> Result<GridMax, ContinuumError> {
    sweep(&eulerian_defect(m)?, m, domain)
}

/// Mass, momentum and stress combined into one `(m+1)×(m+1)` array over
/// `(t, x¹..xᵐ)`, with the force extended by a zero time component.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedStressTensor {
    vars: Vec<String>,
    /// `stress[μ][ν]`, divergence over `ν`
    pub stress: Matrix,
    pub source: Vec<Expr>,
}

impl GeneralizedStressTensor {
    /// `r_μ = f_μ − ∂_ν Π[μ][ν]`. Row 0 is the negated mass defect and the
    /// remaining rows are the momentum defects.
    pub fn residual(&self) -> Vec<Expr> {
        self.source
            .iter()
            .zip(&self.stress)
            .map(|(f, row)| f - &Expr::sum(row.iter().zip(&self.vars).map(|(p, x)| p.diff(x))))
            .collect()
    }
}

/// Build the unified tensor, after checking `p = ρv` on `domain`.
pub fn assemble_unified(m: &MediumState, domain: &ParamDomain) -> Result<GeneralizedStressTensor, ContinuumError> {
    let v = m.velocity.as_ref().ok_or(ContinuumError::MissingField("velocity"))?;
    let rho_v: Vec<Expr> = v.iter().map(|vi| &m.density * vi).collect();
    let gap: Vec<Expr> = m.momentum.iter().zip(&rho_v).map(|(p, q)| p - q).collect();
    let worst = sweep(&gap, m, domain)?;
    if !worst.within(1e-9) {
        return Err(ContinuumError::InconsistentMomentum {
            defect: worst.max_abs,
            at: worst.argmax,
        });
    }
    let n = m.dim();
    let mut stress = vec![vec![Expr::zero(); n + 1]; n + 1];
    stress[0][0] = m.density.clone();
    for i in 0..n {
        stress[0][i + 1] = rho_v[i].clone();
        stress[i + 1][0] = rho_v[i].clone();
        for j in 0..n {
            stress[i + 1][j + 1] = m.stress[i][j].clone();
        }
    }
    let source = std::iter::once(Expr::zero()).chain(m.force.iter().cloned()).collect();
    Ok(GeneralizedStressTensor {
        vars: m.vars(),
        stress,
        source,
    })
}

pub fn unified_balance_residual(m: &MediumState, domain: &ParamDomain) -> Result<Vec<GridMax>, ContinuumError> {
    let unified = assemble_unified(m, domain)?;
    let vars = m.vars();
    let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
    Ok(grid::max_abs_each(&unified.residual(), &refs, domain)?)
}

/// Symmetrize a generalized velocity block `[[1, 0], [vⁱ, xⁱⱼ]]`: the
/// mixed blocks become `x[0][j] + x[j][0]`, the spatial block `x + xᵀ`, and
/// the corner is kept.
pub fn velocity_strain(x: &Matrix) -> Result<Matrix, ContinuumError> {
    let n = x.len();
    if n == 0 || !is_square(x, n) {
        return Err(shape("square generalized velocity", n));
    }
    Ok((0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    if a == 0 && b == 0 {
                        x[0][0].clone()
                    } else {
                        &x[a][b] + &x[b][a]
                    }
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosseratDefects {
    pub force: GridMax,
    /// component index `j m + i` for `defect[j][i]`
    pub couple: GridMax,
}

/// `τⱼⁱ − ∂ₜLⱼⁱ − μⱼⁱᵏ,ₖ − (σⁱⱼ − σʲᵢ)`, indexed `[j][i]`.
pub fn couple_defect(m: &MediumState) -> Result<Matrix, ContinuumError> {
    let mu = m.couple.as_ref().ok_or(ContinuumError::MissingField("couple stress"))?;
    let tau = m.torque.as_ref().ok_or(ContinuumError::MissingField("torque"))?;
    let spin = m.spin.as_ref().ok_or(ContinuumError::MissingField("spin"))?;
    let n = m.dim();
    Ok((0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let div = Expr::sum((0..n).map(|k| mu[j][i][k].diff(&m.space[k])));
                    let skew = &m.stress[i][j] - &m.stress[j][i];
                    &tau[j][i] - &spin[j][i].diff(TIME) - div - skew
                })
                .collect()
        })
        .collect())
}

pub fn cosserat_balance_residual(m: &MediumState, domain: &ParamDomain) -> Result<CosseratDefects, ContinuumError> {
    let couple: Vec<Expr> = couple_defect(m)?.into_iter().flatten().collect();
    Ok(CosseratDefects {
        force: sweep(&momentum_defect(m), m, domain)?,
        couple: sweep(&couple, m, domain)?,
    })
}
