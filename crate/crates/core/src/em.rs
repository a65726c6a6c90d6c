//! Pre-metric electromagnetism on four-dimensional spacetime.
//!
//! Antisymmetric 2-index fields are stored as 6-vectors in the pair order
//! [`PAIRS`] `= (01, 02, 03, 23, 31, 12)`, 3-forms as 4-vectors in the order
//! [`TRIPLES`] `= (012, 013, 023, 123)`. Coordinates are [`COORDS`] with
//! `x⁰ = t`, and the volume element has `ε₀₁₂₃ = +1`.

use thiserror::Error;

use crate::expr::{Binding, EvalError, Expr};
use crate::grid::{self, DomainError, GridMax, ParamDomain};
use crate::jet::JetError;
pub use crate::wave::COORDS;

pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];
pub const TRIPLES: [(usize, usize, usize); 4] = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("index {0} is outside 0..3")]
    IndexOutOfRange(usize),
    #[error("expected a {expected:?} field, got {got:?}")]
    Variance { expected: Variance, got: Variance },
    #[error("metric is not symmetric")]
    NotSymmetric,
    #[error("metric is not Lorentzian at {at:?}")]
    NotLorentzian { at: Vec<f64> },
    #[error("constitutive map is singular at {at:?}")]
    Singular { at: Vec<f64> },
}

impl From<EvalError> for EmError {
    fn from(e: EvalError) -> Self {
        EmError::Jet(e.into())
    }
}

impl From<DomainError> for EmError {
    fn from(e: DomainError) -> Self {
        EmError::Jet(e.into())
    }
}

/// `ε_{κλμν}` with `ε₀₁₂₃ = +1`.
pub fn levi_civita(k: usize, l: usize, m: usize, n: usize) -> Result<i8, EmError> {
    let idx = [k, l, m, n];
    if let Some(&bad) = idx.iter().find(|&&i| i > 3) {
        return Err(EmError::IndexOutOfRange(bad));
    }
    Ok(epsilon(idx))
}

fn epsilon(idx: [usize; 4]) -> i8 {
    let mut sign = 1;
    for a in 0..4 {
        for b in a + 1..4 {
            if idx[a] == idx[b] {
                return 0;
            }
            if idx[a] > idx[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Position of `(μ, ν)` in [`PAIRS`] and the sign relating the stored
/// component to `X_{μν}`; `None` on the diagonal.
fn pair_slot(mu: usize, nu: usize) -> Option<(usize, f64)> {
    PAIRS.iter().enumerate().find_map(|(i, &(a, b))| {
        if (a, b) == (mu, nu) {
            Some((i, 1.0))
        } else if (b, a) == (mu, nu) {
            Some((i, -1.0))
        } else {
            None
        }
    })
}

/// `P[I][J] = ε(PAIRS[I], PAIRS[J])`, so that `(#A)_I = Σ_J P[I][J] A^J`.
fn hodge_matrix() -> [[f64; 6]; 6] {
    let mut p = [[0.0; 6]; 6];
    for (i, &(k, l)) in PAIRS.iter().enumerate() {
        for (j, &(m, n)) in PAIRS.iter().enumerate() {
            p[i][j] = epsilon([k, l, m, n]) as f64;
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    /// lower indices, `F_{μν}`
    Covariant,
    /// upper indices, `𝔥^{μν}`
    Contravariant,
}

fn check_spacetime(what: &str, e: &Expr) -> Result<(), EmError> {
    match e.free_vars().into_iter().find(|v| !COORDS.contains(&v.as_str())) {
        Some(name) => Err(JetError::ForeignVariable {
            component: what.into(),
            name,
        }
        .into()),
        None => Ok(()),
    }
}

/// An antisymmetric 2-index field.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2 {
    variance: Variance,
    comps: Vec<Expr>,
}

impl Field2 {
    pub fn new(variance: Variance, comps: Vec<Expr>) -> Result<Field2, EmError> {
        if comps.len() != 6 {
            return Err(crate::jet::shape_err("6 components", comps.len()).into());
        }
        for (e, (a, b)) in comps.iter().zip(PAIRS) {
            check_spacetime(&format!("[{a}{b}]"), e)?;
        }
        Ok(Field2 {
            variance,
            comps: comps.iter().map(Expr::simplify).collect(),
        })
    }

    pub fn zero(variance: Variance) -> Field2 {
        Field2 {
            variance,
            comps: vec![Expr::zero(); 6],
        }
    }

    /// Set the single component `(μ, ν)`, all others zero.
    pub fn single(variance: Variance, mu: usize, nu: usize, value: Expr) -> Result<Field2, EmError> {
        let (slot, sign) = pair_slot(mu, nu).ok_or(EmError::IndexOutOfRange(mu.max(nu)))?;
        let mut comps = vec![Expr::zero(); 6];
        comps[slot] = sign * value;
        Field2::new(variance, comps)
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    /// Stored components in [`PAIRS`] order.
    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// `X_{μν}` (or `X^{μν}`) with antisymmetry applied.
    pub fn get(&self, mu: usize, nu: usize) -> Expr {
        match pair_slot(mu, nu) {
            Some((slot, sign)) => sign * &self.comps[slot],
            None => Expr::zero(),
        }
    }

    fn expect(&self, v: Variance) -> Result<(), EmError> {
        if self.variance == v {
            Ok(())
        } else {
            Err(EmError::Variance {
                expected: v,
                got: self.variance,
            })
        }
    }

    pub fn sub(&self, other: &Field2) -> Result<Field2, EmError> {
        other.expect(self.variance)?;
        Ok(Field2 {
            variance: self.variance,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect(),
        })
    }
}

/// `(#A)_{κλ} = ½ ε_{κλμν} A^{μν}`.
pub fn poincare_iso(a: &Field2) -> Result<Field2, EmError> {
    a.expect(Variance::Contravariant)?;
    let p = hodge_matrix();
    Ok(Field2 {
        variance: Variance::Covariant,
        comps: (0..6)
            .map(|i| Expr::sum((0..6).map(|j| p[i][j] * &a.comps[j])))
            .collect(),
    })
}

/// Inverse of [`poincare_iso`]; the matrix is orthogonal so its inverse is
/// its transpose.
pub fn poincare_inverse(f: &Field2) -> Result<Field2, EmError> {
    f.expect(Variance::Covariant)?;
    let p = hodge_matrix();
    Ok(Field2 {
        variance: Variance::Contravariant,
        comps: (0..6)
            .map(|i| Expr::sum((0..6).map(|j| p[j][i] * &f.comps[j])))
            .collect(),
    })
}

/// Electric 1-form `Eᵢ = F₀ᵢ` and magnetic vector `Bⁱ = ½εᵢⱼₖF_{jk}`
/// (`B = (F₂₃, F₃₁, F₁₂)`).
pub fn spacetime_split(f: &Field2) -> Result<(Vec<Expr>, Vec<Expr>), EmError> {
    f.expect(Variance::Covariant)?;
    Ok((f.comps[..3].to_vec(), f.comps[3..].to_vec()))
}

/// Reassemble `F = θ⁰∧E + #B`.
pub fn field_assemble(e: &[Expr], b: &[Expr]) -> Result<Field2, EmError> {
    if e.len() != 3 || b.len() != 3 {
        return Err(crate::jet::shape_err("two 3-vectors", format!("{} and {}", e.len(), b.len())).into());
    }
    Field2::new(Variance::Covariant, e.iter().chain(b).cloned().collect())
}

/// `𝔥 = e₀∧D + #⁻¹H` with `𝔥^{0i} = Dⁱ` and the spatial block taken from
/// `H` given by its components `(H₂₃, H₃₁, H₁₂)`.
pub fn excitation_assemble(d: &[Expr], h: &[Expr]) -> Result<Field2, EmError> {
    if d.len() != 3 || h.len() != 3 {
        return Err(crate::jet::shape_err("two 3-vectors", format!("{} and {}", d.len(), h.len())).into());
    }
    Field2::new(Variance::Contravariant, d.iter().chain(h).cloned().collect())
}

/// Inverse of [`excitation_assemble`].
pub fn excitation_split(h: &Field2) -> Result<(Vec<Expr>, Vec<Expr>), EmError> {
    h.expect(Variance::Contravariant)?;
    Ok((h.comps[..3].to_vec(), h.comps[3..].to_vec()))
}

/// A totally antisymmetric covariant 3-form in [`TRIPLES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    pub comps: Vec<Expr>,
}

/// `(dF)_{λμν} = F_{μν},λ + F_{νλ},μ + F_{λμ},ν`.
pub fn exterior_derivative(f: &Field2) -> Result<Field3, EmError> {
    f.expect(Variance::Covariant)?;
    let d = |e: Expr, mu: usize| e.diff(COORDS[mu]);
    Ok(Field3 {
        comps: TRIPLES
            .iter()
            .map(|&(l, m, n)| d(f.get(m, n), l) + d(f.get(n, l), m) + d(f.get(l, m), n))
            .collect(),
    })
}

/// `F_{μν} = ∂_μA_ν − ∂_νA_μ`.
pub fn field_from_potential(a: &[Expr]) -> Result<Field2, EmError> {
    if a.len() != 4 {
        return Err(crate::jet::shape_err("4 potential components", a.len()).into());
    }
    let comps = PAIRS
        .iter()
        .map(|&(m, n)| a[n].diff(COORDS[m]) - a[m].diff(COORDS[n]))
        .collect();
    Field2::new(Variance::Covariant, comps)
}

fn sweep(exprs: &[Expr], domain: &ParamDomain) -> Result<GridMax, EmError> {
    domain.expect_dim(4)?;
    Ok(grid::max_abs(exprs, &COORDS, domain)?)
}

/// Grid maximum of `|F − dA|`.
pub fn potential_check(a: &[Expr], f: &Field2, domain: &ParamDomain) -> Result<GridMax, EmError> {
    let da = field_from_potential(a)?;
    sweep(f.sub(&da)?.components(), domain)
}

type Mat4 = [[f64; 4]; 4];

/// Eigenvalues of a symmetric 4×4 matrix by cyclic Jacobi rotations.
fn symmetric_eigenvalues(mut a: Mat4) -> [f64; 4] {
    for _ in 0..64 {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    [a[0][0], a[1][1], a[2][2], a[3][3]]
}

type Matrix = Vec<Vec<Expr>>;

fn minor(m: &Matrix, row: usize, col: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

fn determinant(m: &Matrix) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        n => Expr::sum((0..n).filter(|&j| !m[0][j].is_zero()).map(|j| {
            let term = &m[0][j] * &determinant(&minor(m, 0, j));
            if j % 2 == 0 {
                term
            } else {
                -term
            }
        })),
    }
}

/// A spacetime metric `g_{μν}` with symbolic inverse and `√−g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric4 {
    lower: Matrix,
    upper: Matrix,
    sqrt_neg_det: Expr,
}

impl Metric4 {
    pub fn new(g: Matrix) -> Result<Metric4, EmError> {
        if g.len() != 4 || g.iter().any(|r| r.len() != 4) {
            return Err(crate::jet::shape_err("4x4 metric", g.len()).into());
        }
        for (i, row) in g.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                check_spacetime(&format!("g[{i}][{j}]"), e)?;
                if j < i && !(e - &g[j][i]).simplify().is_zero() {
                    return Err(EmError::NotSymmetric);
                }
            }
        }
        let det = determinant(&g);
        let upper = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let cof = determinant(&minor(&g, j, i));
                        let signed = if (i + j) % 2 == 0 { cof } else { -cof };
                        signed / &det
                    })
                    .collect()
            })
            .collect();
        Ok(Metric4 {
            lower: g,
            upper,
            sqrt_neg_det: (-det).sqrt(),
        })
    }

    /// `η = diag(1, −1, −1, −1)`.
    pub fn minkowski() -> Metric4 {
        let g = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| match (i == j, i) {
                        (false, _) => Expr::zero(),
                        (true, 0) => Expr::one(),
                        (true, _) => Expr::constant(-1.0),
                    })
                    .collect()
            })
            .collect();
        Metric4::new(g).expect("minkowski metric is well formed")
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn upper(&self) -> &Matrix {
        &self.upper
    }

    pub fn sqrt_neg_det(&self) -> &Expr {
        &self.sqrt_neg_det
    }

    /// Verify one positive and three negative eigenvalues at every grid
    /// point.
    pub fn check(&self, domain: &ParamDomain) -> Result<(), EmError> {
        domain.expect_dim(4)?;
        for at in domain.points() {
            let b = bind(&at);
            let mut g = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    g[i][j] = self.lower[i][j].eval(&b)?;
                }
            }
            let ev = symmetric_eigenvalues(g);
            let pos = ev.iter().filter(|&&v| v > 1e-12).count();
            let neg = ev.iter().filter(|&&v| v < -1e-12).count();
            if (pos, neg) != (1, 3) {
                return Err(EmError::NotLorentzian { at });
            }
        }
        Ok(())
    }
}

fn bind(at: &[f64]) -> Binding {
    let pairs: Vec<(&str, f64)> = COORDS.iter().copied().zip(at.iter().copied()).collect();
    Binding::from_pairs(&pairs)
}

/// A local linear constitutive law `𝔥^{μν} = Σ_{κλ} χ^{κλμν} F_{κλ}`,
/// stored as `chi[J][I] = χ^{(J)(I)}` over [`PAIRS`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConstitutiveTensor {
    chi: Matrix,
}

impl ConstitutiveTensor {
    pub fn new(chi: Matrix) -> Result<ConstitutiveTensor, EmError> {
        if chi.len() != 6 || chi.iter().any(|r| r.len() != 6) {
            return Err(crate::jet::shape_err("6x6 constitutive entries", chi.len()).into());
        }
        for (j, row) in chi.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                check_spacetime(&format!("chi[{j}][{i}]"), e)?;
            }
        }
        Ok(ConstitutiveTensor { chi })
    }

    /// `χ^{κλμν} = ½√−g (g^{μκ}g^{νλ} − g^{νκ}g^{μλ})`.
    pub fn vacuum(g: &Metric4) -> ConstitutiveTensor {
        let u = &g.upper;
        let chi = PAIRS
            .iter()
            .map(|&(k, l)| {
                PAIRS
                    .iter()
                    .map(|&(m, n)| {
                        let d = &u[m][k] * &u[n][l] - &u[n][k] * &u[m][l];
                        0.5 * (&g.sqrt_neg_det * &d)
                    })
                    .collect()
            })
            .collect();
        ConstitutiveTensor { chi }
    }

    /// `χ^{κλμν}` with antisymmetry in each pair.
    pub fn entry(&self, k: usize, l: usize, m: usize, n: usize) -> Expr {
        match (pair_slot(k, l), pair_slot(m, n)) {
            (Some((j, s1)), Some((i, s2))) => (s1 * s2) * &self.chi[j][i],
            _ => Expr::zero(),
        }
    }

    /// `M[I][J] = 2 χ^{(J)(I)}`, so that `𝔥^I = Σ_J M[I][J] F_J`.
    pub fn matrix(&self) -> Matrix {
        (0..6)
            .map(|i| (0..6).map(|j| 2.0 * &self.chi[j][i]).collect())
            .collect()
    }

    pub fn apply(&self, f: &Field2) -> Result<Field2, EmError> {
        f.expect(Variance::Covariant)?;
        let m = self.matrix();
        Ok(Field2 {
            variance: Variance::Contravariant,
            comps: m
                .iter()
                .map(|row| Expr::sum(row.iter().zip(&f.comps).map(|(a, b)| a * b)))
                .collect(),
        })
    }

    /// Check that the 6×6 matrix is invertible at every grid point.
    pub fn check_invertible(&self, domain: &ParamDomain) -> Result<(), EmError> {
        domain.expect_dim(4)?;
        let m = self.matrix();
        for at in domain.points() {
            let b = bind(&at);
            let mut a = [[0.0; 6]; 6];
            for i in 0..6 {
                for j in 0..6 {
                    a[i][j] = m[i][j].eval(&b)?;
                }
            }
            let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
            if !(scale > 0.0) || lu_determinant(a).abs() <= 1e-12 * scale.powi(6) {
                return Err(EmError::Singular { at });
            }
        }
        Ok(())
    }
}

fn lu_determinant(mut a: [[f64; 6]; 6]) -> f64 {
    let mut det = 1.0;
    for c in 0..6 {
        let pivot = (c..6)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap_or(c);
        if a[pivot][c] == 0.0 {
            return 0.0;
        }
        if pivot != c {
            a.swap(pivot, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..6 {
            let factor = a[r][c] / a[c][c];
            for k in c..6 {
                a[r][k] -= factor * a[c][k];
            }
        }
    }
    det
}

/// `𝔥^{μν} = √−g g^{μκ}g^{νλ} F_{κλ}`.
pub fn vacuum_constitutive(g: &Metric4, f: &Field2) -> Result<Field2, EmError> {
    ConstitutiveTensor::vacuum(g).apply(f)
}

/// `#⁻¹` on 3-forms: `v^κ = (1/6) ε_{κλμν} T_{λμν}`.
fn hodge_inverse_3form(t: &Field3) -> Vec<Expr> {
    (0..4)
        .map(|k| {
            Expr::sum(
                TRIPLES
                    .iter()
                    .zip(&t.comps)
                    .map(|(&(l, m, n), c)| epsilon([k, l, m, n]) as f64 * c),
            )
        })
        .collect()
}

/// `δ𝔥 = #⁻¹ d # 𝔥`. With the conventions here this equals `∂_ν𝔥^{μν}`.
pub fn divergence(h: &Field2) -> Result<Vec<Expr>, EmError> {
    let t = exterior_derivative(&poincare_iso(h)?)?;
    Ok(hodge_inverse_3form(&t))
}

/// `∂_μ J^μ`.
pub fn vector_divergence(j: &[Expr]) -> Expr {
    Expr::sum(j.iter().zip(COORDS).map(|(c, x)| c.diff(x)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellReport {
    /// `|dF|`
    pub closure: GridMax,
    /// `|δ𝔥 − J|`
    pub source: GridMax,
    /// `|𝔥 − χ(F)|`
    pub constitutive: GridMax,
    /// `|δJ|`
    pub charge: GridMax,
}

impl MaxwellReport {
    pub fn all_within(&self, tol: f64) -> bool {
        [&self.closure, &self.source, &self.constitutive, &self.charge]
            .iter()
            .all(|g| g.within(tol))
    }
}

pub fn maxwell_residuals(
    f: &Field2,
    h: &Field2,
    j: &[Expr],
    chi: &ConstitutiveTensor,
    domain: &ParamDomain,
) -> Result<MaxwellReport, EmError> {
    if j.len() != 4 {
        return Err(crate::jet::shape_err("4 current components", j.len()).into());
    }
    for (mu, c) in j.iter().enumerate() {
        check_spacetime(&format!("J[{mu}]"), c)?;
    }
    let df = exterior_derivative(f)?;
    let dh: Vec<Expr> = divergence(h)?.iter().zip(j).map(|(a, b)| a - b).collect();
    let gap = h.sub(&chi.apply(f)?)?;
    Ok(MaxwellReport {
        closure: sweep(&df.comps, domain)?,
        source: sweep(&dh, domain)?,
        constitutive: sweep(gap.components(), domain)?,
        charge: sweep(&[vector_divergence(j)], domain)?,
    })
}

/// `½ F_{μν} 𝔥^{μν} = Σ_I F_I 𝔥^I`.
pub fn field_lagrangian(f: &Field2, h: &Field2) -> Result<Expr, EmError> {
    f.expect(Variance::Covariant)?;
    h.expect(Variance::Contravariant)?;
    Ok(Expr::sum(f.comps.iter().zip(&h.comps).map(|(a, b)| a * b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn ps(v: &[&str]) -> Vec<Expr> {
        v.iter().map(|s| p(s)).collect()
    }

    fn cov(v: &[&str]) -> Field2 {
        Field2::new(Variance::Covariant, ps(v)).unwrap()
    }

    fn con(v: &[&str]) -> Field2 {
        Field2::new(Variance::Contravariant, ps(v)).unwrap()
    }

    fn consts(f: &Field2) -> Vec<f64> {
        f.components().iter().map(|e| e.as_constant().unwrap()).collect()
    }

    fn box4() -> ParamDomain {
        ParamDomain::cube(4, -1.0, 1.0, 5).unwrap()
    }

    fn eval(e: &Expr, at: &[f64]) -> f64 {
        e.eval(&bind(at)).unwrap()
    }

    #[test]
    fn levi_civita_symbol() {
        assert_eq!(levi_civita(0, 1, 2, 3).unwrap(), 1);
        assert_eq!(levi_civita(1, 0, 2, 3).unwrap(), -1);
        assert_eq!(levi_civita(0, 0, 2, 3).unwrap(), 0);
        assert_eq!(levi_civita(2, 3, 0, 1).unwrap(), 1);
        assert_eq!(levi_civita(0, 1, 2, 4), Err(EmError::IndexOutOfRange(4)));
    }

    #[test]
    fn hodge_star_examples() {
        let a = Field2::single(Variance::Contravariant, 0, 1, p("1")).unwrap();
        assert_eq!(consts(&poincare_iso(&a).unwrap()), [0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let a = Field2::single(Variance::Contravariant, 2, 3, p("1")).unwrap();
        assert_eq!(consts(&poincare_iso(&a).unwrap()), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let f = cov(&["x1", "t", "2", "x3*x2", "-1", "t^2"]);
        assert_eq!(poincare_iso(&poincare_inverse(&f).unwrap()).unwrap(), f);
        assert!(matches!(poincare_iso(&f), Err(EmError::Variance { .. })));
    }

    #[test]
    fn splits() {
        let (e, b) = spacetime_split(&Field2::single(Variance::Covariant, 0, 1, p("3")).unwrap()).unwrap();
        assert_eq!(e[0].as_constant(), Some(3.0));
        assert!(b.iter().all(Expr::is_zero));
        let (e, b) = spacetime_split(&Field2::single(Variance::Covariant, 2, 3, p("2")).unwrap()).unwrap();
        assert!(e.iter().all(Expr::is_zero));
        assert_eq!(b[0].as_constant(), Some(2.0));
        let f = cov(&["x1", "t", "2", "x3*x2", "-1", "t^2"]);
        let (e, b) = spacetime_split(&f).unwrap();
        assert_eq!(field_assemble(&e, &b).unwrap(), f);

        let h = excitation_assemble(&ps(&["1", "0", "0"]), &ps(&["0", "0", "0"])).unwrap();
        assert_eq!(consts(&h), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let h = excitation_assemble(&ps(&["0", "0", "0"]), &ps(&["0.5", "0", "0"])).unwrap();
        assert_eq!(h.get(2, 3).as_constant(), Some(0.5));
        let h = con(&["x1", "t", "2", "x3*x2", "-1", "t^2"]);
        let (d, hh) = excitation_split(&h).unwrap();
        assert_eq!(excitation_assemble(&d, &hh).unwrap(), h);
    }

    #[test]
    fn exterior_derivatives() {
        let d = exterior_derivative(&cov(&["1", "2", "3", "4", "5", "6"])).unwrap();
        assert!(d.comps.iter().all(Expr::is_zero));
        let f = field_from_potential(&ps(&["0", "t*2", "0", "0"])).unwrap();
        assert!(exterior_derivative(&f).unwrap().comps.iter().all(|e| e.simplify().is_zero()));
        let mono = Field2::single(Variance::Covariant, 2, 3, p("x1")).unwrap();
        let d = exterior_derivative(&mono).unwrap();
        assert_eq!(d.comps[3].as_constant(), Some(1.0));
        assert!(d.comps[..3].iter().all(Expr::is_zero));
    }

    #[test]
    fn potentials() {
        let f = Field2::single(Variance::Covariant, 0, 1, p("2")).unwrap();
        let a = ps(&["-x1*2", "0", "0", "0"]);
        assert_eq!(potential_check(&a, &f, &box4()).unwrap().max_abs, 0.0);
        assert_eq!(potential_check(&ps(&["0", "0", "0", "0"]), &Field2::zero(Variance::Covariant), &box4()).unwrap().max_abs, 0.0);
        // gauge shift by dλ with λ = t x1
        let shifted = ps(&["-x1*2 + x1", "t", "0", "0"]);
        assert!(potential_check(&shifted, &f, &box4()).unwrap().max_abs < 1e-15);
    }

    #[test]
    fn vacuum_law() {
        let eta = Metric4::minkowski();
        assert_eq!(eta.sqrt_neg_det().as_constant(), Some(1.0));
        let h = vacuum_constitutive(&eta, &Field2::single(Variance::Covariant, 0, 1, p("1")).unwrap()).unwrap();
        assert_eq!(h.get(0, 1).as_constant(), Some(-1.0));
        let h = vacuum_constitutive(&eta, &Field2::single(Variance::Covariant, 2, 3, p("1")).unwrap()).unwrap();
        assert_eq!(h.get(2, 3).as_constant(), Some(1.0));
        let chi = ConstitutiveTensor::vacuum(&eta);
        assert_eq!(chi.entry(0, 1, 0, 1).as_constant(), Some(-0.5));
        assert_eq!(chi.entry(1, 0, 0, 1).as_constant(), Some(0.5));
    }

    #[test]
    fn vacuum_matrix_golden() {
        let m = ConstitutiveTensor::vacuum(&Metric4::minkowski()).matrix();
        let vals: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|e| e.as_constant().unwrap()).collect()).collect();
        for i in 0..6 {
            for j in 0..6 {
                let expected = match (i == j, i < 3) {
                    (false, _) => 0.0,
                    (true, true) => -1.0,
                    (true, false) => 1.0,
                };
                assert_eq!(vals[i][j], expected);
            }
        }
        // # ∘ χ squares to minus the identity
        let p = hodge_matrix();
        let mut hm = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                hm[i][j] = (0..6).map(|k| p[i][k] * vals[k][j]).sum();
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                let sq: f64 = (0..6).map(|k| hm[i][k] * hm[k][j]).sum();
                assert_eq!(sq, if i == j { -1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn metric_checks() {
        Metric4::minkowski().check(&box4()).unwrap();
        let flat4 = (0..4)
            .map(|i| (0..4).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect())
            .collect();
        let riemannian = Metric4::new(flat4).unwrap();
        assert!(matches!(riemannian.check(&box4()), Err(EmError::NotLorentzian { .. })));
        let mut skew: Matrix = Metric4::minkowski().lower().clone();
        skew[0][1] = p("1");
        assert_eq!(Metric4::new(skew), Err(EmError::NotSymmetric));

        // conformally flat metric 2η: √−g = 4, g^{μν} = η/2, so 𝔥 = χ_η(F)
        let scaled: Matrix = Metric4::minkowski().lower().iter().map(|r| r.iter().map(|e| 2.0 * e).collect()).collect();
        let g = Metric4::new(scaled).unwrap();
        g.check(&box4()).unwrap();
        let f = cov(&["1", "2", "3", "4", "5", "6"]);
        let a = vacuum_constitutive(&g, &f).unwrap();
        let b = vacuum_constitutive(&Metric4::minkowski(), &f).unwrap();
        for (x, y) in a.components().iter().zip(b.components()) {
            assert!((eval(x, &[0.0; 4]) - eval(y, &[0.0; 4])).abs() < 1e-14);
        }
        assert!(ConstitutiveTensor::vacuum(&g).check_invertible(&box4()).is_ok());
        let zero = ConstitutiveTensor::new(vec![vec![Expr::zero(); 6]; 6]).unwrap();
        assert!(matches!(zero.check_invertible(&box4()), Err(EmError::Singular { .. })));
    }

    fn component_divergence(h: &Field2) -> Vec<Expr> {
        (0..4)
            .map(|mu| Expr::sum((0..4).map(|nu| h.get(mu, nu).diff(COORDS[nu]))))
            .collect()
    }

    #[test]
    fn divergence_sign_is_plus() {
        assert!(divergence(&con(&["1", "2", "3", "4", "5", "6"])).unwrap().iter().all(Expr::is_zero));
        let h = Field2::single(Variance::Contravariant, 0, 1, p("x1")).unwrap();
        let d = divergence(&h).unwrap();
        assert_eq!(d[0].as_constant(), Some(1.0));
        assert!(d[1..].iter().all(Expr::is_zero));
        let h = con(&["x1*t^2", "x3 - t*x2", "x1^2*x3", "t*x3", "x2*x1", "t^3 + x2"]);
        let (a, b) = (divergence(&h).unwrap(), component_divergence(&h));
        for at in box4().points() {
            for mu in 0..4 {
                assert!((eval(&a[mu], &at) - eval(&b[mu], &at)).abs() < 1e-12);
            }
        }
        assert!(vector_divergence(&a).simplify().is_zero() || box4().points().all(|at| eval(&vector_divergence(&a), &at).abs() < 1e-12));
    }

    #[test]
    fn maxwell_examples() {
        let eta = Metric4::minkowski();
        let chi = ConstitutiveTensor::vacuum(&eta);
        let zero_j = ps(&["0", "0", "0", "0"]);
        let r = maxwell_residuals(&Field2::zero(Variance::Covariant), &Field2::zero(Variance::Contravariant), &zero_j, &chi, &box4()).unwrap();
        assert!(r.all_within(0.0));

        let f = field_from_potential(&ps(&["0", "0", "cos(t - x1)", "0"])).unwrap();
        let h = chi.apply(&f).unwrap();
        let r = maxwell_residuals(&f, &h, &zero_j, &chi, &box4()).unwrap();
        assert!(r.all_within(1e-10), "{r:?}");

        let f = Field2::single(Variance::Covariant, 0, 1, p("3")).unwrap();
        let r = maxwell_residuals(&f, &chi.apply(&f).unwrap(), &zero_j, &chi, &box4()).unwrap();
        assert!(r.all_within(0.0));
    }

    #[test]
    fn longitudinal_potential_is_not_vacuum_solution() {
        let chi = ConstitutiveTensor::vacuum(&Metric4::minkowski());
        let f = field_from_potential(&ps(&["0", "cos(t - x1)", "0", "0"])).unwrap();
        let r = maxwell_residuals(&f, &chi.apply(&f).unwrap(), &ps(&["0", "0", "0", "0"]), &chi, &box4()).unwrap();
        assert!(r.source.max_abs > 0.1);
    }

    #[test]
    fn lagrangians() {
        let eta = Metric4::minkowski();
        let zero = Field2::zero(Variance::Covariant);
        assert!(field_lagrangian(&zero, &vacuum_constitutive(&eta, &zero).unwrap()).unwrap().is_zero());
        let f = Field2::single(Variance::Covariant, 0, 1, p("3")).unwrap();
        let l = field_lagrangian(&f, &vacuum_constitutive(&eta, &f).unwrap()).unwrap();
        assert_eq!(l.as_constant(), Some(-9.0));
        assert!(field_lagrangian(&f, &f).is_err());
    }
}
