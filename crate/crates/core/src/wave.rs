//! Waves as amplitude and phase on spacetime.
//!
//! A wave state is a section of the jet bundle of `(A, θ)` over spacetime
//! coordinates [`COORDS`] `= (t, x1, x2, x3)`, with jet components `A_μ`
//! and `k_μ`. For integrable states `k = dθ`, and `ω = k₀` is the
//! frequency. Dispersion laws are expressions in the spacetime
//! coordinates and in [`FREQ`] and [`WAVENUMBER`].

use std::collections::HashMap;

use thiserror::Error;

use crate::dynamics::DynamicalForm;
use crate::expr::{Binding, EvalError, Expr};
use crate::grid::{self, DomainError, GridMax, ParamDomain};
use crate::jet::{JetCoords, JetError, JetSection};

pub const COORDS: [&str; 4] = ["t", "x1", "x2", "x3"];
pub const FREQ: &str = "omega";
pub const WAVENUMBER: [&str; 3] = ["k1", "k2", "k3"];

/// Target coordinate names of the wave jet bundle.
pub const FIELDS: [&str; 2] = ["A", "theta"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("amplitude vanishes at {at:?}")]
    VanishingAmplitude { at: Vec<f64> },
    #[error("dP/domega = {derivative:e}: group velocity is a projective point at infinity")]
    ProjectiveInfinity { derivative: f64 },
    #[error("metric is not symmetric")]
    NotSymmetric,
}

impl From<EvalError> for WaveError {
    fn from(e: EvalError) -> Self {
        WaveError::Jet(e.into())
    }
}

impl From<DomainError> for WaveError {
    fn from(e: DomainError) -> Self {
        WaveError::Jet(e.into())
    }
}

/// Inverse Minkowski metric `η = diag(1, −c², −c², −c²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minkowski {
    c: f64,
}

impl Default for Minkowski {
    fn default() -> Self {
        Minkowski { c: 1.0 }
    }
}

impl Minkowski {
    pub fn with_speed(c: f64) -> Minkowski {
        Minkowski { c }
    }

    pub fn speed(&self) -> f64 {
        self.c
    }

    pub fn diag(&self, mu: usize) -> f64 {
        if mu == 0 {
            1.0
        } else {
            -self.c * self.c
        }
    }

    /// `η^{μν} a_μ b_ν`
    pub fn contract(&self, a: &[Expr], b: &[Expr]) -> Expr {
        Expr::sum((0..4).map(|mu| self.diag(mu) * (&a[mu] * &b[mu])))
    }

    /// `η^{μν} a_ν`
    pub fn raise(&self, a: &[Expr]) -> Vec<Expr> {
        (0..4).map(|mu| self.diag(mu) * &a[mu]).collect()
    }

    pub fn as_matrix(&self) -> Vec<Vec<Expr>> {
        (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| Expr::constant(if i == j { self.diag(i) } else { 0.0 }))
                    .collect()
            })
            .collect()
    }
}

fn gradient(f: &Expr) -> Vec<Expr> {
    COORDS.iter().map(|x| f.diff(x)).collect()
}

fn divergence(v: &[Expr]) -> Expr {
    Expr::sum(v.iter().zip(COORDS).map(|(e, x)| e.diff(x)))
}

fn check_spacetime(what: &str, e: &Expr) -> Result<(), WaveError> {
    match e.free_vars().into_iter().find(|v| !COORDS.contains(&v.as_str())) {
        Some(name) => Err(JetError::ForeignVariable {
            component: what.into(),
            name,
        }
        .into()),
        None => Ok(()),
    }
}

/// `(A, θ, A_μ, k_μ)` as functions of spacetime.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub amplitude: Expr,
    pub phase: Expr,
    pub amplitude_gradient: Vec<Expr>,
    pub wavevector: Vec<Expr>,
}

impl WaveState {
    pub fn new(
        amplitude: Expr,
        phase: Expr,
        amplitude_gradient: Vec<Expr>,
        wavevector: Vec<Expr>,
    ) -> Result<WaveState, WaveError> {
        if amplitude_gradient.len() != 4 || wavevector.len() != 4 {
            return Err(crate::jet::shape_err("4 jet components", "other").into());
        }
        check_spacetime("A", &amplitude)?;
        check_spacetime("theta", &phase)?;
        for (mu, (a, k)) in amplitude_gradient.iter().zip(&wavevector).enumerate() {
            check_spacetime(&format!("A_{mu}"), a)?;
            check_spacetime(&format!("k_{mu}"), k)?;
        }
        Ok(WaveState {
            amplitude: amplitude.simplify(),
            phase: phase.simplify(),
            amplitude_gradient: amplitude_gradient.iter().map(Expr::simplify).collect(),
            wavevector: wavevector.iter().map(Expr::simplify).collect(),
        })
    }

    /// The state as a jet section with targets [`FIELDS`].
    pub fn to_section(&self) -> JetSection {
        JetSection::new(
            wave_coords(),
            vec![self.amplitude.clone(), self.phase.clone()],
            vec![self.amplitude_gradient.clone(), self.wavevector.clone()],
        )
        .expect("wave state components are over spacetime")
    }
}

/// Jet coordinates `(t, x¹..x³; A, θ; A_μ, θ_μ)`.
pub fn wave_coords() -> JetCoords {
    JetCoords::new(&COORDS, &FIELDS).expect("fixed coordinate names are distinct")
}

/// The integrable state with `A_μ = ∂_μ A` and `k_μ = ∂_μ θ`.
pub fn wave_section(amplitude: Expr, phase: Expr) -> Result<WaveState, WaveError> {
    let ag = gradient(&amplitude);
    let k = gradient(&phase);
    WaveState::new(amplitude, phase, ag, k)
}

/// A dispersion constraint `P(x, ω, k) = P₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionLaw {
    pub law: Expr,
    pub level: f64,
}

impl DispersionLaw {
    pub fn new(law: Expr, level: f64) -> Result<DispersionLaw, WaveError> {
        let ok = |v: &str| COORDS.contains(&v) || v == FREQ || WAVENUMBER.contains(&v);
        if let Some(name) = law.free_vars().into_iter().find(|v| !ok(v)) {
            return Err(JetError::ForeignVariable {
                component: "P".into(),
                name,
            }
            .into());
        }
        Ok(DispersionLaw { law, level })
    }

    /// `ω² − |k|²` with level `P₀`.
    pub fn relativistic(level: f64) -> DispersionLaw {
        let k2 = Expr::sum(WAVENUMBER.iter().map(|k| Expr::var(k).powi(2)));
        DispersionLaw {
            law: Expr::var(FREQ).powi(2) - k2,
            level,
        }
    }

    /// `P(x, k(x)) − P₀` along a wave state.
    pub fn defect(&self, w: &WaveState) -> Expr {
        let mut sub = HashMap::new();
        sub.insert(FREQ.to_string(), w.wavevector[0].clone());
        for (i, k) in WAVENUMBER.iter().enumerate() {
            sub.insert(k.to_string(), w.wavevector[i + 1].clone());
        }
        self.law.substitute(&sub) - self.level
    }
}

pub fn dispersion_residual(p: &DispersionLaw, w: &WaveState, domain: &ParamDomain) -> Result<GridMax, WaveError> {
    domain.expect_dim(4)?;
    Ok(grid::max_abs(&[p.defect(w)], &COORDS, domain)?)
}

/// Grid maximum of `|η^{μν} θ,_μ θ,_ν|`.
pub fn eikonal_residual(phase: &Expr, eta: &Minkowski, domain: &ParamDomain) -> Result<GridMax, WaveError> {
    check_spacetime("theta", phase)?;
    domain.expect_dim(4)?;
    let k = gradient(phase);
    Ok(grid::max_abs(&[eta.contract(&k, &k)], &COORDS, domain)?)
}

/// `v_gⁱ = −(∂P/∂kᵢ)/(∂P/∂ω)` at a point binding the spacetime
/// coordinates, `omega` and `k1..k3`.
pub fn group_velocity(p: &DispersionLaw, at: &Binding) -> Result<[f64; 3], WaveError> {
    let denom = p.law.diff(FREQ).eval(at)?;
    if denom.abs() < 1e-12 {
        return Err(WaveError::ProjectiveInfinity { derivative: denom });
    }
    let mut v = [0.0; 3];
    for (i, k) in WAVENUMBER.iter().enumerate() {
        v[i] = -p.law.diff(k).eval(at)? / denom;
    }
    Ok(v)
}

/// `□f = ∂²f/∂t² − c² Σᵢ ∂²f/∂xᵢ²`.
pub fn dalembertian(f: &Expr, eta: &Minkowski) -> Expr {
    Expr::sum((0..4).map(|mu| eta.diag(mu) * f.diff(COORDS[mu]).diff(COORDS[mu])))
}

fn check_support(a: &Expr, domain: &ParamDomain) -> Result<(), WaveError> {
    domain.expect_dim(4)?;
    let values = grid::sample(a, &COORDS, domain)?;
    if let Some(i) = values.iter().position(|v| !(v.abs() > 1e-12)) {
        return Err(WaveError::VanishingAmplitude { at: domain.point(i) });
    }
    Ok(())
}

/// Real and imaginary parts of `□ψ / ψ` for `ψ = A e^{−iθ}`:
/// `□ψ = (real − i·imag) ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DalembertSplit {
    /// `(1/A)□A − η^{μν}k_μk_ν`
    pub real: Expr,
    /// `(2/A)η^{μν}A,_μk_ν + □θ`
    pub imag: Expr,
}

impl DalembertSplit {
    /// `(□(A cos θ), □(A sin θ))` rebuilt from the split:
    /// `A(real cos θ − imag sin θ)` and `A(real sin θ + imag cos θ)`.
    pub fn recompose(&self, amplitude: &Expr, phase: &Expr) -> (Expr, Expr) {
        let (c, s) = (phase.cos(), phase.sin());
        let re = amplitude * &(&self.real * &c - &self.imag * &s);
        let im = amplitude * &(&self.real * &s + &self.imag * &c);
        (re, im)
    }
}

/// Split `□` of the wave built from `A` and `θ`, after checking that `A`
/// does not vanish on the grid.
pub fn dalembert_split(
    amplitude: &Expr,
    phase: &Expr,
    eta: &Minkowski,
    domain: &ParamDomain,
) -> Result<DalembertSplit, WaveError> {
    check_spacetime("A", amplitude)?;
    check_spacetime("theta", phase)?;
    check_support(amplitude, domain)?;
    let k = gradient(phase);
    let da = gradient(amplitude);
    let real = dalembertian(amplitude, eta) / amplitude - eta.contract(&k, &k);
    let imag = 2.0 * eta.contract(&da, &k) / amplitude + dalembertian(phase, eta);
    Ok(DalembertSplit { real, imag })
}

/// Eigenvalue parameters of the amplitude and phase equations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveParameters {
    pub lambda_a: f64,
    pub alpha0_sq: f64,
    pub rho_theta: f64,
    pub k0_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveResiduals {
    /// `|□A − λ_A A|`
    pub amplitude: GridMax,
    /// `|2η^{μν}A_μk_ν − α₀² A|`
    pub orthogonality: GridMax,
    /// `|□θ − ρ_θ|`
    pub phase: GridMax,
    /// `|η^{μν}k_μk_ν − k₀²|`
    pub dispersion: GridMax,
}

/// Momenta `p_A^μ = η^{μν}A_ν` and `p_θ^μ = η^{μν}k_ν`.
pub fn wave_momenta(w: &WaveState, eta: &Minkowski) -> (Vec<Expr>, Vec<Expr>) {
    (eta.raise(&w.amplitude_gradient), eta.raise(&w.wavevector))
}

/// The four relations, with `□` taken in divergence form `∂_μ p^μ` so that
/// non-integrable states are handled through their jet components.
pub fn amplitude_phase_residuals(
    w: &WaveState,
    eta: &Minkowski,
    params: &WaveParameters,
    domain: &ParamDomain,
) -> Result<WaveResiduals, WaveError> {
    domain.expect_dim(4)?;
    let (pa, pt) = wave_momenta(w, eta);
    let a = &w.amplitude;
    let exprs = [
        divergence(&pa) - params.lambda_a * a,
        2.0 * eta.contract(&w.amplitude_gradient, &w.wavevector) - params.alpha0_sq * a,
        divergence(&pt) - params.rho_theta,
        eta.contract(&w.wavevector, &w.wavevector) - params.k0_sq,
    ];
    let mut each = grid::max_abs_each(&exprs, &COORDS, domain)?.into_iter();
    let mut next = || {
        let mut g = each.next().expect("four residuals");
        g.component = 0;
        g
    };
    Ok(WaveResiduals {
        amplitude: next(),
        orthogonality: next(),
        phase: next(),
        dispersion: next(),
    })
}

/// The dynamical state `F_A = λ_A A`, `F_θ = ρ_θ`, `Π_A^μ = η^{μν}A_ν`,
/// `Π_θ^μ = η^{μν}θ_ν` on the wave jet manifold. Its adjoint along a state
/// is `(λ_A A − ∂_μ p_A^μ, ρ_θ − ∂_μ p_θ^μ)`.
pub fn wave_dynamical_form(eta: &Minkowski, lambda_a: f64, rho_theta: f64) -> DynamicalForm {
    let coords = wave_coords();
    let jet_row = |i: usize| -> Vec<Expr> { (0..4).map(|mu| Expr::var(coords.jet_name(i, mu))).collect() };
    let stress = vec![eta.raise(&jet_row(0)), eta.raise(&jet_row(1))];
    let force = vec![lambda_a * Expr::var(FIELDS[0]), Expr::constant(rho_theta)];
    DynamicalForm::new(coords, force, stress).expect("wave form is over the jet coordinates")
}

/// `p^μ = ħ g^{μν} k_ν`.
pub fn de_broglie(k: &[Expr], hbar: f64, g: &[Vec<Expr>]) -> Result<Vec<Expr>, WaveError> {
    let n = k.len();
    if g.len() != n || g.iter().any(|r| r.len() != n) {
        return Err(crate::jet::shape_err(format!("{n}x{n} metric"), g.len()).into());
    }
    for i in 0..n {
        for j in 0..i {
            if !(&g[i][j] - &g[j][i]).simplify().is_zero() {
                return Err(WaveError::NotSymmetric);
            }
        }
    }
    Ok(g.iter()
        .map(|row| hbar * Expr::sum(row.iter().zip(k).map(|(a, b)| a * b)))
        .collect())
}
