//! Point and rigid-body mechanics.
//!
//! Everything here is a closed-form function of the time variable [`TIME`].
//! Matrices are row-major `Vec<Vec<Expr>>` with the upper index as the row,
//! so `Rⁱⱼ` is `r[i][j]` and `ωⁱⱼ xʲ` is an ordinary matrix-vector product.

use thiserror::Error;

use crate::dynamics::{self, DynamicalForm};
use crate::expr::{Binding, EvalError, Expr};
use crate::grid::{self, GridMax, ParamDomain};
use crate::jet::{shape_err, JetCoords, JetError, JetSection};

/// Name of the time parameter.
pub const TIME: &str = "t";

/// Orthogonality and antisymmetry tolerance for rigid kinematics.
pub const ORTHO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechanicsError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("{what} is not symmetric: defect {defect:e} at {at:?}")]
    NotSymmetric { what: String, defect: f64, at: Vec<f64> },
    #[error("{what} is not antisymmetric: defect {defect:e} at {at:?}")]
    NotAntisymmetric { what: String, defect: f64, at: Vec<f64> },
    #[error("rotation is not orthogonal at t = {t}: |R^T R - I| = {defect:e}")]
    NotOrthogonal { t: f64, defect: f64 },
    #[error("rotation has determinant {det} at t = {t}")]
    NotProper { t: f64, det: f64 },
    #[error("inertia law is singular on antisymmetric matrices at t = {t}")]
    SingularInertia { t: f64 },
    #[error("a frame spin is required")]
    MissingSpin,
}

impl From<EvalError> for MechanicsError {
    fn from(e: EvalError) -> Self {
        MechanicsError::Jet(e.into())
    }
}

impl From<grid::DomainError> for MechanicsError {
    fn from(e: grid::DomainError) -> Self {
        MechanicsError::Jet(e.into())
    }
}

pub type Matrix = Vec<Vec<Expr>>;

fn square(what: &str, m: &Matrix, n: usize) -> Result<(), MechanicsError> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(shape_err(format!("{what}: {n}x{n}"), format!("{} rows", m.len())).into());
    }
    Ok(())
}

pub fn mat_vec(m: &Matrix, v: &[Expr]) -> Vec<Expr> {
    m.iter()
        .map(|row| Expr::sum(row.iter().zip(v).map(|(a, b)| a * b)))
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| Expr::sum((0..inner).map(|k| &row[k] * &b[k][j])))
                .collect()
        })
        .collect()
}

pub fn transpose(m: &Matrix) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

fn time_derivative(v: &[Expr]) -> Vec<Expr> {
    v.iter().map(|e| e.diff(TIME)).collect()
}

fn mat_time_derivative(m: &Matrix) -> Matrix {
    m.iter().map(|r| time_derivative(r)).collect()
}

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Expr::one() } else { Expr::zero() })
                .collect()
        })
        .collect()
}

fn at_time(t: f64) -> Binding {
    Binding::from_pairs(&[(TIME, t)])
}

fn eval_matrix(m: &Matrix, b: &Binding) -> Result<Vec<Vec<f64>>, EvalError> {
    m.iter()
        .map(|r| r.iter().map(|e| e.eval(b)).collect())
        .collect()
}

/// Largest `|m + sign·mᵀ|` over a set of bindings. Points where the
/// entries cannot be evaluated are skipped.
fn symmetry_defect<'a>(
    m: &Matrix,
    sign: f64,
    points: impl Iterator<Item = (Vec<f64>, Binding)> + 'a,
) -> (f64, Vec<f64>) {
    let mut worst = (0.0, Vec::new());
    for (at, b) in points {
        let Ok(vals) = eval_matrix(m, &b) else { continue };
        for i in 0..vals.len() {
            for j in 0..=i {
                let d = (vals[i][j] + sign * vals[j][i]).abs();
                if d > worst.0 {
                    worst = (d, at.clone());
                }
            }
        }
    }
    worst
}

fn sample_times(n: usize) -> impl Iterator<Item = (Vec<f64>, Binding)> {
    (0..n).map(move |k| {
        let t = k as f64 / (n - 1) as f64;
        (vec![t], at_time(t))
    })
}

fn check_antisymmetric(what: &str, m: &Matrix, points: impl Iterator<Item = (Vec<f64>, Binding)>) -> Result<(), MechanicsError> {
    let (defect, at) = symmetry_defect(m, 1.0, points);
    if defect > 1e-12 {
        return Err(MechanicsError::NotAntisymmetric {
            what: what.into(),
            defect,
            at,
        });
    }
    Ok(())
}

/// A particle in a possibly curved, possibly rotating configuration space.
#[derive(Debug, Clone, PartialEq)]
pub struct PointModel {
    coords: JetCoords,
    mass: Expr,
    metric: Matrix,
    force: Vec<Expr>,
    spin: Option<Matrix>,
}

impl PointModel {
    /// `coords` must have the single source coordinate [`TIME`]. The mass
    /// and spin depend on time only, the metric on position only, and the
    /// force on time, position and velocity.
    pub fn new(
        coords: JetCoords,
        mass: Expr,
        metric: Matrix,
        force: Vec<Expr>,
        spin: Option<Matrix>,
    ) -> Result<PointModel, MechanicsError> {
        if coords.source() != [TIME] {
            return Err(shape_err(format!("source [{TIME}]"), format!("{:?}", coords.source())).into());
        }
        let n = coords.target_dim();
        square("metric", &metric, n)?;
        if force.len() != n {
            return Err(shape_err(format!("{n} forces"), force.len()).into());
        }
        let time_only = |what: &str, e: &Expr| -> Result<(), MechanicsError> {
            match e.free_vars().into_iter().find(|v| v != TIME) {
                Some(name) => Err(JetError::ForeignVariable {
                    component: what.into(),
                    name,
                }
                .into()),
                None => Ok(()),
            }
        };
        time_only("mass", &mass)?;
        for (i, row) in metric.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                let what = format!("g[{i}][{j}]");
                if let Some(name) = g.free_vars().into_iter().find(|v| !coords.target().contains(v)) {
                    return Err(JetError::ForeignVariable { component: what, name }.into());
                }
            }
        }
        for (i, f) in force.iter().enumerate() {
            coords.check_over_jet(&format!("F[{i}]"), f)?;
        }
        if let Some(w) = &spin {
            square("spin", w, n)?;
            for (i, row) in w.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    time_only(&format!("omega[{i}][{j}]"), e)?;
                }
            }
            check_antisymmetric("spin", w, sample_times(50))?;
        }
        // metric symmetry at 50 deterministic points of [-1, 1]^n
        let names = coords.target().to_vec();
        let points = (0..50).map(move |k| {
            let at: Vec<f64> = (0..names.len())
                .map(|i| {
                    let phase = (k as f64 + 0.5) * (0.618_033_988_75 + 0.1 * i as f64);
                    2.0 * phase.fract() - 1.0
                })
                .collect();
            let b = Binding::from_pairs(
                &names
                    .iter()
                    .map(String::as_str)
                    .zip(at.iter().copied())
                    .collect::<Vec<_>>(),
            );
            (at, b)
        });
        let (defect, at) = symmetry_defect(&metric, -1.0, points);
        if defect > 1e-12 {
            return Err(MechanicsError::NotSymmetric {
                what: "metric".into(),
                defect,
                at,
            });
        }
        Ok(PointModel {
            coords,
            mass,
            metric,
            force,
            spin,
        })
    }

    /// Unit-mass-free Euclidean model: `g = δ`, no spin.
    pub fn euclidean(coords: JetCoords, mass: Expr, force: Vec<Expr>) -> Result<PointModel, MechanicsError> {
        let n = coords.target_dim();
        PointModel::new(coords, mass, identity(n), force, None)
    }

    pub fn coords(&self) -> &JetCoords {
        &self.coords
    }

    pub fn spin(&self) -> Option<&Matrix> {
        self.spin.as_ref()
    }

    fn velocity_names(&self) -> Vec<Expr> {
        (0..self.coords.target_dim())
            .map(|i| Expr::var(self.coords.jet_name(i, 0)))
            .collect()
    }

    /// `Fᵢ` and `Πᵢᵗ = m gᵢⱼ vʲ` as a dynamical state on the jet manifold.
    pub fn dynamical_form(&self) -> DynamicalForm {
        let p = mat_vec(&self.metric, &self.velocity_names());
        let stress = p.into_iter().map(|pi| vec![&self.mass * &pi]).collect();
        DynamicalForm::new(self.coords.clone(), self.force.clone(), stress)
            .expect("model components are over the jet coordinates")
    }
}

/// `pᵢ = m(t) gᵢⱼ(x(t)) vʲ(t)` along `s`.
pub fn momentum(model: &PointModel, s: &JetSection) -> Result<Vec<Expr>, MechanicsError> {
    Ok(dynamics::restrict(&model.dynamical_form(), s)?
        .stress
        .into_iter()
        .map(|mut r| r.remove(0))
        .collect())
}

/// Grid maximum of `|Fᵢ − dpᵢ/dt|` along `s`.
pub fn newton_residual(model: &PointModel, s: &JetSection, domain: &ParamDomain) -> Result<GridMax, MechanicsError> {
    Ok(dynamics::balance_residual(&model.dynamical_form(), s, domain)?)
}

/// `∇ₜpᵢ = dpᵢ/dt − ωᵢʲ pⱼ`.
pub fn covariant_momentum_rate(model: &PointModel, p: &[Expr]) -> Result<Vec<Expr>, MechanicsError> {
    let w = model.spin.as_ref().ok_or(MechanicsError::MissingSpin)?;
    Ok(covariant_rate(p, w))
}

fn covariant_rate(p: &[Expr], w: &Matrix) -> Vec<Expr> {
    time_derivative(p)
        .iter()
        .zip(mat_vec(w, p))
        .map(|(d, wp)| d - &wp)
        .collect()
}

/// Grid maximum of `|Fᵢ − ∇ₜpᵢ|` along `s`.
pub fn covariant_newton_residual(
    model: &PointModel,
    s: &JetSection,
    domain: &ParamDomain,
) -> Result<GridMax, MechanicsError> {
    let p = momentum(model, s)?;
    let rate = covariant_momentum_rate(model, &p)?;
    let defect: Vec<Expr> = model
        .force
        .iter()
        .zip(&rate)
        .map(|(f, r)| s.restrict(f) - r)
        .collect();
    domain.expect_dim(1)?;
    Ok(grid::max_abs(&defect, &[TIME], domain)?)
}

/// `vʲ = dxʲ/dt + ωʲᵢ xⁱ`.
pub fn rotating_frame_velocity(x: &[Expr], spin: &Matrix) -> Result<Vec<Expr>, MechanicsError> {
    square("spin", spin, x.len())?;
    Ok(time_derivative(x)
        .iter()
        .zip(mat_vec(spin, x))
        .map(|(d, w)| d + &w)
        .collect())
}

type Vec3 = [f64; 3];
type Mat3 = [[f64; 3]; 3];

fn mul3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn apply3(a: &Mat3, v: &Vec3) -> Vec3 {
    [0, 1, 2].map(|i| (0..3).map(|k| a[i][k] * v[k]).sum())
}

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Largest entry of `|RᵀR − I|`.
fn orthogonality_defect(r: &Mat3) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

fn check_rotation(r: &Mat3, t: f64) -> Result<(), MechanicsError> {
    let defect = orthogonality_defect(r);
    if !(defect <= ORTHO_TOL) {
        return Err(MechanicsError::NotOrthogonal { t, defect });
    }
    let det = det3(r);
    if det < 0.0 {
        return Err(MechanicsError::NotProper { t, det });
    }
    Ok(())
}

/// A frame `(x, (e₁, e₂, e₃))` in Euclidean space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame3 {
    pub origin: Vec3,
    pub axes: [Vec3; 3],
}

/// An element `(a, R)` of the Euclidean group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iso3 {
    translation: Vec3,
    rotation: Mat3,
}

impl Iso3 {
    pub fn new(translation: Vec3, rotation: Mat3) -> Result<Iso3, MechanicsError> {
        check_rotation(&rotation, 0.0)?;
        Ok(Iso3 {
            translation,
            rotation,
        })
    }

    pub fn identity() -> Iso3 {
        Iso3 {
            translation: [0.0; 3],
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(&self) -> Vec3 {
        self.translation
    }

    pub fn rotation(&self) -> Mat3 {
        self.rotation
    }

    /// `self · other`, acting as `other` first.
    pub fn compose(&self, other: &Iso3) -> Iso3 {
        let ra = apply3(&self.rotation, &other.translation);
        Iso3 {
            translation: [0, 1, 2].map(|i| self.translation[i] + ra[i]),
            rotation: mul3(&self.rotation, &other.rotation),
        }
    }

    /// `(x, e) ↦ (a + R x, R e)`.
    pub fn act(&self, f: &Frame3) -> Frame3 {
        let rx = apply3(&self.rotation, &f.origin);
        Frame3 {
            origin: [0, 1, 2].map(|i| self.translation[i] + rx[i]),
            axes: f.axes.map(|e| apply3(&self.rotation, &e)),
        }
    }
}

/// A curve `t ↦ (a(t), R(t))` in the Euclidean group.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotionCurve {
    translation: Vec<Expr>,
    rotation: Matrix,
}

impl RigidMotionCurve {
    pub fn new(translation: Vec<Expr>, rotation: Matrix) -> Result<RigidMotionCurve, MechanicsError> {
        if translation.len() != 3 {
            return Err(shape_err("3 translation components", translation.len()).into());
        }
        square("rotation", &rotation, 3)?;
        for e in translation.iter().chain(rotation.iter().flatten()) {
            if let Some(name) = e.free_vars().into_iter().find(|v| v != TIME) {
                return Err(JetError::ForeignVariable {
                    component: "rigid motion".into(),
                    name,
                }
                .into());
            }
        }
        Ok(RigidMotionCurve {
            translation,
            rotation,
        })
    }

    pub fn translation(&self) -> &[Expr] {
        &self.translation
    }

    pub fn rotation(&self) -> &Matrix {
        &self.rotation
    }

    /// Verify `RᵀR = I` and `det R = +1` at every grid time.
    pub fn check(&self, domain: &ParamDomain) -> Result<(), MechanicsError> {
        domain.expect_dim(1)?;
        for p in domain.points() {
            let vals = eval_matrix(&self.rotation, &at_time(p[0]))?;
            let r: Mat3 = [0, 1, 2].map(|i| [0, 1, 2].map(|j| vals[i][j]));
            check_rotation(&r, p[0])?;
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> Result<Iso3, MechanicsError> {
        let b = at_time(t);
        let a = self.translation.iter().map(|e| e.eval(&b)).collect::<Result<Vec<_>, _>>()?;
        let vals = eval_matrix(&self.rotation, &b)?;
        let r: Mat3 = [0, 1, 2].map(|i| [0, 1, 2].map(|j| vals[i][j]));
        check_rotation(&r, t)?;
        Ok(Iso3 {
            translation: [a[0], a[1], a[2]],
            rotation: r,
        })
    }
}

/// Velocities of a rigid motion right-translated to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyVelocity {
    /// `v₀ = Rᵀ ȧ`
    pub linear: Vec<Expr>,
    /// `Ω = Ṙ Rᵀ`, antisymmetric
    pub angular: Matrix,
}

/// Body velocities, using `Rᵀ` as the inverse after checking orthogonality
/// on `domain`.
pub fn body_velocity(curve: &RigidMotionCurve, domain: &ParamDomain) -> Result<BodyVelocity, MechanicsError> {
    curve.check(domain)?;
    let rt = transpose(&curve.rotation);
    let linear = mat_vec(&rt, &time_derivative(&curve.translation));
    let angular = mat_mul(&mat_time_derivative(&curve.rotation), &rt);
    Ok(BodyVelocity { linear, angular })
}

/// A section of the first jet bundle of the Euclidean group over time:
/// position, rotation and independent velocity slots for each.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidSection {
    pub position: Vec<Expr>,
    pub rotation: Matrix,
    pub velocity: Vec<Expr>,
    pub rotation_velocity: Matrix,
}

impl RigidSection {
    /// The prolonged section `(a, R, ȧ, Ṙ)`.
    pub fn inertial(curve: &RigidMotionCurve) -> RigidSection {
        RigidSection {
            position: curve.translation.clone(),
            rotation: curve.rotation.clone(),
            velocity: time_derivative(&curve.translation),
            rotation_velocity: mat_time_derivative(&curve.rotation),
        }
    }

    /// The co-moving section: velocity slots filled with the body
    /// velocities `(v₀, Ω)` instead of the time derivatives.
    pub fn comoving(curve: &RigidMotionCurve, domain: &ParamDomain) -> Result<RigidSection, MechanicsError> {
        let body = body_velocity(curve, domain)?;
        Ok(RigidSection {
            position: curve.translation.clone(),
            rotation: curve.rotation.clone(),
            velocity: body.linear,
            rotation_velocity: body.angular,
        })
    }
}

/// Spencer defect of a rigid section.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidDefect {
    /// `ȧ − v`
    pub translational: Vec<Expr>,
    /// `Ṙ − V`
    pub rotational: Matrix,
}

impl RigidDefect {
    pub fn max_abs(&self, domain: &ParamDomain) -> Result<(GridMax, GridMax), MechanicsError> {
        domain.expect_dim(1)?;
        let lin = grid::max_abs(&self.translational, &[TIME], domain)?;
        let rot: Vec<Expr> = self.rotational.iter().flatten().cloned().collect();
        let rot = grid::max_abs(&rot, &[TIME], domain)?;
        Ok((lin, rot))
    }
}

pub fn rigid_spencer(s: &RigidSection) -> RigidDefect {
    RigidDefect {
        translational: time_derivative(&s.position)
            .iter()
            .zip(&s.velocity)
            .map(|(d, v)| d - v)
            .collect(),
        rotational: mat_time_derivative(&s.rotation)
            .iter()
            .zip(&s.rotation_velocity)
            .map(|(dr, vr)| dr.iter().zip(vr).map(|(d, v)| d - v).collect())
            .collect(),
    }
}

/// Coefficients `I[i][k][j][l]` coupling angular velocity to angular
/// momentum through `L[i][j] = Σₖₗ I[i][k][j][l] Ω[l][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaLaw {
    coeffs: Vec<Vec<Vec<Vec<Expr>>>>,
}

impl InertiaLaw {
    pub fn new(coeffs: Vec<Vec<Vec<Vec<Expr>>>>) -> Result<InertiaLaw, MechanicsError> {
        let ok = coeffs.len() == 3
            && coeffs.iter().all(|a| {
                a.len() == 3 && a.iter().all(|b| b.len() == 3 && b.iter().all(|c| c.len() == 3))
            });
        if !ok {
            return Err(shape_err("3x3x3x3 inertia coefficients", "ragged array").into());
        }
        Ok(InertiaLaw { coeffs })
    }

    /// `I[i][k][j][l] = c δᵢₗ δₖⱼ`, so that `L = c Ω`.
    pub fn scalar(c: Expr) -> InertiaLaw {
        let coeffs = (0..3)
            .map(|i| {
                (0..3)
                    .map(|k| {
                        (0..3)
                            .map(|j| {
                                (0..3)
                                    .map(|l| if i == l && k == j { c.clone() } else { Expr::zero() })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        InertiaLaw { coeffs }
    }

    /// Check that the law is injective on antisymmetric matrices at every
    /// grid time.
    pub fn check_invertible(&self, domain: &ParamDomain) -> Result<(), MechanicsError> {
        domain.expect_dim(1)?;
        let basis = antisymmetric_basis();
        for p in domain.points() {
            let b = at_time(p[0]);
            // columns: images of the three basis matrices, flattened to 9-vectors
            let mut cols = Vec::with_capacity(3);
            for e in &basis {
                let img = inertia_couple(self, e);
                let vals = eval_matrix(&img, &b)?;
                cols.push(vals.into_iter().flatten().collect::<Vec<f64>>());
            }
            let gram: Mat3 = [0, 1, 2].map(|i| [0, 1, 2].map(|j| (0..9).map(|k| cols[i][k] * cols[j][k]).sum()));
            let scale = (gram[0][0] + gram[1][1] + gram[2][2]) / 3.0;
            if !(scale > 0.0) || det3(&gram) <= 1e-12 * scale.powi(3) {
                return Err(MechanicsError::SingularInertia { t: p[0] });
            }
        }
        Ok(())
    }
}

fn antisymmetric_basis() -> [Matrix; 3] {
    let e = |i: usize, j: usize| -> Matrix {
        (0..3)
            .map(|r| {
                (0..3)
                    .map(|c| {
                        if (r, c) == (i, j) {
                            Expr::one()
                        } else if (r, c) == (j, i) {
                            Expr::constant(-1.0)
                        } else {
                            Expr::zero()
                        }
                    })
                    .collect()
            })
            .collect()
    };
    [e(1, 2), e(2, 0), e(0, 1)]
}

pub fn inertia_couple(law: &InertiaLaw, omega: &Matrix) -> Matrix {
    (0..3)
        .map(|i| {
            (0..3)
                .map(|j| {
                    Expr::sum((0..3).flat_map(|k| {
                        (0..3).map(move |l| (k, l))
                    }).map(|(k, l)| &law.coeffs[i][k][j][l] * &omega[l][k]))
                })
                .collect()
        })
        .collect()
}

/// Instantaneous power `Σ τ[i][j] Ω[j][i]` of a torque on an angular
/// velocity.
pub fn torsor_power(torque: &Matrix, omega: &Matrix) -> Expr {
    Expr::sum((0..torque.len()).flat_map(|i| (0..torque.len()).map(move |j| (i, j))).map(|(i, j)| &torque[i][j] * &omega[j][i]))
}

/// Forces, torques and momenta of a rigid body as functions of time.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidDynamicalState {
    pub force: Vec<Expr>,
    pub torque: Matrix,
    pub momentum: Vec<Expr>,
    pub angular_momentum: Matrix,
}

impl RigidDynamicalState {
    pub fn new(
        force: Vec<Expr>,
        torque: Matrix,
        momentum: Vec<Expr>,
        angular_momentum: Matrix,
    ) -> Result<RigidDynamicalState, MechanicsError> {
        if force.len() != 3 || momentum.len() != 3 {
            return Err(shape_err("3-vectors", format!("{} and {}", force.len(), momentum.len())).into());
        }
        square("torque", &torque, 3)?;
        square("angular momentum", &angular_momentum, 3)?;
        Ok(RigidDynamicalState {
            force,
            torque,
            momentum,
            angular_momentum,
        })
    }

    /// Check antisymmetry of torque and angular momentum on the grid.
    pub fn check(&self, domain: &ParamDomain) -> Result<(), MechanicsError> {
        domain.expect_dim(1)?;
        let points = || domain.points().map(|p| (p.clone(), at_time(p[0])));
        check_antisymmetric("torque", &self.torque, points())?;
        check_antisymmetric("angular momentum", &self.angular_momentum, points())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BalanceFrame {
    Inertial,
    CoMoving,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidBalanceReport {
    pub linear: GridMax,
    pub angular: GridMax,
}

/// Inertial: `|F − ṗ|` and `|τ − L̇|`. Co-moving: the rates are replaced by
/// `∇ₜp = ṗ − ω p` and `∇ₜL = L̇ − ω L`.
pub fn rigid_balance_residual(
    state: &RigidDynamicalState,
    frame: BalanceFrame,
    spin: Option<&Matrix>,
    domain: &ParamDomain,
) -> Result<RigidBalanceReport, MechanicsError> {
    domain.expect_dim(1)?;
    let (p_rate, l_rate) = match frame {
        BalanceFrame::Inertial => (
            time_derivative(&state.momentum),
            mat_time_derivative(&state.angular_momentum),
        ),
        BalanceFrame::CoMoving => {
            let w = spin.ok_or(MechanicsError::MissingSpin)?;
            square("spin", w, 3)?;
            let wl = mat_mul(w, &state.angular_momentum);
            let l_rate = mat_time_derivative(&state.angular_momentum)
                .iter()
                .zip(&wl)
                .map(|(d, c)| d.iter().zip(c).map(|(a, b)| a - b).collect())
                .collect();
            (covariant_rate(&state.momentum, w), l_rate)
        }
    };
    let lin: Vec<Expr> = state.force.iter().zip(&p_rate).map(|(f, r)| f - r).collect();
    let ang: Vec<Expr> = state
        .torque
        .iter()
        .zip(&l_rate)
        .flat_map(|(t, r)| t.iter().zip(r).map(|(a, b)| a - b).collect::<Vec<_>>())
        .collect();
    Ok(RigidBalanceReport {
        linear: grid::max_abs(&lin, &[TIME], domain)?,
        angular: grid::max_abs(&ang, &[TIME], domain)?,
    })
}

/// Rotation by `angle` about coordinate axis `axis` (0, 1 or 2).
pub fn axis_rotation(axis: usize, angle: &Expr) -> Matrix {
    let (c, s) = (angle.cos(), angle.sin());
    let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut m = identity(3);
    m[i][i] = c.clone();
    m[j][j] = c;
    m[i][j] = -&s;
    m[j][i] = s;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Connection;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn ps(v: &[&str]) -> Vec<Expr> {
        v.iter().map(|s| p(s)).collect()
    }

    fn pm(m: &[&[&str]]) -> Matrix {
        m.iter().map(|r| ps(r)).collect()
    }

    fn coords(n: usize) -> JetCoords {
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        JetCoords::new(&[TIME], &refs).unwrap()
    }

    fn section(x: &[&str]) -> JetSection {
        let pos = ps(x);
        let jet = pos.iter().map(|e| vec![e.diff(TIME)]).collect();
        JetSection::new(coords(x.len()), pos, jet).unwrap()
    }

    fn at(e: &Expr, t: f64) -> f64 {
        e.eval(&at_time(t)).unwrap()
    }

    fn unit() -> ParamDomain {
        ParamDomain::interval(0.0, 1.0, 41).unwrap()
    }

    #[test]
    fn momenta() {
        let m = PointModel::euclidean(coords(3), p("2"), ps(&["0", "0", "0"])).unwrap();
        let s = JetSection::new(coords(3), ps(&["3*t", "0", "0"]), vec![ps(&["3"]), ps(&["0"]), ps(&["0"])]).unwrap();
        let mom = momentum(&m, &s).unwrap();
        assert_eq!(mom.iter().map(|e| e.as_constant().unwrap()).collect::<Vec<_>>(), [6.0, 0.0, 0.0]);

        let m = PointModel::new(coords(2), p("1"), pm(&[&["1", "0"], &["0", "4"]]), ps(&["0", "0"]), None).unwrap();
        let mom = momentum(&m, &section(&["t", "t"])).unwrap();
        assert_eq!(mom.iter().map(|e| e.as_constant().unwrap()).collect::<Vec<_>>(), [1.0, 4.0]);

        let m = PointModel::euclidean(coords(1), p("1 + t"), ps(&["0"])).unwrap();
        let mom = momentum(&m, &section(&["2*t"])).unwrap();
        assert_eq!(at(&mom[0], 0.5), 3.0);
    }

    #[test]
    fn newton_residuals() {
        let free = PointModel::euclidean(coords(2), p("1"), ps(&["0", "0"])).unwrap();
        assert_eq!(newton_residual(&free, &section(&["t", "2 - t"]), &unit()).unwrap().max_abs, 0.0);

        let gravity = PointModel::euclidean(coords(2), p("1"), ps(&["0", "-1"])).unwrap();
        let r = newton_residual(&gravity, &section(&["t", "-t^2/2"]), &unit()).unwrap();
        assert!(r.max_abs < 1e-15);

        let spring = PointModel::euclidean(coords(1), p("1"), ps(&["-x1"])).unwrap();
        assert!(newton_residual(&spring, &section(&["cos(t)"]), &unit()).unwrap().max_abs < 1e-15);
        let d = ParamDomain::interval(0.0, 2.5, 11).unwrap();
        let r = newton_residual(&spring, &section(&["t"]), &d).unwrap();
        assert_eq!((r.max_abs, r.argmax[0]), (2.5, 2.5));
    }

    #[test]
    fn metric_and_spin_are_validated() {
        let err = PointModel::new(coords(2), p("1"), pm(&[&["1", "x1"], &["0", "1"]]), ps(&["0", "0"]), None);
        assert!(matches!(err, Err(MechanicsError::NotSymmetric { .. })));
        let err = PointModel::new(coords(2), p("1"), identity(2), ps(&["0", "0"]), Some(pm(&[&["0", "1"], &["1", "0"]])));
        assert!(matches!(err, Err(MechanicsError::NotAntisymmetric { .. })));
        let err = PointModel::new(coords(1), p("x1"), identity(1), ps(&["0"]), None);
        assert!(matches!(err, Err(MechanicsError::Jet(JetError::ForeignVariable { .. }))));
    }

    #[test]
    fn covariant_rates() {
        let zero = PointModel::new(coords(2), p("1"), identity(2), ps(&["0", "0"]), Some(pm(&[&["0", "0"], &["0", "0"]]))).unwrap();
        let pp = ps(&["t^2", "sin(t)"]);
        assert_eq!(covariant_momentum_rate(&zero, &pp).unwrap(), time_derivative(&pp));

        let rot = PointModel::new(coords(2), p("1"), identity(2), ps(&["0", "0"]), Some(pm(&[&["0", "-1"], &["1", "0"]]))).unwrap();
        let r = covariant_momentum_rate(&rot, &ps(&["cos(t)", "sin(t)"])).unwrap();
        for t in [0.0, 0.3, 1.7] {
            assert!(at(&r[0], t).abs() < 1e-15 && at(&r[1], t).abs() < 1e-15);
        }
        let r = covariant_momentum_rate(&rot, &ps(&["2", "3"])).unwrap();
        assert_eq!([r[0].as_constant(), r[1].as_constant()], [Some(3.0), Some(-2.0)]);

        let bare = PointModel::euclidean(coords(1), p("1"), ps(&["0"])).unwrap();
        assert_eq!(covariant_momentum_rate(&bare, &ps(&["t"])), Err(MechanicsError::MissingSpin));
    }

    #[test]
    fn covariant_rate_matches_connection_adjoint() {
        let spin = pm(&[&["0", "-t"], &["t", "0"]]);
        let model = PointModel::new(coords(2), p("2"), identity(2), ps(&["x2", "t*x1_t"]), Some(spin.clone())).unwrap();
        let s = section(&["cos(t)", "t^2"]);
        let conn = (0..2)
            .map(|j| (0..2).map(|i| vec![spin[i][j].clone()]).collect())
            .collect();
        let conn = Connection::new(model.coords(), conn).unwrap();
        let via_jet = dynamics::covariant_adjoint(&model.dynamical_form(), &s, &conn).unwrap();
        let rate = covariant_momentum_rate(&model, &momentum(&model, &s).unwrap()).unwrap();
        for t in [0.1, 0.6, 0.9] {
            for i in 0..2 {
                let direct = at(&s.restrict(&model.force[i]), t) - at(&rate[i], t);
                assert!((direct - at(&via_jet.0[i], t)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn frame_velocities() {
        let zero = pm(&[&["0", "0"], &["0", "0"]]);
        assert_eq!(rotating_frame_velocity(&ps(&["t^2", "t"]), &zero).unwrap(), ps(&["2*t", "1"]));
        let w = pm(&[&["0", "-1"], &["1", "0"]]);
        let v = rotating_frame_velocity(&ps(&["cos(t)", "sin(t)"]), &w).unwrap();
        let t = 0.4f64;
        assert!((at(&v[0], t) + 2.0 * t.sin()).abs() < 1e-15);
        assert!((at(&v[1], t) - 2.0 * t.cos()).abs() < 1e-15);
        let v = rotating_frame_velocity(&ps(&["1", "2"]), &w).unwrap();
        assert_eq!([v[0].as_constant(), v[1].as_constant()], [Some(-2.0), Some(1.0)]);
    }

    #[test]
    fn group_action() {
        let f = Frame3 {
            origin: [0.0; 3],
            axes: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        assert_eq!(Iso3::identity().act(&f), f);
        let shift = Iso3::new([1.0, 0.0, 0.0], Iso3::identity().rotation()).unwrap();
        let g = shift.act(&f);
        assert_eq!(g.origin, [1.0, 0.0, 0.0]);
        assert_eq!(g.axes, f.axes);
        let skew = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(Iso3::new([0.0; 3], skew), Err(MechanicsError::NotOrthogonal { .. })));
        let flip = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        assert!(matches!(Iso3::new([0.0; 3], flip), Err(MechanicsError::NotProper { .. })));
    }

    fn spin_z(rate: &str) -> RigidMotionCurve {
        let angle = p(&format!("{rate}*t"));
        RigidMotionCurve::new(ps(&["0", "0", "0"]), axis_rotation(2, &angle)).unwrap()
    }

    #[test]
    fn body_velocities() {
        let c = RigidMotionCurve::new(ps(&["t", "0", "0"]), identity(3)).unwrap();
        let b = body_velocity(&c, &unit()).unwrap();
        assert_eq!(b.linear, ps(&["1", "0", "0"]));
        assert!(b.angular.iter().flatten().all(Expr::is_zero));

        let b = body_velocity(&spin_z("2"), &unit()).unwrap();
        let expected = [[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        for t in [0.0, 0.35, 1.0] {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((at(&b.angular[i][j], t) - expected[i][j]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn body_velocity_rejects_non_rotations() {
        let c = RigidMotionCurve::new(ps(&["0", "0", "0"]), pm(&[&["1", "t", "0"], &["0", "1", "0"], &["0", "0", "1"]])).unwrap();
        assert!(matches!(body_velocity(&c, &unit()), Err(MechanicsError::NotOrthogonal { .. })));
    }

    #[test]
    fn rigid_spencer_defects() {
        let inertial = RigidSection::inertial(&spin_z("2"));
        assert!(rigid_spencer(&inertial).rotational.iter().flatten().all(Expr::is_zero));

        let co = RigidSection::comoving(&spin_z("2"), &unit()).unwrap();
        let (_, rot) = rigid_spencer(&co).max_abs(&unit()).unwrap();
        assert!(rot.max_abs > 0.1);
        // Ṙ(I − Rᵀ) evaluated directly
        let t = rot.argmax[0];
        let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
        let rdot = [[-2.0 * s, -2.0 * c], [2.0 * c, -2.0 * s]];
        let i_minus_rt = [[1.0 - c, -s], [s, 1.0 - c]];
        let direct = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (rdot[i][0] * i_minus_rt[0][j] + rdot[i][1] * i_minus_rt[1][j]).abs())
            .fold(0.0, f64::max);
        assert!((rot.max_abs - direct).abs() < 1e-12);

        let still = RigidMotionCurve::new(ps(&["t", "2*t", "0"]), identity(3)).unwrap();
        let (lin, rot) = rigid_spencer(&RigidSection::comoving(&still, &unit()).unwrap()).max_abs(&unit()).unwrap();
        assert_eq!((lin.max_abs, rot.max_abs), (0.0, 0.0));
    }

    #[test]
    fn inertia_coupling() {
        let w = body_velocity(&spin_z("2"), &unit()).unwrap().angular;
        let l = inertia_couple(&InertiaLaw::scalar(Expr::one()), &w);
        for (a, b) in l.iter().flatten().zip(w.iter().flatten()) {
            assert_eq!(at(a, 0.3), at(b, 0.3));
        }
        let l = inertia_couple(&InertiaLaw::scalar(p("3")), &w);
        assert!((at(&l[0][1], 0.2) + 6.0).abs() < 1e-14);
        assert!((at(&l[1][0], 0.2) - 6.0).abs() < 1e-14);
        InertiaLaw::scalar(p("1 + t")).check_invertible(&unit()).unwrap();
        assert!(matches!(
            InertiaLaw::scalar(p("t - 0.5")).check_invertible(&unit()),
            Err(MechanicsError::SingularInertia { .. })
        ));
    }

    #[test]
    fn power_of_torque() {
        let w = pm(&[&["0", "-2", "0"], &["2", "0", "0"], &["0", "0", "0"]]);
        let tau = pm(&[&["0", "1", "0"], &["-1", "0", "0"], &["0", "0", "0"]]);
        assert_eq!(torsor_power(&tau, &w).as_constant(), Some(4.0));
    }

    fn zeros3() -> Matrix {
        vec![vec![Expr::zero(); 3]; 3]
    }

    #[test]
    fn rigid_balances() {
        let lz = pm(&[&["0", "5", "0"], &["-5", "0", "0"], &["0", "0", "0"]]);
        let free = RigidDynamicalState::new(ps(&["0", "0", "0"]), zeros3(), ps(&["1", "0", "0"]), lz.clone()).unwrap();
        free.check(&unit()).unwrap();
        let r = rigid_balance_residual(&free, BalanceFrame::Inertial, None, &unit()).unwrap();
        assert_eq!((r.linear.max_abs, r.angular.max_abs), (0.0, 0.0));

        let e12 = pm(&[&["0", "1", "0"], &["-1", "0", "0"], &["0", "0", "0"]]);
        let growing = pm(&[&["0", "t", "0"], &["-t", "0", "0"], &["0", "0", "0"]]);
        let driven = RigidDynamicalState::new(ps(&["0", "0", "0"]), e12, ps(&["0", "0", "0"]), growing).unwrap();
        let r = rigid_balance_residual(&driven, BalanceFrame::Inertial, None, &unit()).unwrap();
        assert_eq!(r.angular.max_abs, 0.0);

        let spin = pm(&[&["0", "0", "1"], &["0", "0", "0"], &["-1", "0", "0"]]);
        let gyro_torque: Matrix = mat_mul(&spin, &lz).iter().map(|r| r.iter().map(|e| -e).collect()).collect();
        let gyro = RigidDynamicalState::new(ps(&["0", "0", "0"]), gyro_torque.clone(), ps(&["0", "0", "0"]), lz.clone()).unwrap();
        // τ̄ = −ω L̄ with dL̄/dt = 0 balances against ∇ₜL̄ = −ω L̄
        let r = rigid_balance_residual(&gyro, BalanceFrame::CoMoving, Some(&spin), &unit()).unwrap();
        assert_eq!(r.angular.max_abs, 0.0);
        assert!(rigid_balance_residual(&gyro, BalanceFrame::Inertial, None, &unit()).unwrap().angular.max_abs > 0.0);
        assert_eq!(
            rigid_balance_residual(&gyro, BalanceFrame::CoMoving, None, &unit()),
            Err(MechanicsError::MissingSpin)
        );

        let bad = RigidDynamicalState::new(ps(&["0", "0", "0"]), identity(3), ps(&["0", "0", "0"]), zeros3()).unwrap();
        assert!(matches!(bad.check(&unit()), Err(MechanicsError::NotAntisymmetric { .. })));
    }
}
