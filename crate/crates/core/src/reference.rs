//! Reference material: the single-pendulum closed form, preset chains, and a
//! forward-dynamics simulation used as an independent check of `T·F / m`.
//!
//! Pendulum angle convention: `q` is the angle of the rod measured
//! counterclockwise from the world +x axis, with the point mass at
//! `l·(cos q, sin q)`. The tangent (direction of increasing `q`) is then
//! `(−sin q, cos q)`, which is what gives the tangential force components
//! `F_xt = −F_x·sin q` and `F_yt = F_y·cos q`. The pendulum preset is built
//! so that its joint angle is exactly this `q` (see [`pendulum_joint_angle`]).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, Vector3};

use crate::chain_model::{
    com_jacobian_from, com_position_from, forward_kinematics, mass_matrix_from, ChainModel,
    Configuration, JointSpec, LinkSpec, TaskDim,
};
use crate::error::{Error, Result};

/// Force direction `alpha` acting on a pendulum whose rod sits at angle `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumClosedForm {
    pub q: f64,
    pub alpha: f64,
}

impl PendulumClosedForm {
    pub fn new(q: f64, alpha: f64) -> Self {
        Self { q, alpha }
    }

    /// Resultant `(f_x, f_y)` of applied and rod forces, component by component.
    pub fn fictitious_force(&self, magnitude: f64) -> (f64, f64) {
        let (s, c) = self.q.sin_cos();
        let fx_applied = magnitude * self.alpha.cos();
        let fy_applied = magnitude * self.alpha.sin();
        let fx = fx_applied * s * s - fy_applied * s * c;
        let fy = -fx_applied * s * c + fy_applied * c * c;
        (fx, fy)
    }

    /// Norm of the unit-force resultant, evaluated from the unsimplified components.
    pub fn rotom(&self) -> f64 {
        let (s, c) = self.q.sin_cos();
        let (sa, ca) = self.alpha.sin_cos();
        let x = s * s * ca - s * c * sa;
        let y = -s * c * ca + c * c * sa;
        x.hypot(y)
    }

    /// `|sin(α − q)|`
    pub fn rotom_simplified(&self) -> f64 {
        (self.alpha - self.q).sin().abs()
    }
}

/// Maps the closed-form rod angle onto the joint angle of [`Preset::Pendulum`].
///
/// The preset places its mass on the link-frame +x axis, so the two agree.
pub fn pendulum_joint_angle(rod_angle: f64) -> f64 {
    rod_angle
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Pendulum,
    DoublePendulum,
    Arm4Dof,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Pendulum, Preset::DoublePendulum, Preset::Arm4Dof];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Pendulum => "pendulum",
            Preset::DoublePendulum => "double_pendulum",
            Preset::Arm4Dof => "arm4dof",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidModel(format!("unknown preset `{s}`")))
    }
}

/// Upper-arm and forearm length of [`Preset::Arm4Dof`] (m).
pub const ARM_LINK_LENGTH: f64 = 0.5;
/// Upper-arm and forearm mass of [`Preset::Arm4Dof`] (kg).
pub const ARM_LINK_MASS: f64 = 1.0;
/// Thin-rod inertia of the arm links about their CoM: transverse, axial (kg·m²).
pub const ARM_LINK_INERTIA: (f64, f64) = (0.02, 0.001);

pub fn preset(which: Preset) -> ChainModel {
    let z = Vector3::z();
    let model = match which {
        Preset::Pendulum => ChainModel::new(
            which.name(),
            vec![JointSpec::new(z, Vector3::zeros())],
            vec![LinkSpec::point_mass(1.0, Vector3::x())],
            TaskDim::Planar,
            Isometry3::identity(),
        ),
        Preset::DoublePendulum => ChainModel::new(
            which.name(),
            vec![
                JointSpec::new(z, Vector3::zeros()),
                JointSpec::new(z, Vector3::x()),
            ],
            vec![
                LinkSpec::point_mass(1.0, Vector3::x()),
                LinkSpec::point_mass(1.0, Vector3::x()),
            ],
            TaskDim::Planar,
            Isometry3::identity(),
        ),
        Preset::Arm4Dof => {
            // Spherical shoulder (z, y, x) and an elbow about y; arm hangs along −z.
            let (transverse, axial) = ARM_LINK_INERTIA;
            let rod = Matrix3::from_diagonal(&Vector3::new(transverse, transverse, axial));
            let half = Vector3::new(0.0, 0.0, -ARM_LINK_LENGTH / 2.0);
            ChainModel::new(
                which.name(),
                vec![
                    JointSpec::new(z, Vector3::zeros()),
                    JointSpec::new(Vector3::y(), Vector3::zeros()),
                    JointSpec::new(Vector3::x(), Vector3::zeros()),
                    JointSpec::new(Vector3::y(), Vector3::new(0.0, 0.0, -ARM_LINK_LENGTH)),
                ],
                vec![
                    LinkSpec::point_mass(0.0, Vector3::zeros()),
                    LinkSpec::point_mass(0.0, Vector3::zeros()),
                    LinkSpec::point_mass(ARM_LINK_MASS, half).with_inertia(rod),
                    LinkSpec::point_mass(ARM_LINK_MASS, half).with_inertia(rod),
                ],
                TaskDim::Spatial,
                Isometry3::identity(),
            )
        }
    };
    model.expect("preset models are valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOracleSettings {
    /// Integrator step (s).
    pub dt: f64,
    /// Simulated time (s); at least ten steps.
    pub horizon: f64,
}

impl Default for SimOracleSettings {
    fn default() -> Self {
        Self {
            dt: 1e-5,
            horizon: 1e-3,
        }
    }
}

impl SimOracleSettings {
    fn validate(&self) -> Result<usize> {
        let steps = (self.horizon / self.dt).round();
        if !(self.dt > 0.0 && self.horizon.is_finite() && steps >= 10.0) {
            return Err(Error::InvalidSettings(format!(
                "need dt > 0 and horizon >= 10 dt (dt = {}, horizon = {})",
                self.dt, self.horizon
            )));
        }
        Ok(steps as usize)
    }
}

const CORIOLIS_FD_STEP: f64 = 1e-6;

struct Dynamics<'a> {
    model: &'a ChainModel,
    force: DVector<f64>,
}

impl Dynamics<'_> {
    fn mass_matrix(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let kin = forward_kinematics(self.model, &Configuration::unchecked(q.to_vec()))?;
        Ok(mass_matrix_from(self.model, &kin))
    }

    /// `M(q)⁻¹ (J_cᵀ F − c(q, q̇))`
    fn joint_accel(&self, q: &[f64], qd: &DVector<f64>) -> Result<DVector<f64>> {
        let kin = forward_kinematics(self.model, &Configuration::unchecked(q.to_vec()))?;
        let jc = com_jacobian_from(self.model, &kin)?;
        let m = mass_matrix_from(self.model, &kin);
        let mut rhs = jc.jacobian.transpose() * &self.force;
        if qd.amax() > 0.0 {
            rhs -= self.coriolis(q, qd)?;
        }
        m.lu().solve(&rhs).ok_or(Error::SingularMassMatrix {
            condition: f64::INFINITY,
        })
    }

    /// `c = Ṁ q̇ − ½ ∂(q̇ᵀ M q̇)/∂q`, with `∂M/∂q_k` by central differences.
    fn coriolis(&self, q: &[f64], qd: &DVector<f64>) -> Result<DVector<f64>> {
        let n = q.len();
        let mut m_dot = DMatrix::zeros(n, n);
        let mut half_grad = DVector::zeros(n);
        let mut probe = q.to_vec();
        for k in 0..n {
            probe[k] = q[k] + CORIOLIS_FD_STEP;
            let plus = self.mass_matrix(&probe)?;
            probe[k] = q[k] - CORIOLIS_FD_STEP;
            let minus = self.mass_matrix(&probe)?;
            probe[k] = q[k];
            let dm = (plus - minus) / (2.0 * CORIOLIS_FD_STEP);
            half_grad[k] = 0.5 * qd.dot(&(&dm * qd));
            m_dot += dm * qd[k];
        }
        Ok(m_dot * qd - half_grad)
    }

    fn com(&self, q: &[f64]) -> Result<Vector3<f64>> {
        let kin = forward_kinematics(self.model, &Configuration::unchecked(q.to_vec()))?;
        Ok(com_position_from(self.model, &kin))
    }
}

/// CoM acceleration estimated from a short simulation started at rest.
///
/// Integrates the unactuated, gravity-free joint dynamics driven by `force`
/// at the CoM with classical RK4 and returns `2·Δx / horizon²`.
pub fn sim_com_acceleration(
    model: &ChainModel,
    q: &Configuration,
    force: &[f64],
    settings: &SimOracleSettings,
) -> Result<DVector<f64>> {
    model.check_dof(q.len())?;
    let steps = settings.validate()?;
    let d = model.task_dim().dim();
    if force.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: force.len(),
        });
    }
    let dynamics = Dynamics {
        model,
        force: DVector::from_column_slice(force),
    };

    let n = model.dof();
    let h = settings.horizon / steps as f64;
    let mut pos = DVector::from_column_slice(q.as_slice());
    let mut vel = DVector::zeros(n);

    let deriv = |p: &DVector<f64>, v: &DVector<f64>| -> Result<(DVector<f64>, DVector<f64>)> {
        Ok((v.clone(), dynamics.joint_accel(p.as_slice(), v)?))
    };
    for _ in 0..steps {
        let (k1p, k1v) = deriv(&pos, &vel)?;
        let (k2p, k2v) = deriv(&(&pos + &k1p * (h / 2.0)), &(&vel + &k1v * (h / 2.0)))?;
        let (k3p, k3v) = deriv(&(&pos + &k2p * (h / 2.0)), &(&vel + &k2v * (h / 2.0)))?;
        let (k4p, k4v) = deriv(&(&pos + &k3p * h), &(&vel + &k3v * h))?;
        pos += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
        vel += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    }

    let start = dynamics.com(q.as_slice())?;
    let end = dynamics.com(pos.as_slice())?;
    let delta = end - start;
    Ok(DVector::from_iterator(
        d,
        delta
            .iter()
            .take(d)
            .map(|dx| 2.0 * dx / settings.horizon.powi(2)),
    ))
}
