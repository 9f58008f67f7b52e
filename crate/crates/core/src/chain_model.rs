//! Serial chains of revolute joints with point-mass (optionally rigid) links.
//!
//! Frame `i` is the frame of link `i`, obtained from frame `i - 1` by the
//! joint origin offset followed by a rotation of `q_i` about the joint axis.
//! Frame `0` is the chain's `base_frame` in the world.

use nalgebra::{DMatrix, Isometry3, Matrix3, Translation3, Unit, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

const AXIS_NORM_TOL: f64 = 1e-12;
const PLANAR_TOL: f64 = 1e-12;
const INERTIA_TOL: f64 = 1e-10;

/// Dimension of the Cartesian space in which the center of mass is analyzed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskDim {
    /// Chains moving in the world xy-plane; only the x and y rows are kept.
    Planar,
    Spatial,
}

impl TaskDim {
    pub fn dim(self) -> usize {
        match self {
            TaskDim::Planar => 2,
            TaskDim::Spatial => 3,
        }
    }

    pub fn from_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(TaskDim::Planar),
            3 => Ok(TaskDim::Spatial),
            other => Err(Error::InvalidModel(format!(
                "task_dim must be 2 or 3, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    /// Unit rotation axis, expressed in the parent link frame.
    pub axis: Vector3<f64>,
    /// Joint origin in the parent link frame (meters).
    pub origin: Vector3<f64>,
    /// Optional `(lower, upper)` range in radians.
    pub limits: Option<(f64, f64)>,
}

impl JointSpec {
    pub fn new(axis: Vector3<f64>, origin: Vector3<f64>) -> Self {
        Self {
            axis,
            origin,
            limits: None,
        }
    }

    pub fn with_limits(mut self, lower: f64, upper: f64) -> Self {
        self.limits = Some((lower, upper));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    /// kg
    pub mass: f64,
    /// Link CoM in the link frame (meters).
    pub com: Vector3<f64>,
    /// Rotational inertia about the link CoM, in the link frame (kg·m²).
    pub inertia: Option<Matrix3<f64>>,
}

impl LinkSpec {
    pub fn point_mass(mass: f64, com: Vector3<f64>) -> Self {
        Self {
            mass,
            com,
            inertia: None,
        }
    }

    pub fn with_inertia(mut self, inertia: Matrix3<f64>) -> Self {
        self.inertia = Some(inertia);
        self
    }
}

/// Immutable description of a serial chain; link `i` is distal to joint `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    name: String,
    joints: Vec<JointSpec>,
    links: Vec<LinkSpec>,
    task_dim: TaskDim,
    base_frame: Isometry3<f64>,
}

impl ChainModel {
    pub fn new(
        name: impl Into<String>,
        joints: Vec<JointSpec>,
        links: Vec<LinkSpec>,
        task_dim: TaskDim,
        base_frame: Isometry3<f64>,
    ) -> Result<Self> {
        let model = Self {
            name: name.into(),
            joints,
            links,
            task_dim,
            base_frame,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::InvalidModel("chain has no joints".into()));
        }
        if self.joints.len() != self.links.len() {
            return Err(Error::InvalidModel(format!(
                "{} joints but {} links",
                self.joints.len(),
                self.links.len()
            )));
        }
        for (i, joint) in self.joints.iter().enumerate() {
            let finite = joint
                .axis
                .iter()
                .chain(joint.origin.iter())
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::InvalidModel(format!(
                    "joint {i} has non-finite values"
                )));
            }
            if (joint.axis.norm() - 1.0).abs() > AXIS_NORM_TOL {
                return Err(Error::InvalidModel(format!(
                    "joint {i} axis has norm {}, expected 1",
                    joint.axis.norm()
                )));
            }
            if let Some((lo, hi)) = joint.limits {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidModel(format!(
                        "joint {i} limits [{lo}, {hi}] are not an increasing finite pair"
                    )));
                }
            }
        }
        for (i, link) in self.links.iter().enumerate() {
            if !(link.mass.is_finite() && link.mass >= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "link {i} mass {} is not a non-negative number",
                    link.mass
                )));
            }
            if !link.com.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidModel(format!("link {i} CoM is not finite")));
            }
            if let Some(inertia) = &link.inertia {
                check_inertia(i, inertia)?;
            }
        }
        if self.total_mass() <= 0.0 {
            return Err(Error::ZeroMass);
        }
        if self.task_dim == TaskDim::Planar {
            self.check_planar()?;
        }
        Ok(())
    }

    fn check_planar(&self) -> Result<()> {
        let z = Vector3::z();
        let base_z = self.base_frame.rotation * z;
        if (base_z.z.abs() - 1.0).abs() > PLANAR_TOL {
            return Err(Error::InvalidModel(
                "planar model requires a base frame whose z-axis is the world z-axis".into(),
            ));
        }
        for (i, joint) in self.joints.iter().enumerate() {
            if joint.axis.x.abs() > PLANAR_TOL || joint.axis.y.abs() > PLANAR_TOL {
                return Err(Error::InvalidModel(format!(
                    "planar model: joint {i} axis is not parallel to z"
                )));
            }
            if joint.origin.z.abs() > PLANAR_TOL {
                return Err(Error::InvalidModel(format!(
                    "planar model: joint {i} origin leaves the xy-plane"
                )));
            }
        }
        for (i, link) in self.links.iter().enumerate() {
            if link.com.z.abs() > PLANAR_TOL {
                return Err(Error::InvalidModel(format!(
                    "planar model: link {i} CoM leaves the xy-plane"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn task_dim(&self) -> TaskDim {
        self.task_dim
    }

    pub fn base_frame(&self) -> &Isometry3<f64> {
        &self.base_frame
    }

    /// Number of joints.
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.links.iter().map(|l| l.mass).sum()
    }

    /// Copy of this model with every link mass (and rotational inertia) multiplied by `factor`.
    pub fn with_scaled_masses(&self, factor: f64) -> Result<Self> {
        let mut scaled = self.clone();
        for link in &mut scaled.links {
            link.mass *= factor;
            if let Some(inertia) = &mut link.inertia {
                *inertia *= factor;
            }
        }
        scaled.validate()?;
        Ok(scaled)
    }

    /// Copy of this model with a different placement of joint 1 in the world.
    pub fn with_base_frame(&self, base_frame: Isometry3<f64>) -> Result<Self> {
        let mut moved = self.clone();
        moved.base_frame = base_frame;
        moved.validate()?;
        Ok(moved)
    }

    /// Search interval per joint: the declared limits, else one period `[-π, π)`.
    pub fn joint_range(&self, joint: usize) -> (f64, f64) {
        self.joints[joint]
            .limits
            .unwrap_or((-std::f64::consts::PI, std::f64::consts::PI))
    }

    pub(crate) fn check_dof(&self, found: usize) -> Result<()> {
        if found != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                found,
            });
        }
        Ok(())
    }
}

fn check_inertia(link: usize, inertia: &Matrix3<f64>) -> Result<()> {
    if !inertia.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "link {link} inertia is not finite"
        )));
    }
    if (inertia - inertia.transpose()).amax() > INERTIA_TOL {
        return Err(Error::InvalidModel(format!(
            "link {link} inertia is not symmetric"
        )));
    }
    let eig = inertia.symmetric_eigenvalues();
    if eig.min() < -INERTIA_TOL {
        return Err(Error::InvalidModel(format!(
            "link {link} inertia is not positive semidefinite"
        )));
    }
    Ok(())
}

/// Joint-angle vector in radians, one entry per joint.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration(Vec<f64>);

impl Configuration {
    /// Checks the length against `model` and every declared joint limit.
    pub fn new(model: &ChainModel, q: Vec<f64>) -> Result<Self> {
        model.check_dof(q.len())?;
        for (i, (&value, joint)) in q.iter().zip(model.joints()).enumerate() {
            if !value.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "joint {i} angle is not finite"
                )));
            }
            if let Some((lower, upper)) = joint.limits {
                if value < lower || value > upper {
                    return Err(Error::JointLimit {
                        joint: i,
                        value,
                        lower,
                        upper,
                    });
                }
            }
        }
        Ok(Self(q))
    }

    /// Skips the limit check; used for finite-difference probes and solver iterates.
    pub(crate) fn unchecked(q: Vec<f64>) -> Self {
        Self(q)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// World-frame kinematic quantities at one configuration.
#[derive(Debug, Clone)]
pub struct Kinematics {
    /// Link frames `1..=n` in the world.
    pub frames: Vec<Isometry3<f64>>,
    /// World position of each link CoM.
    pub com_positions: Vec<Vector3<f64>>,
    /// World direction of each joint axis.
    pub joint_axes: Vec<Vector3<f64>>,
    /// World position of each joint origin.
    pub joint_origins: Vec<Vector3<f64>>,
}

pub fn forward_kinematics(model: &ChainModel, q: &Configuration) -> Result<Kinematics> {
    model.check_dof(q.len())?;
    let n = model.dof();
    let mut frames = Vec::with_capacity(n);
    let mut com_positions = Vec::with_capacity(n);
    let mut joint_axes = Vec::with_capacity(n);
    let mut joint_origins = Vec::with_capacity(n);

    let mut pose = model.base_frame;
    for ((joint, link), &angle) in model.joints().iter().zip(model.links()).zip(q.as_slice()) {
        let axis = Unit::new_unchecked(joint.axis);
        let step = Isometry3::from_parts(
            Translation3::from(joint.origin),
            UnitQuaternion::from_axis_angle(&axis, angle),
        );
        pose *= step;
        joint_origins.push(pose.translation.vector);
        joint_axes.push(pose.rotation * joint.axis);
        com_positions.push(pose.transform_point(&link.com.into()).coords);
        frames.push(pose);
    }

    Ok(Kinematics {
        frames,
        com_positions,
        joint_axes,
        joint_origins,
    })
}

/// Full 3-row linear Jacobian of the CoM of `link`.
fn linear_jacobian(kin: &Kinematics, link: usize) -> DMatrix<f64> {
    let n = kin.frames.len();
    let p = kin.com_positions[link];
    let mut jac = DMatrix::zeros(3, n);
    for j in 0..=link {
        let col = kin.joint_axes[j].cross(&(p - kin.joint_origins[j]));
        jac.fixed_view_mut::<3, 1>(0, j).copy_from(&col);
    }
    jac
}

fn angular_jacobian(kin: &Kinematics, link: usize) -> DMatrix<f64> {
    let n = kin.frames.len();
    let mut jac = DMatrix::zeros(3, n);
    for j in 0..=link {
        jac.fixed_view_mut::<3, 1>(0, j)
            .copy_from(&kin.joint_axes[j]);
    }
    jac
}

fn truncate_rows(jac: DMatrix<f64>, task_dim: TaskDim) -> DMatrix<f64> {
    match task_dim {
        TaskDim::Spatial => jac,
        TaskDim::Planar => jac.rows(0, 2).into_owned(),
    }
}

/// `task_dim × n` Jacobian of the CoM of link `link` (0-based).
pub fn link_com_jacobian(
    model: &ChainModel,
    q: &Configuration,
    link: usize,
) -> Result<DMatrix<f64>> {
    if link >= model.dof() {
        return Err(Error::LinkIndex {
            index: link,
            links: model.dof(),
        });
    }
    let kin = forward_kinematics(model, q)?;
    Ok(truncate_rows(linear_jacobian(&kin, link), model.task_dim()))
}

/// Jacobian of the whole-chain CoM together with the total mass.
#[derive(Debug, Clone)]
pub struct ComJacobian {
    pub jacobian: DMatrix<f64>,
    pub total_mass: f64,
}

/// Mass-weighted average of the link CoM Jacobians.
pub fn robot_com_jacobian(model: &ChainModel, q: &Configuration) -> Result<ComJacobian> {
    let kin = forward_kinematics(model, q)?;
    com_jacobian_from(model, &kin)
}

pub(crate) fn com_jacobian_from(model: &ChainModel, kin: &Kinematics) -> Result<ComJacobian> {
    let total_mass = model.total_mass();
    if total_mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let mut acc = DMatrix::zeros(3, model.dof());
    for (i, link) in model.links().iter().enumerate() {
        if link.mass > 0.0 {
            acc += linear_jacobian(kin, i) * link.mass;
        }
    }
    Ok(ComJacobian {
        jacobian: truncate_rows(acc / total_mass, model.task_dim()),
        total_mass,
    })
}

/// World position of the whole-chain CoM (full 3-vector).
pub(crate) fn com_position_from(model: &ChainModel, kin: &Kinematics) -> Vector3<f64> {
    let weighted: Vector3<f64> = model
        .links()
        .iter()
        .zip(&kin.com_positions)
        .map(|(link, p)| p * link.mass)
        .sum();
    weighted / model.total_mass()
}

/// Joint-space inertia matrix.
pub fn mass_matrix(model: &ChainModel, q: &Configuration) -> Result<DMatrix<f64>> {
    let kin = forward_kinematics(model, q)?;
    Ok(mass_matrix_from(model, &kin))
}

pub(crate) fn mass_matrix_from(model: &ChainModel, kin: &Kinematics) -> DMatrix<f64> {
    let n = model.dof();
    let mut m = DMatrix::zeros(n, n);
    for (i, link) in model.links().iter().enumerate() {
        if link.mass > 0.0 {
            let jv = linear_jacobian(kin, i);
            m += jv.transpose() * &jv * link.mass;
        }
        if let Some(inertia) = &link.inertia {
            let rot = kin.frames[i].rotation.to_rotation_matrix();
            let world = rot.matrix() * inertia * rot.matrix().transpose();
            let jw = angular_jacobian(kin, i);
            m += jw.transpose() * world * &jw;
        }
    }
    (&m + m.transpose()) * 0.5
}
