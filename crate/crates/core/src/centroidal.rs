//! Centroidal mobility of a chain under a force applied at its center of mass.
//!
//! The mobility matrix `T = m · J_c · M⁻¹ · J_cᵀ` maps an applied force `F`
//! to the fictitious force `f = T·F`: the force that, on a free point mass of
//! the same total mass, gives the same CoM acceleration as `F` gives the chain.
//! `T` is formed with a Cholesky solve against `M`; `J_c` is never inverted.

use nalgebra::{DMatrix, DVector};

use crate::chain_model::{
    com_jacobian_from, com_position_from, forward_kinematics, mass_matrix_from, ChainModel,
    Configuration,
};
use crate::error::{Error, Result};

/// Mass matrices with a larger eigenvalue ratio are treated as singular.
pub const MAX_MASS_CONDITION: f64 = 1e12;

/// Slack on `‖accel‖ ≤ ‖F‖ / m`.
pub const ACCEL_BOUND_SLACK: f64 = 1e-9;

/// Kinematic and inertial quantities of a chain frozen at one configuration.
#[derive(Debug, Clone)]
pub struct CentroidalState {
    pub q: Configuration,
    pub total_mass: f64,
    /// `task_dim × n`
    pub com_jacobian: DMatrix<f64>,
    /// `n × n`
    pub mass_matrix: DMatrix<f64>,
    /// `task_dim × task_dim`, symmetric, dimensionless.
    pub mobility: DMatrix<f64>,
    /// World CoM, truncated to `task_dim` components.
    pub com_position: DVector<f64>,
    /// Eigenvalue ratio of the mass matrix.
    pub mass_condition: f64,
}

impl CentroidalState {
    pub fn task_dim(&self) -> usize {
        self.mobility.nrows()
    }

    pub(crate) fn force_vector(&self, force: &[f64]) -> Result<DVector<f64>> {
        if force.len() != self.task_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.task_dim(),
                found: force.len(),
            });
        }
        let force = DVector::from_column_slice(force);
        let norm = force.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroForce);
        }
        Ok(force)
    }
}

pub fn centroidal_state(model: &ChainModel, q: &Configuration) -> Result<CentroidalState> {
    let kin = forward_kinematics(model, q)?;
    let jc = com_jacobian_from(model, &kin)?;
    let mass_matrix = mass_matrix_from(model, &kin);

    let eig = mass_matrix.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let mass_condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    // Negated so that a NaN condition also counts as singular.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(mass_condition <= MAX_MASS_CONDITION) {
        return Err(Error::SingularMassMatrix {
            condition: mass_condition,
        });
    }
    let chol = mass_matrix
        .clone()
        .cholesky()
        .ok_or(Error::SingularMassMatrix {
            condition: mass_condition,
        })?;

    let solved = chol.solve(&jc.jacobian.transpose());
    let raw = &jc.jacobian * solved * jc.total_mass;
    let mobility = (&raw + raw.transpose()) * 0.5;

    let com = com_position_from(model, &kin);
    let d = model.task_dim().dim();
    Ok(CentroidalState {
        q: q.clone(),
        total_mass: jc.total_mass,
        com_jacobian: jc.jacobian,
        mass_matrix,
        mobility,
        com_position: DVector::from_iterator(d, com.iter().copied().take(d)),
        mass_condition,
    })
}

/// Applied force split into its transmitted part and the constraint reaction.
#[derive(Debug, Clone, PartialEq)]
pub struct RotomResult {
    /// `‖f‖ / ‖F‖`
    pub rotom: f64,
    pub force: DVector<f64>,
    /// Fictitious force `f = T·F` (N).
    pub fictitious: DVector<f64>,
    /// Passive reaction `R = f − F` (N).
    pub reaction: DVector<f64>,
    /// CoM acceleration `f / m` (m/s²).
    pub accel: DVector<f64>,
}

pub fn fictitious_force(state: &CentroidalState, force: &[f64]) -> Result<RotomResult> {
    let force = state.force_vector(force)?;
    let fictitious = &state.mobility * &force;
    let reaction = &fictitious - &force;
    let accel = &fictitious / state.total_mass;
    Ok(RotomResult {
        rotom: fictitious.norm() / force.norm(),
        force,
        fictitious,
        reaction,
        accel,
    })
}

/// `true` iff the CoM acceleration does not exceed that of a free point mass.
pub fn com_acceleration_bound_check(state: &CentroidalState, force: &[f64]) -> Result<bool> {
    let result = fictitious_force(state, force)?;
    Ok(result.accel.norm() <= result.force.norm() / state.total_mass + ACCEL_BOUND_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{preset, Preset};
    use std::f64::consts::FRAC_PI_2;

    fn pendulum_state(q: f64) -> CentroidalState {
        let m = preset(Preset::Pendulum);
        centroidal_state(&m, &Configuration::new(&m, vec![q]).unwrap()).unwrap()
    }

    #[test]
    fn pendulum_mobility_closed_form() {
        for &q in &[-2.9, -1.0, 0.0, 0.3, FRAC_PI_2, 2.2] {
            let t = pendulum_state(q).mobility;
            let (s, c) = q.sin_cos();
            let expected = DMatrix::from_row_slice(2, 2, &[s * s, -s * c, -s * c, c * c]);
            assert!((t - expected).amax() < 1e-15, "q = {q}");
        }
    }

    #[test]
    fn quarter_turn_transmits_horizontal_force() {
        let r = fictitious_force(&pendulum_state(FRAC_PI_2), &[1.0, 0.0]).unwrap();
        assert!((r.fictitious[0] - 1.0).abs() < 1e-15 && r.fictitious[1].abs() < 1e-15);
        assert!(r.reaction.amax() < 1e-15);
    }

    #[test]
    fn rod_aligned_force_is_absorbed() {
        let q = 0.7_f64;
        let f = [2.0 * q.cos(), 2.0 * q.sin()];
        let r = fictitious_force(&pendulum_state(q), &f).unwrap();
        assert!(r.fictitious.norm() < 1e-15);
        assert!((&r.reaction + DVector::from_column_slice(&f)).norm() < 1e-15);
        assert!(r.rotom < 1e-15);
    }

    #[test]
    fn result_identities_hold() {
        let state = pendulum_state(1.3);
        let r = fictitious_force(&state, &[0.3, -2.0]).unwrap();
        // R = f − F is stored, so F + R reproduces f up to one rounding.
        assert!(
            (&r.force + &r.reaction - &r.fictitious).amax() <= 4.0 * f64::EPSILON * r.force.amax()
        );
        assert_eq!(&r.fictitious / state.total_mass, r.accel);
        assert!((r.rotom - r.fictitious.norm() / r.force.norm()).abs() < 1e-12);
    }

    #[test]
    fn zero_force_and_wrong_length() {
        let state = pendulum_state(0.0);
        assert_eq!(
            fictitious_force(&state, &[0.0, 0.0]).unwrap_err(),
            Error::ZeroForce
        );
        assert_eq!(
            com_acceleration_bound_check(&state, &[0.0, 0.0]).unwrap_err(),
            Error::ZeroForce
        );
        assert!(matches!(
            fictitious_force(&state, &[1.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn bound_check_is_tight_for_identity_mobility() {
        let mut state = pendulum_state(0.0);
        state.mobility = DMatrix::identity(2, 2);
        let r = fictitious_force(&state, &[3.0, 4.0]).unwrap();
        assert!((r.accel.norm() - 5.0 / state.total_mass).abs() < 1e-12);
        assert!(com_acceleration_bound_check(&state, &[3.0, 4.0]).unwrap());
    }

    #[test]
    fn singular_mass_matrix_is_reported() {
        // Both masses on joint 1's axis line: the first joint moves nothing.
        use crate::chain_model::{JointSpec, LinkSpec, TaskDim};
        use nalgebra::{Isometry3, Vector3};
        let m = ChainModel::new(
            "degenerate",
            vec![
                JointSpec::new(Vector3::z(), Vector3::zeros()),
                JointSpec::new(Vector3::x(), Vector3::zeros()),
            ],
            vec![
                LinkSpec::point_mass(1.0, Vector3::zeros()),
                LinkSpec::point_mass(1.0, Vector3::new(0.0, 0.0, 1.0)),
            ],
            TaskDim::Spatial,
            Isometry3::identity(),
        )
        .unwrap();
        let q = Configuration::new(&m, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            centroidal_state(&m, &q),
            Err(Error::SingularMassMatrix { .. })
        ));
    }
}
