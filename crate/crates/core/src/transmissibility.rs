//! RoToM, transmissibility ellipsoid and transmissibility index.
//!
//! The ellipsoid is the image of the unit sphere of force directions under
//! the mobility matrix `T`: its semi-axes are the eigenvectors of `T`, scaled
//! by the eigenvalues, and it is centered at the chain's CoM.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::centroidal::CentroidalState;
use crate::error::{Error, Result};

/// Below this largest eigenvalue the CoM is immobile and no ellipsoid exists.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// Eigenvalues of `T` may stray this far outside `[0, 1]` before being clamped.
pub const EIGENVALUE_SLACK: f64 = 1e-9;

const SIGN_FIX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissibilityEllipsoid {
    pub center: DVector<f64>,
    /// Descending, each in `[0, 1]`.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal; `eigenvectors[i]` pairs with `eigenvalues[i]`.
    pub eigenvectors: Vec<DVector<f64>>,
    /// `λ_min / λ_max`
    pub index: f64,
}

impl TransmissibilityEllipsoid {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V · diag(λ) · Vᵀ`
    pub fn mobility(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut t = DMatrix::zeros(d, d);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            t += v * v.transpose() * *lambda;
        }
        t
    }
}

fn unit_direction(direction: &[f64], dim: usize) -> Result<DVector<f64>> {
    if direction.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: direction.len(),
        });
    }
    let u = DVector::from_column_slice(direction);
    let norm = u.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroForce);
    }
    Ok(u / norm)
}

/// `‖T·u‖` for the unit vector `u` along `direction`.
pub fn rotom(state: &CentroidalState, direction: &[f64]) -> Result<f64> {
    let u = unit_direction(direction, state.task_dim())?;
    Ok((&state.mobility * u).norm())
}

pub fn ellipsoid(state: &CentroidalState) -> Result<TransmissibilityEllipsoid> {
    let eigen = state.mobility.clone().symmetric_eigen();
    let mut pairs: Vec<(f64, DVector<f64>)> = eigen
        .eigenvalues
        .iter()
        .zip(eigen.eigenvectors.column_iter())
        .map(|(&l, v)| (l, v.into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    for (lambda, v) in &mut pairs {
        if !(*lambda >= -EIGENVALUE_SLACK && *lambda <= 1.0 + EIGENVALUE_SLACK) {
            return Err(Error::MobilityOutOfRange { value: *lambda });
        }
        *lambda = lambda.clamp(0.0, 1.0);
        if let Some(first) = v.iter().copied().find(|c| c.abs() > SIGN_FIX_TOL) {
            if first < 0.0 {
                v.neg_mut();
            }
        }
    }

    let lambda_max = pairs[0].0;
    if lambda_max < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateEllipsoid { lambda_max });
    }
    let lambda_min = pairs[pairs.len() - 1].0;
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(TransmissibilityEllipsoid {
        center: state.com_position.clone(),
        eigenvalues,
        eigenvectors,
        index: lambda_min / lambda_max,
    })
}

pub fn transmissibility_index(state: &CentroidalState) -> Result<f64> {
    Ok(ellipsoid(state)?.index)
}

/// Distance from the center to the ellipsoid surface along `direction`.
///
/// Agrees with [`rotom`] only when `direction` is an eigenvector. For a flat
/// ellipsoid, a ray with any component in the null eigenspace meets it only
/// at the center and the reading is `0`.
pub fn ellipsoid_ray_reading(
    ellipsoid: &TransmissibilityEllipsoid,
    direction: &[f64],
) -> Result<f64> {
    let u = unit_direction(direction, ellipsoid.dim())?;
    let mut inv_sq = 0.0;
    for (lambda, v) in ellipsoid.eigenvalues.iter().zip(&ellipsoid.eigenvectors) {
        let c = v.dot(&u);
        if *lambda < DEGENERACY_THRESHOLD {
            if c.abs() > DEGENERACY_THRESHOLD {
                return Ok(0.0);
            }
        } else {
            inv_sq += (c / lambda).powi(2);
        }
    }
    Ok(1.0 / inv_sq.sqrt())
}

/// Points `center + T·u` for unit directions `u` spread over the circle
/// (planar) or a latitude–longitude grid (spatial). Returns exactly
/// `n_samples` points.
pub fn sample_ellipsoid_boundary(
    ellipsoid: &TransmissibilityEllipsoid,
    n_samples: usize,
) -> Result<Vec<DVector<f64>>> {
    if n_samples < 8 {
        return Err(Error::InvalidSettings(format!(
            "at least 8 boundary samples required, got {n_samples}"
        )));
    }
    let t = ellipsoid.mobility();
    let directions: Vec<DVector<f64>> = match ellipsoid.dim() {
        2 => (0..n_samples)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n_samples as f64;
                DVector::from_column_slice(&[a.cos(), a.sin()])
            })
            .collect(),
        _ => sphere_grid(n_samples),
    };
    Ok(directions
        .into_iter()
        .map(|u| &ellipsoid.center + &t * u)
        .collect())
}

/// `rings` latitude bands at cell centers; longitudes split evenly, with the
/// remainder going one-per-ring to the first rings.
fn sphere_grid(n: usize) -> Vec<DVector<f64>> {
    let rings = ((n as f64 / 2.0).sqrt().floor() as usize).max(2);
    let (base, extra) = (n / rings, n % rings);
    let mut out = Vec::with_capacity(n);
    for ring in 0..rings {
        let theta = PI * (ring as f64 + 0.5) / rings as f64;
        let count = base + usize::from(ring < extra);
        for k in 0..count {
            let phi = 2.0 * PI * k as f64 / count as f64;
            out.push(DVector::from_column_slice(&[
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centroidal::centroidal_state;
    use crate::chain_model::Configuration;
    use crate::reference::{preset, Preset};

    fn stub(t: DMatrix<f64>) -> CentroidalState {
        let m = preset(Preset::Pendulum);
        let mut state = centroidal_state(&m, &Configuration::new(&m, vec![0.0]).unwrap()).unwrap();
        state.com_position = DVector::zeros(t.nrows());
        state.mobility = t;
        state
    }

    fn pendulum(q: f64) -> CentroidalState {
        let m = preset(Preset::Pendulum);
        centroidal_state(&m, &Configuration::new(&m, vec![q]).unwrap()).unwrap()
    }

    #[test]
    fn pendulum_special_directions() {
        let q = 0.9_f64;
        let state = pendulum(q);
        let along = [q.cos(), q.sin()];
        let across = [(q + PI / 2.0).cos(), (q + PI / 2.0).sin()];
        assert!(rotom(&state, &along).unwrap() < 1e-15);
        assert!((rotom(&state, &across).unwrap() - 1.0).abs() < 1e-15);
        let diag = rotom(&pendulum(0.0), &[1.0, 1.0]).unwrap();
        assert!((diag - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn pendulum_ellipsoid_is_a_segment() {
        let q = -0.4_f64;
        let e = ellipsoid(&pendulum(q)).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14 && e.eigenvalues[1].abs() < 1e-14);
        let tangent = DVector::from_column_slice(&[-q.sin(), q.cos()]);
        assert!((e.eigenvectors[0].dot(&tangent).abs() - 1.0).abs() < 1e-14);
        assert_eq!(e.index, e.eigenvalues[1] / e.eigenvalues[0]);
        assert!(e.index < 1e-14);
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let e = ellipsoid(&pendulum(2.0)).unwrap();
        for v in &e.eigenvectors {
            let first = v.iter().find(|c| c.abs() > SIGN_FIX_TOL).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn identity_is_a_unit_sphere() {
        let e = ellipsoid(&stub(DMatrix::identity(3, 3))).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(e.index, 1.0);
        let idx = transmissibility_index(&stub(DMatrix::identity(2, 2) * 0.3)).unwrap();
        assert!((idx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_out_of_range() {
        let err = ellipsoid(&stub(DMatrix::zeros(2, 2))).unwrap_err();
        assert!(matches!(err, Error::DegenerateEllipsoid { .. }));
        let err = transmissibility_index(&stub(DMatrix::identity(2, 2) * 1e-10)).unwrap_err();
        assert!(matches!(err, Error::DegenerateEllipsoid { .. }));
        let err = ellipsoid(&stub(DMatrix::identity(2, 2) * 1.5)).unwrap_err();
        assert!(matches!(err, Error::MobilityOutOfRange { .. }));
    }

    #[test]
    fn ray_reading_against_polar_ellipse_formula() {
        // Polar radius of an ellipse with semi-axes a, b at angle θ:
        // ab / sqrt(b² cos²θ + a² sin²θ).
        let (a, b) = (1.0_f64, 0.25_f64);
        let e = ellipsoid(&stub(DMatrix::from_diagonal(&DVector::from_column_slice(
            &[a, b],
        ))))
        .unwrap();
        for k in 0..16 {
            let th = 0.1 + k as f64 * 0.37;
            let polar = a * b / ((b * th.cos()).powi(2) + (a * th.sin()).powi(2)).sqrt();
            let got = ellipsoid_ray_reading(&e, &[th.cos(), th.sin()]).unwrap();
            assert!((got - polar).abs() < 1e-14, "θ = {th}");
        }
        let r45 = ellipsoid_ray_reading(&e, &[1.0, 1.0]).unwrap();
        assert!((r45 - (2.0_f64 / 17.0).sqrt()).abs() < 1e-15);
        let rot = rotom(&stub(e.mobility()), &[1.0, 1.0]).unwrap();
        assert!((rot - (17.0_f64 / 32.0).sqrt()).abs() < 1e-15);
        assert!((r45 - rot).abs() > 0.3);
    }

    #[test]
    fn ray_reading_on_flat_ellipsoid() {
        let e = ellipsoid(&pendulum(0.0)).unwrap();
        assert!((ellipsoid_ray_reading(&e, &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(ellipsoid_ray_reading(&e, &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(ellipsoid_ray_reading(&e, &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(
            ellipsoid_ray_reading(&e, &[0.0, 0.0]).unwrap_err(),
            Error::ZeroForce
        );
    }

    #[test]
    fn boundary_samples() {
        let e = ellipsoid(&stub(DMatrix::identity(2, 2))).unwrap();
        let pts = sample_ellipsoid_boundary(&e, 8).unwrap();
        assert_eq!(pts.len(), 8);
        assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-15));
        assert!(sample_ellipsoid_boundary(&e, 7).is_err());

        let flat = ellipsoid(&pendulum(0.3)).unwrap();
        for p in sample_ellipsoid_boundary(&flat, 64).unwrap() {
            let r = (p - &flat.center).norm();
            assert!((0.0..=1.0 + 1e-12).contains(&r));
        }

        let t = DMatrix::from_row_slice(3, 3, &[0.9, 0.1, 0.0, 0.1, 0.5, 0.05, 0.0, 0.05, 0.3]);
        let e3 = ellipsoid(&stub(t)).unwrap();
        for n in [8, 9, 50, 64, 101] {
            let pts = sample_ellipsoid_boundary(&e3, n).unwrap();
            assert_eq!(pts.len(), n);
            for p in pts {
                let d = p - &e3.center;
                let s: f64 = e3
                    .eigenvalues
                    .iter()
                    .zip(&e3.eigenvectors)
                    .map(|(l, v)| (v.dot(&d) / l).powi(2))
                    .sum();
                assert!((s.sqrt() - 1.0).abs() < 1e-9);
            }
        }
    }
}
