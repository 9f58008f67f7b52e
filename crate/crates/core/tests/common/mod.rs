//! Random chain generators and independent oracles shared by the test targets.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Isometry3, Unit, UnitQuaternion, Vector3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rotom_core::{
    centroidal_state, CentroidalState, ChainModel, Configuration, Error, JointSpec, LinkSpec,
    TaskDim,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point masses at the link tips; link `i` has length `lengths[i]`.
#[derive(Debug, Clone)]
pub struct PlanarChain {
    pub masses: Vec<f64>,
    pub lengths: Vec<f64>,
}

impl PlanarChain {
    pub fn random(rng: &mut impl Rng, links: usize) -> Self {
        Self {
            masses: (0..links).map(|_| rng.random_range(0.1..10.0)).collect(),
            lengths: (0..links).map(|_| rng.random_range(0.1..2.0)).collect(),
        }
    }

    pub fn model(&self) -> ChainModel {
        let mut joints = Vec::new();
        let mut links = Vec::new();
        for i in 0..self.masses.len() {
            let origin = if i == 0 { 0.0 } else { self.lengths[i - 1] };
            joints.push(JointSpec::new(Vector3::z(), Vector3::new(origin, 0.0, 0.0)));
            links.push(LinkSpec::point_mass(
                self.masses[i],
                Vector3::new(self.lengths[i], 0.0, 0.0),
            ));
        }
        ChainModel::new(
            "planar",
            joints,
            links,
            TaskDim::Planar,
            Isometry3::identity(),
        )
        .unwrap()
    }

    /// Tip positions from absolute link angles.
    pub fn tips(&self, q: &[f64]) -> Vec<[f64; 2]> {
        let (mut x, mut y, mut theta) = (0.0, 0.0, 0.0);
        let mut out = Vec::new();
        for (l, qi) in self.lengths.iter().zip(q) {
            theta += qi;
            x += l * theta.cos();
            y += l * theta.sin();
            out.push([x, y]);
        }
        out
    }

    /// `∂tip_k / ∂q_j`: rotation about joint `j` moves tip `k ≥ j`.
    fn tip_jacobian(&self, q: &[f64], k: usize) -> DMatrix<f64> {
        let n = q.len();
        let tips = self.tips(q);
        let mut jac = DMatrix::zeros(2, n);
        for j in 0..=k {
            let pivot = if j == 0 { [0.0, 0.0] } else { tips[j - 1] };
            jac[(0, j)] = -(tips[k][1] - pivot[1]);
            jac[(1, j)] = tips[k][0] - pivot[0];
        }
        jac
    }

    /// `m·J·M⁻¹·Jᵀ` by dense inversion, with `J` and `M` from the closed form.
    pub fn mobility(&self, q: &[f64]) -> DMatrix<f64> {
        let n = q.len();
        let total: f64 = self.masses.iter().sum();
        let mut m = DMatrix::zeros(n, n);
        let mut jc = DMatrix::zeros(2, n);
        for (k, mass) in self.masses.iter().enumerate() {
            let jk = self.tip_jacobian(q, k);
            m += jk.transpose() * &jk * *mass;
            jc += jk * (*mass / total);
        }
        let inv = m
            .try_inverse()
            .expect("point-mass planar chains have invertible M");
        &jc * inv * jc.transpose() * total
    }
}

/// Rotation-only spatial chain with random axes and link offsets.
pub fn random_spatial_chain(rng: &mut impl Rng, links: usize) -> ChainModel {
    let mut joints = Vec::new();
    let mut specs = Vec::new();
    let mut prev_tip = Vector3::zeros();
    for _ in 0..links {
        joints.push(JointSpec::new(random_unit(rng).into_inner(), prev_tip));
        let tip = random_unit(rng).into_inner() * rng.random_range(0.1..2.0);
        specs.push(LinkSpec::point_mass(rng.random_range(0.1..10.0), tip));
        prev_tip = tip;
    }
    ChainModel::new(
        "spatial",
        joints,
        specs,
        TaskDim::Spatial,
        Isometry3::identity(),
    )
    .unwrap()
}

pub fn random_unit(rng: &mut impl Rng) -> Unit<Vector3<f64>> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return Unit::new_normalize(v);
        }
    }
}

pub fn random_direction(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

pub fn random_base(rng: &mut impl Rng) -> Isometry3<f64> {
    let t = Vector3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    );
    let r = UnitQuaternion::from_axis_angle(&random_unit(rng), rng.random_range(-PI..PI));
    Isometry3::from_parts(t.into(), r)
}

/// A random chain, configuration and state; spatial draws whose mass
/// matrix is singular are redrawn.
pub struct Case {
    pub model: ChainModel,
    pub q: Configuration,
    pub state: CentroidalState,
}

pub fn random_case(rng: &mut impl Rng, links: usize, spatial: bool) -> Case {
    loop {
        let model = if spatial {
            random_spatial_chain(rng, links)
        } else {
            PlanarChain::random(rng, links).model()
        };
        let q: Vec<f64> = (0..links).map(|_| rng.random_range(-PI..PI)).collect();
        let q = Configuration::new(&model, q).unwrap();
        match centroidal_state(&model, &q) {
            Ok(state) => return Case { model, q, state },
            Err(Error::SingularMassMatrix { .. }) => continue,
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix; eigenvalues
/// descending with matching columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                if a[(p, r)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (2.0 * a[(p, r)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akr) = (a[(k, p)], a[(k, r)]);
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..n {
                    let (apk, ark) = (a[(p, k)], a[(r, k)]);
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
                for k in 0..n {
                    let (vkp, vkr) = (v[(k, p)], v[(k, r)]);
                    v[(k, p)] = c * vkp - s * vkr;
                    v[(k, r)] = s * vkp + c * vkr;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| v.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// Objective `‖T(q)·F‖` of the unit-mass, unit-length double pendulum on an
/// `n × n` node grid over `[−π, π)²`, from the closed form.
pub fn double_pendulum_grid(force: [f64; 2], n: usize) -> Vec<Vec<f64>> {
    let chain = PlanarChain {
        masses: vec![1.0, 1.0],
        lengths: vec![1.0, 1.0],
    };
    let f = DVector::from_column_slice(&force);
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let q = [-PI + i as f64 * h, -PI + j as f64 * h];
                    (chain.mobility(&q) * &f).norm()
                })
                .collect()
        })
        .collect()
}

pub fn grid_node(n: usize, i: usize) -> f64 {
    -PI + i as f64 * 2.0 * PI / n as f64
}

/// Nodes that are no larger than their eight periodic neighbours.
pub fn grid_local_minima(grid: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let n = grid.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = grid[i][j];
            let is_min = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    let a = (i as i64 + di).rem_euclid(n as i64) as usize;
                    let b = (j as i64 + dj).rem_euclid(n as i64) as usize;
                    grid[a][b] >= v
                })
            });
            if is_min {
                out.push((i, j, v));
            }
        }
    }
    out
}

pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Horizon over which the initial joint acceleration turns the fastest joint
/// by `angle` radians, starting from rest.
pub fn horizon_for_angle(model: &ChainModel, q: &Configuration, force: &[f64], angle: f64) -> f64 {
    use rotom_core::chain_model::{mass_matrix, robot_com_jacobian};
    let jac = robot_com_jacobian(model, q).unwrap().jacobian;
    let m = mass_matrix(model, q).unwrap();
    let qdd = m
        .lu()
        .solve(&(jac.transpose() * DVector::from_column_slice(force)))
        .unwrap();
    (2.0 * angle / qdd.amax()).sqrt()
}
