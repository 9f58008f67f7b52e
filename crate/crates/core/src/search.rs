//! Configuration-space searches on the RoToM objective `q ↦ ‖T(q)·F‖`.
//!
//! [`minimize_rotom`] is a quasi-static gradient descent: each iterate moves
//! against the finite-difference gradient, with backtracking that only
//! accepts strict decreases. [`find_rotom_zeros`] solves `T(q)·F = 0` with
//! Levenberg–Marquardt from a uniform grid of seeds over the joint ranges.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::centroidal::centroidal_state;
use crate::chain_model::{ChainModel, Configuration};
use crate::error::{Error, Result};

/// At or below this `‖T·F‖` the objective sits on its kink at zero.
pub const NORM_SINGULARITY: f64 = 1e-12;

const MAX_HALVINGS: usize = 60;
const MAX_SEEDS: usize = 1 << 22;
const ZERO_FD_STEP: f64 = 1e-7;

fn objective(model: &ChainModel, q: &[f64], force: &DVector<f64>) -> Result<f64> {
    let state = centroidal_state(model, &Configuration::unchecked(q.to_vec()))?;
    Ok((&state.mobility * force).norm())
}

fn residual(model: &ChainModel, q: &[f64], force: &DVector<f64>) -> Result<DVector<f64>> {
    let state = centroidal_state(model, &Configuration::unchecked(q.to_vec()))?;
    Ok(&state.mobility * force)
}

fn force_vector(model: &ChainModel, force: &[f64]) -> Result<DVector<f64>> {
    let d = model.task_dim().dim();
    if force.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: force.len(),
        });
    }
    let f = DVector::from_column_slice(force);
    let norm = f.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroForce);
    }
    Ok(f)
}

/// Central-difference gradient of `q ↦ ‖T(q)·F‖`, with `F` fixed in the world.
pub fn rotom_gradient(
    model: &ChainModel,
    q: &Configuration,
    force: &[f64],
    fd_step: f64,
) -> Result<DVector<f64>> {
    model.check_dof(q.len())?;
    let force = force_vector(model, force)?;
    gradient(model, q.as_slice(), &force, fd_step)
}

fn gradient(model: &ChainModel, q: &[f64], force: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let norm = objective(model, q, force)?;
    if norm <= NORM_SINGULARITY {
        return Err(Error::NormSingularity { norm });
    }
    let mut probe = q.to_vec();
    let mut grad = DVector::zeros(q.len());
    for i in 0..q.len() {
        probe[i] = q[i] + h;
        let plus = objective(model, &probe, force)?;
        probe[i] = q[i] - h;
        let minus = objective(model, &probe, force)?;
        probe[i] = q[i];
        grad[i] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentSettings {
    /// Scales the step like the torque gain `k`.
    pub gain: f64,
    pub fd_step: f64,
    /// Radians per unit gradient per iteration, before backtracking.
    pub step_size: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub objective_tol: f64,
}

impl Default for DescentSettings {
    fn default() -> Self {
        Self {
            gain: 1.0,
            fd_step: 1e-6,
            step_size: 1e-2,
            max_iters: 10_000,
            grad_tol: 1e-8,
            objective_tol: 1e-12,
        }
    }
}

impl DescentSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.gain,
            self.fd_step,
            self.step_size,
            self.grad_tol,
            self.objective_tol,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        if !positive || self.max_iters == 0 {
            return Err(Error::InvalidSettings(
                "descent settings must be positive".into(),
            ));
        }
        if self.fd_step >= self.step_size {
            return Err(Error::InvalidSettings(
                "fd_step must be smaller than step_size".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientSmall,
    ObjectiveFlat,
    MaxIters,
    JointLimit,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::GradientSmall => "GradientSmall",
            StopReason::ObjectiveFlat => "ObjectiveFlat",
            StopReason::MaxIters => "MaxIters",
            StopReason::JointLimit => "JointLimit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentIterate {
    pub q: Vec<f64>,
    /// `‖T(q)·F‖`
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentTrace {
    pub iterates: Vec<DescentIterate>,
    pub converged: bool,
    pub reason: StopReason,
}

impl DescentTrace {
    pub fn last(&self) -> &DescentIterate {
        self.iterates
            .last()
            .expect("trace holds the starting point")
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.iterates
            .windows(2)
            .all(|w| w[1].objective < w[0].objective)
    }
}

fn clamp_to_limits(model: &ChainModel, q: &mut [f64]) -> bool {
    let mut clamped = false;
    for (value, joint) in q.iter_mut().zip(model.joints()) {
        if let Some((lo, hi)) = joint.limits {
            if *value <= lo || *value >= hi {
                *value = value.clamp(lo, hi);
                clamped = true;
            }
        }
    }
    clamped
}

/// Gradient descent of the RoToM from `q0`.
///
/// Steps and tolerances act on the unit-force objective, so scaling `F`
/// scales the reported objectives but leaves the iterates unchanged.
pub fn minimize_rotom(
    model: &ChainModel,
    q0: &Configuration,
    force: &[f64],
    settings: &DescentSettings,
) -> Result<DescentTrace> {
    settings.validate()?;
    model.check_dof(q0.len())?;
    let force = force_vector(model, force)?;
    let magnitude = force.norm();
    let unit = &force / magnitude;

    let mut q = q0.as_slice().to_vec();
    let mut value = objective(model, &q, &unit)?;
    let mut iterates = vec![DescentIterate {
        q: q.clone(),
        objective: value * magnitude,
    }];
    let finish = |iterates, converged, reason| DescentTrace {
        iterates,
        converged,
        reason,
    };

    for _ in 0..settings.max_iters {
        let grad = match gradient(model, &q, &unit, settings.fd_step) {
            Ok(g) => g,
            Err(Error::NormSingularity { .. }) => {
                return Ok(finish(iterates, true, StopReason::GradientSmall))
            }
            Err(e) => return Err(e),
        };
        if grad.norm() < settings.grad_tol {
            return Ok(finish(iterates, true, StopReason::GradientSmall));
        }

        let mut step = settings.gain * settings.step_size;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial: Vec<f64> = q
                .iter()
                .zip(grad.iter())
                .map(|(x, g)| x - step * g)
                .collect();
            let clamped = clamp_to_limits(model, &mut trial);
            if let Ok(v) = objective(model, &trial, &unit) {
                if v < value {
                    accepted = Some((trial, v, clamped));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((next, next_value, clamped)) = accepted else {
            return Ok(finish(iterates, true, StopReason::ObjectiveFlat));
        };

        let decrease = value - next_value;
        q = next;
        value = next_value;
        iterates.push(DescentIterate {
            q: q.clone(),
            objective: value * magnitude,
        });
        if clamped {
            return Ok(finish(iterates, false, StopReason::JointLimit));
        }
        if decrease < settings.objective_tol {
            return Ok(finish(iterates, true, StopReason::ObjectiveFlat));
        }
    }
    Ok(finish(iterates, false, StopReason::MaxIters))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSearchSettings {
    pub seeds_per_joint: usize,
    /// Acceptance threshold on `‖T(q)·F‖`.
    pub residual_tol: f64,
    /// Wrapped angular distance below which two solutions are the same (rad).
    pub dedupe_tol: f64,
    pub max_newton_iters: usize,
}

impl Default for ZeroSearchSettings {
    fn default() -> Self {
        Self {
            seeds_per_joint: 8,
            residual_tol: 1e-10,
            dedupe_tol: 1e-3,
            max_newton_iters: 50,
        }
    }
}

impl ZeroSearchSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = self.seeds_per_joint > 0
            && self.max_newton_iters > 0
            && self.residual_tol > 0.0
            && self.dedupe_tol > 0.0;
        if !positive {
            return Err(Error::InvalidSettings(
                "zero-search settings must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStatus {
    Converged,
    /// Converged to a configuration no joint-limit-respecting angle reaches.
    OutsideLimits,
    NotConverged,
    /// The solver hit a singular mass matrix.
    Singular,
}

impl SeedStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SeedStatus::Converged => "Converged",
            SeedStatus::OutsideLimits => "OutsideLimits",
            SeedStatus::NotConverged => "NotConverged",
            SeedStatus::Singular => "Singular",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: Vec<f64>,
    pub end: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub status: SeedStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSolution {
    pub q: Vec<f64>,
    /// `‖T(q)·F‖`, re-evaluated at `q`.
    pub residual: f64,
}

/// Zero-RoToM configurations found by the multistart solve.
///
/// When the zero set is a continuum the solutions are representatives of it,
/// not an enumeration. An empty `solutions` list is a valid outcome; `seeds`
/// tells whether the solver converged anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSearchReport {
    pub solutions: Vec<ZeroSolution>,
    pub seeds: Vec<SeedOutcome>,
}

/// Angle wrapped into `[-π, π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

fn wrapped_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| wrap_angle(x - y).abs())
        .fold(0.0, f64::max)
}

fn seed_grid(model: &ChainModel, per_joint: usize) -> Result<Vec<Vec<f64>>> {
    let n = model.dof();
    let total = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(per_joint));
    let total = match total {
        Some(t) if t <= MAX_SEEDS => t,
        _ => {
            return Err(Error::InvalidSettings(format!(
                "{per_joint}^{n} seeds exceeds the limit of {MAX_SEEDS}"
            )))
        }
    };
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let (lo, hi) = model.joint_range(j);
            let width = (hi - lo) / per_joint as f64;
            (0..per_joint)
                .map(|k| lo + (k as f64 + 0.5) * width)
                .collect()
        })
        .collect();
    Ok((0..total)
        .map(|mut idx| {
            let mut seed = vec![0.0; n];
            for j in (0..n).rev() {
                seed[j] = axes[j][idx % per_joint];
                idx /= per_joint;
            }
            seed
        })
        .collect())
}

/// Brings each angle into the joint's range by whole turns; `None` if impossible.
fn fold_into_range(model: &ChainModel, q: &[f64]) -> Option<Vec<f64>> {
    q.iter()
        .zip(model.joints())
        .map(|(&a, joint)| match joint.limits {
            None => Some(wrap_angle(a)),
            Some((lo, hi)) => {
                let turns = ((lo - a) / (2.0 * PI)).ceil();
                let shifted = a + turns * 2.0 * PI;
                (shifted <= hi).then_some(shifted)
            }
        })
        .collect()
}

fn residual_jacobian(model: &ChainModel, q: &[f64], force: &DVector<f64>) -> Result<DMatrix<f64>> {
    let d = force.len();
    let mut jac = DMatrix::zeros(d, q.len());
    let mut probe = q.to_vec();
    for i in 0..q.len() {
        probe[i] = q[i] + ZERO_FD_STEP;
        let plus = residual(model, &probe, force)?;
        probe[i] = q[i] - ZERO_FD_STEP;
        let minus = residual(model, &probe, force)?;
        probe[i] = q[i];
        jac.set_column(i, &((plus - minus) / (2.0 * ZERO_FD_STEP)));
    }
    Ok(jac)
}

fn solve_from_seed(
    model: &ChainModel,
    seed: &[f64],
    force: &DVector<f64>,
    settings: &ZeroSearchSettings,
) -> SeedOutcome {
    let outcome = |end: Vec<f64>, residual: f64, iterations, status| SeedOutcome {
        seed: seed.to_vec(),
        end,
        residual,
        iterations,
        status,
    };
    let singular =
        |end: &[f64], iterations| outcome(end.to_vec(), f64::NAN, iterations, SeedStatus::Singular);

    let n = seed.len();
    let mut q = seed.to_vec();
    let mut r = match residual(model, &q, force) {
        Ok(r) => r,
        Err(_) => return singular(&q, 0),
    };
    let mut damping = 1e-3;
    for iter in 0..=settings.max_newton_iters {
        if r.norm() < settings.residual_tol {
            return match fold_into_range(model, &q) {
                Some(folded) => outcome(folded, r.norm(), iter, SeedStatus::Converged),
                None => outcome(q, r.norm(), iter, SeedStatus::OutsideLimits),
            };
        }
        if iter == settings.max_newton_iters {
            break;
        }
        let jac = match residual_jacobian(model, &q, force) {
            Ok(j) => j,
            Err(_) => return singular(&q, iter),
        };
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        let scale = jtj.diagonal().amax().max(f64::MIN_POSITIVE);

        let mut improved = false;
        for _ in 0..30 {
            let lhs = &jtj + DMatrix::identity(n, n) * (damping * scale);
            let Some(delta) = lhs.cholesky().map(|c| c.solve(&grad)) else {
                damping *= 4.0;
                continue;
            };
            let trial: Vec<f64> = q.iter().zip(delta.iter()).map(|(x, dx)| x - dx).collect();
            match residual(model, &trial, force) {
                Ok(tr) if tr.norm() < r.norm() => {
                    q = trial;
                    r = tr;
                    damping = (damping / 3.0).max(1e-15);
                    improved = true;
                    break;
                }
                _ => damping *= 4.0,
            }
        }
        if !improved {
            return outcome(q, r.norm(), iter, SeedStatus::NotConverged);
        }
    }
    let norm = r.norm();
    outcome(q, norm, settings.max_newton_iters, SeedStatus::NotConverged)
}

fn wrapped_lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| wrap_angle(*x).total_cmp(&wrap_angle(*y)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Multistart search for configurations with `T(q)·F = 0` inside the joint limits.
pub fn find_rotom_zeros(
    model: &ChainModel,
    force: &[f64],
    settings: &ZeroSearchSettings,
) -> Result<ZeroSearchReport> {
    settings.validate()?;
    let force = force_vector(model, force)?;
    let seeds = seed_grid(model, settings.seeds_per_joint)?;

    let outcomes: Vec<SeedOutcome> = seeds
        .par_iter()
        .map(|seed| solve_from_seed(model, seed, &force, settings))
        .collect();

    let mut solutions: Vec<ZeroSolution> = Vec::new();
    for o in outcomes
        .iter()
        .filter(|o| o.status == SeedStatus::Converged)
    {
        if solutions
            .iter()
            .any(|s| wrapped_distance(&s.q, &o.end) < settings.dedupe_tol)
        {
            continue;
        }
        let Ok(cfg) = Configuration::new(model, o.end.clone()) else {
            continue;
        };
        let residual = (&centroidal_state(model, &cfg)?.mobility * &force).norm();
        solutions.push(ZeroSolution {
            q: o.end.clone(),
            residual,
        });
    }
    solutions.sort_by(|a, b| wrapped_lex(&a.q, &b.q));
    Ok(ZeroSearchReport {
        solutions,
        seeds: outcomes,
    })
}
