use nalgebra::{DMatrix, DVector};

use super::{forward_kinematics, Chain, JointState, KinematicsError};
use crate::math::{rotation_vector, Pose, Vec3};
use crate::urdf::JointKind;

const JACOBIAN_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkOptions {
    /// Position tolerance in meters.
    pub pos_tol: f64,
    /// Orientation tolerance in radians.
    pub rot_tol: f64,
    pub max_iters: usize,
    pub damping: f64,
    /// Largest change of any joint in one iteration.
    pub max_step: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        Self {
            pos_tol: 1e-4,
            rot_tol: 1e-3,
            max_iters: 500,
            damping: 0.05,
            max_step: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_position_error: f64,
    pub final_orientation_error: f64,
}

/// `[p_target - p; log(R_target * R^T)]` for the link at `link`.
fn pose_error(
    chain: &Chain,
    state: &[f64],
    link: usize,
    target: &Pose,
    base: &Pose,
) -> DVector<f64> {
    let fk = forward_kinematics(chain, state, base).expect("state length checked");
    let current = fk[link];
    let dp: Vec3 = target.translation.vector - current.translation.vector;
    let dr = rotation_vector(&(target.rotation * current.rotation.inverse()));
    DVector::from_column_slice(&[dp.x, dp.y, dp.z, dr.x, dr.y, dr.z])
}

fn errors(e: &DVector<f64>) -> (f64, f64) {
    (e.fixed_rows::<3>(0).norm(), e.fixed_rows::<3>(3).norm())
}

fn project_limits(chain: &Chain, q: &mut [f64]) {
    for (value, &i) in q.iter_mut().zip(chain.dof_layout()) {
        let Some(joint) = chain.links()[i].joint.as_ref() else {
            continue;
        };
        if joint.kind == JointKind::Continuous {
            continue;
        }
        if let Some(l) = joint.limits {
            *value = value.clamp(l.lower, l.upper);
        }
    }
}

/// Damped-least-squares IK for one link, with the chain based at identity.
/// Unreachable targets are not an error: the best state seen is returned and
/// `converged` is false.
pub fn inverse_kinematics(
    chain: &Chain,
    target_link: usize,
    target: &Pose,
    seed: &JointState,
    opts: &IkOptions,
) -> Result<(JointState, IkReport), KinematicsError> {
    chain.link(target_link)?;
    chain.check_state(seed)?;
    let base = Pose::identity();
    let n = chain.dof();
    let lambda2 = opts.damping * opts.damping;

    let mut q = seed.to_vec();
    let mut e = pose_error(chain, &q, target_link, target, &base);
    let mut best = (q.clone(), e.norm(), errors(&e));
    let mut iterations = 0;
    let done = |(p, r): (f64, f64)| p < opts.pos_tol && r < opts.rot_tol;

    while !done(errors(&e)) && iterations < opts.max_iters && n > 0 {
        iterations += 1;

        let mut jac = DMatrix::<f64>::zeros(6, n);
        let mut probe = q.clone();
        for k in 0..n {
            let q0 = probe[k];
            probe[k] = q0 + JACOBIAN_STEP;
            let plus = pose_error(chain, &probe, target_link, target, &base);
            probe[k] = q0 - JACOBIAN_STEP;
            let minus = pose_error(chain, &probe, target_link, target, &base);
            probe[k] = q0;
            jac.set_column(k, &((plus - minus) / (2.0 * JACOBIAN_STEP)));
        }

        let jjt = &jac * jac.transpose() + DMatrix::<f64>::identity(6, 6) * lambda2;
        let Some(solved) = jjt.cholesky().map(|c| c.solve(&e)) else {
            break;
        };
        let mut dq = -(jac.transpose() * solved);
        let largest = dq.amax();
        if largest > opts.max_step {
            dq *= opts.max_step / largest;
        }
        if largest < 1e-14 {
            break;
        }
        for (v, d) in q.iter_mut().zip(dq.iter()) {
            *v += d;
        }
        project_limits(chain, &mut q);

        e = pose_error(chain, &q, target_link, target, &base);
        let norm = e.norm();
        if done(errors(&e)) || norm < best.1 {
            best = (q.clone(), norm, errors(&e));
        }
    }

    let (state, _, (pos_err, rot_err)) = best;
    Ok((
        JointState::new(state),
        IkReport {
            converged: done((pos_err, rot_err)),
            iterations,
            final_position_error: pos_err,
            final_orientation_error: rot_err,
        },
    ))
}
