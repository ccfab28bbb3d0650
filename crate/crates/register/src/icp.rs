//! Trimmed point-to-point ICP with a closed-form rigid solve.
//!
//! Each iteration matches every source point to its nearest destination
//! point within the correspondence cutoff, discards the worst
//! `trim_fraction` of matches by distance, and re-solves the absolute rigid
//! transform on the survivors via the SVD of the cross-covariance (with the
//! determinant sign guard, so mirrored inputs still yield a proper
//! rotation). The solve minimizes the trimmed RMS exactly, which makes the
//! per-iteration residual drop a contract, not a heuristic.

use nalgebra::{Matrix3, Vector3};
use r2sim_scene::RigidTransform;
use serde::{Deserialize, Serialize};

use crate::error::RegisterError;
use crate::kdtree::KdTree;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcpParams {
    pub max_iterations: usize,
    /// Matches farther than this are dropped before trimming, meters.
    pub correspondence_cutoff: f64,
    /// Stop once the RMS residual changes by less than this in one
    /// iteration, meters.
    pub convergence_eps: f64,
    /// Fraction of the worst correspondences (by distance) discarded each
    /// iteration, in [0, 1).
    pub trim_fraction: f64,
}

impl Default for IcpParams {
    fn default() -> Self {
        IcpParams {
            max_iterations: 50,
            correspondence_cutoff: 1.0,
            convergence_eps: 1e-7,
            trim_fraction: 0.1,
        }
    }
}

impl IcpParams {
    pub fn validate(&self) -> Result<(), RegisterError> {
        if self.max_iterations < 1 {
            return Err(RegisterError::BadParams(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.correspondence_cutoff > 0.0) || !self.correspondence_cutoff.is_finite() {
            return Err(RegisterError::BadParams(format!(
                "correspondence_cutoff = {} must be positive and finite",
                self.correspondence_cutoff
            )));
        }
        if !(self.convergence_eps > 0.0) || !self.convergence_eps.is_finite() {
            return Err(RegisterError::BadParams(format!(
                "convergence_eps = {} must be positive and finite",
                self.convergence_eps
            )));
        }
        if !(0.0..1.0).contains(&self.trim_fraction) {
            return Err(RegisterError::BadParams(format!(
                "trim_fraction = {} must lie in [0, 1)",
                self.trim_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IcpResult {
    /// Maps source points toward the destination cloud.
    pub transform: RigidTransform,
    /// RMS distance over the surviving correspondences at the final
    /// transform, meters.
    pub rms_residual: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Rigid transform aligning `src` to `dst`, seeded at `init`.
pub fn icp_align(
    src: &[Vector3<f64>],
    dst: &[Vector3<f64>],
    init: &RigidTransform,
    params: &IcpParams,
) -> Result<IcpResult, RegisterError> {
    icp_core(src, dst, init, params, &mut |_, _| {})
}

/// Same loop with a per-iteration observer of (RMS before solve, RMS after
/// solve) on the surviving correspondence set. Test hook.
pub(crate) fn icp_core(
    src: &[Vector3<f64>],
    dst: &[Vector3<f64>],
    init: &RigidTransform,
    params: &IcpParams,
    observe: &mut dyn FnMut(f64, f64),
) -> Result<IcpResult, RegisterError> {
    params.validate()?;
    init.validate()?;
    if src.len() < 3 {
        return Err(RegisterError::TooFewPoints {
            which: "source",
            got: src.len(),
        });
    }
    if dst.len() < 3 {
        return Err(RegisterError::TooFewPoints {
            which: "destination",
            got: dst.len(),
        });
    }

    let tree = KdTree::build(dst);
    let mut transform = *init;
    let mut rms = f64::INFINITY;
    let mut iterations_used = 0;
    let mut converged = false;

    // (src index, dst index, squared distance under the current transform).
    let mut matches: Vec<(u32, u32, f64)> = Vec::with_capacity(src.len());

    for iteration in 1..=params.max_iterations {
        iterations_used = iteration;
        matches.clear();
        for (i, p) in src.iter().enumerate() {
            let tp = transform.apply(p);
            if let Some((j, d)) = tree.nearest_within(&tp, params.correspondence_cutoff) {
                matches.push((i as u32, j as u32, d * d));
            }
        }
        let drop = (params.trim_fraction * matches.len() as f64).floor() as usize;
        let keep = matches.len() - drop;
        if keep < 3 {
            return Err(RegisterError::FewCorrespondences {
                surviving: keep,
                iteration,
            });
        }
        if drop > 0 {
            matches.select_nth_unstable_by(keep - 1, |a, b| a.2.partial_cmp(&b.2).unwrap());
            matches.truncate(keep);
        }

        let pre_rms = (matches.iter().map(|m| m.2).sum::<f64>() / keep as f64).sqrt();
        transform = solve_rigid(src, dst, &matches).ok_or(RegisterError::DegenerateCovariance {
            iteration,
        })?;
        let post_rms = (matches
            .iter()
            .map(|&(i, j, _)| (transform.apply(&src[i as usize]) - dst[j as usize]).norm_squared())
            .sum::<f64>()
            / keep as f64)
            .sqrt();
        observe(pre_rms, post_rms);
        rms = post_rms;
        if (pre_rms - post_rms).abs() < params.convergence_eps {
            converged = true;
            break;
        }
    }

    Ok(IcpResult {
        transform,
        rms_residual: rms,
        iterations_used,
        converged,
    })
}

/// Least-squares rigid transform for the given correspondences: cross-
/// covariance SVD with the reflection guard. `None` when the covariance has
/// rank < 2 (collinear or coincident correspondence geometry).
fn solve_rigid(
    src: &[Vector3<f64>],
    dst: &[Vector3<f64>],
    matches: &[(u32, u32, f64)],
) -> Option<RigidTransform> {
    let inv_n = 1.0 / matches.len() as f64;
    let mut p_bar = Vector3::zeros();
    let mut q_bar = Vector3::zeros();
    for &(i, j, _) in matches {
        p_bar += src[i as usize];
        q_bar += dst[j as usize];
    }
    p_bar *= inv_n;
    q_bar *= inv_n;

    let mut h = Matrix3::zeros();
    for &(i, j, _) in matches {
        h += (src[i as usize] - p_bar) * (dst[j as usize] - q_bar).transpose();
    }

    let svd = h.svd(true, true);
    let sv = svd.singular_values;
    if !(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0] {
        return None;
    }
    let u = svd.u?;
    let v = svd.v_t?.transpose();
    let d = (v * u.transpose()).determinant();
    let correction = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d.signum()));
    let rotation = v * correction * u.transpose();
    let translation = q_bar - rotation * p_bar;
    Some(RigidTransform {
        rotation,
        translation,
    })
}
