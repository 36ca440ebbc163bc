//! Divergence-preserving restriction of vector fields around a ball.
//!
//! The plain restriction of [`crate::restriction`] does not preserve the
//! divergence. Here it is corrected by an annulus solve: with `E` the cutoff
//! restriction and `B` the annulus divergence solver of
//! [`crate::bogovskii`],
//!
//! ```text
//! R[phi] = E[phi] + B[(centered_div phi - centered_div E[phi]) restricted]
//! ```
//!
//! The correction is supported on the annulus, so the defining identities of
//! `E` survive: the output equals the ball average of `phi` inside the ball
//! and equals `phi` bit-exactly outside the dilated ball, while the centered
//! divergence of the output now matches that of `phi` up to the solver
//! tolerance and the projected checkerboard means.
//!
//! The construction is well defined when `phi` has vanishing divergence on
//! the ball; `check_compatibility` quantifies how far an input deviates from
//! that and `CompatibilityPolicy` decides whether a deviation is a hard
//! error or a recorded projection. On a periodic box a potential-type input
//! acquires an unavoidable uniform divergence offset (its data minus the box
//! mean), so the harness drives those paths with the projecting policy and
//! reports the removed means instead of failing.

use crate::bogovskii::AnnulusProblem;
use crate::error::{CoreError, Result};
use crate::field::{
    dist, divergence, lp_norm, lp_norm_vec, DiffScheme, Ball, Region, ScalarField, VectorField,
};
use crate::interp::{shift_field_vec, ball_mean_vec};
use crate::restriction::restrict_vector;
use crate::spectral::SpectralSolver;

/// Relative threshold of the compatibility gate.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

/// How to treat inputs whose divergence does not vanish on the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompatibilityPolicy {
    /// Reject when the residuals exceed the gate.
    Strict,
    /// Proceed, projecting the uniform (checkerboard-mean) modes the annulus
    /// solver cannot reproduce and reporting their magnitudes. Used for
    /// potential-type inputs whose divergence carries the periodic-box mean
    /// offset.
    ProjectUniformModes,
}

/// Residuals of the compatibility requirements.
#[derive(Debug, Clone)]
pub struct Compatibility {
    /// sup of |centered_div phi| over the ball nodes
    pub div_on_ball_max: f64,
    /// mean of the defect over the full constraint set
    pub defect_mean: f64,
    /// per parity-component means of the defect (what the solve projects)
    pub component_means: Vec<f64>,
    /// reference scale: sup of |centered_div phi| over the box
    pub scale: f64,
}

impl Compatibility {
    pub fn within_gate(&self) -> bool {
        let allowed = COMPATIBILITY_TOL * self.scale.max(f64::MIN_POSITIVE);
        self.div_on_ball_max <= allowed
            && self
                .component_means
                .iter()
                .all(|m| m.abs() <= allowed)
    }
}

/// Output of the divergence-preserving restriction.
#[derive(Debug, Clone)]
pub struct DivPreservingResult {
    pub output: VectorField,
    /// the annulus correction alone
    pub correction: VectorField,
    pub compatibility: Compatibility,
    /// checkerboard means removed from the defect by the solve
    pub projected_means: Vec<f64>,
    /// relative L2 mismatch of the centered divergence of the output against
    /// that of the input, over the whole box
    pub div_residual: f64,
    /// componentwise ball average of the input (the constant inside the ball)
    pub ball_average: Vec<f64>,
}

fn defect_field(phi: &VectorField, restricted: &VectorField) -> Result<ScalarField> {
    let div_phi = divergence(phi, DiffScheme::Central);
    let div_e = divergence(restricted, DiffScheme::Central);
    div_phi.sub(&div_e)
}

/// Measures the compatibility residuals of `phi` for the given annulus.
pub fn check_compatibility(phi: &VectorField, problem: &AnnulusProblem) -> Result<Compatibility> {
    if phi.grid() != problem.grid() {
        return Err(CoreError::GridMismatch);
    }
    let ball = problem.ball();
    let div_phi = divergence(phi, DiffScheme::Central);
    let div_on_ball_max = lp_norm(&div_phi, f64::INFINITY, &Region::ball(ball))?;
    let scale = lp_norm(&div_phi, f64::INFINITY, &Region::Whole)?;
    let restricted = restrict_vector(phi, ball)?;
    let defect = defect_field(phi, &restricted)?;
    let component_means = problem.component_means(&defect);
    let total: f64 = {
        let vals: Vec<f64> = problem
            .constrained_nodes()
            .iter()
            .map(|&i| defect.values()[i])
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    Ok(Compatibility {
        div_on_ball_max,
        defect_mean: total,
        component_means,
        scale,
    })
}

/// Applies the divergence-preserving restriction.
pub fn apply(
    phi: &VectorField,
    problem: &AnnulusProblem,
    policy: CompatibilityPolicy,
) -> Result<DivPreservingResult> {
    if phi.grid() != problem.grid() {
        return Err(CoreError::GridMismatch);
    }
    let ball = problem.ball();
    let restricted = restrict_vector(phi, ball)?;
    let defect = defect_field(phi, &restricted)?;
    let div_phi = divergence(phi, DiffScheme::Central);
    let div_on_ball_max = lp_norm(&div_phi, f64::INFINITY, &Region::ball(ball))?;
    let scale = lp_norm(&div_phi, f64::INFINITY, &Region::Whole)?;
    let component_means = problem.component_means(&defect);
    let compatibility = Compatibility {
        div_on_ball_max,
        defect_mean: component_means.iter().sum::<f64>() / component_means.len().max(1) as f64,
        component_means: component_means.clone(),
        scale,
    };
    if policy == CompatibilityPolicy::Strict && !compatibility.within_gate() {
        let worst = component_means
            .iter()
            .fold(0.0f64, |acc, m| acc.max(m.abs()));
        return Err(CoreError::IncompatibleField {
            div_on_ball: div_on_ball_max,
            defect_mean: worst,
            allowed: COMPATIBILITY_TOL * scale.max(f64::MIN_POSITIVE),
        });
    }
    let solution = problem.solve(&defect)?;
    let output = restricted.add(&solution.field)?;
    // divergence preservation over the whole box
    let div_out = divergence(&output, DiffScheme::Central);
    let err = div_out.sub(&div_phi)?;
    let num = lp_norm(&err, 2.0, &Region::Whole)?;
    let den = lp_norm(&div_phi, 2.0, &Region::Whole)?;
    let div_residual = if den > 0.0 { num / den } else { num };
    let ball_average = ball_mean_vec(phi, ball)?;
    Ok(DivPreservingResult {
        output,
        correction: solution.field,
        compatibility,
        projected_means: solution.projected_means,
        div_residual,
        ball_average,
    })
}

/// Shifted form: translate the field so the ball sits at the origin, apply
/// the origin-centered operator, translate back. Grid-aligned centers reduce
/// to index rolls and reproduce `apply` bit-exactly; fractional centers use
/// band-limited translation.
///
/// `origin_problem` must be built for a ball of the same radius centered at
/// the origin; it is reused across centers, which is what makes moving-ball
/// sweeps affordable.
pub fn apply_shifted(
    phi: &VectorField,
    center: &[f64],
    origin_problem: &AnnulusProblem,
    policy: CompatibilityPolicy,
) -> Result<DivPreservingResult> {
    let ob = origin_problem.ball();
    if ob.center.iter().any(|&c| c != 0.0) {
        return Err(CoreError::GridMismatch);
    }
    // padding of the actual ball position
    Ball::new(center.to_vec(), ob.radius).validate(phi.grid())?;
    let shifted = shift_field_vec(phi, center);
    let res = apply(&shifted, origin_problem, policy)?;
    let back = |f: &VectorField| {
        let neg: Vec<f64> = center.iter().map(|c| -c).collect();
        shift_field_vec(f, &neg)
    };
    Ok(DivPreservingResult {
        output: back(&res.output),
        correction: back(&res.correction),
        compatibility: res.compatibility,
        projected_means: res.projected_means,
        div_residual: res.div_residual,
        ball_average: res.ball_average,
    })
}

/// Negative-norm continuity probe: for `g` vanishing on the ball, the input
/// is the matched right inverse applied to `div g` and the measured quantity
/// is `|R[phi]|_q / |g|_q`. Returns `None` ratios for vanishing `g`.
pub struct NegativeNormProbe {
    pub ratios: Vec<(f64, Option<f64>)>,
    pub result: DivPreservingResult,
}

fn mask_on_ball(g: &VectorField, ball: &Ball) -> VectorField {
    let grid = *g.grid();
    let dim = grid.dim();
    let mut comps: Vec<Vec<f64>> = (0..dim).map(|a| g.component(a).to_vec()).collect();
    for idx in 0..grid.node_count() {
        let x = grid.position(idx);
        if dist(&x, &ball.center, dim) <= ball.radius {
            for comp in comps.iter_mut() {
                comp[idx] = 0.0;
            }
        }
    }
    VectorField::new(grid, comps).expect("mask preserves shape")
}

pub fn negative_norm_ratio(
    g: &VectorField,
    problem: &AnnulusProblem,
    solver: &SpectralSolver,
    qs: &[f64],
) -> Result<NegativeNormProbe> {
    let masked = mask_on_ball(g, problem.ball());
    let phi = solver.matched_right_inverse(&masked);
    let result = apply(&phi, problem, CompatibilityPolicy::Strict)?;
    let ratios = qs
        .iter()
        .map(|&q| {
            let g_norm = lp_norm_vec(&masked, q, &Region::Whole)?;
            let ratio = if g_norm > 1e-300 {
                Some(lp_norm_vec(&result.output, q, &Region::Whole)? / g_norm)
            } else {
                None
            };
            Ok((q, ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NegativeNormProbe { ratios, result })
}

/// Variant with a scalar potential: the input is the matched Hessian of the
/// potential of `r` contracted with a constant vector `v`, measured against
/// `g = r v`.
pub fn contracted_hessian_ratio(
    r: &ScalarField,
    v: &[f64],
    problem: &AnnulusProblem,
    solver: &SpectralSolver,
    qs: &[f64],
) -> Result<NegativeNormProbe> {
    let phi = solver.matched_hessian_contraction(r, v);
    let result = apply(&phi, problem, CompatibilityPolicy::Strict)?;
    let vmag = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let ratios = qs
        .iter()
        .map(|&q| {
            let r_norm = lp_norm(r, q, &Region::Whole)? * vmag;
            let ratio = if r_norm > 1e-300 {
                Some(lp_norm_vec(&result.output, q, &Region::Whole)? / r_norm)
            } else {
                None
            };
            Ok((q, ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NegativeNormProbe { ratios, result })
}

/// Diagnostic split of the correction data into its two analytic parts: the
/// commutator of the restriction with the divergence, and the transport of
/// `g` through the cutoff. Their sum reproduces the assembled defect up to
/// stencil truncation; the mismatch is reported, not asserted.
#[derive(Debug, Clone)]
pub struct DefectDecomposition {
    pub commutator_part: ScalarField,
    pub transport_part: ScalarField,
    /// relative L2 mismatch of (commutator + transport) against the defect
    /// over the annulus
    pub mismatch: f64,
}

pub fn defect_decomposition(
    g: &VectorField,
    problem: &AnnulusProblem,
    solver: &SpectralSolver,
) -> Result<DefectDecomposition> {
    use crate::cutoff::CutoffProfile;
    let grid = *g.grid();
    let dim = grid.dim();
    let ball = problem.ball();
    let masked = mask_on_ball(g, ball);
    let phi = solver.matched_right_inverse(&masked);
    let restricted = restrict_vector(&phi, ball)?;
    let defect = defect_field(&phi, &restricted)?;

    let avg = ball_mean_vec(&phi, ball)?;
    let profile = CutoffProfile::new();
    let inv_eps = 1.0 / ball.radius;
    let mut commutator = vec![0.0; grid.node_count()];
    for (idx, c) in commutator.iter_mut().enumerate() {
        let x = grid.position(idx);
        let rr = dist(&x, &ball.center, dim);
        let dh = profile.derivative(rr * inv_eps - 1.0);
        if dh != 0.0 && rr > 0.0 {
            let mut radial_dot = 0.0;
            for a in 0..dim {
                radial_dot += (x[a] - ball.center[a]) / rr * (avg[a] - phi.component(a)[idx]);
            }
            *c = dh * inv_eps * radial_dot;
        }
    }
    let commutator_part = ScalarField::new(grid, commutator)?;

    // transport part: div(g (1 - H)) + (1/eps) g . radial H'
    let mut damped: Vec<Vec<f64>> = (0..dim).map(|a| masked.component(a).to_vec()).collect();
    for idx in 0..grid.node_count() {
        let x = grid.position(idx);
        let rr = dist(&x, &ball.center, dim);
        let w = 1.0 - profile.value(rr * inv_eps - 1.0);
        for comp in damped.iter_mut() {
            comp[idx] *= w;
        }
    }
    let damped = VectorField::new(grid, damped)?;
    let mut transport = divergence(&damped, DiffScheme::Central);
    for idx in 0..grid.node_count() {
        let x = grid.position(idx);
        let rr = dist(&x, &ball.center, dim);
        let dh = profile.derivative(rr * inv_eps - 1.0);
        if dh != 0.0 && rr > 0.0 {
            let mut radial_dot = 0.0;
            for a in 0..dim {
                radial_dot += (x[a] - ball.center[a]) / rr * masked.component(a)[idx];
            }
            transport.values_mut()[idx] += dh * inv_eps * radial_dot;
        }
    }

    let sum = commutator_part.add(&transport)?;
    let region = Region::annulus(ball);
    let num = lp_norm(&sum.sub(&defect)?, 2.0, &region)?;
    let den = lp_norm(&defect, 2.0, &region)?;
    Ok(DefectDecomposition {
        commutator_part,
        transport_part: transport,
        mismatch: if den > 0.0 { num / den } else { num },
    })
}
