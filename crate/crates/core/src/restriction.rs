//! The cutoff restriction operator around a ball.
//!
//! For a ball `B_r(h)` and a field `phi`, the operator blends the ball
//! average into the field across the shell `5/4 r <= |x-h| <= 7/4 r`:
//!
//! ```text
//! E[phi](x) = avg_B(phi) * H(2 - |x-h|/r) + phi(x) * H(|x-h|/r - 1)
//! ```
//!
//! with the transition profile `H` of [`crate::cutoff`]. By the clamping of
//! `H` the output *is* the ball average on `|x-h| <= 5/4 r` and *is* `phi`,
//! bit-exactly, on `|x-h| >= 7/4 r`. The analytic gradient uses the
//! symmetry `H'(Z) = H'(1-Z)` to share a single derivative factor:
//!
//! ```text
//! grad E[phi] = grad phi * H(|x-h|/r - 1)
//!             + (phi - avg_B(phi)) * H'(|x-h|/r - 1) * (x-h)/(r |x-h|)
//! ```
//!
//! The derivative in the center parameter is the commutator
//! `grad_h E[phi] = E[grad phi] - grad E[phi]`, and the time derivative along
//! a moving center combines the two:
//! `d/dt E = E[d_t phi] + (E[grad phi] - grad E[phi]) . dh/dt`.

use crate::cutoff::CutoffProfile;
use crate::error::{CoreError, Result};
use crate::field::{
    dist, gradient, lp_norm, lp_norm_vec, DiffScheme, Ball, Region, ScalarField, VectorField,
};
use crate::interp::{ball_mean_interp, BallRule, Interpolant};

/// Restriction output with its deviation-from-identity diagnostics.
#[derive(Debug, Clone)]
pub struct RestrictionResult {
    pub output: ScalarField,
    /// `E[phi] - phi`; supported in the dilated ball `B_{7/4 r}`
    pub identity_error: ScalarField,
    /// `grad E[phi] - grad phi` (spectral gradient); same support
    pub gradient_error: VectorField,
    /// measured norms per requested exponent
    pub norms: Vec<ErrorNorms>,
    pub ball_average: f64,
}

/// Norms of the deviation fields against their local references.
#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub p: f64,
    /// `|E[phi] - phi|_p` over the whole box
    pub identity_error: f64,
    /// `|phi|_p` over the dilated ball
    pub phi_local: f64,
    /// `|grad E[phi] - grad phi|_p` over the whole box
    pub gradient_error: f64,
    /// `|grad phi|_p` over the dilated ball
    pub grad_local: f64,
}

fn weights_at(profile: &CutoffProfile, r_over_eps: f64) -> (f64, f64) {
    let near = profile.value(2.0 - r_over_eps);
    let far = profile.value(r_over_eps - 1.0);
    (near, far)
}

/// Core evaluation: `avg * H(2 - r/eps) + phi * H(r/eps - 1)` per node.
fn blend(phi: &ScalarField, ball: &Ball, avg: f64) -> ScalarField {
    let grid = *phi.grid();
    let profile = CutoffProfile::new();
    let inv_eps = 1.0 / ball.radius;
    let mut out = vec![0.0; grid.node_count()];
    for (idx, o) in out.iter_mut().enumerate() {
        let x = grid.position(idx);
        let r = dist(&x, &ball.center, grid.dim()) * inv_eps;
        let (near, far) = weights_at(&profile, r);
        *o = avg * near + phi.values()[idx] * far;
    }
    ScalarField::new(grid, out).expect("blend output finite")
}

/// Applies the restriction operator to a scalar field.
pub fn restrict_scalar(phi: &ScalarField, ball: &Ball) -> Result<ScalarField> {
    ball.validate(phi.grid())?;
    let sf = Interpolant::new(phi);
    let rule = BallRule::new(phi.grid().dim());
    let avg = ball_mean_interp(&sf, ball, &rule);
    Ok(blend(phi, ball, avg))
}

/// Applies the restriction operator componentwise to a vector field.
pub fn restrict_vector(phi: &VectorField, ball: &Ball) -> Result<VectorField> {
    ball.validate(phi.grid())?;
    let rule = BallRule::new(phi.grid().dim());
    let comps = (0..phi.grid().dim())
        .map(|a| {
            let comp = phi.component_field(a);
            let sf = Interpolant::new(&comp);
            let avg = ball_mean_interp(&sf, ball, &rule);
            blend(&comp, ball, avg)
        })
        .collect();
    VectorField::from_components(comps)
}

/// Restriction with deviation fields and their norms for the given exponents.
pub fn restriction_result(phi: &ScalarField, ball: &Ball, ps: &[f64]) -> Result<RestrictionResult> {
    ball.validate(phi.grid())?;
    let sf = Interpolant::new(phi);
    let rule = BallRule::new(phi.grid().dim());
    let avg = ball_mean_interp(&sf, ball, &rule);
    let output = blend(phi, ball, avg);
    let identity_error = output.sub(phi)?;
    let grad_phi = gradient(phi, DiffScheme::Spectral);
    let grad_out = gradient_formula_with(phi, &grad_phi, ball, avg);
    let gradient_error = grad_out.sub(&grad_phi)?;
    let local = Region::scaled_ball(ball, 1.75);
    let norms = ps
        .iter()
        .map(|&p| {
            Ok(ErrorNorms {
                p,
                identity_error: lp_norm(&identity_error, p, &Region::Whole)?,
                phi_local: lp_norm(phi, p, &local)?,
                gradient_error: lp_norm_vec(&gradient_error, p, &Region::Whole)?,
                grad_local: lp_norm_vec(&grad_phi, p, &local)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RestrictionResult {
        output,
        identity_error,
        gradient_error,
        norms,
        ball_average: avg,
    })
}

fn gradient_formula_with(
    phi: &ScalarField,
    grad_phi: &VectorField,
    ball: &Ball,
    avg: f64,
) -> VectorField {
    let grid = *phi.grid();
    let profile = CutoffProfile::new();
    let inv_eps = 1.0 / ball.radius;
    let dim = grid.dim();
    let mut comps = vec![vec![0.0; grid.node_count()]; dim];
    for idx in 0..grid.node_count() {
        let x = grid.position(idx);
        let r = dist(&x, &ball.center, dim);
        let z = r * inv_eps - 1.0;
        let far = profile.value(z);
        let dh = profile.derivative(z);
        // radial direction; defined as zero at the center, where H' vanishes
        let radial_scale = if r > 0.0 && dh != 0.0 {
            (phi.values()[idx] - avg) * dh * inv_eps / r
        } else {
            0.0
        };
        for (a, comp) in comps.iter_mut().enumerate() {
            comp[idx] = grad_phi.component(a)[idx] * far + radial_scale * (x[a] - ball.center[a]);
        }
    }
    VectorField::new(grid, comps).expect("gradient output finite")
}

/// Analytic gradient of the restricted field (spectral `grad phi` inside).
pub fn restriction_gradient(phi: &ScalarField, ball: &Ball) -> Result<VectorField> {
    ball.validate(phi.grid())?;
    let sf = Interpolant::new(phi);
    let rule = BallRule::new(phi.grid().dim());
    let avg = ball_mean_interp(&sf, ball, &rule);
    let grad_phi = gradient(phi, DiffScheme::Spectral);
    Ok(gradient_formula_with(phi, &grad_phi, ball, avg))
}

/// Derivative of the restriction in the ball center, one field per center
/// component, assembled as the commutator `E[grad phi] - grad E[phi]`.
pub fn center_gradient(phi: &ScalarField, ball: &Ball) -> Result<Vec<ScalarField>> {
    ball.validate(phi.grid())?;
    let grad_phi = gradient(phi, DiffScheme::Spectral);
    let sf = Interpolant::new(phi);
    let rule = BallRule::new(phi.grid().dim());
    let avg = ball_mean_interp(&sf, ball, &rule);
    let grad_out = gradient_formula_with(phi, &grad_phi, ball, avg);
    (0..phi.grid().dim())
        .map(|a| {
            let e_of_partial = {
                let comp = grad_phi.component_field(a);
                let csf = Interpolant::new(&comp);
                let cavg = ball_mean_interp(&csf, ball, &rule);
                blend(&comp, ball, cavg)
            };
            e_of_partial.sub(&grad_out.component_field(a))
        })
        .collect()
}

/// Time derivative of `t -> E(ball(t))[phi(t)]` at one snapshot:
/// `E[phi_t] + (E[grad phi] - grad E[phi]) . velocity`.
pub fn time_derivative(
    phi: &ScalarField,
    phi_t: &ScalarField,
    ball: &Ball,
    velocity: &[f64],
) -> Result<ScalarField> {
    if phi.grid() != phi_t.grid() {
        return Err(CoreError::GridMismatch);
    }
    let e_phi_t = restrict_scalar(phi_t, ball)?;
    let commutator = center_gradient(phi, ball)?;
    let mut out = e_phi_t;
    for (a, c) in commutator.iter().enumerate() {
        out = out.add(&c.scale(velocity[a]))?;
    }
    Ok(out)
}

/// Time derivative from a time-indexed series of fields and centers.
///
/// The time partial of the field is taken by centered differences of the
/// series (one-sided at the ends); the center velocity is supplied.
pub fn time_derivative_from_series(
    series: &[(f64, ScalarField)],
    centers: &[Vec<f64>],
    velocity: &[f64],
    at: usize,
    radius: f64,
) -> Result<ScalarField> {
    if series.len() != centers.len() || series.len() < 2 || at >= series.len() {
        return Err(CoreError::GridMismatch);
    }
    let grid = *series[0].1.grid();
    if series.iter().any(|(_, f)| *f.grid() != grid) {
        return Err(CoreError::GridMismatch);
    }
    let (lo, hi) = if at == 0 {
        (0, 1)
    } else if at + 1 == series.len() {
        (at - 1, at)
    } else {
        (at - 1, at + 1)
    };
    let dt = series[hi].0 - series[lo].0;
    let phi_t = series[hi].1.sub(&series[lo].1)?.scale(1.0 / dt);
    let ball = Ball::new(centers[at].clone(), radius);
    time_derivative(&series[at].1, &phi_t, &ball, velocity)
}

/// Support-containment check: the output support must lie within the
/// `3 r`-neighborhood of the input support (detected above `threshold`).
#[derive(Debug, Clone)]
pub struct SupportCheck {
    pub ok: bool,
    /// nodes where the output exceeds the threshold outside the allowed set
    pub offending: Vec<usize>,
}

pub fn support_check(phi: &ScalarField, ball: &Ball, threshold: f64) -> Result<SupportCheck> {
    let output = restrict_scalar(phi, ball)?;
    let grid = *phi.grid();
    let dim = grid.dim();
    // collect input support nodes
    let support: Vec<[f64; 3]> = (0..grid.node_count())
        .filter(|&i| phi.values()[i].abs() > threshold)
        .map(|i| grid.position(i))
        .collect();
    let mut offending = Vec::new();
    'outer: for idx in 0..grid.node_count() {
        if output.values()[idx].abs() <= threshold {
            continue;
        }
        let x = grid.position(idx);
        for s in &support {
            if dist(&x, &s[..dim], dim) <= 3.0 * ball.radius {
                continue 'outer;
            }
        }
        offending.push(idx);
    }
    Ok(SupportCheck {
        ok: offending.is_empty(),
        offending,
    })
}

/// Scale-invariant Poincaré-type ratio measured on the transition shell:
/// `(1/r) |phi - avg_B| over the shell` against `|grad phi|` over the dilated
/// ball, both in `L^p`.
pub fn poincare_ratio(phi: &ScalarField, ball: &Ball, p: f64) -> Result<f64> {
    ball.validate(phi.grid())?;
    let sf = Interpolant::new(phi);
    let rule = BallRule::new(phi.grid().dim());
    let avg = ball_mean_interp(&sf, ball, &rule);
    let centered = phi.map(|v| v - avg);
    let shell = Region::shell(ball, 1.25, 1.75);
    let dilated = Region::scaled_ball(ball, 1.75);
    let grad = gradient(phi, DiffScheme::Spectral);
    let denom = lp_norm_vec(&grad, p, &dilated)?;
    if denom < 1e-14 {
        return Err(CoreError::ConstantOnBall);
    }
    let numer = lp_norm(&centered, p, &shell)? / ball.radius;
    Ok(numer / denom)
}
