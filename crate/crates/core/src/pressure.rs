//! Pressure-estimate harness: density truncation, synthetic fluid states,
//! and the momentum-equation integrals driven by the divergence-preserving
//! restriction of a pressure potential.
//!
//! The states are manufactured, not PDE solutions: they carry the structural
//! features the estimates rely on (fluid density vanishing on the ball, a
//! rigid velocity value inside it, unit kinetic energy, power-law body
//! density) so the harness can measure that each integral stays bounded as
//! the ball shrinks. The test function is
//!
//! ```text
//! phi = R[ grad_potential(b(rho_fluid)) ]
//! ```
//!
//! with `b` the truncation (zero below 1, `r^alpha` above 2) and the
//! potential gradient taken in matched symbols so the compatibility of the
//! restriction closes at stencil level; the periodic box leaves an
//! unavoidable uniform offset in the potential's divergence, which the
//! restriction projects and reports rather than failing on.

use crate::bogovskii::AnnulusProblem;
use crate::div_restriction::{apply, CompatibilityPolicy, DivPreservingResult};
use crate::error::{CoreError, Result};
use crate::field::{
    divergence, jacobian, lp_norm_vec, region_weight, DiffScheme, Ball, Grid, Region, ScalarField,
    VectorField,
};
use crate::slope::{fit_log_log, SlopeFit};
use crate::spectral::SpectralSolver;

/// Density truncation: zero below 1, `r^alpha` above 2, monotone C^1
/// Hermite blend between.
#[derive(Debug, Clone, Copy)]
pub struct Truncation {
    pub alpha: f64,
}

impl Truncation {
    pub fn new(alpha: f64) -> Self {
        debug_assert!(alpha > 0.0);
        Truncation { alpha }
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= 1.0 {
            0.0
        } else if r >= 2.0 {
            r.powf(self.alpha)
        } else {
            // Hermite blend from (1, 0, slope 0) to (2, 2^a, slope a 2^(a-1))
            let t = r - 1.0;
            let end_value = 2f64.powf(self.alpha);
            let end_slope = self.alpha * 2f64.powf(self.alpha - 1.0);
            let h01 = t * t * (3.0 - 2.0 * t);
            let h11 = t * t * (t - 1.0);
            end_value * h01 + end_slope * h11
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r <= 1.0 {
            0.0
        } else if r >= 2.0 {
            self.alpha * r.powf(self.alpha - 1.0)
        } else {
            let t = r - 1.0;
            let end_value = 2f64.powf(self.alpha);
            let end_slope = self.alpha * 2f64.powf(self.alpha - 1.0);
            let dh01 = 6.0 * t * (1.0 - t);
            let dh11 = t * (3.0 * t - 2.0);
            end_value * dh01 + end_slope * dh11
        }
    }
}

/// Pointwise truncation of a density field; negative samples are rejected.
pub fn truncate_density(rho: &ScalarField, trunc: &Truncation) -> Result<ScalarField> {
    if let Some(v) = rho.values().iter().find(|v| **v < 0.0) {
        return Err(CoreError::NegativeDensity(*v));
    }
    Ok(rho.map(|v| trunc.value(v)))
}

/// A synthetic fluid/body snapshot.
#[derive(Debug, Clone)]
pub struct FluidState {
    /// fluid density; zero on the ball
    pub rho_fluid: ScalarField,
    /// velocity; equals `body_velocity` on the ball
    pub velocity: VectorField,
    pub ball: Ball,
    /// translational velocity of the body
    pub body_velocity: Vec<f64>,
    /// constant body density (the `radius^-beta` scaling)
    pub body_density: f64,
    /// adiabatic exponent of the pressure law
    pub gamma: f64,
    /// body-density scaling window exponents
    pub beta: f64,
    pub beta_bar: f64,
    /// time weight and its derivative at the snapshot
    pub psi: f64,
    pub dpsi: f64,
}

impl FluidState {
    /// Total kinetic energy `int rho |u|^2` including the body.
    pub fn kinetic_energy(&self) -> f64 {
        let grid = self.rho_fluid.grid();
        let vol = grid.cell_volume();
        let ball_region = Region::ball(&self.ball);
        let mut acc = 0.0;
        for idx in 0..grid.node_count() {
            let u2 = self.velocity.magnitude(idx).powi(2);
            acc += vol * self.rho_fluid.values()[idx] * u2;
            let wb = region_weight(grid, idx, &ball_region);
            if wb > 0.0 {
                acc += wb * self.body_density * u2;
            }
        }
        acc
    }

    /// Structural checks: nonnegative fluid density vanishing on the ball, a
    /// rigid velocity value inside it, pressure law inside the existence
    /// range, a nonempty scaling window, and unit kinetic energy.
    pub fn validate(&self) -> Result<()> {
        if self.gamma <= 1.5 {
            return Err(CoreError::GammaOutOfRange(self.gamma));
        }
        self.ball.validate(self.rho_fluid.grid())?;
        if let Some(v) = self.rho_fluid.values().iter().find(|v| **v < 0.0) {
            return Err(CoreError::NegativeDensity(*v));
        }
        let grid = self.rho_fluid.grid();
        let dim = grid.dim();
        for idx in 0..grid.node_count() {
            let x = grid.position(idx);
            if crate::field::dist(&x, &self.ball.center, dim) <= self.ball.radius {
                if self.rho_fluid.values()[idx] != 0.0 {
                    return Err(CoreError::InvalidGrid(format!(
                        "fluid density {} on the ball at node {idx}",
                        self.rho_fluid.values()[idx]
                    )));
                }
                for a in 0..dim {
                    let d = (self.velocity.component(a)[idx] - self.body_velocity[a]).abs();
                    if d > 1e-10 * (1.0 + self.body_velocity[a].abs()) {
                        return Err(CoreError::InvalidGrid(format!(
                            "velocity not rigid on the ball at node {idx} (component {a})"
                        )));
                    }
                }
            }
        }
        if self.gamma <= 3.0 {
            let lower = 2.0 * (3.0 - self.gamma) / self.gamma;
            if !(self.beta > lower && self.beta <= self.beta_bar && self.beta_bar < 2.0) {
                return Err(CoreError::InvalidGrid(format!(
                    "scaling window violated: need {lower} < beta <= beta_bar < 2, got beta = {}, beta_bar = {}",
                    self.beta, self.beta_bar
                )));
            }
        }
        let ke = self.kinetic_energy();
        if (ke - 1.0).abs() > 0.05 {
            return Err(CoreError::InvalidGrid(format!(
                "kinetic energy {ke} not normalized to 1"
            )));
        }
        Ok(())
    }
}

/// Kinetic-energy ceiling on the body speed.
#[derive(Debug, Clone)]
pub struct RigidVelocityCheck {
    /// `rho_body * radius^dim * |Y|^2`
    pub energy: f64,
    /// largest admissible speed under `energy <= 1`
    pub speed_ceiling: f64,
    pub speed: f64,
    pub ok: bool,
}

/// Checks `rho_body * radius^dim * |Y|^2 <= 1` and reports the implied ceiling.
pub fn rigid_velocity_bound(
    body_density: f64,
    radius: f64,
    velocity: &[f64],
    dim: usize,
) -> RigidVelocityCheck {
    let speed = velocity.iter().map(|v| v * v).sum::<f64>().sqrt();
    let vol_scale = body_density * radius.powi(dim as i32);
    let energy = vol_scale * speed * speed;
    let speed_ceiling = (1.0 / vol_scale).sqrt();
    RigidVelocityCheck {
        energy,
        speed_ceiling,
        speed,
        ok: energy <= 1.0 + 1e-12,
    }
}

/// The five momentum-equation integrals at one time slice, together with the
/// pressure side they balance.
#[derive(Debug, Clone)]
pub struct IntegralReport {
    /// viscous stress against the gradient of the test function
    pub viscous: f64,
    /// convective term
    pub convective: f64,
    /// initial momentum pairing
    pub initial_momentum: f64,
    /// time-weight derivative term
    pub weight_derivative: f64,
    /// transport of the test function along the moving ball
    pub transport: f64,
    /// the three restriction applications and the gradient contraction
    /// entering the transport term, reported separately
    pub transport_terms: [f64; 4],
    /// left side: `psi * int p(rho_fluid) b(rho_fluid)`
    pub pressure_side: f64,
    /// divergence residual of the assembled test function
    pub test_function_div_residual: f64,
    /// uniform modes projected while building the test function
    pub projected_means: Vec<f64>,
}

impl IntegralReport {
    pub fn values(&self) -> [f64; 5] {
        [
            self.viscous,
            self.convective,
            self.initial_momentum,
            self.weight_derivative,
            self.transport,
        ]
    }

    pub fn sum_abs(&self) -> f64 {
        self.values().iter().map(|v| v.abs()).sum()
    }
}

/// Builds the test function `R[grad_potential(b(rho_fluid))]`.
pub fn build_test_function(
    state: &FluidState,
    trunc: &Truncation,
    problem: &AnnulusProblem,
    solver: &SpectralSolver,
) -> Result<DivPreservingResult> {
    let b = truncate_density(&state.rho_fluid, trunc)?;
    let potential_gradient = solver.matched_potential_gradient(&b);
    apply(&potential_gradient, problem, CompatibilityPolicy::ProjectUniformModes)
}

/// box integral of `a . b` with the body density added on the ball
fn momentum_pairing(state: &FluidState, field: &VectorField) -> f64 {
    let grid = state.rho_fluid.grid();
    let vol = grid.cell_volume();
    let ball_region = Region::ball(&state.ball);
    let dim = grid.dim();
    let mut acc = 0.0;
    for idx in 0..grid.node_count() {
        let mut dot = 0.0;
        for a in 0..dim {
            dot += state.velocity.component(a)[idx] * field.component(a)[idx];
        }
        acc += vol * state.rho_fluid.values()[idx] * dot;
        let wb = region_weight(grid, idx, &ball_region);
        if wb > 0.0 {
            acc += wb * state.body_density * dot;
        }
    }
    acc
}

/// Evaluates the five integrals for one state.
pub fn compute_integrals(
    state: &FluidState,
    trunc: &Truncation,
    problem: &AnnulusProblem,
    solver: &SpectralSolver,
) -> Result<IntegralReport> {
    state.validate()?;
    let grid = *state.rho_fluid.grid();
    let dim = grid.dim();
    let vol = grid.cell_volume();
    let b = truncate_density(&state.rho_fluid, trunc)?;

    let test_fn = build_test_function(state, trunc, problem, solver)?;
    let grad_test: Vec<VectorField> = jacobian(&test_fn.output, DiffScheme::Central);

    // viscous stress S = grad u + grad u^T - (2/d) div u I  (unit shear
    // viscosity, zero bulk)
    let grad_u = jacobian(&state.velocity, DiffScheme::Spectral);
    let div_u = divergence(&state.velocity, DiffScheme::Spectral);
    let mut viscous = 0.0;
    let mut convective = 0.0;
    for idx in 0..grid.node_count() {
        let mut s_contract = 0.0;
        let mut conv_contract = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let mut s_ij = grad_u[i].component(j)[idx] + grad_u[j].component(i)[idx];
                if i == j {
                    s_ij -= 2.0 / dim as f64 * div_u.values()[idx];
                }
                s_contract += s_ij * grad_test[i].component(j)[idx];
                conv_contract += state.velocity.component(i)[idx]
                    * state.velocity.component(j)[idx]
                    * grad_test[i].component(j)[idx];
            }
        }
        viscous += vol * s_contract;
        convective -= vol * state.rho_fluid.values()[idx] * conv_contract;
    }
    viscous *= state.psi;
    convective *= state.psi;

    // momentum pairings: the snapshot doubles as the initial slice
    let initial_momentum = -momentum_pairing(state, &test_fn.output);
    let weight_derivative = state.dpsi * momentum_pairing(state, &test_fn.output);

    // transport of the test function along the moving ball, term by term:
    //   (a) potential of the momentum flux -div(b u)
    //   (b) potential of the renormalization defect (b - b' rho) div u
    //   (c) Hessian of the potential of b contracted with the body velocity
    //   (d) minus the gradient of the test function contracted with it
    let b_flux = VectorField::from_components(
        (0..dim)
            .map(|a| {
                b.zip_with(&state.velocity.component_field(a), |bb, uu| -bb * uu)
                    .expect("same grid")
            })
            .collect::<Vec<_>>(),
    )?;
    let term_a = apply(
        &solver.matched_right_inverse(&b_flux),
        problem,
        CompatibilityPolicy::ProjectUniformModes,
    )?;
    let bprime = state.rho_fluid.map(|r| trunc.derivative(r));
    let renorm = b
        .zip_with(&bprime.zip_with(&state.rho_fluid, |bp, r| bp * r)?, |bb, br| bb - br)?
        .zip_with(&div_u, |w, d| w * d)?;
    let term_b = apply(
        &solver.matched_potential_gradient(&renorm),
        problem,
        CompatibilityPolicy::ProjectUniformModes,
    )?;
    let term_c = apply(
        &solver.matched_hessian_contraction(&b, &state.body_velocity),
        problem,
        CompatibilityPolicy::ProjectUniformModes,
    )?;
    let mut term_d_comps = vec![vec![0.0; grid.node_count()]; dim];
    for i in 0..dim {
        for idx in 0..grid.node_count() {
            let mut dot = 0.0;
            for j in 0..dim {
                dot += grad_test[i].component(j)[idx] * state.body_velocity[j];
            }
            term_d_comps[i][idx] = -dot;
        }
    }
    let term_d = VectorField::new(grid, term_d_comps)?;

    let pa = state.psi * momentum_pairing(state, &term_a.output);
    let pb = state.psi * momentum_pairing(state, &term_b.output);
    let pc = state.psi * momentum_pairing(state, &term_c.output);
    let pd = state.psi * momentum_pairing(state, &term_d);
    let transport = pa + pb + pc + pd;

    // pressure side with the isentropic law p = rho^gamma (unit prefactor)
    let mut pressure_side = 0.0;
    for idx in 0..grid.node_count() {
        let r = state.rho_fluid.values()[idx];
        if r > 0.0 {
            pressure_side += vol * r.powf(state.gamma) * b.values()[idx];
        }
    }
    pressure_side *= state.psi;

    Ok(IntegralReport {
        viscous,
        convective,
        initial_momentum,
        weight_derivative,
        transport,
        transport_terms: [pa, pb, pc, pd],
        pressure_side,
        test_function_div_residual: test_fn.div_residual,
        projected_means: test_fn.projected_means,
    })
}

/// Scaling-exponent arithmetic of the smallness conditions.
#[derive(Debug, Clone)]
pub struct ExponentReport {
    /// interpolation exponent `1 - 1/gamma - alpha/gamma - 1/6`
    pub s: f64,
    /// net fluid-term exponent `beta/2 - (3 - gamma)/gamma - 3 alpha/gamma`
    pub fluid_exponent: f64,
    /// net body-term exponent `3 (5/6 - alpha/gamma) - 3/2 - beta_bar/2`
    pub body_exponent: f64,
    /// kinetic-energy speed ceiling exponent `(beta - 3)/2`
    pub velocity_ceiling_exponent: f64,
    /// whether `2 (3 - gamma)/gamma < beta <= beta_bar < 2` (required only
    /// for gamma <= 3; any `0 <= beta` window works above)
    pub window_ok: bool,
    pub fluid_positive: bool,
    pub body_positive: bool,
}

pub fn scaling_exponents(gamma: f64, alpha: f64, beta: f64, beta_bar: f64) -> Result<ExponentReport> {
    if gamma <= 1.5 {
        return Err(CoreError::GammaOutOfRange(gamma));
    }
    let s = 1.0 - 1.0 / gamma - alpha / gamma - 1.0 / 6.0;
    let fluid_exponent = 0.5 * beta - (3.0 - gamma) / gamma - 3.0 * alpha / gamma;
    let body_exponent = 3.0 * (1.0 - 1.0 / 6.0 - alpha / gamma) - 1.5 - 0.5 * beta_bar;
    let lower = 2.0 * (3.0 - gamma) / gamma;
    let window_ok = beta > lower && beta <= beta_bar && beta_bar < 2.0;
    Ok(ExponentReport {
        s,
        fluid_exponent,
        body_exponent,
        velocity_ceiling_exponent: 0.5 * (beta - 3.0),
        window_ok,
        fluid_positive: fluid_exponent > 0.0,
        body_positive: body_exponent > 0.0,
    })
}

/// Boundedness summary of a radius sweep of the integrals.
#[derive(Debug, Clone)]
pub struct EquiIntegrabilityReport {
    /// per radius: (radius, pressure side, sum of |integrals|)
    pub rows: Vec<(f64, f64, f64)>,
    pub pressure_slope: SlopeFit,
    /// pressure side dominated by the integral sum on every row
    pub dominated: bool,
}

/// Compares the pressure side against the integral sum across a sweep. The
/// synthetic states do not satisfy a discrete momentum balance, so both
/// sides are reported and only boundedness of the pressure side is judged.
pub fn equi_integrability(rows: &[(f64, IntegralReport)]) -> Result<EquiIntegrabilityReport> {
    if rows.is_empty() {
        return Err(CoreError::EmptySweep);
    }
    let table: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|(eps, r)| (*eps, r.pressure_side, r.sum_abs()))
        .collect();
    let pts: Vec<(f64, f64)> = table.iter().map(|(e, p, _)| (*e, *p)).collect();
    Ok(EquiIntegrabilityReport {
        pressure_slope: fit_log_log(&pts),
        dominated: table.iter().all(|(_, p, s)| *p <= *s * (1.0 + 1e-9) || *p < 1e-12),
        rows: table,
    })
}

/// Deterministic manufactured state on the given grid.
///
/// The density carries a pressure-active bump (height above 2) far from the
/// ball and vanishes identically near and on it; the velocity blends a
/// smooth far field into the rigid body value across the transition shell;
/// the body speed sits at half its kinetic-energy ceiling and the amplitude
/// of the far field is normalized so the total kinetic energy is one.
pub fn manufactured_state(
    grid: Grid,
    ball: Ball,
    gamma: f64,
    beta: f64,
    beta_bar: f64,
    psi: f64,
    dpsi: f64,
) -> Result<FluidState> {
    use crate::cutoff::CutoffProfile;
    ball.validate(&grid)?;
    let dim = grid.dim();
    let radius = ball.radius;
    let body_density = radius.powf(-beta);
    // half the kinetic-energy ceiling
    let speed = 0.5 / (body_density * radius.powi(dim as i32)).sqrt();
    let mut body_velocity = vec![0.0; dim];
    body_velocity[0] = speed;

    let profile = CutoffProfile::new();
    let center = ball.center.clone();
    let mask = move |x: &[f64]| {
        let mut r2 = 0.0;
        for a in 0..x.len() {
            let d = x[a] - center[a];
            r2 += d * d;
        }
        // 0 inside 5/4 radius, 1 outside 7/4 radius
        profile.value(r2.sqrt() / radius - 1.0)
    };
    // density: tall narrow bump away from the ball plus a gentle floor
    let bump_center = [0.45 * grid.half_length(), 0.3 * grid.half_length(), 0.0];
    let bump_radius = 0.18 * grid.half_length();
    let mask_rho = mask.clone();
    let rho_fluid = ScalarField::from_fn(grid, move |x| {
        let mut s2 = 0.0;
        for a in 0..x.len() {
            let d = x[a] - bump_center[a];
            s2 += d * d;
        }
        s2 /= bump_radius * bump_radius;
        let bump = if s2 < 1.0 { 4.0 * (1.0 - s2).powi(3) } else { 0.0 };
        let floor = 0.4 * (0.5 * std::f64::consts::PI * x[0] / 1.0).cos().powi(2);
        (bump + floor) * mask_rho(x)
    });

    // far velocity field: smooth, box-periodic
    let l = grid.half_length();
    let far = move |x: &[f64], a: usize| {
        let k = std::f64::consts::PI / l;
        match a {
            0 => (k * x[0]).sin() * (k * x[1]).cos(),
            1 => -(k * x[0]).cos() * (k * x[1]).sin(),
            _ => 0.5 * (k * x[0]).sin() * (k * x[2]).sin(),
        }
    };
    // normalize the kinetic energy to one by scaling the deviation from the
    // rigid value: u = Y + s (far - Y) w. the energy is quadratic in s,
    //   KE(s) = A + B s + C s^2,
    // with A the rigid-value energy (body part plus fluid at rest frame),
    // solved for the positive root
    let bv = body_velocity.clone();
    let mask_u = mask.clone();
    let deviation = VectorField::from_fn(grid, move |x, a| {
        (far(x, a) - bv[a]) * mask_u(x)
    });
    let vol = grid.cell_volume();
    let ball_region = Region::ball(&ball);
    let (mut a_coef, mut b_coef, mut c_coef) = (0.0f64, 0.0f64, 0.0f64);
    for idx in 0..grid.node_count() {
        let mut y2 = 0.0;
        let mut yd = 0.0;
        let mut d2 = 0.0;
        for a in 0..dim {
            let y = body_velocity[a];
            let d = deviation.component(a)[idx];
            y2 += y * y;
            yd += y * d;
            d2 += d * d;
        }
        let rf = rho_fluid.values()[idx];
        a_coef += vol * rf * y2;
        b_coef += 2.0 * vol * rf * yd;
        c_coef += vol * rf * d2;
        let wb = region_weight(&grid, idx, &ball_region);
        if wb > 0.0 {
            // deviation vanishes on the ball; only the rigid part enters
            a_coef += wb * body_density * y2;
        }
    }
    let disc = b_coef * b_coef - 4.0 * c_coef * (a_coef - 1.0);
    if c_coef <= 0.0 || disc <= 0.0 {
        return Err(CoreError::InvalidGrid(format!(
            "cannot normalize kinetic energy: rigid part {a_coef} too large"
        )));
    }
    let scale = (-b_coef + disc.sqrt()) / (2.0 * c_coef);
    let bv2 = body_velocity.clone();
    let mask_u2 = mask;
    let velocity = VectorField::from_fn(grid, move |x, a| {
        let w = mask_u2(x);
        bv2[a] + scale * (far(x, a) - bv2[a]) * w
    });
    let state = FluidState {
        rho_fluid,
        velocity,
        ball,
        body_velocity,
        body_density,
        gamma,
        beta,
        beta_bar,
        psi,
        dpsi,
    };
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn truncation_plateaus_and_power_law() {
        let b = Truncation::new(0.5);
        assert_eq!(b.value(0.5), 0.0);
        assert_eq!(b.value(0.0), 0.0);
        assert_relative_eq!(b.value(4.0), 2.0, max_relative = 1e-14);
        let mid = b.value(1.5);
        assert!(mid > 0.0 && mid < 1.5f64.powf(0.5));
    }

    #[test]
    fn truncation_monotone_and_c1() {
        let b = Truncation::new(0.3);
        let mut prev = -1e-12;
        for i in 0..=400 {
            let r = 0.5 + 2.0 * i as f64 / 400.0;
            let v = b.value(r);
            assert!(v >= prev - 1e-12, "not monotone at r = {r}");
            assert!(b.derivative(r) >= -1e-12);
            prev = v;
        }
        // derivative matches finite differences across the blend
        for r in [1.01, 1.5, 1.99, 2.5] {
            let fd = (b.value(r + 1e-6) - b.value(r - 1e-6)) / 2e-6;
            assert!((b.derivative(r) - fd).abs() < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn truncate_density_rejects_negative() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let rho = ScalarField::from_fn(g, |x| x[0]);
        assert!(matches!(
            truncate_density(&rho, &Truncation::new(0.1)),
            Err(CoreError::NegativeDensity(_))
        ));
    }

    #[test]
    fn exponent_arithmetic_reference_values() {
        let r = scaling_exponents(2.0, 0.1, 1.8, 1.8).unwrap();
        assert!((r.s - (1.0 - 0.5 - 0.05 - 1.0 / 6.0)).abs() < 1e-15);
        assert!((r.s - 0.28333333333333333).abs() < 1e-12);
        assert!(r.window_ok);
        // fluid exponent example: gamma = 2, beta = 1.5, alpha -> 0
        let r = scaling_exponents(2.0, 1e-12, 1.5, 1.9).unwrap();
        assert!((r.fluid_exponent - 0.25).abs() < 1e-9);
        // velocity ceiling exponent by direct substitution
        let r = scaling_exponents(2.0, 0.1, 1.8, 1.8).unwrap();
        assert!((r.velocity_ceiling_exponent - (1.8 - 3.0) / 2.0).abs() < 1e-15);
        assert!(matches!(
            scaling_exponents(1.4, 0.1, 1.0, 1.0),
            Err(CoreError::GammaOutOfRange(_))
        ));
    }

    #[test]
    fn zero_body_scaling_admissible_iff_gamma_above_three() {
        for (gamma, expect) in [
            (1.6, false),
            (2.0, false),
            (3.0, false),
            (3.01, true),
            (4.0, true),
            (6.0, true),
        ] {
            let r = scaling_exponents(gamma, 0.05, 0.0, 0.0).unwrap();
            assert_eq!(r.window_ok, expect, "gamma = {gamma}");
        }
    }

    #[test]
    fn rigid_velocity_ceiling() {
        // at the ceiling: rho_body = 1 (beta = 0), radius^3 |Y|^2 = 1
        let eps: f64 = 1.0 / 16.0;
        let y = eps.powf(-1.5);
        let check = rigid_velocity_bound(1.0, eps, &[y, 0.0, 0.0], 3);
        assert_relative_eq!(check.energy, 1.0, max_relative = 1e-12);
        assert!(check.ok);
        assert_relative_eq!(check.speed_ceiling, y, max_relative = 1e-12);
        // twice the ceiling is flagged
        let check = rigid_velocity_bound(1.0, eps, &[2.0 * y, 0.0, 0.0], 3);
        assert!(!check.ok);
        // zero velocity always passes
        assert!(rigid_velocity_bound(123.0, eps, &[0.0, 0.0, 0.0], 3).ok);
    }

    fn state_for_tests(n: usize, radius: f64) -> (FluidState, AnnulusProblem, SpectralSolver) {
        let grid = Grid::new(2, n, 1.0).unwrap();
        let ball = Ball::new(vec![-0.35, -0.3], radius);
        let state = manufactured_state(grid, ball.clone(), 2.0, 1.8, 1.8, 1.0, -0.5).unwrap();
        let problem = AnnulusProblem::build(grid, ball).unwrap();
        let solver = SpectralSolver::new(grid);
        (state, problem, solver)
    }

    #[test]
    fn manufactured_state_is_valid() {
        let (state, _, _) = state_for_tests(128, 0.125);
        state.validate().unwrap();
        assert_relative_eq!(state.kinetic_energy(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn test_function_vanishes_for_subcritical_density() {
        let (mut state, problem, solver) = state_for_tests(128, 0.125);
        // scale the density below the truncation threshold
        let max = state
            .rho_fluid
            .values()
            .iter()
            .fold(0.0f64, |a, &v| a.max(v));
        state.rho_fluid = state.rho_fluid.scale(0.9 / max);
        let trunc = Truncation::new(0.1);
        let tf = build_test_function(&state, &trunc, &problem, &solver).unwrap();
        assert!(lp_norm_vec(&tf.output, f64::INFINITY, &Region::Whole).unwrap() < 1e-12);
        let report = compute_integrals(&state, &trunc, &problem, &solver).unwrap();
        for v in report.values() {
            assert!(v.abs() < 1e-12);
        }
        assert!(report.pressure_side.abs() < 1e-30);
    }

    #[test]
    fn test_function_divergence_tracks_truncation() {
        let (state, problem, solver) = state_for_tests(128, 0.125);
        let trunc = Truncation::new(0.1);
        let tf = build_test_function(&state, &trunc, &problem, &solver).unwrap();
        // the output is constant inside the ball and matches the input far out
        assert!(tf.div_residual < 1e-2, "residual {}", tf.div_residual);
        // divergence of the output equals b minus the uniform modes away
        // from the annulus
        let b = truncate_density(&state.rho_fluid, &trunc).unwrap();
        let d = divergence(&tf.output, DiffScheme::Central);
        let mean = b.mean();
        let grid = state.rho_fluid.grid();
        let mut worst = 0.0f64;
        for idx in 0..grid.node_count() {
            let x = grid.position(idx);
            let r = crate::field::dist(&x, &state.ball.center, 2);
            if r > 2.2 * state.ball.radius {
                worst = worst.max((d.values()[idx] - (b.values()[idx] - mean)).abs());
            }
        }
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn integrals_vanish_for_resting_state() {
        let (mut state, problem, solver) = state_for_tests(128, 0.125);
        // zero velocity everywhere, zero weight derivative: every integral
        // with a velocity or dpsi factor vanishes
        state.velocity = VectorField::zeros(*state.rho_fluid.grid());
        state.body_velocity = vec![0.0, 0.0];
        state.dpsi = 0.0;
        // normalization no longer holds; bypass validate by calling pieces
        let trunc = Truncation::new(0.1);
        let tf = build_test_function(&state, &trunc, &problem, &solver).unwrap();
        let _ = tf;
        // viscous and convective integrands vanish pointwise
        let grad_u = jacobian(&state.velocity, DiffScheme::Spectral);
        assert!(grad_u
            .iter()
            .all(|r| lp_norm_vec(r, f64::INFINITY, &Region::Whole).unwrap() == 0.0));
    }

    #[test]
    fn integral_report_finite_on_manufactured_state() {
        let (state, problem, solver) = state_for_tests(128, 0.125);
        let trunc = Truncation::new(0.1);
        let report = compute_integrals(&state, &trunc, &problem, &solver).unwrap();
        for v in report.values() {
            assert!(v.is_finite());
        }
        assert!(report.pressure_side > 0.0);
        assert!(report.test_function_div_residual < 1e-2);
    }

    #[test]
    fn equi_integrability_shapes() {
        let (state, problem, solver) = state_for_tests(128, 0.125);
        let trunc = Truncation::new(0.1);
        let report = compute_integrals(&state, &trunc, &problem, &solver).unwrap();
        let rows = vec![(0.125, report.clone()), (0.0625, report)];
        let out = equi_integrability(&rows).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert!(out.pressure_slope.slope().is_none()); // two points only
        assert!(matches!(
            equi_integrability(&[]),
            Err(CoreError::EmptySweep)
        ));
    }
}
