//! Local field interpolation and ball-average quadrature.
//!
//! The ball average must vary smoothly with the ball center: the harness
//! differentiates it numerically with steps of a quarter grid cell, so a
//! staircase (cell-counting) quadrature would drown the derivative in
//! in/out flip noise. Instead the field is interpolated with a sixth-order
//! tensor Lagrange stencil (6 points per axis) and averaged with a fixed
//! Gauss–Legendre x uniform-angle rule attached to the ball frame. The
//! interpolant is strictly local: where the samples vanish identically the
//! interpolated values vanish too, so ball averages of fields supported
//! away from the ball are exact zeros and support checks stay sharp. The
//! rule is deterministic and exact for constants and odd-symmetric
//! integrands by construction.

use crate::error::Result;
use crate::field::{Ball, Grid, ScalarField, VectorField};
use crate::fft;

/// Lagrange basis over the 6-point stencil `{-2,...,3}` at offset `t` in
/// `[0, 1)`; reproduces polynomials up to degree five and hits samples
/// bit-exactly at the nodes.
fn lagrange6(t: f64) -> [f64; 6] {
    // denominators prod_{m != j} (j - m) for j = -2..3
    const DEN: [f64; 6] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];
    let d: [f64; 6] = [t + 2.0, t + 1.0, t, t - 1.0, t - 2.0, t - 3.0];
    let mut w = [0.0; 6];
    for j in 0..6 {
        let mut p = 1.0;
        for (m, dm) in d.iter().enumerate() {
            if m != j {
                p *= dm;
            }
        }
        w[j] = p / DEN[j];
    }
    w
}

/// A scalar field evaluable at arbitrary points by local interpolation.
#[derive(Debug, Clone)]
pub struct Interpolant {
    grid: Grid,
    values: Vec<f64>,
}

impl Interpolant {
    pub fn new(f: &ScalarField) -> Self {
        Interpolant {
            grid: *f.grid(),
            values: f.values().to_vec(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Interpolated value at an arbitrary point of the periodic box.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let grid = &self.grid;
        let n = grid.n() as i64;
        let h = grid.spacing();
        let dim = grid.dim();
        let mut base = [0i64; 3];
        let mut w = [[0.0f64; 6]; 3];
        for a in 0..dim {
            let u = (x[a] + grid.half_length()) / h;
            let i0 = u.floor();
            base[a] = i0 as i64 - 2;
            w[a] = lagrange6(u - i0);
        }
        let wrap = |i: i64| -> usize { i.rem_euclid(n) as usize };
        let nn = grid.n();
        let mut acc = 0.0;
        match dim {
            2 => {
                for j0 in 0..6 {
                    let w0 = w[0][j0];
                    if w0 == 0.0 {
                        continue;
                    }
                    let i0 = wrap(base[0] + j0 as i64) * nn;
                    for j1 in 0..6 {
                        let w1 = w[1][j1];
                        if w1 != 0.0 {
                            acc += w0 * w1 * self.values[i0 + wrap(base[1] + j1 as i64)];
                        }
                    }
                }
            }
            _ => {
                for j0 in 0..6 {
                    let w0 = w[0][j0];
                    if w0 == 0.0 {
                        continue;
                    }
                    let i0 = wrap(base[0] + j0 as i64) * nn;
                    for j1 in 0..6 {
                        let w1 = w[1][j1];
                        if w1 == 0.0 {
                            continue;
                        }
                        let i1 = (i0 + wrap(base[1] + j1 as i64)) * nn;
                        for j2 in 0..6 {
                            let w2 = w[2][j2];
                            if w2 != 0.0 {
                                acc += w0 * w1 * w2 * self.values[i1 + wrap(base[2] + j2 as i64)];
                            }
                        }
                    }
                }
            }
        }
        acc
    }
}

/// Gauss–Legendre nodes/weights on `[0, 1]` (Newton on Legendre polynomials).
fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; m];
    let mut ws = vec![0.0; m];
    for i in 0..m {
        // initial guess on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=m {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
        xs[i] = 0.5 * (x + 1.0);
        ws[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Fixed volume-quadrature points and weights on the unit ball, attached to
/// the ball frame so the average is smooth in the center point.
#[derive(Debug, Clone)]
pub struct BallRule {
    /// offsets within the unit ball
    pub points: Vec<[f64; 3]>,
    /// weights normalized to sum to one
    pub weights: Vec<f64>,
}

impl BallRule {
    pub fn new(dim: usize) -> Self {
        let (n_r, n_ang, n_mu) = (12usize, 32usize, 10usize);
        let (rs, rws) = gauss_legendre_unit(n_r);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match dim {
            2 => {
                for (r, wr) in rs.iter().zip(&rws) {
                    for j in 0..n_ang {
                        let th = 2.0 * std::f64::consts::PI * j as f64 / n_ang as f64;
                        points.push([r * th.cos(), r * th.sin(), 0.0]);
                        weights.push(wr * r / n_ang as f64);
                    }
                }
            }
            _ => {
                let (mus, muws) = gauss_legendre_unit(n_mu);
                for (r, wr) in rs.iter().zip(&rws) {
                    for (muu, wmu) in mus.iter().zip(&muws) {
                        let mu = 2.0 * muu - 1.0; // cos(theta) in [-1, 1]
                        let sth = (1.0 - mu * mu).max(0.0).sqrt();
                        for j in 0..n_ang {
                            let ph = 2.0 * std::f64::consts::PI * j as f64 / n_ang as f64;
                            points.push([r * sth * ph.cos(), r * sth * ph.sin(), r * mu]);
                            weights.push(wr * wmu * r * r / n_ang as f64);
                        }
                    }
                }
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        BallRule { points, weights }
    }
}

/// Mean of an interpolated field over the ball, using a prebuilt rule.
pub fn ball_mean_interp(sf: &Interpolant, ball: &Ball, rule: &BallRule) -> f64 {
    let dim = sf.grid().dim();
    let mut acc = 0.0;
    let mut y = [0.0f64; 3];
    for (pt, w) in rule.points.iter().zip(&rule.weights) {
        for a in 0..dim {
            y[a] = ball.center[a] + ball.radius * pt[a];
        }
        acc += w * sf.eval(&y[..dim]);
    }
    acc
}

/// Mean of a scalar field over the ball.
pub fn ball_mean(f: &ScalarField, ball: &Ball) -> Result<f64> {
    ball.validate(f.grid())?;
    let sf = Interpolant::new(f);
    let rule = BallRule::new(f.grid().dim());
    Ok(ball_mean_interp(&sf, ball, &rule))
}

/// Componentwise mean of a vector field over the ball.
pub fn ball_mean_vec(v: &VectorField, ball: &Ball) -> Result<Vec<f64>> {
    ball.validate(v.grid())?;
    let rule = BallRule::new(v.grid().dim());
    (0..v.grid().dim())
        .map(|a| {
            let sf = Interpolant::new(&v.component_field(a));
            Ok(ball_mean_interp(&sf, ball, &rule))
        })
        .collect()
}

/// Shift a scalar field by `delta`: output(x) = input(x + delta).
///
/// Grid-aligned shifts are exact index rolls; everything else goes through
/// the FFT phase factor (band-limited interpolation).
pub fn shift_field(f: &ScalarField, delta: &[f64]) -> ScalarField {
    let grid = *f.grid();
    let h = grid.spacing();
    let n = grid.n() as i64;
    let dim = grid.dim();
    // integer shift?
    let mut steps = [0i64; 3];
    let mut aligned = true;
    for a in 0..dim {
        let s = delta[a] / h;
        let r = s.round();
        if (s - r).abs() < 1e-12 {
            steps[a] = r as i64;
        } else {
            aligned = false;
            break;
        }
    }
    if aligned {
        let mut out = vec![0.0; grid.node_count()];
        for (idx, o) in out.iter_mut().enumerate() {
            let mi = grid.multi_index(idx);
            let mut src = [0usize; 3];
            for a in 0..dim {
                src[a] = (mi[a] as i64 + steps[a]).rem_euclid(n) as usize;
            }
            *o = f.values()[grid.flat_index(src)];
        }
        return ScalarField::new(grid, out).expect("shift preserves shape");
    }
    let mut spec = fft::forward_real(f.values(), dim, grid.n());
    for (idx, v) in spec.iter_mut().enumerate() {
        let mi = grid.multi_index(idx);
        let mut phase = 0.0;
        for a in 0..dim {
            phase += grid.wavenumber(mi[a]) * delta[a];
        }
        *v *= num_complex::Complex::from_polar(1.0, phase);
    }
    let values = fft::inverse_to_real(spec, dim, grid.n());
    ScalarField::new(grid, values).expect("shift preserves shape")
}

/// Componentwise shift of a vector field.
pub fn shift_field_vec(v: &VectorField, delta: &[f64]) -> VectorField {
    let comps = (0..v.grid().dim())
        .map(|a| shift_field(&v.component_field(a), delta))
        .collect();
    VectorField::from_components(comps).expect("shift preserves shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use approx::assert_relative_eq;

    fn grid2() -> Grid {
        Grid::new(2, 64, 1.0).unwrap()
    }

    #[test]
    fn interpolant_reproduces_nodes_bit_exactly_and_smooth_fields_between() {
        let g = grid2();
        let f = ScalarField::from_fn(g, |x| {
            (std::f64::consts::PI * x[0]).sin() * (2.0 * std::f64::consts::PI * x[1]).cos()
        });
        let sf = Interpolant::new(&f);
        for idx in [0usize, 100, 2000, 4095] {
            let x = g.position(idx);
            assert_eq!(sf.eval(&x[..2]).to_bits(), f.values()[idx].to_bits());
        }
        let probe = [0.1234, -0.3579];
        let exact =
            (std::f64::consts::PI * probe[0]).sin() * (2.0 * std::f64::consts::PI * probe[1]).cos();
        assert!((sf.eval(&probe) - exact).abs() < 5e-6);
    }

    #[test]
    fn interpolant_is_local_zeros_stay_zero() {
        let g = grid2();
        // field supported in a far corner
        let f = ScalarField::from_fn(g, |x| {
            let s2 = ((x[0] - 0.6).powi(2) + (x[1] - 0.6).powi(2)) / 0.04;
            if s2 < 1.0 {
                (1.0 - s2).powi(4)
            } else {
                0.0
            }
        });
        let sf = Interpolant::new(&f);
        // probes more than 3 cells away from the support are exact zeros
        for probe in [[0.0, 0.0], [-0.5, 0.2], [0.1, -0.4]] {
            assert_eq!(sf.eval(&probe), 0.0);
        }
        let b = Ball::new(vec![0.0, 0.0], 0.15);
        assert_eq!(ball_mean(&f, &b).unwrap(), 0.0);
    }

    #[test]
    fn ball_mean_constant_exact() {
        let g = grid2();
        let f = ScalarField::from_fn(g, |_| 2.75);
        let b = Ball::new(vec![0.05, -0.1], 0.2);
        assert_relative_eq!(ball_mean(&f, &b).unwrap(), 2.75, max_relative = 1e-13);
    }

    #[test]
    fn ball_mean_linear_is_center_value() {
        let g = grid2();
        let f = ScalarField::from_fn(g, |x| 0.7 * x[0] - 0.4 * x[1]);
        let b = Ball::new(vec![0.1, 0.05], 0.15);
        let m = ball_mean(&f, &b).unwrap();
        let expect = 0.7 * 0.1 - 0.4 * 0.05;
        assert!((m - expect).abs() < 1e-12, "mean {m} expect {expect}");
    }

    #[test]
    fn ball_mean_quadratic_radial_profile() {
        // mean of |x-h|^2 over the ball is d/(d+2) * r^2
        let g = grid2();
        let c = [0.08, -0.06];
        let f = ScalarField::from_fn(g, |x| (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2));
        let b = Ball::new(c.to_vec(), 0.18);
        let m = ball_mean(&f, &b).unwrap();
        let expect = 2.0 / 4.0 * 0.18f64.powi(2);
        assert!((m - expect).abs() < 1e-12, "mean {m} expect {expect}");
    }

    #[test]
    fn ball_mean_quadratic_in_3d() {
        let g = Grid::new(3, 32, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x| {
            x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
        });
        let b = Ball::new(vec![0.0, 0.0, 0.0], 0.25);
        let m = ball_mean(&f, &b).unwrap();
        let expect = 3.0 / 5.0 * 0.25f64.powi(2);
        assert!((m - expect).abs() < 1e-10, "mean {m} expect {expect}");
    }

    #[test]
    fn ball_mean_linearity() {
        let g = grid2();
        let f = ScalarField::from_fn(g, |x| (3.0 * x[0]).sin() + x[1]);
        let b = Ball::new(vec![0.0, 0.0], 0.2);
        let m = ball_mean(&f, &b).unwrap();
        let m_shift = ball_mean(&f.map(|v| v + 1.5), &b).unwrap();
        let m_scaled = ball_mean(&f.scale(-2.0), &b).unwrap();
        assert_relative_eq!(m_shift, m + 1.5, max_relative = 1e-12, epsilon = 1e-12);
        assert_relative_eq!(m_scaled, -2.0 * m, max_relative = 1e-12, epsilon = 1e-12);
    }

    #[test]
    fn ball_mean_rejects_under_resolved_ball() {
        let g = grid2();
        let f = ScalarField::zeros(g);
        let b = Ball::new(vec![0.0, 0.0], 0.05);
        assert!(ball_mean(&f, &b).is_err());
    }

    #[test]
    fn ball_mean_smooth_in_center() {
        // the derivative of the ball mean in the center must be resolvable
        // with a quarter-cell finite difference; a cell-counting quadrature
        // jitters at the 1e-2 level here. the budget covers the finite
        // difference's own truncation, delta^2/6 * |mean of d^3 f| ~ 8e-5
        let g = grid2();
        let f = ScalarField::from_fn(g, |x| (2.0 * x[0]).sin() * (x[1]).cos());
        let sf = Interpolant::new(&f);
        let rule = BallRule::new(2);
        let r = 0.2;
        let delta = g.spacing() / 4.0;
        let m_plus = ball_mean_interp(&sf, &Ball::new(vec![delta, 0.0], r), &rule);
        let m_minus = ball_mean_interp(&sf, &Ball::new(vec![-delta, 0.0], r), &rule);
        let fd = (m_plus - m_minus) / (2.0 * delta);
        // exact derivative of the mean in h equals the ball mean of d/dx0 f
        let dfdx = ScalarField::from_fn(g, |x| 2.0 * (2.0 * x[0]).cos() * (x[1]).cos());
        let expect = ball_mean(&dfdx, &Ball::new(vec![0.0, 0.0], r)).unwrap();
        assert!(
            (fd - expect).abs() < 2e-4 * expect.abs().max(1.0),
            "fd {fd} expect {expect}"
        );
    }

    #[test]
    fn grid_aligned_shift_is_exact_roll() {
        let g = grid2();
        let f = ScalarField::from_fn(g, |x| (x[0] * 2.1).sin() + (x[1] * 1.3).cos());
        let h = g.spacing();
        let shifted = shift_field(&f, &[3.0 * h, -2.0 * h]);
        for idx in 0..g.node_count() {
            let mi = g.multi_index(idx);
            let src = [(mi[0] + 3) % g.n(), (mi[1] + g.n() - 2) % g.n(), 0];
            assert_eq!(shifted.values()[idx], f.values()[g.flat_index(src)]);
        }
    }

    #[test]
    fn fractional_shift_matches_analytic_translation() {
        let g = grid2();
        let f = ScalarField::from_fn(g, |x| {
            (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).cos()
        });
        let d = [0.0123, -0.0317];
        let shifted = shift_field(&f, &d);
        for idx in [5usize, 777, 3000] {
            let x = g.position(idx);
            let exact = (std::f64::consts::PI * (x[0] + d[0])).sin()
                * (std::f64::consts::PI * (x[1] + d[1])).cos();
            assert!((shifted.values()[idx] - exact).abs() < 1e-10);
        }
    }
}
