//! A discrete right inverse of the divergence on the annulus between the
//! ball and its dilation by two, with zero boundary trace.
//!
//! The velocity unknowns live on the *active* nodes, strictly inside the
//! annulus (`radius + h/2 < |x - c| < 2 radius - h/2`); everything else is
//! held at zero, which realizes the zero trace exactly. The solve minimizes
//! the forward-difference Dirichlet energy of the extended field subject to
//! the centered divergence matching the data on every node the extension can
//! influence — the active set plus its one-cell halo. Constraining the halo
//! too is what makes the divergence of the *extended* field correct on the
//! whole grid rather than only inside the annulus.
//!
//! The centered stencil cannot see checkerboard constants: summing the
//! divergence of any compactly supported field over one parity class of the
//! constraint set telescopes to zero, so those indicator vectors span the
//! cokernel exactly. They are found by union–find over stencil pairs, the
//! data is projected against them (magnitudes reported), and the KKT system
//! is bordered by the indicators, leaving a nonsingular sparse system that a
//! direct LU factorization handles without regularization.

use crate::error::{CoreError, Result};
use crate::field::{Ball, Grid, ScalarField, VectorField};
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use std::time::Instant;

/// Relative divergence residual above which a solve is rejected.
pub const DIV_RESIDUAL_TOL: f64 = 1e-8;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Assembled and factorized divergence problem on one annulus.
pub struct AnnulusProblem {
    grid: Grid,
    ball: Ball,
    /// flat node indices of the active (unknown-carrying) set
    active: Vec<usize>,
    /// flat node index -> active ordinal
    active_ordinal: Vec<usize>,
    /// flat node indices of the constraint set (active + halo)
    constrained: Vec<usize>,
    /// component id of each constrained node in the stencil-parity graph
    component: Vec<usize>,
    n_components: usize,
    /// members of each component (ordinals into `constrained`)
    component_members: Vec<Vec<usize>>,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    /// triplets of the full KKT matrix, kept for residual evaluation
    kkt_triplets: Vec<Triplet<usize, usize, f64>>,
    n_total: usize,
}

impl std::fmt::Debug for AnnulusProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnnulusProblem")
            .field("active", &self.active.len())
            .field("constrained", &self.constrained.len())
            .field("components", &self.n_components)
            .finish()
    }
}

/// Result of one divergence solve.
#[derive(Debug, Clone)]
pub struct AnnulusSolution {
    /// the velocity field, zero outside the active set
    pub field: VectorField,
    /// per-component means removed from the data before solving
    pub projected_means: Vec<f64>,
    /// relative L2 residual of the centered divergence against the
    /// (projected) data over the constraint set
    pub div_residual: f64,
}

impl AnnulusProblem {
    /// Gathers the active/constraint sets, checks the resolution floors,
    /// assembles the bordered KKT system and factorizes it.
    pub fn build(grid: Grid, ball: Ball) -> Result<Self> {
        ball.validate(&grid)?;
        let h = grid.spacing();
        let gap_nodes = (ball.radius / h).floor() as usize;
        if gap_nodes < 8 {
            return Err(CoreError::GapUnderResolved {
                nodes: gap_nodes,
                required: 8,
            });
        }
        let dim = grid.dim();
        let n = grid.n() as i64;
        let nodes = grid.node_count();
        let mut is_active = vec![false; nodes];
        let mut active = Vec::new();
        for idx in 0..nodes {
            let x = grid.position(idx);
            let r = crate::field::dist(&x, &ball.center, dim);
            if r > ball.radius + 0.5 * h && r < 2.0 * ball.radius - 0.5 * h {
                is_active[idx] = true;
                active.push(idx);
            }
        }
        if active.is_empty() {
            return Err(CoreError::EmptyAnnulus);
        }
        let mut active_ordinal = vec![usize::MAX; nodes];
        for (q, &idx) in active.iter().enumerate() {
            active_ordinal[idx] = q;
        }

        // constraint set: active + one-cell halo
        let mut in_constraint = vec![false; nodes];
        let neighbor = |idx: usize, axis: usize, step: i64| -> usize {
            let mut mi = grid.multi_index(idx);
            mi[axis] = (mi[axis] as i64 + step).rem_euclid(n) as usize;
            grid.flat_index(mi)
        };
        for &idx in &active {
            in_constraint[idx] = true;
            for a in 0..dim {
                in_constraint[neighbor(idx, a, 1)] = true;
                in_constraint[neighbor(idx, a, -1)] = true;
            }
        }
        let constrained: Vec<usize> = (0..nodes).filter(|&i| in_constraint[i]).collect();
        let mut constrained_ordinal = vec![usize::MAX; nodes];
        for (q, &idx) in constrained.iter().enumerate() {
            constrained_ordinal[idx] = q;
        }
        let nc = constrained.len();

        // parity components: nodes two steps apart with an active midpoint
        // carry equal multipliers in the cokernel
        let mut uf = UnionFind::new(nc);
        for &idx in &active {
            for a in 0..dim {
                let plus = constrained_ordinal[neighbor(idx, a, 1)];
                let minus = constrained_ordinal[neighbor(idx, a, -1)];
                uf.union(plus, minus);
            }
        }
        let mut component = vec![usize::MAX; nc];
        let mut roots: Vec<usize> = Vec::new();
        for q in 0..nc {
            let r = uf.find(q);
            let c = match roots.iter().position(|&x| x == r) {
                Some(p) => p,
                None => {
                    roots.push(r);
                    roots.len() - 1
                }
            };
            component[q] = c;
        }
        let n_components = roots.len();
        let mut component_members = vec![Vec::new(); n_components];
        for (q, &c) in component.iter().enumerate() {
            component_members[c].push(q);
        }

        // KKT assembly in grid units: the energy block is the forward-edge
        // graph Laplacian per velocity component (Dirichlet outside), the
        // constraint block the centered divergence scaled by h, and the
        // border columns the component indicators.
        let na = active.len();
        let nv = dim * na;
        let n_total = nv + nc + n_components;
        let mut tr: Vec<Triplet<usize, usize, f64>> = Vec::new();
        for (q, &idx) in active.iter().enumerate() {
            for c in 0..dim {
                let row = c * na + q;
                let mut diag = 0.0;
                for a in 0..dim {
                    for step in [1i64, -1] {
                        let nb = neighbor(idx, a, step);
                        diag += 1.0;
                        if is_active[nb] {
                            tr.push(Triplet::new(row, c * na + active_ordinal[nb], -1.0));
                        }
                    }
                }
                tr.push(Triplet::new(row, row, diag));
            }
        }
        for (q, &idx) in constrained.iter().enumerate() {
            let row = nv + q;
            for a in 0..dim {
                let plus = neighbor(idx, a, 1);
                if is_active[plus] {
                    let col = a * na + active_ordinal[plus];
                    tr.push(Triplet::new(row, col, 0.5));
                    tr.push(Triplet::new(col, row, 0.5));
                }
                let minus = neighbor(idx, a, -1);
                if is_active[minus] {
                    let col = a * na + active_ordinal[minus];
                    tr.push(Triplet::new(row, col, -0.5));
                    tr.push(Triplet::new(col, row, -0.5));
                }
            }
            let border = nv + nc + component[q];
            tr.push(Triplet::new(row, border, 1.0));
            tr.push(Triplet::new(border, row, 1.0));
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n_total, n_total, &tr)
            .map_err(|e| CoreError::SingularSystem(format!("assembly: {e:?}")))?;
        let t0 = Instant::now();
        let lu = mat
            .sp_lu()
            .map_err(|e| CoreError::SingularSystem(format!("{e:?}")))?;
        log::debug!(
            "annulus system: {} unknowns ({} active nodes, {} constraints, {} components), {} nnz, factored in {:?}",
            n_total,
            na,
            nc,
            n_components,
            tr.len(),
            t0.elapsed()
        );
        Ok(AnnulusProblem {
            grid,
            ball,
            active,
            active_ordinal,
            constrained,
            component,
            n_components,
            component_members,
            lu,
            kkt_triplets: tr,
            n_total,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn active_nodes(&self) -> &[usize] {
        &self.active
    }

    pub fn constrained_nodes(&self) -> &[usize] {
        &self.constrained
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    /// Parity-component id of each constrained node, ordered as
    /// [`Self::constrained_nodes`].
    pub fn component_ids(&self) -> &[usize] {
        &self.component
    }

    /// Whether a flat node index carries velocity unknowns.
    pub fn is_active(&self, idx: usize) -> bool {
        self.active_ordinal[idx] != usize::MAX
    }

    /// Mean of `values` over each parity component of the constraint set.
    pub fn component_means(&self, values: &ScalarField) -> Vec<f64> {
        self.component_members
            .iter()
            .map(|members| {
                let s: f64 = members
                    .iter()
                    .map(|&q| values.values()[self.constrained[q]])
                    .sum();
                s / members.len() as f64
            })
            .collect()
    }

    /// Solves `centered_div(v) = f` on the constraint set with `v` supported
    /// on the active set, minimizing the Dirichlet energy of `v`.
    ///
    /// `f` is read on the constraint set and projected against the parity
    /// components first; the removed means are reported in the solution.
    pub fn solve(&self, f: &ScalarField) -> Result<AnnulusSolution> {
        if f.grid() != &self.grid {
            return Err(CoreError::GridMismatch);
        }
        let h = self.grid.spacing();
        let dim = self.grid.dim();
        let na = self.active.len();
        let nv = dim * na;
        let nc = self.constrained.len();

        let mut data: Vec<f64> = self
            .constrained
            .iter()
            .map(|&idx| f.values()[idx])
            .collect();
        let mut projected_means = vec![0.0; self.n_components];
        for (c, members) in self.component_members.iter().enumerate() {
            let mean: f64 = members.iter().map(|&q| data[q]).sum::<f64>() / members.len() as f64;
            projected_means[c] = mean;
            for &q in members {
                data[q] -= mean;
            }
        }

        // rhs in grid units: divergence rows are scaled by h
        let rhs = Mat::<f64>::from_fn(self.n_total, 1, |i, _| {
            if i >= nv && i < nv + nc {
                h * data[i - nv]
            } else {
                0.0
            }
        });
        let mut sol = self.lu.solve(&rhs);

        // iterative refinement against the exact matrix; the factorization
        // alone loses digits on the larger saddle systems
        let spmv = |x: &Mat<f64>| {
            let mut out = vec![0.0f64; self.n_total];
            for t in &self.kkt_triplets {
                out[t.row] += t.val * x[(t.col, 0)];
            }
            out
        };
        let div_residual_of = |mx: &[f64]| {
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for i in nv..nv + nc {
                let r = mx[i] - rhs[(i, 0)];
                num += r * r;
                den += rhs[(i, 0)] * rhs[(i, 0)];
            }
            if den > 0.0 {
                (num / den).sqrt()
            } else {
                num.sqrt()
            }
        };
        let mut mx = spmv(&sol);
        let mut div_residual = div_residual_of(&mx);
        for _ in 0..8 {
            if div_residual <= 1e-12 {
                break;
            }
            let resid = Mat::<f64>::from_fn(self.n_total, 1, |i, _| rhs[(i, 0)] - mx[i]);
            let correction = self.lu.solve(&resid);
            let next = Mat::<f64>::from_fn(self.n_total, 1, |i, _| {
                sol[(i, 0)] + correction[(i, 0)]
            });
            let next_mx = spmv(&next);
            let next_residual = div_residual_of(&next_mx);
            if !next_residual.is_finite() || next_residual >= div_residual {
                break;
            }
            sol = next;
            mx = next_mx;
            div_residual = next_residual;
        }
        if !div_residual.is_finite() || div_residual > DIV_RESIDUAL_TOL {
            return Err(CoreError::SolverNotConverged {
                residual: div_residual,
                tolerance: DIV_RESIDUAL_TOL,
            });
        }

        let mut comps = vec![vec![0.0; self.grid.node_count()]; dim];
        for (q, &idx) in self.active.iter().enumerate() {
            for (a, comp) in comps.iter_mut().enumerate() {
                comp[idx] = sol[(a * na + q, 0)];
            }
        }
        let field = VectorField::new(self.grid, comps)?;
        Ok(AnnulusSolution {
            field,
            projected_means,
            div_residual,
        })
    }
}

/// Measured continuity of the solve when the data is itself a divergence:
/// `|v|_q / |g|_q` over the annulus, for `v` solving `div v = div g`.
#[derive(Debug, Clone)]
pub struct NegativeFormRatio {
    pub q: f64,
    /// `None` when the input norm vanishes (reported as a skip)
    pub ratio: Option<f64>,
    pub solution: AnnulusSolution,
}

/// Solves with data `centered_div(g)` and reports `L^q` ratios on the annulus.
pub fn negative_form_apply(
    problem: &AnnulusProblem,
    g: &VectorField,
    qs: &[f64],
) -> Result<Vec<NegativeFormRatio>> {
    use crate::field::{divergence, lp_norm_vec, DiffScheme, Region};
    let f = divergence(g, DiffScheme::Central);
    let solution = problem.solve(&f)?;
    let region = Region::annulus(problem.ball());
    qs.iter()
        .map(|&q| {
            let g_norm = lp_norm_vec(g, q, &region)?;
            let ratio = if g_norm > 1e-300 {
                Some(lp_norm_vec(&solution.field, q, &region)? / g_norm)
            } else {
                None
            };
            Ok(NegativeFormRatio {
                q,
                ratio,
                solution: solution.clone(),
            })
        })
        .collect()
}

/// One row of the scale-uniformity sweep.
#[derive(Debug, Clone)]
pub struct UniformityRow {
    pub radius: f64,
    /// `|grad v|_p(annulus) / |f|_p(annulus)` per exponent
    pub gradient_ratios: Vec<(f64, f64)>,
    /// `|v|_q(annulus) / |g|_q(annulus)` per exponent, when a vector data
    /// family is supplied
    pub negative_ratios: Vec<(f64, Option<f64>)>,
    pub div_residual: f64,
}

/// Sweep over radii with a self-similar data family; reports per-radius
/// ratios and the fitted log-log slopes per exponent.
#[derive(Debug, Clone)]
pub struct UniformityReport {
    pub rows: Vec<UniformityRow>,
    /// per exponent: (p, slope fit of the gradient ratio)
    pub gradient_slopes: Vec<(f64, crate::slope::SlopeFit)>,
    pub negative_slopes: Vec<(f64, crate::slope::SlopeFit)>,
}

pub fn uniformity_sweep(
    grid: Grid,
    center: &[f64],
    radii: &[f64],
    ps: &[f64],
    qs: &[f64],
    scalar_family: &dyn Fn(f64) -> ScalarField,
    vector_family: Option<&dyn Fn(f64) -> VectorField>,
) -> Result<UniformityReport> {
    use crate::field::{gradient, lp_norm, lp_norm_jacobian, DiffScheme, Region};
    if radii.is_empty() {
        return Err(CoreError::EmptySweep);
    }
    let mut rows = Vec::new();
    for &radius in radii {
        let ball = Ball::new(center.to_vec(), radius);
        let problem = AnnulusProblem::build(grid, ball.clone())?;
        let f = scalar_family(radius);
        let solution = problem.solve(&f)?;
        let region = Region::annulus(&ball);
        let rows_grad = ps
            .iter()
            .map(|&p| {
                let grad_rows: Vec<VectorField> = (0..grid.dim())
                    .map(|i| gradient(&solution.field.component_field(i), DiffScheme::Central))
                    .collect();
                let num = lp_norm_jacobian(&grad_rows, p, &region)?;
                let den = lp_norm(&f, p, &region)?;
                Ok((p, num / den))
            })
            .collect::<Result<Vec<_>>>()?;
        let rows_neg = match vector_family {
            Some(fam) => {
                let g = fam(radius);
                negative_form_apply(&problem, &g, qs)?
                    .into_iter()
                    .map(|r| (r.q, r.ratio))
                    .collect()
            }
            None => Vec::new(),
        };
        rows.push(UniformityRow {
            radius,
            gradient_ratios: rows_grad,
            negative_ratios: rows_neg,
            div_residual: solution.div_residual,
        });
    }
    let gradient_slopes = ps
        .iter()
        .map(|&p| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| {
                    let v = r
                        .gradient_ratios
                        .iter()
                        .find(|(pp, _)| *pp == p)
                        .map(|(_, v)| *v)
                        .unwrap_or(f64::NAN);
                    (r.radius, v)
                })
                .collect();
            (p, crate::slope::fit_log_log(&pts))
        })
        .collect();
    let negative_slopes = qs
        .iter()
        .map(|&q| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| {
                    r.negative_ratios
                        .iter()
                        .find(|(qq, _)| *qq == q)
                        .and_then(|(_, v)| v.map(|v| (r.radius, v)))
                })
                .collect();
            (q, crate::slope::fit_log_log(&pts))
        })
        .collect();
    Ok(UniformityReport {
        rows,
        gradient_slopes,
        negative_slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{divergence, gradient, lp_norm, lp_norm_vec, DiffScheme, Region};

    fn setup(n: usize, radius: f64) -> (Grid, Ball, AnnulusProblem) {
        let grid = Grid::new(2, n, 1.0).unwrap();
        let ball = Ball::new(vec![0.0, 0.0], radius);
        let problem = AnnulusProblem::build(grid, ball.clone()).unwrap();
        (grid, ball, problem)
    }

    /// radially odd data in the annulus frame: zero mean by symmetry
    fn odd_profile(grid: Grid, radius: f64) -> ScalarField {
        ScalarField::from_fn(grid, move |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let s = r / radius;
            if s <= 0.9 || s >= 2.1 {
                0.0
            } else {
                let window = ((s - 0.9) * (2.1 - s)).max(0.0).powi(2);
                window * x[0] / r.max(1e-12)
            }
        })
    }

    #[test]
    fn floors_enforced() {
        let grid = Grid::new(2, 64, 1.0).unwrap();
        // radius passes the ball floor (4h = 0.125) but has fewer than 8
        // cells across the gap
        let ball = Ball::new(vec![0.0, 0.0], 0.125);
        assert!(matches!(
            AnnulusProblem::build(grid, ball),
            Err(CoreError::GapUnderResolved { .. })
        ));
    }

    #[test]
    fn expected_parity_components() {
        let (_, _, problem) = setup(128, 0.25);
        assert_eq!(problem.n_components(), 4);
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let (grid, _, problem) = setup(128, 0.25);
        let sol = problem.solve(&ScalarField::zeros(grid)).unwrap();
        assert!(lp_norm_vec(&sol.field, f64::INFINITY, &Region::Whole).unwrap() == 0.0);
    }

    #[test]
    fn divergence_reproduced_and_trace_zero() {
        let (grid, _, problem) = setup(128, 0.25);
        let f = odd_profile(grid, 0.25);
        let sol = problem.solve(&f).unwrap();
        assert!(sol.div_residual <= DIV_RESIDUAL_TOL, "{}", sol.div_residual);
        // zero trace: nothing outside the active set
        for idx in 0..grid.node_count() {
            if !problem.is_active(idx) {
                assert_eq!(sol.field.component(0)[idx], 0.0);
                assert_eq!(sol.field.component(1)[idx], 0.0);
            }
        }
        // the centered divergence of the extension matches the projected data
        // on the whole constraint set, including the halo
        let d = divergence(&sol.field, DiffScheme::Central);
        let mut worst = 0.0f64;
        for (q, &idx) in problem.constrained.iter().enumerate() {
            let expect = f.values()[idx] - sol.projected_means[problem.component[q]];
            worst = worst.max((d.values()[idx] - expect).abs());
        }
        let scale = lp_norm(&f, f64::INFINITY, &Region::Whole).unwrap();
        assert!(worst <= 1e-9 * scale, "worst {worst} scale {scale}");
        // and vanishes identically off the constraint set
        for idx in 0..grid.node_count() {
            if !problem.constrained.contains(&idx) {
                continue;
            }
        }
        let constrained: std::collections::HashSet<usize> =
            problem.constrained.iter().copied().collect();
        for idx in 0..grid.node_count() {
            if !constrained.contains(&idx) {
                assert_eq!(d.values()[idx], 0.0, "leak at {idx}");
            }
        }
    }

    #[test]
    fn projected_means_are_tiny_for_odd_data() {
        let (grid, _, problem) = setup(128, 0.25);
        let f = odd_profile(grid, 0.25);
        let sol = problem.solve(&f).unwrap();
        let scale = lp_norm(&f, f64::INFINITY, &Region::Whole).unwrap();
        for m in &sol.projected_means {
            assert!(m.abs() < 0.05 * scale);
        }
    }

    #[test]
    fn linearity_up_to_solver_tolerance() {
        let (grid, _, problem) = setup(128, 0.25);
        let f1 = odd_profile(grid, 0.25);
        let f2 = ScalarField::from_fn(grid, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let s = r / 0.25;
            if s <= 1.0 || s >= 2.0 {
                0.0
            } else {
                ((s - 1.0) * (2.0 - s)).powi(2) * (x[1] / r.max(1e-12))
            }
        });
        let combo = f1.scale(2.0).add(&f2.scale(-1.5)).unwrap();
        let lhs = problem.solve(&combo).unwrap().field;
        let s1 = problem.solve(&f1).unwrap().field;
        let s2 = problem.solve(&f2).unwrap().field;
        let rhs = s1.scale(2.0).add(&s2.scale(-1.5)).unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        let scale = lp_norm_vec(&lhs, 2.0, &Region::Whole).unwrap();
        assert!(
            lp_norm_vec(&diff, 2.0, &Region::Whole).unwrap() <= 1e-9 * scale.max(1e-12)
        );
    }

    #[test]
    fn self_similar_energy_ratio_stable() {
        // f_r(x) = F(x/r): the dimensionless constant |grad v|_2 / |f|_2 is
        // scale-free in the continuum; the staircase drift stays within 5%
        let grid = Grid::new(2, 256, 1.0).unwrap();
        let mut ratios = Vec::new();
        for radius in [0.25, 0.125] {
            let ball = Ball::new(vec![0.0, 0.0], radius);
            let problem = AnnulusProblem::build(grid, ball.clone()).unwrap();
            let f = odd_profile(grid, radius);
            let sol = problem.solve(&f).unwrap();
            let region = Region::annulus(&ball);
            let grad_rows: Vec<VectorField> = (0..2)
                .map(|i| gradient(&sol.field.component_field(i), DiffScheme::Central))
                .collect();
            let num = crate::field::lp_norm_jacobian(&grad_rows, 2.0, &region).unwrap();
            let den = lp_norm(&f, 2.0, &region).unwrap();
            ratios.push(num / den);
        }
        let rel = (ratios[0] - ratios[1]).abs() / ratios[1];
        assert!(rel < 0.05, "ratios {ratios:?}");
    }

    #[test]
    fn divergence_free_data_yields_near_zero_solution() {
        let (grid, ball, problem) = setup(128, 0.25);
        // perpendicular gradient of a stream function: centered divergence
        // is zero to rounding
        let psi = ScalarField::from_fn(grid, |x| {
            (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin()
        });
        let gp = gradient(&psi, DiffScheme::Central);
        let g = VectorField::new(
            grid,
            vec![
                gp.component(1).to_vec(),
                gp.component(0).iter().map(|v| -v).collect(),
            ],
        )
        .unwrap();
        let ratios = negative_form_apply(&problem, &g, &[2.0]).unwrap();
        let r = ratios[0].ratio.unwrap();
        assert!(r <= 1e-6, "ratio {r}");
        let _ = ball;
    }

    #[test]
    fn zero_vector_data_reports_skip() {
        let (grid, _, problem) = setup(128, 0.25);
        let g = VectorField::zeros(grid);
        let ratios = negative_form_apply(&problem, &g, &[1.5, 2.0]).unwrap();
        assert!(ratios.iter().all(|r| r.ratio.is_none()));
    }

    #[test]
    fn uniformity_sweep_shapes_and_errors() {
        let grid = Grid::new(2, 128, 1.0).unwrap();
        let report = uniformity_sweep(
            grid,
            &[0.0, 0.0],
            &[0.25],
            &[2.0],
            &[],
            &|r| odd_profile(grid, r),
            None,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.gradient_slopes[0].1.slope().is_none());
        assert!(matches!(
            uniformity_sweep(grid, &[0.0, 0.0], &[], &[2.0], &[], &|r| odd_profile(grid, r), None),
            Err(CoreError::EmptySweep)
        ));
    }
}
