//! Grids, sampled fields, differential operators and region norms.
//!
//! The computational domain is the periodic box `[-L, L)^d`, `d = 2` or `3`,
//! sampled on `n` equispaced nodes per axis (`n` a power of two). The box
//! stands in for the whole space: every test field is compactly supported
//! with padding from the boundary, so periodicity artifacts stay below the
//! quadrature tolerance of the harness.

use crate::error::{CoreError, Result};
use crate::fft;
use num_complex::Complex;

/// Uniform periodic Cartesian sampling of the box `[-L, L)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_length: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(CoreError::InvalidGrid(format!("dim {dim} not in {{2, 3}}")));
        }
        if n < 32 || !n.is_power_of_two() {
            return Err(CoreError::InvalidGrid(format!(
                "n = {n}; need a power of two >= 32"
            )));
        }
        if !(half_length > 0.0) {
            return Err(CoreError::InvalidGrid(format!(
                "half_length = {half_length}; need > 0"
            )));
        }
        Ok(Grid { dim, n, half_length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn node_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Coordinate of node index `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    /// Multi-index of a flat row-major node index (axis 0 slowest).
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [idx / n, idx % n, 0],
            _ => [idx / (n * n), (idx / n) % n, idx % n],
        }
    }

    pub fn flat_index(&self, mi: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => mi[0] * n + mi[1],
            _ => (mi[0] * n + mi[1]) * n + mi[2],
        }
    }

    /// Node position; unused trailing components are zero.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let mi = self.multi_index(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coord(mi[a]);
        }
        x
    }

    /// Signed Fourier mode along one axis for FFT bin `m`.
    pub fn signed_mode(&self, m: usize) -> i64 {
        if m < self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// True wavenumber `pi * mode / L` of FFT bin `m`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        std::f64::consts::PI * self.signed_mode(m) as f64 / self.half_length
    }

    /// Quadrature weight of one node (midpoint rule cell volume).
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }
}

/// Euclidean distance between `x` and `c`, restricted to the first `dim` axes.
pub(crate) fn dist(x: &[f64; 3], c: &[f64], dim: usize) -> f64 {
    let mut s = 0.0;
    for a in 0..dim {
        let d = x[a] - c[a];
        s += d * d;
    }
    s.sqrt()
}

/// The rigid ball: center and radius, with its resolution and padding floors.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Ball { center, radius }
    }

    /// Checks the resolution floor (`radius >= 4 * spacing`) and that the
    /// dilated ball `B_{2 radius}` sits inside the box with margin `2 radius`.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.center.len() != grid.dim() {
            return Err(CoreError::GridMismatch);
        }
        if self.radius < 4.0 * grid.spacing() {
            return Err(CoreError::UnderResolvedBall {
                radius: self.radius,
                spacing: grid.spacing(),
            });
        }
        for (axis, &c) in self.center.iter().enumerate() {
            if c.abs() > grid.half_length() - 4.0 * self.radius {
                return Err(CoreError::InsufficientPadding { axis });
            }
        }
        Ok(())
    }
}

/// Scheme used by the stencil differential operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffScheme {
    /// Fourier multiplier with true wavenumbers; exact on band-limited fields.
    Spectral,
    /// Second-order centered difference with periodic wrap.
    Central,
}

/// A real scalar sample per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(CoreError::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite("scalar field"));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            values: vec![0.0; grid.node_count()],
            grid,
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|i| {
                let x = grid.position(i);
                f(&x[..grid.dim()])
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(CoreError::GridMismatch);
        }
        Ok(ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `d` real samples per grid node, stored one contiguous array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Grid, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != grid.dim() {
            return Err(CoreError::GridMismatch);
        }
        for c in &comps {
            if c.len() != grid.node_count() {
                return Err(CoreError::GridMismatch);
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::NonFinite("vector field"));
            }
        }
        Ok(VectorField { grid, comps })
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            comps: vec![vec![0.0; grid.node_count()]; grid.dim()],
            grid,
        }
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let grid = *comps
            .first()
            .ok_or(CoreError::GridMismatch)?
            .grid();
        if comps.iter().any(|c| *c.grid() != grid) {
            return Err(CoreError::GridMismatch);
        }
        VectorField::new(grid, comps.into_iter().map(|c| c.values).collect())
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64], usize) -> f64) -> Self {
        let comps = (0..grid.dim())
            .map(|a| {
                (0..grid.node_count())
                    .map(|i| {
                        let x = grid.position(i);
                        f(&x[..grid.dim()], a)
                    })
                    .collect()
            })
            .collect();
        VectorField { grid, comps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, a: usize) -> &[f64] {
        &self.comps[a]
    }

    pub fn component_field(&self, a: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.comps[a].clone(),
        }
    }

    pub fn component_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.comps[a]
    }

    pub fn magnitude(&self, idx: usize) -> f64 {
        let mut s = 0.0;
        for c in &self.comps {
            s += c[idx] * c[idx];
        }
        s.sqrt()
    }

    pub fn scale(&self, a: f64) -> Self {
        VectorField {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|&v| a * v).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(CoreError::GridMismatch);
        }
        Ok(VectorField {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| x + y).collect())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise contraction with a constant vector.
    pub fn dot_const(&self, v: &[f64]) -> ScalarField {
        let mut out = vec![0.0; self.grid.node_count()];
        for (a, comp) in self.comps.iter().enumerate() {
            for (o, &c) in out.iter_mut().zip(comp) {
                *o += v[a] * c;
            }
        }
        ScalarField {
            grid: self.grid,
            values: out,
        }
    }
}

// ---------------------------------------------------------------------------
// Differential operators
// ---------------------------------------------------------------------------

fn spectral_partial(spec: &[Complex<f64>], grid: &Grid, axis: usize) -> Vec<Complex<f64>> {
    let n = grid.n();
    let dim = grid.dim();
    let mut out = vec![Complex::default(); spec.len()];
    for (idx, v) in spec.iter().enumerate() {
        let mi = grid.multi_index(idx);
        let m = mi[axis];
        // odd multiplier: zero the unpaired Nyquist bin to keep real symmetry
        let k = if m == n / 2 { 0.0 } else { grid.wavenumber(m) };
        out[idx] = Complex::new(0.0, k) * v;
    }
    let _ = dim;
    out
}

fn central_partial(values: &[f64], grid: &Grid, axis: usize) -> Vec<f64> {
    let n = grid.n();
    let inv2h = 1.0 / (2.0 * grid.spacing());
    let mut out = vec![0.0; values.len()];
    for idx in 0..values.len() {
        let mut mi = grid.multi_index(idx);
        let orig = mi[axis];
        mi[axis] = (orig + 1) % n;
        let plus = values[grid.flat_index(mi)];
        mi[axis] = (orig + n - 1) % n;
        let minus = values[grid.flat_index(mi)];
        mi[axis] = orig;
        out[idx] = (plus - minus) * inv2h;
    }
    out
}

/// Partial derivative of a scalar field along one axis.
pub fn partial(f: &ScalarField, axis: usize, scheme: DiffScheme) -> ScalarField {
    let grid = *f.grid();
    let values = match scheme {
        DiffScheme::Central => central_partial(f.values(), &grid, axis),
        DiffScheme::Spectral => {
            let spec = fft::forward_real(f.values(), grid.dim(), grid.n());
            let d = spectral_partial(&spec, &grid, axis);
            fft::inverse_to_real(d, grid.dim(), grid.n())
        }
    };
    ScalarField { grid, values }
}

/// Gradient of a scalar field.
pub fn gradient(f: &ScalarField, scheme: DiffScheme) -> VectorField {
    let grid = *f.grid();
    match scheme {
        DiffScheme::Central => {
            let comps = (0..grid.dim())
                .map(|a| central_partial(f.values(), &grid, a))
                .collect();
            VectorField { grid, comps }
        }
        DiffScheme::Spectral => {
            let spec = fft::forward_real(f.values(), grid.dim(), grid.n());
            let comps = (0..grid.dim())
                .map(|a| {
                    let d = spectral_partial(&spec, &grid, a);
                    fft::inverse_to_real(d, grid.dim(), grid.n())
                })
                .collect();
            VectorField { grid, comps }
        }
    }
}

/// Divergence of a vector field.
pub fn divergence(v: &VectorField, scheme: DiffScheme) -> ScalarField {
    let grid = *v.grid();
    let mut out = vec![0.0; grid.node_count()];
    for a in 0..grid.dim() {
        let part = match scheme {
            DiffScheme::Central => central_partial(v.component(a), &grid, a),
            DiffScheme::Spectral => {
                let spec = fft::forward_real(v.component(a), grid.dim(), grid.n());
                let d = spectral_partial(&spec, &grid, a);
                fft::inverse_to_real(d, grid.dim(), grid.n())
            }
        };
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    ScalarField { grid, values: out }
}

/// Laplacian of a scalar field (spectral).
pub fn laplacian_spectral(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let mut spec = fft::forward_real(f.values(), grid.dim(), grid.n());
    for (idx, v) in spec.iter_mut().enumerate() {
        let mi = grid.multi_index(idx);
        let mut k2 = 0.0;
        for a in 0..grid.dim() {
            let k = grid.wavenumber(mi[a]);
            k2 += k * k;
        }
        *v *= -k2;
    }
    let values = fft::inverse_to_real(spec, grid.dim(), grid.n());
    ScalarField { grid, values }
}

/// Jacobian rows `grad v_i` of a vector field.
pub fn jacobian(v: &VectorField, scheme: DiffScheme) -> Vec<VectorField> {
    (0..v.grid().dim())
        .map(|i| gradient(&v.component_field(i), scheme))
        .collect()
}

// ---------------------------------------------------------------------------
// Regions and norms
// ---------------------------------------------------------------------------

/// Integration region for the `L^p` norms.
#[derive(Debug, Clone)]
pub enum Region {
    Whole,
    /// Ball of radius `factor * ball.radius`.
    Ball { ball: Ball, factor: f64 },
    /// Spherical shell with radii `inner * ball.radius` and `outer * ball.radius`.
    Shell { ball: Ball, inner: f64, outer: f64 },
    /// Complement of the ball of radius `factor * ball.radius`.
    Complement { ball: Ball, factor: f64 },
}

impl Region {
    pub fn ball(b: &Ball) -> Self {
        Region::Ball {
            ball: b.clone(),
            factor: 1.0,
        }
    }

    pub fn scaled_ball(b: &Ball, factor: f64) -> Self {
        Region::Ball {
            ball: b.clone(),
            factor,
        }
    }

    /// The annulus between the ball and its dilation by two.
    pub fn annulus(b: &Ball) -> Self {
        Region::Shell {
            ball: b.clone(),
            inner: 1.0,
            outer: 2.0,
        }
    }

    pub fn shell(b: &Ball, inner: f64, outer: f64) -> Self {
        Region::Shell {
            ball: b.clone(),
            inner,
            outer,
        }
    }

    pub fn complement(b: &Ball) -> Self {
        Region::Complement {
            ball: b.clone(),
            factor: 1.0,
        }
    }
}

/// Fraction of the grid cell centred at `x` lying inside the ball
/// `|y - c| <= r`, by `4^d` midpoint subsamples when the cell straddles the
/// boundary and 0/1 otherwise.
fn cell_ball_fraction(x: &[f64; 3], c: &[f64], r: f64, grid: &Grid) -> f64 {
    let h = grid.spacing();
    let dim = grid.dim();
    let half_diag = 0.5 * h * (dim as f64).sqrt();
    let d = dist(x, c, dim);
    if d <= r - half_diag {
        return 1.0;
    }
    if d >= r + half_diag {
        return 0.0;
    }
    // supersample the straddling cell
    let sub = 4usize;
    let sh = h / sub as f64;
    let mut inside = 0usize;
    let mut total = 0usize;
    let mut offs = [0usize; 3];
    loop {
        let mut y = [0.0; 3];
        for a in 0..dim {
            y[a] = x[a] - 0.5 * h + (offs[a] as f64 + 0.5) * sh;
        }
        if dist(&y, c, dim) <= r {
            inside += 1;
        }
        total += 1;
        // odometer over sub^dim subcells
        let mut a = 0;
        loop {
            if a == dim {
                return inside as f64 / total as f64;
            }
            offs[a] += 1;
            if offs[a] < sub {
                break;
            }
            offs[a] = 0;
            a += 1;
        }
    }
}

/// Midpoint quadrature weight of node `idx` in `region`, in volume units.
pub fn region_weight(grid: &Grid, idx: usize, region: &Region) -> f64 {
    let vol = grid.cell_volume();
    match region {
        Region::Whole => vol,
        Region::Ball { ball, factor } => {
            let x = grid.position(idx);
            vol * cell_ball_fraction(&x, &ball.center, factor * ball.radius, grid)
        }
        Region::Complement { ball, factor } => {
            let x = grid.position(idx);
            vol * (1.0 - cell_ball_fraction(&x, &ball.center, factor * ball.radius, grid))
        }
        Region::Shell { ball, inner, outer } => {
            let x = grid.position(idx);
            let fo = cell_ball_fraction(&x, &ball.center, outer * ball.radius, grid);
            let fi = cell_ball_fraction(&x, &ball.center, inner * ball.radius, grid);
            vol * (fo - fi).max(0.0)
        }
    }
}

/// Whether the node center itself lies in the region (used by the sup norm).
fn node_in_region(grid: &Grid, idx: usize, region: &Region) -> bool {
    match region {
        Region::Whole => true,
        Region::Ball { ball, factor } => {
            let x = grid.position(idx);
            dist(&x, &ball.center, grid.dim()) <= factor * ball.radius
        }
        Region::Complement { ball, factor } => {
            let x = grid.position(idx);
            dist(&x, &ball.center, grid.dim()) > factor * ball.radius
        }
        Region::Shell { ball, inner, outer } => {
            let x = grid.position(idx);
            let d = dist(&x, &ball.center, grid.dim());
            d >= inner * ball.radius && d <= outer * ball.radius
        }
    }
}

fn lp_norm_impl(
    grid: &Grid,
    magnitude: impl Fn(usize) -> f64,
    p: f64,
    region: &Region,
) -> Result<f64> {
    if p < 1.0 {
        return Err(CoreError::InvalidExponent(p));
    }
    if p.is_infinite() {
        let mut best: Option<f64> = None;
        for idx in 0..grid.node_count() {
            if node_in_region(grid, idx, region) {
                let m = magnitude(idx).abs();
                best = Some(best.map_or(m, |b: f64| b.max(m)));
            }
        }
        return best.ok_or(CoreError::DegenerateRegion);
    }
    let mut acc = 0.0;
    let mut weight = 0.0;
    for idx in 0..grid.node_count() {
        let w = region_weight(grid, idx, region);
        if w > 0.0 {
            weight += w;
            acc += w * magnitude(idx).abs().powf(p);
        }
    }
    if weight == 0.0 {
        return Err(CoreError::DegenerateRegion);
    }
    Ok(acc.powf(1.0 / p))
}

/// `L^p` norm of a scalar field over a region (`p = f64::INFINITY` for sup).
pub fn lp_norm(f: &ScalarField, p: f64, region: &Region) -> Result<f64> {
    lp_norm_impl(f.grid(), |i| f.values()[i], p, region)
}

/// `L^p` norm of a vector field's pointwise Euclidean magnitude.
pub fn lp_norm_vec(v: &VectorField, p: f64, region: &Region) -> Result<f64> {
    lp_norm_impl(v.grid(), |i| v.magnitude(i), p, region)
}

/// `L^p` norm of the pointwise Frobenius magnitude of a Jacobian.
pub fn lp_norm_jacobian(rows: &[VectorField], p: f64, region: &Region) -> Result<f64> {
    let grid = rows[0].grid();
    lp_norm_impl(
        grid,
        |i| {
            let mut s = 0.0;
            for r in rows {
                for a in 0..grid.dim() {
                    let v = r.component(a)[i];
                    s += v * v;
                }
            }
            s.sqrt()
        },
        p,
        region,
    )
}

/// `W^{1,p}` norm of a vector field: `(|v|_p^p + |grad v|_p^p)^{1/p}` with the
/// centered-difference Jacobian.
pub fn w1p_norm(v: &VectorField, p: f64) -> Result<f64> {
    let rows = jacobian(v, DiffScheme::Central);
    let a = lp_norm_vec(v, p, &Region::Whole)?;
    let b = lp_norm_jacobian(&rows, p, &Region::Whole)?;
    Ok((a.powf(p) + b.powf(p)).powf(1.0 / p))
}
