//! Uniform periodic grids on `[-pi, pi)^d`, Fourier-diagonal operators and
//! rectangle-rule quadrature.
//!
//! Fields are stored row-major with axis 0 varying slowest. Transforms are
//! full complex FFTs applied axis by axis; plans are built once per grid and
//! shared immutably between clones, so every operation here can be called
//! from several threads at once.
//!
//! Odd-order derivatives drop the Nyquist mode (its symbol `i k` would make a
//! real field complex). Even-order symbols such as the Laplacian keep it.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    modes: Vec<usize>,
    len: usize,
    cell_volume: f64,
    dealias: bool,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

/// Uniform periodic grid on `[-pi, pi)^d` with `d` in `1..=3`.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl Grid {
    pub fn new(modes: &[usize]) -> Result<Self> {
        if modes.is_empty() || modes.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {}",
                modes.len()
            )));
        }
        for &n in modes {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "point counts must be even and >= 4, got {n}"
                )));
            }
        }
        let mut planner = FftPlanner::new();
        let forward = modes.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = modes.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let cell_volume = modes.iter().map(|&n| 2.0 * PI / n as f64).product();
        Ok(Self {
            inner: Arc::new(GridInner {
                modes: modes.to_vec(),
                len: modes.iter().product(),
                cell_volume,
                dealias: false,
                forward,
                inverse,
            }),
        })
    }

    /// Square/cubic grid with `n` points per direction.
    pub fn uniform(dims: usize, n: usize) -> Result<Self> {
        Self::new(&vec![n; dims])
    }

    /// Copy of this grid with 2/3-rule truncation of nonlinear terms switched on or off.
    pub fn with_dealiasing(&self, on: bool) -> Self {
        let g = &self.inner;
        Self {
            inner: Arc::new(GridInner {
                modes: g.modes.clone(),
                len: g.len,
                cell_volume: g.cell_volume,
                dealias: on,
                forward: g.forward.clone(),
                inverse: g.inverse.clone(),
            }),
        }
    }

    pub fn dims(&self) -> usize {
        self.inner.modes.len()
    }

    pub fn modes(&self) -> &[usize] {
        &self.inner.modes
    }

    /// Total number of grid points (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        self.inner.len == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * PI / self.inner.modes[axis] as f64
    }

    /// Product of the spacings, the rectangle-rule weight.
    pub fn cell_volume(&self) -> f64 {
        self.inner.cell_volume
    }

    /// `(2 pi)^d`.
    pub fn domain_volume(&self) -> f64 {
        (2.0 * PI).powi(self.dims() as i32)
    }

    pub fn dealiasing(&self) -> bool {
        self.inner.dealias
    }

    fn strides(&self) -> [usize; 3] {
        let m = &self.inner.modes;
        let mut s = [1usize; 3];
        for a in (0..m.len()).rev() {
            s[a] = if a + 1 < m.len() {
                s[a + 1] * m[a + 1]
            } else {
                1
            };
        }
        s
    }

    /// Multi-index of flat position `idx`.
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let s = self.strides();
        let mut out = [0usize; 3];
        let mut rem = idx;
        for a in 0..self.dims() {
            out[a] = rem / s[a];
            rem %= s[a];
        }
        out
    }

    /// Coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let i = self.unravel(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dims() {
            x[a] = -PI + i[a] as f64 * self.spacing(a);
        }
        x
    }

    /// Signed integer wavenumber in `{-N/2, ..., N/2 - 1}` for index `j` on `axis`.
    pub fn wavenumber(&self, axis: usize, j: usize) -> i64 {
        let n = self.inner.modes[axis];
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Wavenumber vector of flat mode index `idx`.
    pub fn mode(&self, idx: usize) -> Vec<i64> {
        let i = self.unravel(idx);
        (0..self.dims()).map(|a| self.wavenumber(a, i[a])).collect()
    }

    fn is_nyquist(&self, axis: usize, j: usize) -> bool {
        j == self.inner.modes[axis] / 2
    }

    /// Evaluate `f` on every mode. `f` receives the wavenumber vector
    /// (padded with zeros) and a per-axis Nyquist flag.
    pub(crate) fn map_modes<T>(&self, mut f: impl FnMut([f64; 3], [bool; 3]) -> T) -> Vec<T> {
        let d = self.dims();
        (0..self.len())
            .map(|idx| {
                let i = self.unravel(idx);
                let mut k = [0.0; 3];
                let mut nyq = [false; 3];
                for a in 0..d {
                    k[a] = self.wavenumber(a, i[a]) as f64;
                    nyq[a] = self.is_nyquist(a, i[a]);
                }
                f(k, nyq)
            })
            .collect()
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let g = &self.inner;
        let strides = self.strides();
        for axis in 0..self.dims() {
            let n = g.modes[axis];
            let stride = strides[axis];
            let plan = if inverse {
                &g.inverse[axis]
            } else {
                &g.forward[axis]
            };
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let mut line = vec![Complex64::default(); n];
            let block = n * stride;
            for outer in (0..g.len).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / g.len as f64;
            data.iter_mut().for_each(|v| *v *= scale);
        }
    }

    fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.modes == other.inner.modes && self.inner.dealias == other.inner.dealias)
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("modes", &self.inner.modes)
            .field("dealias", &self.inner.dealias)
            .finish()
    }
}

fn check_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "{:?} vs {:?}",
            a.modes(),
            b.modes()
        )))
    }
}

/// Real scalar field sampled on a [`Grid`].
#[derive(Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl fmt::Debug for RealField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealField")
            .field("grid", &self.grid)
            .field("len", &self.values.len())
            .finish()
    }
}

impl RealField {
    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::FieldLength {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Sample `f(x)` at every grid point; unused coordinates are zero.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
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

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(self.zip_map_unchecked(other, f))
    }

    pub(crate) fn zip_map_unchecked(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(self.grid == other.grid);
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.zip_map_unchecked(other, |x, y| a * x + b * y)
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert!(self.grid == other.grid);
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Forward DFT (unnormalized).
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.grid.transform(&mut data, false);
        data
    }

    /// Inverse DFT of `spec`, keeping the real part. Fails if the imaginary
    /// residue exceeds `1e-10` of the field magnitude.
    pub fn from_spectrum(grid: &Grid, spec: Vec<Complex64>) -> Result<Self> {
        let (field, residue, scale) = Self::inverse_parts(grid, spec);
        if residue > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonRealResult { residue });
        }
        Ok(field)
    }

    pub(crate) fn from_spectrum_unchecked(grid: &Grid, spec: Vec<Complex64>) -> Self {
        let (field, _residue, _scale) = Self::inverse_parts(grid, spec);
        debug_assert!(
            _residue <= 1e-8 * _scale.max(1e-300),
            "imaginary residue {_residue:e} vs {_scale:e}"
        );
        field
    }

    fn inverse_parts(grid: &Grid, mut spec: Vec<Complex64>) -> (Self, f64, f64) {
        assert_eq!(spec.len(), grid.len());
        grid.transform(&mut spec, true);
        let mut residue = 0.0f64;
        let mut scale = 0.0f64;
        let values = spec
            .iter()
            .map(|c| {
                residue = residue.max(c.im.abs());
                scale = scale.max(c.re.abs());
                c.re
            })
            .collect();
        (
            Self {
                grid: grid.clone(),
                values,
            },
            residue,
            scale,
        )
    }

    /// Zero every mode outside the central 2/3 of each axis when the grid
    /// has dealiasing enabled; no-op otherwise.
    pub fn dealias_if_enabled(&mut self) {
        if !self.grid.dealiasing() {
            return;
        }
        let grid = self.grid.clone();
        let mut spec = self.spectrum();
        let modes = grid.modes().to_vec();
        let keep = grid.map_modes(|k, _| {
            k.iter()
                .zip(&modes)
                .all(|(&kk, &n)| 3.0 * kk.abs() < n as f64)
        });
        for (s, k) in spec.iter_mut().zip(keep) {
            if !k {
                *s = Complex64::default();
            }
        }
        *self = Self::from_spectrum_unchecked(&grid, spec);
    }
}

/// Constant-coefficient operator that is diagonal in Fourier space.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralOperator {
    grid: Grid,
    symbol: Vec<Complex64>,
}

impl SpectralOperator {
    pub fn from_symbol(grid: &Grid, symbol: Vec<Complex64>) -> Result<Self> {
        if symbol.len() != grid.len() {
            return Err(Error::FieldLength {
                expected: grid.len(),
                got: symbol.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            symbol,
        })
    }

    /// Real symbol `f(|k|^2)` for isotropic operators.
    pub fn isotropic(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let d = grid.dims();
        let symbol = grid.map_modes(|k, _| {
            let k2: f64 = k[..d].iter().map(|v| v * v).sum();
            Complex64::new(f(k2), 0.0)
        });
        Self {
            grid: grid.clone(),
            symbol,
        }
    }

    pub fn identity(grid: &Grid) -> Self {
        Self::isotropic(grid, |_| 1.0)
    }

    pub fn laplacian(grid: &Grid) -> Self {
        Self::isotropic(grid, |k2| -k2)
    }

    pub fn bilaplacian(grid: &Grid) -> Self {
        Self::isotropic(grid, |k2| k2 * k2)
    }

    /// `a I + b Laplacian + c Laplacian^2`.
    pub fn const_coeff(grid: &Grid, a: f64, b: f64, c: f64) -> Self {
        Self::isotropic(grid, |k2| a - b * k2 + c * k2 * k2)
    }

    /// Spectral first derivative along `axis`, Nyquist mode removed.
    pub fn derivative(grid: &Grid, axis: usize) -> Self {
        let symbol = grid.map_modes(|k, nyq| {
            if nyq[axis] {
                Complex64::default()
            } else {
                Complex64::new(0.0, k[axis])
            }
        });
        Self {
            grid: grid.clone(),
            symbol,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            symbol: self.symbol.iter().map(|v| v * s).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            symbol: self
                .symbol
                .iter()
                .zip(&other.symbol)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Operator product (symbols multiply).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            symbol: self
                .symbol
                .iter()
                .zip(&other.symbol)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// True when the symbol is real and nonnegative on every mode.
    pub fn is_nonnegative(&self) -> bool {
        self.symbol
            .iter()
            .all(|s| s.im.abs() <= 1e-14 * s.re.abs().max(1.0) && s.re >= 0.0)
    }

    pub fn apply(&self, f: &RealField) -> Result<RealField> {
        check_grid(&self.grid, f.grid())?;
        let mut spec = f.spectrum();
        self.apply_spectrum(&mut spec);
        RealField::from_spectrum(&self.grid, spec)
    }

    pub(crate) fn apply_spectrum(&self, spec: &mut [Complex64]) {
        for (s, m) in spec.iter_mut().zip(&self.symbol) {
            *s *= m;
        }
    }

    /// Solve `op u = rhs`. Modes where the symbol vanishes are accepted only
    /// if the right-hand side has no content there (the solution mode is then 0).
    pub fn solve(&self, rhs: &RealField) -> Result<RealField> {
        check_grid(&self.grid, rhs.grid())?;
        let mut spec = rhs.spectrum();
        self.solve_spectrum(&mut spec)?;
        Ok(RealField::from_spectrum_unchecked(&self.grid, spec))
    }

    pub(crate) fn solve_spectrum(&self, spec: &mut [Complex64]) -> Result<()> {
        let smax = self.symbol.iter().fold(0.0f64, |m, s| m.max(s.norm()));
        let rmax = spec.iter().fold(0.0f64, |m, s| m.max(s.norm()));
        let tiny = 1e-14 * smax.max(f64::MIN_POSITIVE);
        for (idx, (s, m)) in spec.iter_mut().zip(&self.symbol).enumerate() {
            if m.norm() <= tiny {
                if s.norm() > 1e-14 * rmax {
                    return Err(Error::SingularOperator {
                        mode: self.grid.mode(idx),
                        symbol: m.norm(),
                    });
                }
                *s = Complex64::default();
            } else {
                *s /= m;
            }
        }
        Ok(())
    }

    /// `(op f, f)` evaluated in Fourier space (exact discrete quadratic form).
    pub fn quadratic_form(&self, f: &RealField) -> Result<f64> {
        check_grid(&self.grid, f.grid())?;
        let spec = f.spectrum();
        Ok(self.quadratic_form_spectrum(&spec))
    }

    pub(crate) fn quadratic_form_spectrum(&self, spec: &[Complex64]) -> f64 {
        let s: f64 = spec
            .iter()
            .zip(&self.symbol)
            .map(|(c, m)| m.re * c.norm_sqr())
            .sum();
        s * self.grid.cell_volume() / self.grid.len() as f64
    }
}

/// `op(f)`, realized as inverse-transform(symbol * transform(f)).
pub fn apply_operator(op: &SpectralOperator, f: &RealField) -> Result<RealField> {
    op.apply(f)
}

/// Rectangle-rule integral over the periodic box.
pub fn integrate(f: &RealField) -> f64 {
    f.grid().cell_volume() * f.sum()
}

/// Discrete L2 inner product.
pub fn inner(f: &RealField, g: &RealField) -> Result<f64> {
    check_grid(f.grid(), g.grid())?;
    Ok(inner_unchecked(f, g))
}

pub(crate) fn inner_unchecked(f: &RealField, g: &RealField) -> f64 {
    debug_assert!(f.grid() == g.grid());
    let s: f64 = f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum();
    s * f.grid().cell_volume()
}

/// Solve `(a I + b Laplacian + c Laplacian^2) u = rhs` exactly mode by mode.
pub fn solve_const_coeff(a: f64, b: f64, c: f64, rhs: &RealField) -> Result<RealField> {
    SpectralOperator::const_coeff(rhs.grid(), a, b, c).solve(rhs)
}

/// Spectral gradient, one field per axis.
pub fn gradient(f: &RealField) -> Vec<RealField> {
    let grid = f.grid();
    let spec = f.spectrum();
    (0..grid.dims())
        .map(|axis| {
            let mut s = spec.clone();
            SpectralOperator::derivative(grid, axis).apply_spectrum(&mut s);
            RealField::from_spectrum_unchecked(grid, s)
        })
        .collect()
}

/// Spectral divergence of a vector field given per axis.
pub fn divergence(components: &[RealField]) -> Result<RealField> {
    let grid = components
        .first()
        .ok_or_else(|| Error::InvalidState("divergence of an empty vector field".into()))?
        .grid()
        .clone();
    if components.len() != grid.dims() {
        return Err(Error::GridMismatch(format!(
            "{} components for a {}-d grid",
            components.len(),
            grid.dims()
        )));
    }
    let mut acc = vec![Complex64::default(); grid.len()];
    for (axis, c) in components.iter().enumerate() {
        check_grid(&grid, c.grid())?;
        let mut s = c.spectrum();
        SpectralOperator::derivative(&grid, axis).apply_spectrum(&mut s);
        for (a, v) in acc.iter_mut().zip(s) {
            *a += v;
        }
    }
    Ok(RealField::from_spectrum_unchecked(&grid, acc))
}

/// `div(grad f)`: the Laplacian built from the Nyquist-free first derivatives.
/// It is the exact discrete adjoint pairing for energies written with `|grad f|^2`.
pub fn div_grad(f: &RealField) -> RealField {
    let grid = f.grid();
    let d = grid.dims();
    let symbol = grid.map_modes(|k, nyq| {
        let s: f64 = (0..d).filter(|&a| !nyq[a]).map(|a| k[a] * k[a]).sum();
        Complex64::new(-s, 0.0)
    });
    let mut spec = f.spectrum();
    for (c, m) in spec.iter_mut().zip(symbol) {
        *c *= m;
    }
    RealField::from_spectrum_unchecked(grid, spec)
}

/// Pointwise `sum_i (d_i f)^2`.
pub fn gradient_squared(f: &RealField) -> RealField {
    let grads = gradient(f);
    let mut out = RealField::zeros(f.grid());
    for g in &grads {
        for (o, v) in out.values_mut().iter_mut().zip(g.values()) {
            *o += v * v;
        }
    }
    out
}
