//! Strip geometry, cosine-sector field representation and symmetry operations.
//!
//! A field on `[−L, L] × (0, d)` is `Ψ(x, y) = Σ_{j=0}^{K} ψ_j(x) cos(πjy/d)`.
//! The symmetry class used throughout keeps `Re ψ_j` odd and `Im ψ_j` even in `x`.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform grid on `[−L, L]` with an odd number of nodes, so `x = 0` is a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub half_length: f64,
    pub nx: usize,
}

impl XGrid {
    pub fn new(half_length: f64, nx: usize) -> Result<Self> {
        if nx < 5 || nx.is_multiple_of(2) {
            return Err(Error::Domain(format!("nx must be odd and at least 5, got {nx}")));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::Domain(format!("half_length must be positive, got {half_length}")));
        }
        Ok(Self { half_length, nx })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_length / (self.nx - 1) as f64
    }

    /// Index of the node `x = 0`.
    pub fn center(&self) -> usize {
        (self.nx - 1) / 2
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weights; these make the Neumann second-difference matrix symmetric.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.nx).map(|i| if i == 0 || i + 1 == self.nx { 0.5 * h } else { h }).collect()
    }

    /// Composite Simpson weights (the interval count `nx − 1` is even).
    pub fn simpson_weights(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.nx)
            .map(|i| {
                if i == 0 || i + 1 == self.nx {
                    h / 3.0
                } else if i % 2 == 1 {
                    4.0 * h / 3.0
                } else {
                    2.0 * h / 3.0
                }
            })
            .collect()
    }

    pub fn simpson(&self, f: &[f64]) -> f64 {
        self.simpson_weights().iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        self.trapezoid_weights().iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Samples `f` on the grid.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.nx).map(|i| f(self.x(i))).collect()
    }

    /// Refined grid with half the spacing.
    pub fn refined(&self) -> Self {
        Self { half_length: self.half_length, nx: 2 * self.nx - 1 }
    }
}

/// Truncated strip `[−L, L] × (0, d)` with `K` retained cosine modes and
/// `ny_quad` transverse midpoint quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripDomain {
    pub grid: XGrid,
    pub width: f64,
    pub n_modes: usize,
    pub ny_quad: usize,
}

impl StripDomain {
    /// Validated domain with the default quadrature size `4K`.
    pub fn new(half_length: f64, width: f64, nx: usize, n_modes: usize) -> Result<Self> {
        Self::with_quadrature(half_length, width, nx, n_modes, 4 * n_modes)
    }

    pub fn with_quadrature(half_length: f64, width: f64, nx: usize, n_modes: usize, ny_quad: usize) -> Result<Self> {
        if nx.is_multiple_of(2) {
            return Err(Error::Domain(format!("nx must be odd, got {nx}")));
        }
        if n_modes < 1 {
            return Err(Error::Domain("n_modes must be at least 1".into()));
        }
        if half_length < 10.0 {
            return Err(Error::Domain(format!("half_length must be at least 10, got {half_length}")));
        }
        if ny_quad < 4 * n_modes {
            return Err(Error::Domain(format!("ny_quad = {ny_quad} is below 4·n_modes = {}", 4 * n_modes)));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Domain(format!("width must be positive, got {width}")));
        }
        let grid = XGrid::new(half_length, nx)?;
        Ok(Self { grid, width, n_modes, ny_quad })
    }

    /// Same discretization at another width.
    pub fn with_width(&self, width: f64) -> Result<Self> {
        Self::with_quadrature(self.grid.half_length, width, self.grid.nx, self.n_modes, self.ny_quad)
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    /// Transverse wavenumber `πj/d` of sector `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        PI * j as f64 / self.width
    }

    /// Midpoint quadrature nodes `y_q = (q + ½) d / N`.
    pub fn quadrature_points(&self) -> Vec<f64> {
        let n = self.ny_quad as f64;
        (0..self.ny_quad).map(|q| (q as f64 + 0.5) * self.width / n).collect()
    }

    /// `cos(πj y_q / d)` for every node `q` and sector `j`, row-major in `q`.
    pub fn cosine_table(&self) -> CosineTable {
        CosineTable::new(self.n_modes, self.ny_quad)
    }
}

/// Cosine values on the midpoint nodes; independent of the width.
#[derive(Debug, Clone)]
pub struct CosineTable {
    pub n_modes: usize,
    pub ny: usize,
    values: Vec<f64>,
}

impl CosineTable {
    pub fn new(n_modes: usize, ny: usize) -> Self {
        let mut values = Vec::with_capacity(ny * (n_modes + 1));
        for q in 0..ny {
            let t = PI * (q as f64 + 0.5) / ny as f64;
            for j in 0..=n_modes {
                values.push((j as f64 * t).cos());
            }
        }
        Self { n_modes, ny, values }
    }

    #[inline]
    pub fn get(&self, q: usize, j: usize) -> f64 {
        self.values[q * (self.n_modes + 1) + j]
    }

    /// Projection weight `c_j / N` with `c_0 = 1`, `c_j = 2`.
    #[inline]
    pub fn projection_weight(&self, j: usize) -> f64 {
        if j == 0 {
            1.0 / self.ny as f64
        } else {
            2.0 / self.ny as f64
        }
    }
}

/// Cosine-sector field: `coeffs[j][i] = ψ_j(x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorField {
    pub domain: StripDomain,
    pub coeffs: Vec<Vec<Complex64>>,
}

/// Physical samples `values[(i, q)] = Ψ(x_i, ys[q])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalGrid {
    pub ys: Vec<f64>,
    pub values: Array2<Complex64>,
}

impl SectorField {
    pub fn zeros(domain: StripDomain) -> Self {
        let coeffs = vec![vec![Complex64::new(0.0, 0.0); domain.nx()]; domain.n_modes + 1];
        Self { domain, coeffs }
    }

    /// Field whose only sector is `ψ_0 = S₀`.
    pub fn soliton(domain: StripDomain) -> Self {
        let mut f = Self::zeros(domain);
        for (i, c) in f.coeffs[0].iter_mut().enumerate() {
            *c = Complex64::new(crate::analytic::soliton(domain.grid.x(i)), 0.0);
        }
        f
    }

    /// Constant field `Ψ ≡ c`.
    pub fn constant(domain: StripDomain, c: Complex64) -> Self {
        let mut f = Self::zeros(domain);
        f.coeffs[0].iter_mut().for_each(|v| *v = c);
        f
    }

    pub fn n_modes(&self) -> usize {
        self.domain.n_modes
    }

    pub fn width(&self) -> f64 {
        self.domain.width
    }

    /// Same coefficients viewed at another width (used along continuation).
    pub fn with_width(&self, width: f64) -> Result<Self> {
        Ok(Self { domain: self.domain.with_width(width)?, coeffs: self.coeffs.clone() })
    }

    /// Samples at the transverse quadrature nodes.
    pub fn to_quadrature(&self) -> PhysicalGrid {
        let table = self.domain.cosine_table();
        let nx = self.domain.nx();
        let mut values = Array2::zeros((nx, table.ny));
        for i in 0..nx {
            for q in 0..table.ny {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..=self.n_modes() {
                    s += self.coeffs[j][i] * table.get(q, j);
                }
                values[(i, q)] = s;
            }
        }
        PhysicalGrid { ys: self.domain.quadrature_points(), values }
    }

    /// Direct evaluation of the cosine series on `y_points ≥ 2` uniform points over `[0, d]`.
    pub fn to_physical(&self, y_points: usize) -> PhysicalGrid {
        let y_points = y_points.max(2);
        let d = self.width();
        let ys: Vec<f64> = (0..y_points).map(|q| d * q as f64 / (y_points - 1) as f64).collect();
        self.evaluate_rows(&ys)
    }

    /// Evaluation of the series at arbitrary ordinates.
    pub fn evaluate_rows(&self, ys: &[f64]) -> PhysicalGrid {
        let nx = self.domain.nx();
        let cos: Vec<Vec<f64>> =
            ys.iter().map(|&y| (0..=self.n_modes()).map(|j| (self.domain.wavenumber(j) * y).cos()).collect()).collect();
        let mut values = Array2::zeros((nx, ys.len()));
        for i in 0..nx {
            for (q, c) in cos.iter().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..=self.n_modes() {
                    s += self.coeffs[j][i] * c[j];
                }
                values[(i, q)] = s;
            }
        }
        PhysicalGrid { ys: ys.to_vec(), values }
    }

    /// Cosine coefficients from samples on the quadrature nodes.
    pub fn from_physical(grid: &PhysicalGrid, domain: StripDomain) -> Result<Self> {
        let nodes = domain.quadrature_points();
        let matches = grid.ys.len() == nodes.len()
            && grid.ys.iter().zip(&nodes).all(|(a, b)| (a - b).abs() <= 1e-12 * domain.width.max(1.0));
        if !matches || grid.values.nrows() != domain.nx() {
            return Err(Error::InvalidArgument("grid is not sampled on the quadrature nodes".into()));
        }
        let table = domain.cosine_table();
        let mut f = Self::zeros(domain);
        for j in 0..=domain.n_modes {
            let w = table.projection_weight(j);
            for i in 0..domain.nx() {
                let mut s = Complex64::new(0.0, 0.0);
                for q in 0..table.ny {
                    s += grid.values[(i, q)] * table.get(q, j);
                }
                f.coeffs[j][i] = s * w;
            }
        }
        Ok(f)
    }

    /// Sector coefficients of `F(i, Ψ(x_i, y))`, evaluated on the quadrature
    /// nodes and projected back (exact for band-limited polynomial `F`).
    pub fn map_pointwise(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let table = self.domain.cosine_table();
        let nx = self.domain.nx();
        let k = self.n_modes();
        let mut out = Self::zeros(self.domain);
        let mut vals = vec![Complex64::new(0.0, 0.0); table.ny];
        for i in 0..nx {
            for (q, v) in vals.iter_mut().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..=k {
                    s += self.coeffs[j][i] * table.get(q, j);
                }
                *v = f(i, s);
            }
            for j in 0..=k {
                let mut s = Complex64::new(0.0, 0.0);
                for (q, v) in vals.iter().enumerate() {
                    s += v * table.get(q, j);
                }
                out.coeffs[j][i] = s * table.projection_weight(j);
            }
        }
        out
    }

    /// Projection onto odd real part / even imaginary part in every sector.
    pub fn enforce_symmetry(&self) -> Self {
        let nx = self.domain.nx();
        let mut out = self.clone();
        for (src, dst) in self.coeffs.iter().zip(out.coeffs.iter_mut()) {
            for i in 0..nx {
                let m = nx - 1 - i;
                dst[i] = Complex64::new(0.5 * (src[i].re - src[m].re), 0.5 * (src[i].im + src[m].im));
            }
        }
        out
    }

    /// Largest deviation from the symmetry class.
    pub fn symmetry_defect(&self) -> f64 {
        let nx = self.domain.nx();
        self.coeffs
            .iter()
            .flat_map(|c| (0..nx).map(move |i| (i, c)))
            .map(|(i, c)| {
                let m = nx - 1 - i;
                (c[i].re + c[m].re).abs().max((c[i].im - c[m].im).abs())
            })
            .fold(0.0, f64::max)
    }

    /// `RΨ(x, y) = conj Ψ(x, d − y)`, i.e. `ψ_j ← (−1)^j conj ψ_j`.
    pub fn reflect_conjugate(&self) -> Self {
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            c.iter_mut().for_each(|v| *v = v.conj() * s);
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().flatten().for_each(|v| *v = v.conj());
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    /// `self + s·other` (same discretization required).
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.coeffs.len(), other.coeffs.len());
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * s;
            }
        }
        out
    }

    /// Largest coefficient difference.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// Maximum of `|Ψ − Φ|` over the x grid and `y_points` uniform ordinates.
    pub fn max_physical_diff(&self, other: &Self, y_points: usize) -> f64 {
        let diff = self.axpy(-1.0, other);
        diff.to_physical(y_points).values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `∫∫ |Ψ|²` over `[−L, L] × (0, d)` by Parseval with trapezoid weights in `x`.
    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.domain.grid.trapezoid_weights();
        let d = self.width();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let s = if j == 0 { d } else { 0.5 * d };
                s * c.iter().zip(&w).map(|(v, wi)| wi * v.norm_sqr()).sum::<f64>()
            })
            .sum()
    }

    /// `Σ_j s_j ∫|ψ_j|²` restricted to sector `j` (sector energy share).
    pub fn sector_norm_sq(&self, j: usize) -> f64 {
        let w = self.domain.grid.trapezoid_weights();
        let s = if j == 0 { self.width() } else { 0.5 * self.width() };
        s * self.coeffs[j].iter().zip(&w).map(|(v, wi)| wi * v.norm_sqr()).sum::<f64>()
    }

    /// Point evaluation with cubic interpolation in `x` and the exact series in `y`.
    /// Also returns `∂ₓΨ` and `∂ᵧΨ`.
    pub fn evaluate_at(&self, x: f64, y: f64) -> (Complex64, Complex64, Complex64) {
        let g = self.domain.grid;
        let h = g.h();
        let t = ((x + g.half_length) / h).clamp(0.0, (g.nx - 1) as f64);
        let i1 = (t.floor() as usize).min(g.nx - 2);
        let s = t - i1 as f64;
        // Catmull-Rom weights and derivatives for nodes i1-1, i1, i1+1, i1+2.
        let w = [
            0.5 * (-s * s * s + 2.0 * s * s - s),
            0.5 * (3.0 * s * s * s - 5.0 * s * s + 2.0),
            0.5 * (-3.0 * s * s * s + 4.0 * s * s + s),
            0.5 * (s * s * s - s * s),
        ];
        let dw = [
            0.5 * (-3.0 * s * s + 4.0 * s - 1.0) / h,
            0.5 * (9.0 * s * s - 10.0 * s) / h,
            0.5 * (-9.0 * s * s + 8.0 * s + 1.0) / h,
            0.5 * (3.0 * s * s - 2.0 * s) / h,
        ];
        let idx = |o: usize| -> usize { (i1 + o).saturating_sub(1).min(g.nx - 1) };
        let mut val = Complex64::new(0.0, 0.0);
        let mut dx = Complex64::new(0.0, 0.0);
        let mut dy = Complex64::new(0.0, 0.0);
        for j in 0..=self.n_modes() {
            let kj = self.domain.wavenumber(j);
            let (c, sn) = ((kj * y).cos(), (kj * y).sin());
            let c_j = &self.coeffs[j];
            let mut v = Complex64::new(0.0, 0.0);
            let mut dv = Complex64::new(0.0, 0.0);
            for o in 0..4 {
                v += c_j[idx(o)] * w[o];
                dv += c_j[idx(o)] * dw[o];
            }
            val += v * c;
            dx += dv * c;
            dy -= v * (kj * sn);
        }
        (val, dx, dy)
    }
}
