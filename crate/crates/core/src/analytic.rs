//! Closed-form one-dimensional objects, the `v` boundary-value problem and the
//! expansion coefficients `ω`, `Λ`, `𝓔`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::strip::{SectorField, StripDomain, XGrid};

/// `S₀(x) = tanh(x/√2)`.
pub fn soliton(x: f64) -> f64 {
    (x * FRAC_1_SQRT_2).tanh()
}

/// `S₀′(x) = sech²(x/√2)/√2`.
pub fn soliton_d1(x: f64) -> f64 {
    let c = chi0(x);
    FRAC_1_SQRT_2 * c * c
}

/// `S₀″ = −S₀(1 − S₀²)`.
pub fn soliton_d2(x: f64) -> f64 {
    let s = soliton(x);
    let c = chi0(x);
    -s * c * c
}

/// `χ₀(x) = sech(x/√2)`.
pub fn chi0(x: f64) -> f64 {
    1.0 / (x * FRAC_1_SQRT_2).cosh()
}

/// `χ₀″ = χ₀/2 − χ₀³`.
pub fn chi0_d2(x: f64) -> f64 {
    let c = chi0(x);
    0.5 * c - c * c * c
}

/// Critical width `d_k = √2πk`.
pub fn critical_width(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("critical width needs k ≥ 1".into()));
    }
    Ok(SQRT_2 * PI * k as f64)
}

/// `χ_k = iχ₀(x) cos(πky/d)` as a sector field.
pub fn chi_k_field(domain: StripDomain, k: usize) -> Result<SectorField> {
    if k > domain.n_modes || k == 0 {
        return Err(Error::InvalidArgument(format!("sector {k} is outside 1..={}", domain.n_modes)));
    }
    let mut f = SectorField::zeros(domain);
    for (i, c) in f.coeffs[k].iter_mut().enumerate() {
        *c = Complex64::new(0.0, chi0(domain.grid.x(i)));
    }
    Ok(f)
}

/// `U₀(x) = −x / (2√2 cosh²(x/√2))`.
pub fn u_star(x: f64) -> f64 {
    let c = chi0(x);
    -x * c * c / (2.0 * SQRT_2)
}

/// Analytic second derivative of [`u_star`].
pub fn u_star_d2(x: f64) -> f64 {
    // U₀ = −(x/(2√2)) sech²(a x),  a = 1/√2.
    let a = FRAC_1_SQRT_2;
    let c = chi0(x);
    let t = soliton(x);
    let sech2 = c * c;
    let d1 = -2.0 * a * sech2 * t;
    let d2 = -2.0 * a * a * sech2 * (sech2 - 2.0 * t * t);
    -(2.0 * d1 + x * d2) / (2.0 * SQRT_2)
}

/// Second-order Neumann FD matrix of `−u″ + q(x)u` on the full grid.
pub(crate) fn sturm_liouville(grid: &XGrid, q: impl Fn(f64) -> f64) -> BandMatrix {
    let n = grid.nx;
    let ih2 = 1.0 / (grid.h() * grid.h());
    let mut a = BandMatrix::zeros(n, 1, 1);
    for i in 0..n {
        a.set(i, i, 2.0 * ih2 + q(grid.x(i)));
        if i == 0 {
            a.set(0, 1, -2.0 * ih2);
        } else if i == n - 1 {
            a.set(i, i - 1, -2.0 * ih2);
        } else {
            a.set(i, i - 1, -ih2);
            a.set(i, i + 1, -ih2);
        }
    }
    a
}

/// Solves `−v″ + 4v − 3χ₀²v = −S₀χ₀²` with Neumann ends.
pub fn solve_v(grid: &XGrid) -> Result<Vec<f64>> {
    let a = sturm_liouville(grid, |x| 4.0 - 3.0 * chi0(x).powi(2));
    let rhs = grid.sample(|x| -soliton(x) * chi0(x).powi(2));
    let mut v = a.lu()?.solve(&rhs);
    // Exact oddness is inherited from the data; remove roundoff asymmetry.
    let n = grid.nx;
    for i in 0..n / 2 {
        let odd = 0.5 * (v[i] - v[n - 1 - i]);
        v[i] = odd;
        v[n - 1 - i] = -odd;
    }
    v[grid.center()] = 0.0;
    Ok(v)
}

/// Fourth-order accurate first derivative (second order next to the ends).
fn derivative4(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) / (12.0 * h)
            } else if i == 0 {
                (f[0] * -3.0 + f[1] * 4.0 - f[2]) / (2.0 * h)
            } else if i + 1 == n {
                (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) / (2.0 * h)
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// `‖ψ‖_H = (∫ |ψ′|² + (1 − S₀²)|ψ|²)^{1/2}` with Simpson quadrature.
pub fn h_norm(f: &[Complex64], grid: &XGrid) -> f64 {
    assert_eq!(f.len(), grid.nx);
    let df = derivative4(f, grid.h());
    let vals: Vec<f64> = (0..grid.nx).map(|i| df[i].norm_sqr() + chi0(grid.x(i)).powi(2) * f[i].norm_sqr()).collect();
    grid.simpson(&vals).max(0.0).sqrt()
}

/// `d(f, g) = (‖f − g‖²_H + ‖|g|² − |f|²‖²_{L²})^{1/2}`.
pub fn gl_distance(f: &[Complex64], g: &[Complex64], grid: &XGrid) -> f64 {
    let diff: Vec<Complex64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
    let hn = h_norm(&diff, grid);
    let mass: Vec<f64> = f.iter().zip(g).map(|(a, b)| (b.norm_sqr() - a.norm_sqr()).powi(2)).collect();
    (hn * hn + grid.simpson(&mass)).sqrt()
}

/// Integrals and expansion coefficients at one resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientLevel {
    pub nx: usize,
    pub cross_term: f64,
    pub omega: f64,
    pub omega_reduced: f64,
}

/// Expansion coefficients of the bifurcating branch.
///
/// `omega` is the closed form `(33/4)∫χ₀⁴ + 3∫S₀vχ₀²`, with `lambda_coeff =
/// √(12√2/ω)` and `energy_coeff` from the associated energy formula.
/// `omega_reduced = (15/4)∫χ₀⁴ + 3∫S₀vχ₀²` is what a direct third-order
/// expansion of the bifurcation function gives for `∂³_λ J(d_k, 0)/d_k`; its
/// amplitude and energy companions are `lambda_reduced = √(12√2/ω_reduced)`
/// and `energy_reduced = 6/ω_reduced`. Both sets are reported so numerical
/// branches can be compared against either.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub omega: f64,
    pub lambda_coeff: f64,
    pub energy_coeff: f64,
    pub int_chi0_sq: f64,
    pub int_chi0_4: f64,
    pub cross_term: f64,
    pub soliton_energy_density: f64,
    pub int_s0_u0_chi0_sq: f64,
    pub soliton_h_norm_sq: f64,
    pub omega_reduced: f64,
    pub lambda_reduced: f64,
    pub energy_reduced: f64,
    /// Per-resolution values used for the Richardson step (coarse, fine).
    pub levels: Vec<CoefficientLevel>,
}

impl Coefficients {
    /// `ω ≥ (21/4)∫χ₀⁴`.
    pub fn omega_bound(&self) -> f64 {
        21.0 / 4.0 * self.int_chi0_4
    }

    /// `9Λ²/(14√2)`.
    pub fn energy_bound(&self) -> f64 {
        9.0 * self.lambda_coeff.powi(2) / (14.0 * SQRT_2)
    }
}

fn omega_formula(int4: f64, cross: f64) -> f64 {
    33.0 / 4.0 * int4 + 3.0 * cross
}

fn omega_reduced_formula(int4: f64, cross: f64) -> f64 {
    15.0 / 4.0 * int4 + 3.0 * cross
}

fn cross_term(grid: &XGrid) -> Result<f64> {
    let v = solve_v(grid)?;
    let f: Vec<f64> = (0..grid.nx)
        .map(|i| {
            let x = grid.x(i);
            soliton(x) * v[i] * chi0(x).powi(2)
        })
        .collect();
    Ok(grid.simpson(&f))
}

/// Computes all coefficients. The `v`-dependent integral is evaluated at `nx`
/// and `2nx − 1` and Richardson-extrapolated; the remaining integrals are
/// Simpson quadratures of closed forms.
pub fn compute_coefficients(nx: usize, half_length: f64) -> Result<Coefficients> {
    let grid = XGrid::new(half_length, nx)?;
    let fine = grid.refined();
    let int_chi0_sq = fine.simpson(&fine.sample(|x| chi0(x).powi(2)));
    let int_chi0_4 = fine.simpson(&fine.sample(|x| chi0(x).powi(4)));
    let int_s0_u0_chi0_sq = fine.simpson(&fine.sample(|x| soliton(x) * u_star(x) * chi0(x).powi(2)));
    let soliton_energy_density =
        fine.simpson(&fine.sample(|x| 0.5 * soliton_d1(x).powi(2) + 0.25 * (1.0 - soliton(x).powi(2)).powi(2)));
    let s0: Vec<Complex64> = grid.sample(soliton).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let soliton_h_norm_sq = h_norm(&s0, &grid).powi(2);

    let c_coarse = cross_term(&grid)?;
    let c_fine = cross_term(&fine)?;
    let cross = (4.0 * c_fine - c_coarse) / 3.0;
    let levels = vec![
        CoefficientLevel {
            nx,
            cross_term: c_coarse,
            omega: omega_formula(int_chi0_4, c_coarse),
            omega_reduced: omega_reduced_formula(int_chi0_4, c_coarse),
        },
        CoefficientLevel {
            nx: fine.nx,
            cross_term: c_fine,
            omega: omega_formula(int_chi0_4, c_fine),
            omega_reduced: omega_reduced_formula(int_chi0_4, c_fine),
        },
    ];

    let omega = omega_formula(int_chi0_4, cross);
    let lambda_coeff = (12.0 * SQRT_2 / omega).sqrt();
    let ratio = (5.0 * int_chi0_4 + 12.0 * cross) / (2.0 * (11.0 * int_chi0_4 + 4.0 * cross));
    let energy_coeff = lambda_coeff.powi(2) / SQRT_2 * (1.0 - ratio);
    let omega_reduced = omega_reduced_formula(int_chi0_4, cross);
    let lambda_reduced = (12.0 * SQRT_2 / omega_reduced).sqrt();
    let energy_reduced = 6.0 / omega_reduced;

    Ok(Coefficients {
        omega,
        lambda_coeff,
        energy_coeff,
        int_chi0_sq,
        int_chi0_4,
        cross_term: cross,
        soliton_energy_density,
        int_s0_u0_chi0_sq,
        soliton_h_norm_sq,
        omega_reduced,
        lambda_reduced,
        energy_reduced,
        levels,
    })
}
