//! Discretized linear operators: `L₀⁺`, `L₀⁻`, the sector operators `T_k`
//! about a one-dimensional profile, and the full strip linearization about a
//! sector field, with spectra and negative-eigenvalue counts.
//!
//! Every operator `A` is assembled in its natural (non-symmetric) FD form and
//! also as the symmetric matrix `W^{1/2} A W^{-1/2}`, where `W` holds the
//! trapezoid node weights and the sector weights. Both have the same spectrum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{soliton, sturm_liouville};
use crate::banded::{BandMatrix, SymBandMatrix};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::layout::HalfLayout;
use crate::strip::{SectorField, StripDomain, XGrid};

/// Eigenvalues below `−TOL_ZERO` count as negative.
pub const TOL_ZERO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    L0Plus,
    L0Minus,
    Tk,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum L0Sign {
    Plus,
    Minus,
}

/// Access to the symmetric form of an operator, shared by the eigensolver.
pub trait SymmetricOperator {
    fn symmetric(&self) -> &SymBandMatrix;
    /// Diagonal of `W^{1/2}`.
    fn sqrt_weights(&self) -> &[f64];
    /// Measure of one unknown (grid spacing), used for `L²` normalization.
    fn cell(&self) -> f64;
}

/// Banded real symmetric representation of a one-dimensional operator on the
/// full grid; complex operators use interleaved `(Re, Im)` unknowns.
#[derive(Debug, Clone)]
pub struct LinearOperator1D {
    pub kind: OperatorKind,
    pub sector: usize,
    pub width: f64,
    /// 1 for real operators, 2 for `(Re, Im)` interleaved operators.
    pub components: usize,
    pub grid: XGrid,
    general: BandMatrix,
    symmetric: SymBandMatrix,
    sqrt_w: Vec<f64>,
}

impl LinearOperator1D {
    /// The FD matrix acting on grid values.
    pub fn matrix(&self) -> &BandMatrix {
        &self.general
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.general.matvec(v)
    }

    /// Builds a custom operator from its FD matrix; `node_weights` must make
    /// `diag(node_weights)·A` symmetric.
    pub fn custom(grid: XGrid, components: usize, general: BandMatrix) -> Result<Self> {
        let weights = node_weights(grid.nx, components);
        let symmetric = symmetrize(&general, &weights, 1e-9)?;
        Ok(Self {
            kind: OperatorKind::Custom,
            sector: 0,
            width: 0.0,
            components,
            grid,
            general,
            symmetric,
            sqrt_w: weights.iter().map(|w| w.sqrt()).collect(),
        })
    }
}

impl SymmetricOperator for LinearOperator1D {
    fn symmetric(&self) -> &SymBandMatrix {
        &self.symmetric
    }
    fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_w
    }
    fn cell(&self) -> f64 {
        self.grid.h()
    }
}

fn node_weights(nx: usize, components: usize) -> Vec<f64> {
    (0..nx * components)
        .map(|a| {
            let i = a / components;
            if i == 0 || i + 1 == nx {
                0.5
            } else {
                1.0
            }
        })
        .collect()
}

/// `W^{1/2} A W^{-1/2}`; fails if `WA` is not symmetric to `tol` (relative).
fn symmetrize(a: &BandMatrix, w: &[f64], tol: f64) -> Result<SymBandMatrix> {
    let n = a.dim();
    let (kl, ku) = a.bandwidths();
    let bw = kl.max(ku);
    let mut s = SymBandMatrix::zeros(n, bw);
    let mut scale = 0.0f64;
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i.saturating_sub(bw)..=i {
            let sij = w[i].sqrt() * a.get(i, j) / w[j].sqrt();
            let sji = w[j].sqrt() * a.get(j, i) / w[i].sqrt();
            scale = scale.max(sij.abs());
            defect = defect.max((sij - sji).abs());
            s.set(i, j, 0.5 * (sij + sji));
        }
    }
    if defect > tol * scale.max(1.0) {
        return Err(Error::Symmetry { defect });
    }
    Ok(s)
}

/// Neumann second difference `D²u` on the full grid.
pub fn second_difference(u: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = u.len();
    let ih2 = 1.0 / (h * h);
    (0..n)
        .map(|i| {
            if i == 0 {
                (u[1] - u[0]) * (2.0 * ih2)
            } else if i + 1 == n {
                (u[n - 2] - u[n - 1]) * (2.0 * ih2)
            } else {
                (u[i + 1] - u[i] * 2.0 + u[i - 1]) * ih2
            }
        })
        .collect()
}

/// `∂ₓ²` in sector `j`. Sector 0 is split as `S₀″ + D²(ψ₀ − S₀)`, so the
/// Neumann condition acts on the perturbation of the soliton and `S₀` is an
/// exact discrete solution.
pub fn sector_d2(line: &[Complex64], j: usize, grid: &XGrid) -> Vec<Complex64> {
    if j > 0 {
        return second_difference(line, grid.h());
    }
    let eps: Vec<Complex64> = line.iter().enumerate().map(|(i, v)| v - soliton(grid.x(i))).collect();
    let mut d2 = second_difference(&eps, grid.h());
    for (i, v) in d2.iter_mut().enumerate() {
        *v += crate::analytic::soliton_d2(grid.x(i));
    }
    d2
}

/// `T_j` about the profile `psi0` acting on one full-grid sector line.
pub fn apply_sector_operator(
    psi0: &[Complex64],
    line: &[Complex64],
    j: usize,
    width: f64,
    grid: &XGrid,
) -> Vec<Complex64> {
    let d2 = second_difference(line, grid.h());
    let kk = (std::f64::consts::PI * j as f64 / width).powi(2);
    (0..grid.nx)
        .map(|i| {
            let b = pointwise_block(psi0[i]);
            let (a, c) = (line[i].re, line[i].im);
            let re = -d2[i].re + kk * a + b[0][0] * a + b[0][1] * c;
            let im = -d2[i].im + kk * c + b[1][0] * a + b[1][1] * c;
            Complex64::new(re, im)
        })
        .collect()
}

/// `T_j` about `psi0` in half-grid unknowns `2·node + c`. When `pin_center`
/// is set the imaginary row at `x = 0` is replaced by the identity row of a
/// pinned `Im ψ(0)`. The real part at `x = 0` is always an identity row.
pub fn assemble_sector_half(psi0: &[Complex64], j: usize, width: f64, grid: &XGrid, pin_center: bool) -> BandMatrix {
    let layout = HalfLayout::new(grid.nx, 1);
    let ih2 = 1.0 / (grid.h() * grid.h());
    let kk = (std::f64::consts::PI * j as f64 / width).powi(2);
    let mut a = BandMatrix::zeros(layout.len(), 2, 2);
    let last = layout.nodes - 1;
    for node in 0..layout.nodes {
        let b = pointwise_block(psi0[layout.center + node]);
        for c in 0..2 {
            let row = 2 * node + c;
            if node == 0 && (c == 0 || pin_center) {
                a.set(row, row, 1.0);
                continue;
            }
            a.add(row, row, 2.0 * ih2 + kk);
            if node == 0 {
                a.add(row, row + 2, -2.0 * ih2);
            } else if node == last {
                a.add(row, row - 2, -2.0 * ih2);
            } else {
                if !(node == 1 && c == 0) {
                    a.add(row, row - 2, -ih2);
                }
                a.add(row, row + 2, -ih2);
            }
            for c2 in 0..2 {
                if node == 0 && c2 == 0 {
                    continue;
                }
                a.add(row, 2 * node + c2, b[c][c2]);
            }
        }
    }
    a
}

/// `L₀^± = −∂² − (1 − S₀²)` (minus) or `−∂² − (1 − 3S₀²)` (plus), Neumann ends.
pub fn assemble_l0(sign: L0Sign, grid: XGrid) -> LinearOperator1D {
    let general = match sign {
        L0Sign::Minus => sturm_liouville(&grid, |x| -(1.0 - soliton(x).powi(2))),
        L0Sign::Plus => sturm_liouville(&grid, |x| -(1.0 - 3.0 * soliton(x).powi(2))),
    };
    let weights = node_weights(grid.nx, 1);
    let symmetric = symmetrize(&general, &weights, 1e-12).expect("Neumann FD operator is weight-symmetric");
    LinearOperator1D {
        kind: match sign {
            L0Sign::Plus => OperatorKind::L0Plus,
            L0Sign::Minus => OperatorKind::L0Minus,
        },
        sector: 0,
        width: 0.0,
        components: 1,
        grid,
        general,
        symmetric,
        sqrt_w: weights.iter().map(|w| w.sqrt()).collect(),
    }
}

/// Pointwise linearization block of `−Ψ(1 − |Ψ|²)` in `(Re, Im)` coordinates:
/// `−(1 − |Ψ|²)I + 2 [a², ab; ab, b²]`.
#[inline]
pub fn pointwise_block(psi: Complex64) -> [[f64; 2]; 2] {
    let (a, b) = (psi.re, psi.im);
    let m = -(1.0 - a * a - b * b);
    [[m + 2.0 * a * a, 2.0 * a * b], [2.0 * a * b, m + 2.0 * b * b]]
}

/// `T_k ψ = −ψ″ + (πk/d)²ψ − ψ(1 − |ψ₀|²) + 2⟨ψ₀, ψ⟩ψ₀` on the full grid,
/// unknown `2i + c` for node `i` and component `c`.
pub fn assemble_tk(psi0: &[Complex64], k: usize, width: f64, grid: XGrid) -> Result<LinearOperator1D> {
    if psi0.len() != grid.nx {
        return Err(Error::InvalidArgument("psi0 length differs from the grid".into()));
    }
    let n = grid.nx;
    let ih2 = 1.0 / (grid.h() * grid.h());
    let kk = (std::f64::consts::PI * k as f64 / width).powi(2);
    let mut a = BandMatrix::zeros(2 * n, 2, 2);
    for i in 0..n {
        let b = pointwise_block(psi0[i]);
        for c in 0..2 {
            let r = 2 * i + c;
            a.add(r, r, 2.0 * ih2 + kk);
            for c2 in 0..2 {
                a.add(r, 2 * i + c2, b[c][c2]);
            }
            if i == 0 {
                a.add(r, r + 2, -2.0 * ih2);
            } else if i + 1 == n {
                a.add(r, r - 2, -2.0 * ih2);
            } else {
                a.add(r, r - 2, -ih2);
                a.add(r, r + 2, -ih2);
            }
        }
    }
    let weights = node_weights(n, 2);
    let symmetric = symmetrize(&a, &weights, 1e-12)?;
    Ok(LinearOperator1D {
        kind: OperatorKind::Tk,
        sector: k,
        width,
        components: 2,
        grid,
        general: a,
        symmetric,
        sqrt_w: weights.iter().map(|w| w.sqrt()).collect(),
    })
}

/// Linearization of the discrete residual `−ΔΨ − Ψ(1 − |Ψ|²)` about a field,
/// restricted to the symmetry class and stored on the half grid.
#[derive(Debug, Clone)]
pub struct StripOperator {
    pub domain: StripDomain,
    pub layout: HalfLayout,
    jacobian: BandMatrix,
    symmetric: SymBandMatrix,
    sqrt_w: Vec<f64>,
}

impl StripOperator {
    /// Exact Jacobian of the discrete residual in half-grid unknowns.
    pub fn jacobian(&self) -> &BandMatrix {
        &self.jacobian
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.jacobian.matvec(v)
    }

    /// Number of eigenvalues below `−tol_zero`.
    pub fn n_negative(&self, tol_zero: f64) -> usize {
        self.symmetric.count_below(-tol_zero)
    }

    /// Largest asymmetry of the assembled symmetric form (diagnostic).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.jacobian.dim();
        let bw = self.symmetric.bandwidth();
        let mut d = 0.0f64;
        for i in 0..n {
            for j in i.saturating_sub(bw)..i {
                let sij = self.sqrt_w[i] * self.jacobian.get(i, j) / self.sqrt_w[j];
                let sji = self.sqrt_w[j] * self.jacobian.get(j, i) / self.sqrt_w[i];
                d = d.max((sij - sji).abs());
            }
        }
        d
    }
}

impl SymmetricOperator for StripOperator {
    fn symmetric(&self) -> &SymBandMatrix {
        &self.symmetric
    }
    fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_w
    }
    fn cell(&self) -> f64 {
        self.domain.grid.h()
    }
}

/// Assembles the strip linearization about `f`. Sector coupling blocks come
/// from the transverse quadrature of the pointwise blocks; the real part at
/// `x = 0` is fixed by symmetry and carried as an identity row.
pub fn assemble_strip_linearization(f: &SectorField) -> Result<StripOperator> {
    let domain = f.domain;
    let layout = HalfLayout::for_domain(&domain);
    let nk = domain.n_modes + 1;
    let table = domain.cosine_table();
    let h = domain.grid.h();
    let ih2 = 1.0 / (h * h);
    let bw = layout.bandwidth();
    let mut jac = BandMatrix::zeros(layout.len(), bw, bw);
    let kmax = domain.wavenumber(domain.n_modes).powi(2);
    let pin_diag = 2.0 * ih2 + kmax + 2.0;
    let last = layout.nodes - 1;
    let mut blocks = vec![[[0.0f64; 2]; 2]; table.ny];
    for node in 0..layout.nodes {
        let i = layout.center + node;
        for (q, b) in blocks.iter_mut().enumerate() {
            let mut psi = Complex64::new(0.0, 0.0);
            for j in 0..nk {
                psi += f.coeffs[j][i] * table.get(q, j);
            }
            *b = pointwise_block(psi);
        }
        for j in 0..nk {
            let wj = table.projection_weight(j);
            let kj = domain.wavenumber(j).powi(2);
            for c in 0..2 {
                let row = layout.index(node, j, c);
                if node == 0 && c == 0 {
                    jac.set(row, row, pin_diag);
                    continue;
                }
                // x second difference with Neumann ends.
                if node == 0 {
                    jac.add(row, row, 2.0 * ih2);
                    jac.add(row, layout.index(1, j, c), -2.0 * ih2);
                } else if node == last {
                    jac.add(row, row, 2.0 * ih2);
                    jac.add(row, layout.index(node - 1, j, c), -2.0 * ih2);
                } else {
                    jac.add(row, row, 2.0 * ih2);
                    if !(node == 1 && c == 0) {
                        jac.add(row, layout.index(node - 1, j, c), -ih2);
                    }
                    jac.add(row, layout.index(node + 1, j, c), -ih2);
                }
                jac.add(row, row, kj);
                for l in 0..nk {
                    for c2 in 0..2 {
                        if node == 0 && c2 == 0 {
                            continue;
                        }
                        let mut s = 0.0;
                        for (q, b) in blocks.iter().enumerate() {
                            s += table.get(q, j) * table.get(q, l) * b[c][c2];
                        }
                        jac.add(row, layout.index(node, l, c2), wj * s);
                    }
                }
            }
        }
    }
    let weights = layout.weights();
    let symmetric = symmetrize(&jac, &weights, 1e-9)?;
    Ok(StripOperator { domain, layout, jacobian: jac, symmetric, sqrt_w: weights.iter().map(|w| w.sqrt()).collect() })
}

/// Lowest eigenpairs of a symmetric operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors in the operator's own unknowns, normalized so that
    /// `Σ wᵢ h vᵢ² = 1`, first significant component positive.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖Sv − λv‖₂/‖v‖₂` in the symmetric form.
    pub residuals: Vec<f64>,
    /// Number of eigenvalues below `−TOL_ZERO` (whole spectrum).
    pub n_negative: usize,
}

/// The `n_eigs` lowest eigenvalues by inertia bisection, with eigenvectors by
/// inverse iteration.
pub fn spectrum(op: &impl SymmetricOperator, n_eigs: usize) -> Result<SpectrumResult> {
    if n_eigs == 0 {
        return Err(Error::InvalidArgument("n_eigs must be at least 1".into()));
    }
    let s = op.symmetric();
    let eigenvalues = s.lowest_eigenvalues(n_eigs);
    let mut sym_vecs: Vec<Vec<f64>> = Vec::new();
    let mut residuals = Vec::new();
    for (idx, &lam) in eigenvalues.iter().enumerate() {
        // Orthogonalize only against numerically degenerate predecessors.
        let close: Vec<Vec<f64>> = eigenvalues[..idx]
            .iter()
            .zip(&sym_vecs)
            .filter(|(l, _)| (*l - lam).abs() <= 1e-8 * lam.abs().max(1.0))
            .map(|(_, v)| v.clone())
            .collect();
        let u = s.inverse_iteration(lam, &close)?;
        let su = s.matvec(&u);
        let res = su.iter().zip(&u).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        if !(res <= 1e-6 * lam.abs().max(1.0)) {
            return Err(Error::NoConvergence { solver: "inverse iteration", iterations: 6, residual: res });
        }
        residuals.push(res);
        sym_vecs.push(u);
    }
    let sw = op.sqrt_weights();
    let cell = op.cell();
    let eigenvectors = sym_vecs
        .iter()
        .map(|u| {
            let mut v: Vec<f64> = u.iter().zip(sw).map(|(a, w)| a / w).collect();
            let norm = v.iter().zip(sw).map(|(a, w)| w * w * a * a).sum::<f64>().sqrt() * cell.sqrt();
            let vmax = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let first = v.iter().copied().find(|a| a.abs() > 1e-6 * vmax).unwrap_or(1.0);
            let sign = if first < 0.0 { -1.0 } else { 1.0 };
            v.iter_mut().for_each(|a| *a *= sign / norm);
            v
        })
        .collect();
    Ok(SpectrumResult { eigenvalues, eigenvectors, residuals, n_negative: s.count_below(-TOL_ZERO) })
}

/// Lowest eigenvalue of `T_k` about `S₀` over a list of widths.
pub fn tk_lowest_scan(grid: XGrid, k: usize, widths: &[f64], mode: ExecMode) -> Vec<f64> {
    let s0: Vec<Complex64> = grid.sample(soliton).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    exec::map(mode, widths, |&d| {
        let op = assemble_tk(&s0, k, d, grid).expect("T_k about S₀ is symmetric");
        op.symmetric().lowest_eigenvalues(1)[0]
    })
}

/// Negative-eigenvalue count of the strip linearization about `S₀` over a
/// list of widths (same discretization as `domain`).
pub fn soliton_morse_scan(domain: StripDomain, widths: &[f64], mode: ExecMode) -> Result<Vec<usize>> {
    exec::map(mode, widths, |&d| {
        let dom = domain.with_width(d)?;
        let op = assemble_strip_linearization(&SectorField::soliton(dom))?;
        Ok(op.n_negative(TOL_ZERO))
    })
    .into_iter()
    .collect()
}

/// Width where the lowest eigenvalue of discrete `T_k` about `S₀` vanishes,
/// `πk/√(−μ)` with `μ` the lowest discrete eigenvalue of `L₀⁻`.
pub fn discrete_critical_width(grid: XGrid, k: usize) -> f64 {
    let mu = assemble_l0(L0Sign::Minus, grid).symmetric().lowest_eigenvalues(1)[0];
    std::f64::consts::PI * k as f64 / (-mu).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::chi0;

    #[test]
    fn l0_minus_ground_state() {
        let grid = XGrid::new(20.0, 401).unwrap();
        let op = assemble_l0(L0Sign::Minus, grid);
        let sp = spectrum(&op, 2).unwrap();
        assert!((sp.eigenvalues[0] + 0.5).abs() < 2e-3);
        // The odd kernel function S₀ sits at the edge, within O(h²) of zero.
        assert!(sp.eigenvalues[1].abs() < 1e-4);
        let c = grid.sample(chi0);
        let norm = grid.trapezoid(&c.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        let err: Vec<f64> = sp.eigenvectors[0].iter().zip(&c).map(|(a, b)| (a - b / norm).powi(2)).collect();
        assert!(grid.trapezoid(&err).sqrt() < 1e-2);
    }

    #[test]
    fn shifted_spectrum() {
        let grid = XGrid::new(10.0, 101).unwrap();
        let op = assemble_l0(L0Sign::Plus, grid);
        let mut shifted = op.matrix().clone();
        for i in 0..shifted.dim() {
            shifted.add(i, i, 3.0);
        }
        let op2 = LinearOperator1D::custom(grid, 1, shifted).unwrap();
        let a = spectrum(&op, 3).unwrap();
        let b = spectrum(&op2, 3).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x + 3.0 - y).abs() < 1e-11);
        }
    }

    #[test]
    fn strip_operator_about_soliton_is_block_diagonal() {
        let d = StripDomain::new(10.0, 5.0, 41, 2).unwrap();
        let op = assemble_strip_linearization(&SectorField::soliton(d)).unwrap();
        let l = op.layout;
        for node in 0..l.nodes {
            for j in 0..3 {
                for c in 0..2 {
                    for j2 in 0..3 {
                        if j2 != j {
                            for c2 in 0..2 {
                                let v = op.jacobian().get(l.index(node, j, c), l.index(node, j2, c2));
                                assert!(v.abs() < 1e-13);
                            }
                        }
                    }
                }
            }
        }
        assert!(op.symmetry_defect() < 1e-10);
    }
}
