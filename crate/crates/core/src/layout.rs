//! Packing of symmetric fields into real half-grid unknown vectors.
//!
//! Inside the symmetry class a field is determined by its values on `x ≥ 0`.
//! Node `i_h = 0` is `x = 0`, where `Re ψ_j = 0`; node `i_h = m` is `x = L`.
//! Unknowns are ordered node-major: `index = i_h·2(K+1) + 2j + c` with
//! `c = 0` for the real part and `c = 1` for the imaginary part.

use num_complex::Complex64;

use crate::strip::{SectorField, StripDomain};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLayout {
    /// Number of half-grid nodes, `(nx + 1)/2`.
    pub nodes: usize,
    /// Number of sectors per node (`K + 1` for the strip, 1 for a single sector).
    pub sectors: usize,
    /// Full-grid index of `x = 0`.
    pub center: usize,
}

impl HalfLayout {
    pub fn new(nx: usize, sectors: usize) -> Self {
        Self { nodes: nx.div_ceil(2), sectors, center: (nx - 1) / 2 }
    }

    pub fn for_domain(domain: &StripDomain) -> Self {
        Self::new(domain.nx(), domain.n_modes + 1)
    }

    pub fn len(&self) -> usize {
        self.nodes * self.sectors * 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node stride in the unknown vector.
    pub fn stride(&self) -> usize {
        2 * self.sectors
    }

    #[inline]
    pub fn index(&self, node: usize, sector: usize, comp: usize) -> usize {
        node * self.stride() + 2 * sector + comp
    }

    /// Half-bandwidth of operators coupling nearest nodes and all sectors.
    pub fn bandwidth(&self) -> usize {
        self.stride() + self.stride() - 1
    }

    /// Similarity weights making the assembled operators symmetric:
    /// node weight `½` at both ends of the half grid, sector weight `½` for `j ≥ 1`.
    pub fn weight(&self, node: usize, sector: usize) -> f64 {
        let nw = if node == 0 || node + 1 == self.nodes { 0.5 } else { 1.0 };
        let sw = if sector == 0 || self.sectors == 1 { 1.0 } else { 0.5 };
        nw * sw
    }

    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.len()];
        for n in 0..self.nodes {
            for j in 0..self.sectors {
                let v = self.weight(n, j);
                w[self.index(n, j, 0)] = v;
                w[self.index(n, j, 1)] = v;
            }
        }
        w
    }

    /// Packs sectors `first..first + sectors` of the field.
    pub fn pack_sectors(&self, coeffs: &[Vec<Complex64>], first: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        for n in 0..self.nodes {
            for j in 0..self.sectors {
                let c = coeffs[first + j][self.center + n];
                v[self.index(n, j, 0)] = if n == 0 { 0.0 } else { c.re };
                v[self.index(n, j, 1)] = c.im;
            }
        }
        v
    }

    pub fn pack(&self, f: &SectorField) -> Vec<f64> {
        self.pack_sectors(&f.coeffs, 0)
    }

    /// Unpacks to full-grid coefficient lines, extending by symmetry.
    pub fn unpack_sectors(&self, v: &[f64]) -> Vec<Vec<Complex64>> {
        let nx = 2 * self.nodes - 1;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); nx]; self.sectors];
        for n in 0..self.nodes {
            for (j, line) in out.iter_mut().enumerate() {
                let re = if n == 0 { 0.0 } else { v[self.index(n, j, 0)] };
                let im = v[self.index(n, j, 1)];
                line[self.center + n] = Complex64::new(re, im);
                line[self.center - n] = Complex64::new(-re, im);
            }
        }
        out
    }

    pub fn unpack(&self, v: &[f64], domain: StripDomain) -> SectorField {
        SectorField { domain, coeffs: self.unpack_sectors(v) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_symmetric_field() {
        let d = StripDomain::new(10.0, 3.0, 21, 2).unwrap();
        let mut f = SectorField::zeros(d);
        for j in 0..3 {
            for i in 0..21 {
                f.coeffs[j][i] = Complex64::new((i as f64 + j as f64).sin(), (i as f64 * 0.5).cos());
            }
        }
        let f = f.enforce_symmetry();
        let l = HalfLayout::for_domain(&d);
        assert_eq!(l.len(), 11 * 3 * 2);
        let g = l.unpack(&l.pack(&f), d);
        assert!(g.max_coeff_diff(&f) < 1e-15);
    }
}
