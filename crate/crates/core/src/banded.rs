//! Banded linear algebra: general band LU with partial pivoting, symmetric
//! band `LDLᵀ` inertia counts, bisection eigenvalues with inverse iteration,
//! and a bordered solver for one extra row and column.

use crate::error::{Error, Result};

/// General band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Each row stores columns `i − kl ..= i + ku + kl`; the extra `kl` slots hold
/// fill produced by row interchanges during factorization.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` at `(i, j)`. Panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Clears row `i` and puts `v` on its diagonal.
    pub fn set_identity_row(&mut self, i: usize, v: f64) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            self.set(i, j, 0.0);
        }
        self.set(i, i, v);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.slot(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Returns `A − σI`.
    pub fn shifted(&self, sigma: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.add(i, i, -sigma);
        }
        m
    }

    /// Factorizes with partial pivoting inside the band.
    pub fn lu(&self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut a = self.clone();
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a.data[a.slot(k, k)].abs();
            for i in k + 1..=last {
                let v = a.data[a.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best <= scale * 1e-300 {
                return Err(Error::Singular { row: k });
            }
            let jmax = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (sk, sp) = (a.slot(k, j), a.slot(p, j));
                    a.data.swap(sk, sp);
                }
            }
            let pivot = a.data[a.slot(k, k)];
            for i in k + 1..=last {
                let si = a.slot(i, k);
                let l = a.data[si] / pivot;
                a.data[si] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let ukj = a.data[a.slot(k, j)];
                        let sij = a.slot(i, j);
                        a.data[sij] -= l * ukj;
                    }
                }
            }
        }
        Ok(BandLu { a, piv })
    }
}

/// Band LU factors `PA = LU`.
#[derive(Debug, Clone)]
pub struct BandLu {
    a: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn dim(&self) -> usize {
        self.a.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.a;
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    x[i] -= a.data[a.slot(i, k)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + ku + kl).min(n - 1) {
                s -= a.data[a.slot(k, j)] * x[j];
            }
            x[k] = s / a.data[a.slot(k, k)];
        }
        x
    }
}

/// Solves the bordered system `[A b; cᵀ e] [x; μ] = [r; s]`.
///
/// Uses block elimination with the band factors of `A` followed by iterative
/// refinement on the full bordered residual, which keeps the solution accurate
/// when `A` is nearly singular along a direction not orthogonal to `c`.
pub fn solve_bordered(
    a: &BandMatrix,
    lu: &BandLu,
    b: &[f64],
    c: &[f64],
    e: f64,
    r: &[f64],
    s: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = a.dim();
    let z = lu.solve(b);
    let cz: f64 = dot(c, &z) - e;
    if cz == 0.0 || !cz.is_finite() {
        return Err(Error::Singular { row: n });
    }
    let step = |rr: &[f64], ss: f64| -> (Vec<f64>, f64) {
        let y = lu.solve(rr);
        let mu = (dot(c, &y) - ss) / cz;
        let x: Vec<f64> = y.iter().zip(&z).map(|(yi, zi)| yi - mu * zi).collect();
        (x, mu)
    };
    let (mut x, mut mu) = step(r, s);
    let rnorm = r.iter().fold(s.abs(), |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for _ in 0..4 {
        let ax = a.matvec(&x);
        let res: Vec<f64> = (0..n).map(|i| r[i] - ax[i] - mu * b[i]).collect();
        let res_s = s - dot(c, &x) - e * mu;
        let size = res.iter().fold(res_s.abs(), |m, v| m.max(v.abs()));
        if size <= 1e-15 * rnorm {
            break;
        }
        let (dx, dmu) = step(&res, res_s);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        mu += dmu;
    }
    Ok((x, mu))
}

/// Symmetric band matrix stored by its lower band of half-width `bw`.
#[derive(Debug, Clone)]
pub struct SymBandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.bw);
        i * (self.bw + 1) + (i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Sets the pair `(i, j)`, `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i.abs_diff(j) <= self.bw, "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i.abs_diff(j) <= self.bw, "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let d = self.data[i * (self.bw + 1)];
            y[i] += d * x[i];
            for j in i.saturating_sub(self.bw)..i {
                let v = self.data[i * (self.bw + 1) + (i - j)];
                y[i] += v * x[j];
                y[j] += v * x[i];
            }
        }
        y
    }

    pub fn to_general(&self) -> BandMatrix {
        let mut m = BandMatrix::zeros(self.n, self.bw, self.bw);
        for i in 0..self.n {
            for j in i.saturating_sub(self.bw)..=(i + self.bw).min(self.n - 1) {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let c = self.get(i, i);
            let r: f64 = (i.saturating_sub(self.bw)..=(i + self.bw).min(self.n - 1))
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            lo = lo.min(c - r);
            hi = hi.max(c + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `sigma` (Sylvester inertia of
    /// `A − σI` from an unpivoted `LDLᵀ` factorization).
    pub fn count_below(&self, sigma: f64) -> usize {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        // l[i*w + (i-j)] holds L_ij for j < i, and D_i at offset 0.
        let mut l = vec![0.0; n * w];
        let dmax = (0..n).map(|i| self.data[i * w].abs()).fold(sigma.abs(), f64::max);
        let tiny = f64::EPSILON * (1.0 + dmax);
        let mut neg = 0;
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..i {
                // s = A_ij − Σ_{k<j} L_ik L_jk D_k
                let mut s = self.data[i * w + (i - j)];
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)] * l[k * w];
                }
                l[i * w + (i - j)] = s / l[j * w];
            }
            let mut dii = self.data[i * w] - sigma;
            for k in j0..i {
                let lik = l[i * w + (i - k)];
                dii -= lik * lik * l[k * w];
            }
            if dii == 0.0 {
                dii = -tiny;
            }
            if dii < 0.0 {
                neg += 1;
            }
            l[i * w] = dii;
        }
        neg
    }

    /// The `count` lowest eigenvalues in ascending order, by bisection on
    /// inertia counts.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let count = count.min(self.n);
        let (glo, ghi) = self.gershgorin();
        let span = (ghi - glo).max(1.0);
        let (lo0, hi0) = (glo - 1e-3 * span, ghi + 1e-3 * span);
        (0..count)
            .map(|i| {
                let (mut lo, mut hi) = (lo0, hi0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.count_below(mid) > i {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1e-3 * span) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// Eigenvector for the eigenvalue estimate `lambda` by inverse iteration,
    /// orthogonalized against `previous` (Euclidean inner product).
    pub fn inverse_iteration(&self, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let (glo, ghi) = self.gershgorin();
        let span = (ghi - glo).max(1.0);
        let mut shift = lambda - 1e-10 * span;
        let mut lu = self.to_general().shifted(shift).lu();
        if lu.is_err() {
            shift = lambda - 1e-8 * span;
            lu = self.to_general().shifted(shift).lu();
        }
        let lu = lu?;
        let n = self.n;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7368).sin()).collect();
        orthogonalize(&mut v, previous);
        normalize(&mut v);
        for _ in 0..6 {
            let mut w = lu.solve(&v);
            orthogonalize(&mut w, previous);
            normalize(&mut w);
            let change: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = w;
            if change < 1e-14 {
                break;
            }
        }
        Ok(v)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let p = dot(v, b) / dot(b, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymBandMatrix {
        let mut m = SymBandMatrix::zeros(n, 1);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i > 0 {
                m.set(i, i - 1, -1.0);
            }
        }
        m
    }

    #[test]
    fn lu_solves_pivoting_case() {
        let mut a = BandMatrix::zeros(4, 1, 1);
        let vals = [[1e-12, 2.0, 0.0, 0.0], [3.0, 1.0, 1.0, 0.0], [0.0, 4.0, 2.0, 1.0], [0.0, 0.0, 1.0, 5.0]];
        for i in 0..4usize {
            for j in 0..4 {
                if i.abs_diff(j) <= 1 {
                    a.set(i, j, vals[i][j]);
                }
            }
        }
        let x = vec![1.0, -2.0, 3.0, 0.5];
        let b = a.matvec(&x);
        let y = a.lu().unwrap().solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        let n = 50;
        let m = laplacian(n);
        let ev = m.lowest_eigenvalues(3);
        for (k, e) in ev.iter().enumerate() {
            let th = (k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = 2.0 - 2.0 * th.cos();
            assert!((e - exact).abs() < 1e-13, "{e} vs {exact}");
        }
        assert_eq!(m.count_below(ev[1] + 1e-9), 2);
        let v = m.inverse_iteration(ev[0], &[]).unwrap();
        let av = m.matvec(&v);
        let res: f64 = av.iter().zip(&v).map(|(a, b)| (a - ev[0] * b).abs()).fold(0.0, f64::max);
        assert!(res < 1e-10);
    }

    #[test]
    fn bordered_handles_singular_block() {
        // Neumann Laplacian is singular with constant kernel; bordering with the
        // constant restores solvability.
        let n = 30;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            let diag = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            a.set(i, i, diag + 1e-13);
            if i > 0 {
                a.set(i, i - 1, -1.0);
                a.set(i - 1, i, -1.0);
            }
        }
        let lu = a.lu().unwrap();
        let ones = vec![1.0; n];
        let x_true: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.3).cos()).collect();
        let mean = x_true.iter().sum::<f64>() / n as f64;
        let x_true: Vec<f64> = x_true.iter().map(|v| v - mean).collect();
        let r: Vec<f64> = a.matvec(&x_true).iter().map(|v| v + 0.25).collect();
        let (x, mu) = solve_bordered(&a, &lu, &ones, &ones, 0.0, &r, 0.0).unwrap();
        assert!((mu - 0.25).abs() < 1e-9);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-8, "{p} {q}");
        }
    }
}
