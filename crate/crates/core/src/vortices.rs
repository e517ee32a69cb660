//! Zeros of strip fields and their winding numbers.
//!
//! Degrees use counterclockwise traversal in the `(x, y)` plane, so the map
//! `x + iy` has degree `+1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::strip::SectorField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vortex {
    pub x: f64,
    pub y: f64,
    pub degree: i32,
    /// Minimum of `|Ψ|` on the contour used for the degree.
    pub contour_min: f64,
    /// True when point refinement did not converge (coarse position kept).
    pub unrefined: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VortexSet {
    pub entries: Vec<Vortex>,
    /// Candidate zeros rejected by the isolation check (non-isolated zero set,
    /// e.g. the nodal line of the soliton).
    pub degenerate: usize,
}

impl VortexSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.entries.is_empty() && self.degenerate > 0
    }

    pub fn total_degree(&self) -> i32 {
        self.entries.iter().map(|v| v.degree).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroOptions {
    /// Uniform `y` samples for the cell scan.
    pub y_points: usize,
    /// Target `|Ψ|` for point refinement.
    pub refine_tol: f64,
    /// Minimum `|Ψ|` on the contour for a zero to count as a vortex.
    pub isolation_floor: f64,
    /// Contour radius, reduced near the strip boundary and neighbouring zeros.
    pub radius: f64,
    /// Contour resolution.
    pub contour_points: usize,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        Self { y_points: 161, refine_tol: 1e-12, isolation_floor: 1e-3, radius: 0.5, contour_points: 128 }
    }
}

/// Degree of `f` around a circle, counterclockwise. Errors when the total
/// phase increment is farther than `0.2` turns from an integer.
pub fn winding_number_of(
    f: impl Fn(f64, f64) -> Complex64,
    center: (f64, f64),
    radius: f64,
    points: usize,
) -> Result<i32> {
    let n = points.max(64);
    let at = |m: usize| {
        let t = 2.0 * PI * m as f64 / n as f64;
        f(center.0 + radius * t.cos(), center.1 + radius * t.sin())
    };
    let mut total = 0.0;
    let mut prev = at(0);
    for m in 1..=n {
        let cur = at(m % n);
        if prev.norm() == 0.0 || cur.norm() == 0.0 {
            return Err(Error::InvalidArgument("zero on the contour".into()));
        }
        total += (cur / prev).arg();
        prev = cur;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.2 {
        return Err(Error::InvalidArgument(format!("phase increment {turns:.3} turns is not near an integer")));
    }
    Ok(rounded as i32)
}

/// Degree of a sector field around `center`; the circle must stay inside the strip.
pub fn winding_number(f: &SectorField, center: (f64, f64), radius: f64) -> Result<i32> {
    check_contour(f, center, radius)?;
    winding_number_of(|x, y| f.evaluate_at(x, y).0, center, radius, 128)
}

fn check_contour(f: &SectorField, center: (f64, f64), radius: f64) -> Result<()> {
    let d = f.width();
    let l = f.domain.grid.half_length;
    if radius <= 0.0 || center.1 - radius <= 0.0 || center.1 + radius >= d || center.0.abs() + radius >= l {
        return Err(Error::InvalidArgument("contour leaves the strip".into()));
    }
    Ok(())
}

fn contour_min(f: &SectorField, center: (f64, f64), radius: f64, points: usize) -> f64 {
    (0..points)
        .map(|m| {
            let t = 2.0 * PI * m as f64 / points as f64;
            f.evaluate_at(center.0 + radius * t.cos(), center.1 + radius * t.sin()).0.norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Newton refinement of a zero of `(Re Ψ, Im Ψ)`.
fn refine(f: &SectorField, x0: f64, y0: f64, tol: f64) -> Option<(f64, f64)> {
    let (mut x, mut y) = (x0, y0);
    let h = f.domain.grid.h();
    for _ in 0..30 {
        let (v, dx, dy) = f.evaluate_at(x, y);
        if v.norm() <= tol {
            return Some((x, y));
        }
        let det = dx.re * dy.im - dy.re * dx.im;
        if det.abs() < 1e-14 {
            return None;
        }
        let sx = (dy.im * v.re - dy.re * v.im) / det;
        let sy = (-dx.im * v.re + dx.re * v.im) / det;
        x -= sx;
        y -= sy;
        if (x - x0).abs() > 4.0 * h || !(0.0..=f.width()).contains(&y) {
            return None;
        }
    }
    let v = f.evaluate_at(x, y).0.norm();
    (v <= tol.max(1e-10)).then_some((x, y))
}

/// Scans grid cells for simultaneous sign changes of `Re Ψ` and `Im Ψ`,
/// refines each candidate, deduplicates within one cell, checks isolation and
/// computes the degree.
pub fn find_zeros(f: &SectorField, opts: &ZeroOptions) -> VortexSet {
    let phys = f.to_physical(opts.y_points);
    let grid = f.domain.grid;
    let nx = grid.nx;
    let ny = phys.ys.len();
    let dy_cell = f.width() / (ny - 1) as f64;
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for i in 0..nx - 1 {
        for q in 0..ny - 1 {
            let c =
                [phys.values[(i, q)], phys.values[(i + 1, q)], phys.values[(i, q + 1)], phys.values[(i + 1, q + 1)]];
            let spans = |g: &dyn Fn(&Complex64) -> f64| {
                let lo = c.iter().map(g).fold(f64::INFINITY, f64::min);
                let hi = c.iter().map(g).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            if spans(&|v: &Complex64| v.re) && spans(&|v: &Complex64| v.im) {
                candidates.push((grid.x(i) + 0.5 * grid.h(), phys.ys[q] + 0.5 * dy_cell));
            }
        }
    }
    let mut found: Vec<(f64, f64, bool)> = Vec::new();
    let mut degenerate = 0;
    for (cx, cy) in candidates {
        let (px, py, unrefined) = match refine(f, cx, cy, opts.refine_tol) {
            Some((x, y)) => (x, y, false),
            None => (cx, cy, true),
        };
        let dup = found.iter().any(|&(x, y, _)| (x - px).abs() <= grid.h() * 1.01 && (y - py).abs() <= dy_cell * 1.01);
        if !dup {
            found.push((px, py, unrefined));
        }
    }
    let mut entries = Vec::new();
    for (idx, &(x, y, unrefined)) in found.iter().enumerate() {
        // Keep the contour off the boundary and away from other candidates.
        let mut r = opts.radius.min(0.45 * y).min(0.45 * (f.width() - y));
        for (jdx, &(x2, y2, _)) in found.iter().enumerate() {
            if jdx != idx {
                let dist = ((x - x2).powi(2) + (y - y2).powi(2)).sqrt();
                r = r.min(0.45 * dist);
            }
        }
        let isolated = r > 2.0 * grid.h() && contour_min(f, (x, y), r, opts.contour_points) >= opts.isolation_floor;
        if !isolated || unrefined {
            degenerate += 1;
            continue;
        }
        match winding_number(f, (x, y), r) {
            Ok(degree) if degree != 0 => entries.push(Vortex {
                x,
                y,
                degree,
                contour_min: contour_min(f, (x, y), r, opts.contour_points),
                unrefined,
            }),
            _ => degenerate += 1,
        }
    }
    entries.sort_by(|a, b| a.y.partial_cmp(&b.y).unwrap());
    VortexSet { entries, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_degree() {
        let d = winding_number_of(Complex64::new, (0.0, 0.0), 1.0, 64).unwrap();
        assert_eq!(d, 1);
        let d = winding_number_of(|x, y| Complex64::new(x, -y), (0.0, 0.0), 1.0, 64).unwrap();
        assert_eq!(d, -1);
        let d = winding_number_of(|x, y| Complex64::new(x, y).powi(2), (0.0, 0.0), 0.5, 64).unwrap();
        assert_eq!(d, 2);
    }
}
