use num_complex::Complex64;
use strip_vortex::analytic::compute_coefficients;
use strip_vortex::continuation::{solve_onset_point, NewtonOptions};
use strip_vortex::operators::discrete_critical_width;
use strip_vortex::vortices::{find_zeros, winding_number, winding_number_of, ZeroOptions};
use strip_vortex::{SectorField, StripDomain};

const NX: usize = 401;

fn branch_field(k: usize, offset: f64) -> SectorField {
    let coeffs = compute_coefficients(NX, 20.0).unwrap();
    let dk = discrete_critical_width(StripDomain::new(20.0, 1.0, NX, 8).unwrap().grid, k);
    let d = StripDomain::new(20.0, dk + offset, NX, 8).unwrap();
    solve_onset_point(d, k, dk, coeffs.lambda_coeff, &NewtonOptions::default()).unwrap().0.field
}

#[test]
fn canonical_maps() {
    let id = |x: f64, y: f64| Complex64::new(x, y);
    assert_eq!(winding_number_of(id, (0.0, 0.0), 1.0, 64).unwrap(), 1);
    assert_eq!(winding_number_of(|x, y| id(x, y).conj(), (0.0, 0.0), 1.0, 64).unwrap(), -1);
    assert_eq!(winding_number_of(|x, y| id(x, y).powi(2), (0.0, 0.0), 1.0, 64).unwrap(), 2);
    assert_eq!(winding_number_of(id, (3.0, 0.0), 1.0, 64).unwrap(), 0);
    // A zero on the contour is reported, not rounded.
    assert!(winding_number_of(|x, y| Complex64::new(x - 2.0, y), (1.0, 0.0), 1.0, 64).is_err());
}

#[test]
fn soliton_zero_line_is_degenerate() {
    let d = StripDomain::new(20.0, 4.0, NX, 4).unwrap();
    let set = find_zeros(&SectorField::soliton(d), &ZeroOptions::default());
    assert!(set.is_degenerate());
    assert!(set.is_empty());
}

#[test]
fn single_vortex_above_first_critical_width() {
    let f = branch_field(1, 0.2);
    let h = f.domain.grid.h();
    let set = find_zeros(&f, &ZeroOptions::default());
    assert_eq!(set.len(), 1);
    let v = set.entries[0];
    assert!(v.x.abs() <= 2.0 * h && (v.y - 0.5 * f.width()).abs() <= 2.0 * h, "{v:?}");
    assert_eq!(v.degree, -1);
    assert!(!v.unrefined);
    for r in [0.3, 0.8] {
        assert_eq!(winding_number(&f, (v.x, v.y), r).unwrap(), v.degree);
    }
    assert!(winding_number(&f, (v.x, v.y), 0.6 * f.width()).is_err());
}

#[test]
fn second_branch_has_alternating_vortices() {
    let f = branch_field(2, 0.2);
    let h = f.domain.grid.h();
    let set = find_zeros(&f, &ZeroOptions::default());
    assert_eq!(set.len(), 2);
    let mut entries = set.entries.clone();
    entries.sort_by(|a, b| a.y.total_cmp(&b.y));
    for (j, v) in entries.iter().enumerate() {
        let y = f.width() * (2 * j + 1) as f64 / 4.0;
        assert!(v.x.abs() <= 2.0 * h && (v.y - y).abs() <= 2.0 * h, "{v:?}");
        assert_eq!(v.degree, if j % 2 == 0 { -1 } else { 1 });
    }
    assert_eq!(set.total_degree(), 0);
}
