use num_complex::Complex64;
use std::f64::consts::SQRT_2;
use strip_vortex::analytic::{compute_coefficients, soliton, soliton_d2};
use strip_vortex::continuation::{
    amplitude, asymptotic_guess, continue_branch, energy, fit_amplitude, gp_residual, newton_solve, residual_norm,
    solve_fixed_amplitude, solve_onset_point, tile_field, tiling_error, verify_energy_expansion, verify_tiling,
    ContinuationOptions, NewtonOptions,
};
use strip_vortex::operators::discrete_critical_width;
use strip_vortex::reduction::{solve_lambda_star, FixedPointOptions};
use strip_vortex::{SectorField, StripDomain};

fn domain(width: f64, nx: usize) -> StripDomain {
    StripDomain::new(20.0, width, nx, 8).unwrap()
}

fn critical(k: usize, nx: usize) -> f64 {
    discrete_critical_width(domain(1.0, nx).grid, k)
}

#[test]
fn residual_examples() {
    let d = domain(5.0, 801);
    let h2 = d.grid.h().powi(2);
    assert!(residual_norm(&SectorField::soliton(d)) <= 1e-4);
    let one = gp_residual(&SectorField::constant(d, Complex64::new(1.0, 0.0)));
    let interior = one.coeffs.iter().flat_map(|c| c[1..c.len() - 1].iter()).map(|v| v.norm()).fold(0.0, f64::max);
    assert!(interior <= 0.2 * h2);
    let r = gp_residual(&SectorField::soliton(d).scaled(2.0));
    for x in [-3.0, -0.5, 0.0, 1.0, 2.5] {
        let i = ((x + d.grid.half_length) / d.grid.h()).round() as usize;
        let s = soliton(x);
        let expected = 2.0 * soliton_d2(x) + 2.0 * s * (1.0 - 4.0 * s * s);
        assert!((r.coeffs[0][i].re - expected).abs() <= 0.2 * h2, "x = {x}");
        assert!(r.coeffs[1..].iter().all(|c| c[i].norm() <= 1e-14));
    }
}

#[test]
fn asymptotic_guess_examples() {
    let dk = critical(1, 401);
    let lc = 1.3;
    let at = asymptotic_guess(domain(dk, 401), 1, lc, dk).unwrap();
    assert_eq!(at, SectorField::soliton(domain(dk, 401)));
    let d = dk + 0.2;
    let g = asymptotic_guess(domain(d, 401), 1, lc, dk).unwrap();
    assert!((amplitude(&g, 1) - lc * ((d - dk) / dk).sqrt()).abs() <= 1e-14);
    assert!(g.symmetry_defect() <= 1e-14);
    assert!(asymptotic_guess(domain(dk - 0.1, 401), 1, lc, dk).is_err());
}

#[test]
fn energy_examples() {
    let d = domain(3.7, 801);
    let e = energy(&SectorField::soliton(d));
    let exact = d.width * 2.0 * SQRT_2 / 3.0;
    assert!(((e - exact) / exact).abs() <= 1e-5);
    assert!(energy(&SectorField::constant(d, Complex64::new(1.0, 0.0))).abs() <= d.grid.h().powi(2));
}

#[test]
fn newton_examples() {
    let nx = 801;
    let opts = NewtonOptions::default();
    let s0 = SectorField::soliton(domain(5.0, nx));
    let fixed = newton_solve(&s0, &opts).unwrap();
    assert_eq!(fixed.iterations, 0);
    assert!(fixed.field.max_coeff_diff(&s0) <= 1e-14);

    let coeffs = compute_coefficients(nx, 20.0).unwrap();
    let dk = critical(1, nx);
    let d = domain(dk + 0.2, nx);
    let guess = asymptotic_guess(d, 1, coeffs.lambda_coeff, dk).unwrap();
    let o = newton_solve(&guess, &opts).unwrap();
    assert!(o.residual_norm <= 1e-10 && o.iterations <= 8, "{:?}", o.history);
    assert!(amplitude(&o.field, 1) > 0.5 * amplitude(&guess, 1));
    assert!(o.field.symmetry_defect() <= 1e-15);
    // Quadratic terminal phase, ignoring steps that land on the roundoff floor.
    let h = &o.history;
    for w in h[h.len().saturating_sub(4)..].windows(2) {
        if w[1] > 1e-11 {
            assert!(w[1] <= 100.0 * w[0] * w[0], "{h:?}");
        }
    }
    let conj = o.field.conj();
    assert!((residual_norm(&conj) - o.residual_norm).abs() <= 1e-15);
}

#[test]
fn fixed_amplitude_solve_frees_the_width() {
    let nx = 401;
    let coeffs = compute_coefficients(nx, 20.0).unwrap();
    let dk = critical(1, nx);
    let guess = asymptotic_guess(domain(dk + 0.1, nx), 1, coeffs.lambda_reduced, dk).unwrap();
    let target = amplitude(&guess, 1);
    let o = solve_fixed_amplitude(&guess, 1, target, &NewtonOptions::default()).unwrap();
    assert!((amplitude(&o.field, 1) - target).abs() <= 1e-10);
    assert!(o.residual_norm <= 1e-10);
    assert!(o.field.width() > dk);
    // The solved width sits near the leading-order prediction.
    let eps = (o.field.width() - dk) / dk;
    let predicted = (target / coeffs.lambda_reduced).powi(2);
    assert!((eps / predicted - 1.0).abs() < 0.1, "{eps} {predicted}");
    let (onset, _) =
        solve_onset_point(domain(dk + 0.1, nx), 1, dk, coeffs.lambda_coeff, &NewtonOptions::default()).unwrap();
    assert!(onset.residual_norm <= 1e-10 && amplitude(&onset.field, 1) > 0.0);
}

#[test]
fn branch_from_first_critical_width() {
    let nx = 801;
    let coeffs = compute_coefficients(nx, 20.0).unwrap();
    let dk = critical(1, nx);
    let opts = ContinuationOptions::default();
    let b = continue_branch(domain(dk, nx), 1, dk, coeffs.lambda_coeff, 0.05, 1.0, 0.05, &opts).unwrap();
    assert!(b.lost_at.is_none());
    assert_eq!(b.points.len(), 20);
    assert!(b.points.windows(2).all(|w| w[1].width > w[0].width));
    for p in &b.points {
        assert!(p.residual_norm <= opts.newton.tol);
        assert!(p.amplitude > 0.0);
        assert!(p.energy_deficit() > 0.0);
        assert_eq!(p.vortices.len(), 1);
        assert!(p.field.as_ref().unwrap().symmetry_defect() <= 1e-15);
    }
    let first = b.points[0].field.as_ref().unwrap();
    let pert = first.axpy(-1.0, &SectorField::soliton(first.domain));
    assert!(pert.sector_norm_sq(1) / pert.l2_norm_sq() >= 0.9);

    let fit = fit_amplitude(&b, 6).unwrap();
    assert!((fit.exponent - 0.5).abs() <= 0.05, "{fit:?}");
    assert!((fit.prefactor / coeffs.lambda_reduced - 1.0).abs() <= 0.05, "{fit:?}");
    let e = verify_energy_expansion(&b, 6).unwrap();
    assert!(e.all_positive);
    assert!((e.exponent - 2.0).abs() <= 0.1, "{e:?}");
    assert!(verify_energy_expansion(&b, 25).is_err());

    // With k = 1 the tiling is the identity and the report carries the R-symmetry defect.
    for r in verify_tiling(&b, &b).unwrap() {
        assert_eq!(r.tiling_error, 0.0);
        assert!(r.base_symmetry_error <= 1e-8);
    }
}

#[test]
fn second_branch_tiles_the_first() {
    let nx = 401;
    let coeffs = compute_coefficients(nx, 20.0).unwrap();
    let opts = NewtonOptions::default();
    let d2 = critical(2, nx) + 0.2;
    let (psi2, _) = solve_onset_point(domain(d2, nx), 2, critical(2, nx), coeffs.lambda_coeff, &opts).unwrap();
    let (psi1, _) = solve_onset_point(
        StripDomain::new(20.0, 0.5 * d2, nx, 4).unwrap(),
        1,
        critical(1, nx),
        coeffs.lambda_coeff,
        &opts,
    )
    .unwrap();
    let r = tiling_error(&psi2.field, &psi1.field, 2, 161).unwrap();
    assert!(r.tiling_error <= 1e-6, "{r:?}");
    assert!(r.base_symmetry_error <= 1e-8, "{r:?}");
    let tiled = tile_field(&psi1.field, 2, psi2.field.domain).unwrap();
    assert!(tiled.max_coeff_diff(&psi2.field) <= 1e-6);
    assert!(tiling_error(&psi2.field, &psi2.field, 2, 9).is_err());

    let s0 = SectorField::soliton(domain(2.0, nx));
    let tiled = tile_field(&s0, 3, domain(6.0, nx)).unwrap();
    assert_eq!(tiled, SectorField::soliton(domain(6.0, nx)));
}

#[test]
fn reduction_and_newton_agree() {
    let nx = 401;
    let coeffs = compute_coefficients(nx, 20.0).unwrap();
    let dk = critical(1, nx);
    let d = domain(dk + 0.1, nx);
    let guess = coeffs.lambda_reduced * (0.1 / dk).sqrt();
    let (_, state) = solve_lambda_star(d, 1, guess, &FixedPointOptions::default()).unwrap();
    let (o, _) = solve_onset_point(d, 1, dk, coeffs.lambda_coeff, &NewtonOptions::default()).unwrap();
    assert!(state.assemble().max_physical_diff(&o.field, 65) <= 1e-6);
}
