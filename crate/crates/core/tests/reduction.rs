use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};
use strip_vortex::analytic::{chi0, chi_k_field, compute_coefficients, gl_distance, soliton};
use strip_vortex::operators::{apply_sector_operator, discrete_critical_width};
use strip_vortex::reduction::{
    bifurcation_j, chi_component, complement_residual, evaluate_j, f0, fixed_point, g_nl, j_surface,
    probe_j_derivatives, solve_lambda_star, solve_projected_w, solve_zero_sector, FixedPointOptions, ProbeSteps,
    ZeroSectorOptions,
};
use strip_vortex::{ExecMode, SectorField, StripDomain};

fn domain(width: f64) -> StripDomain {
    StripDomain::new(20.0, width, 401, 8).unwrap()
}

fn s0_line(d: &StripDomain) -> Vec<Complex64> {
    d.grid.points().iter().map(|&x| Complex64::new(soliton(x), 0.0)).collect()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn critical(k: usize) -> f64 {
    discrete_critical_width(domain(1.0).grid, k)
}

#[test]
fn f0_of_zero_perturbation_vanishes() {
    let d = domain(5.0);
    let f = f0(&s0_line(&d), &SectorField::zeros(d));
    assert!(f.iter().all(|v| v.norm() == 0.0));
    assert!(g_nl(&s0_line(&d), &SectorField::zeros(d)).coeffs.iter().flatten().all(|v| v.norm() == 0.0));
}

#[test]
fn f0_of_critical_mode_matches_brute_force_average() {
    let (k, lam) = (2, 0.3);
    let d = domain(9.0);
    let w = chi_k_field(d, k).unwrap().scaled(lam);
    let psi0 = s0_line(&d);
    let f = f0(&psi0, &w);
    for (i, fi) in f.iter().enumerate() {
        let x = d.grid.x(i);
        let (s, c) = (soliton(x), chi0(x));
        // Midpoint rule at 64 ordinates on the integrand itself.
        let mut avg = Complex64::new(0.0, 0.0);
        for q in 0..64 {
            let y = (q as f64 + 0.5) * d.width / 64.0;
            let z = Complex64::new(0.0, lam * c * (PI * k as f64 * y / d.width).cos());
            let p = Complex64::new(s, 0.0);
            let inner = p.re * z.re + p.im * z.im;
            avg += (z * (2.0 * inner) + (p + z) * z.norm_sqr()) / 64.0;
        }
        assert!((fi - avg).norm() < 1e-14);
        // Quadratic part: half of |χ₀|²S₀ times λ².
        assert!((fi - Complex64::new(0.5 * lam * lam * c * c * s, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn nonlinearities_respect_the_symmetry_class() {
    let d = domain(6.0);
    let mut w = SectorField::zeros(d);
    for i in 0..d.nx() {
        let x = d.grid.x(i);
        w.coeffs[1][i] = Complex64::new(0.2 * x * chi0(x), 0.4 * chi0(x));
        w.coeffs[3][i] = Complex64::new(0.1 * soliton(x), -0.3 * chi0(x) * chi0(x));
    }
    let psi0 = s0_line(&d);
    let mut f = SectorField::zeros(d);
    f.coeffs[0] = f0(&psi0, &w);
    assert!(f.symmetry_defect() < 1e-15);
    let g = g_nl(&psi0, &w);
    assert!(g.symmetry_defect() < 1e-15);
    assert!(g.coeffs[0].iter().all(|v| v.norm() <= 1e-12));
}

#[test]
fn g_of_critical_mode_matches_product_to_sum() {
    // |w|²(S₀ + w) with w = iλχ₀cos θ: cos²θ = (1 + cos 2θ)/2, cos³θ = (3cos θ + cos 3θ)/4.
    let (k, lam) = (2, 0.25);
    let d = domain(9.0);
    let w = chi_k_field(d, k).unwrap().scaled(lam);
    let g = g_nl(&s0_line(&d), &w);
    for i in 0..d.nx() {
        let x = d.grid.x(i);
        let (s, c) = (soliton(x), chi0(x));
        let l2 = lam * lam * c * c;
        assert!((g.coeffs[2 * k][i] - Complex64::new(-0.5 * l2 * s, 0.0)).norm() < 1e-15);
        assert!((g.coeffs[k][i] - Complex64::new(0.0, -0.75 * l2 * lam * c)).norm() < 1e-15);
        assert!((g.coeffs[3 * k][i] - Complex64::new(0.0, -0.25 * l2 * lam * c)).norm() < 1e-15);
        for j in [1, 3, 5, 7, 8] {
            assert!(g.coeffs[j][i].norm() < 1e-15);
        }
    }
}

#[test]
fn zero_sector_without_forcing_is_the_soliton() {
    let d = domain(5.0);
    let sol = solve_zero_sector(&vec![Complex64::new(0.0, 0.0); d.nx()], &d.grid, None, &ZeroSectorOptions::default())
        .unwrap();
    assert!(gl_distance(&sol.psi0, &s0_line(&d), &d.grid) <= 1e-10);
}

#[test]
fn zero_sector_response_is_linear_in_small_forcing() {
    let d = domain(5.0);
    let g = d.grid;
    let forcing = |a: f64| -> Vec<Complex64> {
        g.points().iter().map(|&x| Complex64::new(a * soliton(x) * chi0(x).powi(2), 0.0)).collect()
    };
    let s0 = s0_line(&d);
    let dist = |a: f64| {
        let sol = solve_zero_sector(&forcing(a), &g, None, &ZeroSectorOptions::default()).unwrap();
        assert_eq!(sol.psi0[g.center()], Complex64::new(0.0, 0.0));
        assert!(sol.residual <= 1e-12);
        gl_distance(&sol.psi0, &s0, &g)
    };
    let (a, b) = (dist(2e-3), dist(1e-3));
    // The squared distance falls by four when the forcing halves.
    let ratio = a * a / (b * b);
    assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
}

#[test]
fn projected_solve_examples() {
    let k = 1;
    let d = domain(critical(k) + 0.3);
    let psi0 = s0_line(&d);
    let (w, mu) = solve_projected_w(&psi0, &SectorField::zeros(d), k).unwrap();
    assert!(w.coeffs.iter().flatten().all(|v| v.norm() == 0.0) && mu == 0.0);

    let mut ratios = Vec::new();
    for seed in 1..=4 {
        let s = seed as f64;
        let mut rhs = SectorField::zeros(d);
        for j in 1..=d.n_modes {
            for i in 0..d.nx() {
                let x = d.grid.x(i);
                let e = (-(x - 0.3 * s).powi(2) / (1.0 + 0.2 * j as f64)).exp() * 1e-2 / s;
                let e2 = (-(x + 0.3 * s).powi(2) / (1.0 + 0.2 * j as f64)).exp() * 1e-2 / s;
                rhs.coeffs[j][i] = Complex64::new((e - e2) * (j as f64).sin(), (e + e2) * (s * j as f64).cos());
            }
        }
        let rhs = rhs.enforce_symmetry();
        let (w, mu) = solve_projected_w(&psi0, &rhs, k).unwrap();
        assert!(chi_component(&w.coeffs[k], &d.grid).abs() <= 1e-13);
        let chi: Vec<Complex64> = d.grid.points().iter().map(|&x| Complex64::new(0.0, chi0(x))).collect();
        let mut res = 0.0f64;
        for j in 1..=d.n_modes {
            let t = apply_sector_operator(&psi0, &w.coeffs[j], j, d.width, &d.grid);
            for i in 0..d.nx() {
                let extra = if j == k { -chi[i] * mu } else { Complex64::new(0.0, 0.0) };
                res = res.max((t[i] + extra - rhs.coeffs[j][i]).norm());
            }
        }
        assert!(res <= 1e-10, "{res}");
        ratios.push(h2_norm(&w) / rhs.l2_norm_sq().sqrt());
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    assert!(hi < 50.0 && hi / lo < 10.0, "{ratios:?}");
}

fn h2_norm(w: &SectorField) -> f64 {
    let d = w.domain;
    let h = d.grid.h();
    let mut total = 0.0;
    for (j, line) in w.coeffs.iter().enumerate() {
        let kk = d.wavenumber(j).powi(2);
        let s = if j == 0 { d.width } else { 0.5 * d.width };
        for i in 1..d.nx() - 1 {
            let lap = (line[i + 1] - 2.0 * line[i] + line[i - 1]) / (h * h) - line[i] * kk;
            let dx = (line[i + 1] - line[i - 1]) / (2.0 * h);
            total += s * h * (line[i].norm_sqr() + dx.norm_sqr() * (1.0 + kk) + lap.norm_sqr());
        }
    }
    total.sqrt()
}

#[test]
fn fixed_point_examples() {
    let k = 1;
    let d = domain(critical(k) + 0.1);
    let opts = FixedPointOptions::default();
    let trivial = fixed_point(d, k, 0.0, &opts).unwrap();
    assert_eq!(trivial.history.len(), 1);
    assert!(max_diff(&trivial.psi0, &s0_line(&d)) <= 1e-13);
    assert!(trivial.w.coeffs.iter().flatten().all(|v| v.norm() <= 1e-13));

    let plus = fixed_point(d, k, 0.1, &opts).unwrap();
    let minus = fixed_point(d, k, -0.1, &opts).unwrap();
    let conj: Vec<Complex64> = plus.psi0.iter().map(|v| v.conj()).collect();
    assert!(max_diff(&minus.psi0, &conj) <= 1e-10);
    assert!(minus.w.max_coeff_diff(&plus.w.conj()) <= 1e-10);
    assert!(plus.orthogonality_defect().abs() <= 1e-10);
    assert!(plus.w.symmetry_defect() <= 1e-14);
    assert!(plus.psi0[d.grid.center()].norm() <= 1e-15);

    let half = fixed_point(d, k, 0.05, &opts).unwrap();
    let s0 = s0_line(&d);
    let wn = |s: &SectorField| s.coeffs.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let r0 = max_diff(&plus.psi0, &s0) / max_diff(&half.psi0, &s0);
    let rw = wn(&plus.w) / wn(&half.w);
    assert!((r0 - 4.0).abs() < 0.4, "{r0}");
    assert!((rw - 4.0).abs() < 0.4, "{rw}");
}

#[test]
fn fixed_point_contracts() {
    let k = 1;
    let d = domain(critical(k) + 0.1);
    let s = fixed_point(d, k, 0.3, &FixedPointOptions::default()).unwrap();
    for w in s.history[1..].windows(2) {
        assert!(w[1] <= 0.5 * w[0], "{:?}", s.history);
    }
    assert!(complement_residual(&s) <= 1e-9);
}

#[test]
fn bifurcation_function_at_zero_and_oddness() {
    let k = 1;
    let t = domain(1.0);
    let opts = FixedPointOptions::default();
    for width in [critical(k) - 0.2, critical(k) + 0.2] {
        assert!(evaluate_j(&t, width, k, 0.0, &opts).unwrap().abs() <= 1e-10);
        for lam in [0.05, 0.2] {
            let a = evaluate_j(&t, width, k, lam, &opts).unwrap();
            let b = evaluate_j(&t, width, k, -lam, &opts).unwrap();
            assert!((a + b).abs() <= 1e-10);
        }
    }
}

#[test]
fn positive_root_exists_only_above_critical_width() {
    let k = 1;
    let t = domain(1.0);
    let opts = FixedPointOptions::default();
    let lambdas: Vec<f64> = (1..=10).map(|i| 0.05 * i as f64).collect();
    let dk = critical(k);
    let surf = j_surface(&t, k, &[dk - 0.2, dk + 0.2], &lambdas, &opts, ExecMode::Parallel);
    let signs = |row: &[Option<f64>]| row.iter().map(|v| v.unwrap().signum()).collect::<Vec<_>>();
    let below = signs(&surf[0]);
    let above = signs(&surf[1]);
    assert!(below.iter().all(|s| *s > 0.0), "{below:?}");
    assert!(above.first() == Some(&-1.0) && above.last() == Some(&1.0), "{above:?}");
    assert_eq!(surf, j_surface(&t, k, &[dk - 0.2, dk + 0.2], &lambdas, &opts, ExecMode::Sequential));
}

#[test]
fn root_amplitude_follows_square_root_law() {
    let k = 1;
    let dk = critical(k);
    let coeffs = compute_coefficients(401, 20.0).unwrap();
    let opts = FixedPointOptions::default();
    let mut scaled = Vec::new();
    for eps in [0.04f64, 0.02, 0.01] {
        let guess = coeffs.lambda_reduced * eps.sqrt();
        let (lam, state) = solve_lambda_star(domain(dk * (1.0 + eps)), k, guess, &opts).unwrap();
        assert!(bifurcation_j(&state).abs() <= 1e-10);
        scaled.push(lam / eps.sqrt());
    }
    // The scaled root approaches `√(12√2/ω)` with ω the third λ-derivative of J over d_k.
    let last = scaled[2];
    assert!((last / coeffs.lambda_reduced - 1.0).abs() < 0.05, "{scaled:?}");
    assert!((scaled[1] - last).abs() < (scaled[0] - scaled[1]).abs());
}

#[test]
fn derivative_probe_at_onset() {
    let k = 1;
    let dk = critical(k);
    let coeffs = compute_coefficients(401, 20.0).unwrap();
    let t = domain(1.0);
    let table =
        probe_j_derivatives(&t, k, dk, &ProbeSteps::default(), &FixedPointOptions::default(), ExecMode::Parallel)
            .unwrap();
    assert!((table.dl_j.value + 2.0 * SQRT_2).abs() < 1e-2, "{}", table.dl_j.value);
    for e in [table.d_j, table.l_j, table.dd_j, table.ll_j] {
        assert!(e.value.abs() <= 1e-6, "{e:?}");
    }
    assert!(table.j.abs() <= 1e-6);
    assert!(table.oddness_defect <= 1e-10);
    let omega = table.lll_j.value / dk;
    assert!((omega / coeffs.omega_reduced - 1.0).abs() < 2e-2, "{omega}");
}
