use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};
use strip_vortex::analytic::{chi0, soliton, soliton_d1};
use strip_vortex::operators::{
    assemble_l0, assemble_strip_linearization, assemble_tk, discrete_critical_width, soliton_morse_scan, spectrum,
    tk_lowest_scan, L0Sign, LinearOperator1D, TOL_ZERO,
};
use strip_vortex::{ExecMode, SectorField, StripDomain, XGrid};

const D1: f64 = SQRT_2 * PI;

fn grid() -> XGrid {
    XGrid::new(20.0, 801).unwrap()
}

fn s0(g: &XGrid) -> Vec<Complex64> {
    g.sample(soliton).into_iter().map(|v| Complex64::new(v, 0.0)).collect()
}

fn l2_error(v: &[f64], profile: &[f64], g: &XGrid) -> f64 {
    let norm = g.trapezoid(&profile.iter().map(|a| a * a).collect::<Vec<_>>()).sqrt();
    g.trapezoid(&v.iter().zip(profile).map(|(a, b)| (a - b / norm).powi(2)).collect::<Vec<_>>()).sqrt()
}

#[test]
fn l0_minus_ground_state_is_chi0() {
    let g = grid();
    let sp = spectrum(&assemble_l0(L0Sign::Minus, g), 3).unwrap();
    assert!((sp.eigenvalues[0] + 0.5).abs() < 5e-4);
    assert!(l2_error(&sp.eigenvectors[0], &g.sample(chi0), &g) < 1e-3);
    assert!(sp.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    // Second eigenvalue sits at the discretized edge of the essential spectrum.
    assert!(sp.eigenvalues[1].abs() < 1e-4);
}

#[test]
fn l0_plus_kernel_is_soliton_derivative() {
    let g = grid();
    let sp = spectrum(&assemble_l0(L0Sign::Plus, g), 2).unwrap();
    assert!(sp.eigenvalues[0].abs() < 5e-4);
    assert!(l2_error(&sp.eigenvectors[0], &g.sample(soliton_d1), &g) < 1e-3);
    assert!(sp.eigenvalues[1] > 0.1);
}

#[test]
fn soliton_lies_in_kernel_of_l0_minus() {
    let g = grid();
    let r = assemble_l0(L0Sign::Minus, g).apply(&g.sample(soliton));
    let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max < 0.2 * g.h() * g.h(), "{max}");
}

#[test]
fn eigenvalues_converge_at_second_order() {
    let lowest = |nx: usize| {
        let g = XGrid::new(20.0, nx).unwrap();
        [
            spectrum(&assemble_l0(L0Sign::Minus, g), 1).unwrap().eigenvalues[0],
            spectrum(&assemble_l0(L0Sign::Plus, g), 1).unwrap().eigenvalues[0],
        ]
    };
    let (a, b, c) = (lowest(201), lowest(401), lowest(801));
    for s in 0..2 {
        let ratio = (a[s] - b[s]) / (b[s] - c[s]);
        assert!((ratio - 4.0).abs() < 0.2, "sign {s}: ratio {ratio}");
    }
}

#[test]
fn tk_vanishes_at_onset_and_is_positive_below() {
    let g = grid();
    let at = spectrum(&assemble_tk(&s0(&g), 1, D1, g).unwrap(), 1).unwrap();
    assert!(at.eigenvalues[0].abs() < 5e-4);
    let below = spectrum(&assemble_tk(&s0(&g), 1, D1 - 0.5, g).unwrap(), 1).unwrap();
    assert!(below.eigenvalues[0] > 0.0);
    let dh = discrete_critical_width(g, 1);
    assert!((dh - D1).abs() < 2e-4);
}

#[test]
fn tk_on_real_functions_is_shifted_l0_plus() {
    let g = XGrid::new(20.0, 201).unwrap();
    let (k, d) = (2, 7.3);
    let tk = assemble_tk(&s0(&g), k, d, g).unwrap();
    let lp = assemble_l0(L0Sign::Plus, g);
    let u = g.sample(|x| (-(x * x) / 8.0).exp() * x);
    let mut packed = vec![0.0; 2 * g.nx];
    for i in 0..g.nx {
        packed[2 * i] = u[i];
    }
    let t = tk.apply(&packed);
    let l = lp.apply(&u);
    let shift = (PI * k as f64 / d).powi(2);
    for i in 0..g.nx {
        assert!((t[2 * i] - l[i] - shift * u[i]).abs() < 1e-10);
        assert!(t[2 * i + 1].abs() < 1e-14);
    }
}

#[test]
fn spectrum_shift_and_residuals() {
    let g = XGrid::new(20.0, 401).unwrap();
    let op = assemble_tk(&s0(&g), 1, 5.0, g).unwrap();
    let c = 1.25;
    let op2 = LinearOperator1D::custom(g, 2, op.matrix().shifted(-c)).unwrap();
    let a = spectrum(&op, 4).unwrap();
    let b = spectrum(&op2, 4).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x + c - y).abs() < 1e-10, "{x} {y}");
    }
    assert!(a.residuals.iter().chain(&b.residuals).all(|r| *r <= 1e-8));
    assert!(spectrum(&op, 0).is_err());
}

#[test]
fn strip_linearization_is_symmetric() {
    let d = StripDomain::new(20.0, 6.0, 201, 3).unwrap();
    let mut f = SectorField::soliton(d);
    for i in 0..d.nx() {
        let x = d.grid.x(i);
        f.coeffs[1][i] = Complex64::new(0.1 * soliton(x) * chi0(x), 0.3 * chi0(x));
    }
    let op = assemble_strip_linearization(&f).unwrap();
    assert!(op.symmetry_defect() < 1e-10);
}

#[test]
fn negative_count_between_critical_widths() {
    let d = StripDomain::new(20.0, 1.0, 401, 3).unwrap();
    // One negative direction from sector 0, plus one per sector with d_j < d.
    let widths = [3.0, 0.5 * (D1 + 2.0 * D1), 0.5 * (2.0 * D1 + 3.0 * D1)];
    let counts = soliton_morse_scan(d, &widths, ExecMode::Parallel).unwrap();
    assert_eq!(counts, vec![1, 2, 3]);
    let op = assemble_strip_linearization(&SectorField::soliton(d.with_width(widths[1]).unwrap())).unwrap();
    assert_eq!(op.n_negative(TOL_ZERO), 2);
}

#[test]
fn sequential_and_parallel_scans_agree() {
    let g = XGrid::new(20.0, 201).unwrap();
    let widths: Vec<f64> = (0..8).map(|i| 4.0 + 0.1 * i as f64).collect();
    let a = tk_lowest_scan(g, 1, &widths, ExecMode::Sequential);
    let b = tk_lowest_scan(g, 1, &widths, ExecMode::Parallel);
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[1] < w[0]));
}
