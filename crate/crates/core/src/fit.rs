//! Small least-squares and extrapolation helpers.

/// Least-squares line `y ≈ a + b·x`, returned as `(a, b)`.
pub fn linear(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Least-squares slope of `y ≈ b·x`.
pub fn slope_through_origin(xs: &[f64], ys: &[f64]) -> f64 {
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    sxy / sxx
}

/// Repeated Richardson extrapolation of estimates at steps `s, s/2, s/4, …`
/// whose error expands in even powers `s², s⁴, …`. Returns the extrapolated
/// value and the magnitude of the last correction.
pub fn richardson_even(values: &[f64]) -> (f64, f64) {
    let mut table = values.to_vec();
    let mut correction = 0.0;
    let mut factor = 4.0;
    while table.len() > 1 {
        let next: Vec<f64> = table.windows(2).map(|w| w[1] + (w[1] - w[0]) / (factor - 1.0)).collect();
        correction = (next[next.len() - 1] - table[table.len() - 1]).abs();
        table = next;
        factor *= 4.0;
    }
    (table[0], correction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_and_extrapolation() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 2.0 * x).collect();
        let (a, b) = linear(&xs, &ys);
        assert!((a - 1.5).abs() < 1e-14 && (b + 2.0).abs() < 1e-14);
        let f = |s: f64| 3.0 + 2.0 * s * s - 5.0 * s.powi(4);
        let (v, _) = richardson_even(&[f(0.4), f(0.2), f(0.1)]);
        assert!((v - 3.0).abs() < 1e-12);
    }
}
