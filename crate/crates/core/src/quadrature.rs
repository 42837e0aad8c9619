//! Cumulative quadrature on uniform lattices.

/// Running integral ∫₀^{t_i} f on a uniform lattice of spacing `h`.
///
/// Even indices are composite Simpson sums. Odd indices add a three-point
/// partial-panel rule to the previous value, so every entry is exact for
/// quadratics and the global error is O(h⁴).
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    out[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    for i in 2..n {
        out[i] = if i % 2 == 0 {
            out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i])
        } else {
            out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i])
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sine_integral_is_fourth_order() {
        let err = |n: usize| {
            let h = std::f64::consts::PI / (n - 1) as f64;
            let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
            let c = cumulative_simpson(&f, h);
            (0..n).map(|i| (c[i] - (1.0 - (i as f64 * h).cos())).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(65), err(129));
        assert!(e1 < 1e-6);
        assert!(e1 / e2 > 14.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn short_inputs() {
        assert_eq!(cumulative_simpson(&[], 0.1), Vec::<f64>::new());
        assert_eq!(cumulative_simpson(&[3.0], 0.1), vec![0.0]);
        assert_eq!(cumulative_simpson(&[1.0, 3.0], 0.5), vec![0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn exact_on_quadratics(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, n in 3usize..40) {
            let h = 0.1;
            let f: Vec<f64> = (0..n).map(|i| { let t = i as f64 * h; a + b * t + c * t * t }).collect();
            let out = cumulative_simpson(&f, h);
            for (i, v) in out.iter().enumerate() {
                let t = i as f64 * h;
                let exact = a * t + b * t * t / 2.0 + c * t * t * t / 3.0;
                prop_assert!((v - exact).abs() < 1e-12 * (1.0 + exact.abs()));
            }
        }
    }
}
