//! Small quadrature and differencing kernels shared by the tau map, the
//! phase integrals, and the chirp designer.

use crate::error::Result;

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F>(a: f64, b: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * f(mid + half * x)?;
    }
    Ok(acc * half)
}

/// Running integral of samples on a uniform grid with spacing `h`, using
/// the four-point (cubic) interval rule in the interior and one-sided
/// variants at the ends. Fourth order, exact for cubics.
pub fn cumulative_simpson(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let f = values;
    for j in 0..n - 1 {
        let piece = match n {
            2 => 0.5 * h * (f[0] + f[1]),
            3 => {
                if j == 0 {
                    h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
                } else {
                    h / 12.0 * (-f[0] + 8.0 * f[1] + 5.0 * f[2])
                }
            }
            _ => {
                if j == 0 {
                    h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
                } else if j == n - 2 {
                    h / 24.0 * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1])
                } else {
                    h / 24.0 * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2])
                }
            }
        };
        out[j + 1] = out[j] + piece;
    }
    out
}

/// Finite-difference weights for the `order`-th derivative at `x0` from
/// samples at `xs` (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// First derivative of sampled data at every node using a `width`-point
/// stencil, centered where possible and shifted inside near the ends.
pub fn differentiate(xs: &[f64], ys: &[f64], width: usize) -> Vec<f64> {
    let n = xs.len();
    let width = width.min(n).max(2);
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(width / 2).min(n - width);
            let stencil = &xs[lo..lo + width];
            fd_weights(xs[i], stencil, 1)
                .iter()
                .zip(&ys[lo..lo + width])
                .map(|(w, y)| w * y)
                .sum()
        })
        .collect()
}

/// Piecewise Lagrange interpolation on a uniform grid: each query uses the
/// `width` nodes surrounding it (shifted inside near the ends).
#[derive(Debug, Clone)]
pub struct LocalLagrange {
    start: f64,
    step: f64,
    values: Vec<f64>,
    width: usize,
}

impl LocalLagrange {
    /// `times` must be uniform; only the first entry and the spacing are used.
    pub fn new(times: &[f64], values: Vec<f64>, width: usize) -> Self {
        let n = times.len();
        assert!(n >= 2 && n == values.len(), "need matching samples");
        LocalLagrange {
            start: times[0],
            step: (times[n - 1] - times[0]) / (n - 1) as f64,
            width: width.clamp(2, n),
            values,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        let x = (t - self.start) / self.step;
        let j = (x.floor().max(0.0) as usize).min(n - 2);
        let lo = (j + 1).saturating_sub(self.width / 2).min(n - self.width);
        let mut acc = 0.0;
        for a in 0..self.width {
            let xa = (lo + a) as f64;
            if x == xa {
                return self.values[lo + a];
            }
            let mut w = 1.0;
            for b in 0..self.width {
                if b != a {
                    let xb = (lo + b) as f64;
                    w *= (x - xb) / (xa - xb);
                }
            }
            acc += w * self.values[lo + a];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_degree_nine() {
        let v = gauss_legendre(-0.3, 1.7, |x| Ok(x.powi(9) - 2.0 * x.powi(4) + 1.0)).unwrap();
        let anti = |x: f64| x.powi(10) / 10.0 - 0.4 * x.powi(5) + x;
        assert!((v - (anti(1.7) - anti(-0.3))).abs() < 1e-12);
    }

    #[test]
    fn cumulative_simpson_exact_for_cubics() {
        for n in [2usize, 3, 4, 5, 9] {
            let h = 0.25;
            let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
            let deg = if n == 2 {
                1
            } else if n == 3 {
                2
            } else {
                3
            };
            let p = |x: f64| match deg {
                1 => 1.0 - x,
                2 => 1.0 - x + 2.0 * x * x,
                _ => 1.0 - x + 2.0 * x * x - 0.5 * x * x * x,
            };
            let anti = |x: f64| match deg {
                1 => x - 0.5 * x * x,
                2 => x - 0.5 * x * x + 2.0 / 3.0 * x.powi(3),
                _ => x - 0.5 * x * x + 2.0 / 3.0 * x.powi(3) - 0.125 * x.powi(4),
            };
            let ys: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
            let cum = cumulative_simpson(&ys, h);
            for (x, c) in xs.iter().zip(&cum) {
                assert!((c - anti(*x)).abs() < 1e-14, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn fd_weights_central_second_order() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 1);
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
        let w2 = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w2[0] - 1.0).abs() < 1e-15 && (w2[1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn differentiate_high_order_on_sine() {
        let h = 0.05;
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * h).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let d = differentiate(&xs, &ys, 9);
        let err = xs
            .iter()
            .zip(&d)
            .map(|(x, d)| (d - x.cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn local_lagrange_reproduces_polynomials() {
        let xs: Vec<f64> = (0..20).map(|i| 0.5 + 0.1 * i as f64).collect();
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(4) - 0.1 * x.powi(7);
        let f = LocalLagrange::new(&xs, xs.iter().map(|&x| p(x)).collect(), 8);
        for x in [0.5, 0.537, 1.21, 2.3, 2.4] {
            assert!((f.eval(x) - p(x)).abs() < 1e-12, "{x}");
        }
        assert_eq!(f.eval(xs[7]), p(xs[7]));
    }
}
