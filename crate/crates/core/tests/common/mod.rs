//! Reference implementations used as test oracles. Nothing here calls into
//! the crate's quadrature, integrators or interpolants.
#![allow(dead_code)]

use num_complex::Complex64;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    Complex64::new(re, im)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    // split first so narrow features are not skipped by the coarse estimate
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (x0, x1) = (
                a + h * i as f64,
                if i + 1 == pieces {
                    b
                } else {
                    a + h * (i + 1) as f64
                },
            );
            let (f0, f1) = (f(x0), f(x1));
            let (m, fm, whole) = simpson(f, x0, f0, x1, f1);
            recurse(f, x0, f0, x1, f1, m, fm, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// Root of a monotone function by bisection.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lagrange-form polynomial through `(xs, ys)` evaluated at `x`.
pub fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut w = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if i != j {
                w *= (x - xj) / (xi - xj);
            }
        }
        sum += w * yi;
    }
    sum
}

/// First derivative by central differences with two Richardson levels.
pub fn richardson_derivative(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

pub type Mat2 = [[C; 2]; 2];

pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn apply(m: &Mat2, v: [C; 2]) -> [C; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// `exp(A)` for a 2x2 matrix through the Cayley-Hamilton closed form.
pub fn expm2(a: &Mat2) -> Mat2 {
    let tr = a[0][0] + a[1][1];
    let half = tr / 2.0;
    // A - (tr/2) I is traceless, and its square is -det * I
    let b = [[a[0][0] - half, a[0][1]], [a[1][0], a[1][1] - half]];
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let q = (-det).sqrt();
    let (ch, sh_over_q) = if q.norm() < 1e-8 {
        (c(1.0, 0.0) + q * q / 2.0, c(1.0, 0.0) + q * q / 6.0)
    } else {
        (q.cosh(), q.sinh() / q)
    };
    let scale = half.exp();
    [
        [
            scale * (ch + sh_over_q * b[0][0]),
            scale * sh_over_q * b[0][1],
        ],
        [
            scale * sh_over_q * b[1][0],
            scale * (ch + sh_over_q * b[1][1]),
        ],
    ]
}

/// Classical fixed-step RK4 for `y' = A(x) y` on two complex components.
pub fn rk4_linear(gen: &dyn Fn(f64) -> Mat2, y0: [C; 2], x0: f64, x1: f64, steps: usize) -> [C; 2] {
    let h = (x1 - x0) / steps as f64;
    let mut y = y0;
    let add = |y: [C; 2], k: [C; 2], s: f64| [y[0] + k[0] * s, y[1] + k[1] * s];
    for i in 0..steps {
        let x = x0 + h * i as f64;
        let k1 = apply(&gen(x), y);
        let k2 = apply(&gen(x + h / 2.0), add(y, k1, h / 2.0));
        let k3 = apply(&gen(x + h / 2.0), add(y, k2, h / 2.0));
        let k4 = apply(&gen(x + h), add(y, k3, h));
        for j in 0..2 {
            y[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
        }
    }
    y
}

/// Classical fixed-step RK4 for a real scalar ODE.
pub fn rk4_scalar(f: &dyn Fn(f64, f64) -> f64, y0: f64, x0: f64, x1: f64, steps: usize) -> f64 {
    let h = (x1 - x0) / steps as f64;
    let mut y = y0;
    for i in 0..steps {
        let x = x0 + h * i as f64;
        let k1 = f(x, y);
        let k2 = f(x + h / 2.0, y + h / 2.0 * k1);
        let k3 = f(x + h / 2.0, y + h / 2.0 * k2);
        let k4 = f(x + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

/// Constant-coefficient system with a gaussian (or flat) envelope and a
/// constant carrier, written out by hand.
#[derive(Debug, Clone, Copy)]
pub struct Analytic {
    pub omega_ab: f64,
    pub s: f64,
    pub mu_aa: f64,
    pub mu_bb: f64,
    pub mu_ab: f64,
    pub f0: f64,
    /// `None` is the flat envelope `m = 1`.
    pub gaussian: Option<(f64, f64)>,
    pub omega: f64,
}

impl Analytic {
    pub fn m(&self, t: f64) -> f64 {
        match self.gaussian {
            Some((c, w)) => (-0.5 * ((t - c) / w).powi(2)).exp(),
            None => 1.0,
        }
    }

    pub fn dm(&self, t: f64) -> f64 {
        match self.gaussian {
            Some((c, w)) => -(t - c) / (w * w) * self.m(t),
            None => 0.0,
        }
    }

    pub fn field(&self, t: f64) -> f64 {
        self.f0 * self.m(t) * (self.omega * t).cos()
    }

    pub fn field_derivative(&self, t: f64) -> f64 {
        self.f0
            * (self.dm(t) * (self.omega * t).cos()
                - self.m(t) * self.omega * (self.omega * t).sin())
    }

    pub fn tau_rate(&self, t: f64) -> f64 {
        self.f0 * self.m(t) * self.omega * self.mu_ab / (2.0 * self.omega_ab)
    }

    pub fn tau(&self, t0: f64, t: f64) -> f64 {
        adaptive_simpson(&|x| self.tau_rate(x), t0, t, 1e-14)
    }

    pub fn f_diag(&self, t: f64, mu_ii: f64) -> f64 {
        2.0 * mu_ii / self.mu_ab * self.omega_ab * t * (self.omega * t).sin()
    }

    /// Lab-frame generator with the exact field derivative.
    pub fn lab_generator(&self, t: f64) -> Mat2 {
        let pre = self.field_derivative(t) * self.mu_ab / self.omega_ab;
        let ph = self.s * self.omega_ab * t;
        let i = c(0.0, 1.0);
        [
            [
                -i * (self.mu_aa / self.mu_ab * self.omega_ab * t) * pre,
                C::from_polar(1.0, ph) * pre,
            ],
            [
                -C::from_polar(1.0, -ph) * pre,
                -i * (self.mu_bb / self.mu_ab * self.omega_ab * t) * pre,
            ],
        ]
    }

    /// Transformed-frame generator at lab time `t`, with or without the
    /// sum-frequency terms.
    pub fn tau_generator(&self, t: f64, full: bool) -> Mat2 {
        let dm = (self.omega - self.omega_ab) * t;
        let dp = (self.omega + self.omega_ab) * t;
        let s = self.s;
        let mut up = C::from_polar(1.0, -s * dm);
        let mut down = C::from_polar(1.0, s * dm);
        if full {
            up -= C::from_polar(1.0, s * dp);
            down -= C::from_polar(1.0, -s * dp);
        }
        let mi = c(0.0, -1.0);
        [
            [mi * -self.f_diag(t, self.mu_aa), mi * s * up],
            [mi * s * down, mi * -self.f_diag(t, self.mu_bb)],
        ]
    }
}

/// Constant-coefficient system with a gaussian envelope, for checking a
/// designed chirp from the outside.
#[derive(Debug, Clone, Copy)]
pub struct DesignCase {
    pub omega_ab: f64,
    pub s: f64,
    pub mu_aa: f64,
    pub mu_bb: f64,
    pub mu_ab: f64,
    pub f0: f64,
    pub center: f64,
    pub width: f64,
}

impl DesignCase {
    pub fn m(&self, t: f64) -> f64 {
        (-0.5 * ((t - self.center) / self.width).powi(2)).exp()
    }

    /// `d/dtau [(omega - omega_ab) t] + s (f_alpha - f_beta)` at `t`, with the
    /// derivative taken by Richardson-extrapolated central differences of
    /// `omega` and `tau` built from the closed-form rate.
    pub fn residual(&self, omega: &dyn Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        let phase = |x: f64| (omega(x) - self.omega_ab) * x;
        let dphase = richardson_derivative(&phase, t, h);
        let w = omega(t);
        let rate = self.f0 * self.m(t) * w * self.mu_ab / (2.0 * self.omega_ab);
        let diff = 2.0 * (self.mu_aa - self.mu_bb) / self.mu_ab * self.omega_ab * t * (w * t).sin();
        dphase / rate + self.s * diff
    }
}
