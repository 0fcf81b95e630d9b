//! Test oracles that share no code with the library.
#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    let tol = (0.5 * tol).max(1e-17);
    simpson_step(f, a, m, fa, flm, fm, left, tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, tol, depth - 1)
}

/// Unnormalized log-density of Beta(α, β) or Gamma(k, θ), shifted to be zero at
/// the mode so the kernel neither overflows nor underflows.
#[derive(Clone, Copy, Debug)]
pub enum Kernel {
    Beta(f64, f64),
    Gamma(f64, f64),
}

impl Kernel {
    fn raw_ln(&self, x: f64) -> f64 {
        match *self {
            Kernel::Beta(a, b) => (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln(),
            Kernel::Gamma(k, t) => (k - 1.0) * x.ln() - x / t,
        }
    }

    fn mode(&self) -> f64 {
        match *self {
            Kernel::Beta(a, b) => (a - 1.0) / (a + b - 2.0),
            Kernel::Gamma(k, t) => (k - 1.0) * t,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(x > self.lo() && x < self.hi()) {
            return 0.0;
        }
        (self.raw_ln(x) - self.raw_ln(self.mode())).exp()
    }

    pub fn lo(&self) -> f64 {
        0.0
    }

    /// Upper end of the integration range (the Gamma tail beyond it is
    /// negligible at double precision).
    pub fn hi(&self) -> f64 {
        match *self {
            Kernel::Beta(..) => 1.0,
            Kernel::Gamma(k, t) => t * (k + 40.0 * k.sqrt() + 60.0),
        }
    }

    /// Points around the bulk where the integration range is split.
    fn breaks(&self) -> Vec<f64> {
        let (lo, hi) = (self.lo(), self.hi());
        let (mean, sd) = match *self {
            Kernel::Beta(a, b) => {
                let s = a + b;
                (a / s, (a * b / (s * s * (s + 1.0))).sqrt())
            }
            Kernel::Gamma(k, t) => (k * t, k.sqrt() * t),
        };
        let mut pts = vec![lo, hi];
        for j in -8..=8 {
            let p = mean + j as f64 * sd;
            if p > lo && p < hi {
                pts.push(p);
            }
        }
        pts
    }

    pub fn normalizer(&self) -> f64 {
        integrate_pieces(&|x| self.eval(x), &self.breaks())
    }
}

/// Simpson over the union of sub-intervals delimited by `points`.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, points: &[f64]) -> f64 {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts.windows(2).map(|w| simpson(f, w[0], w[1], 1e-12)).sum()
}

/// `∫₀ˣ f / ∫ f` for the kernel.
pub fn oracle_cdf(k: Kernel, x: f64) -> f64 {
    let mut pts: Vec<f64> = k.breaks().into_iter().filter(|&p| p < x).collect();
    pts.push(x);
    integrate_pieces(&|t| k.eval(t), &pts) / k.normalizer()
}

/// Hellinger distance `√(½ ∫ (√f₁ − √f₂)²)` by quadrature.
pub fn oracle_hellinger(k1: Kernel, k2: Kernel) -> f64 {
    let (z1, z2) = (k1.normalizer(), k2.normalizer());
    let mut pts = k1.breaks();
    pts.extend(k2.breaks());
    let hi = k1.hi().max(k2.hi());
    pts.retain(|&p| p <= hi);
    let f = |x: f64| {
        let d = (k1.eval(x) / z1).sqrt() - (k2.eval(x) / z2).sqrt();
        d * d
    };
    (0.5 * integrate_pieces(&f, &pts)).sqrt()
}
