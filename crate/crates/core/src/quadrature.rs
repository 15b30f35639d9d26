//! Small quadrature toolkit: Gauss-Legendre rules, the Hurwitz zeta function used
//! for periodized kernels, and Simpson's rule on non-uniform time grids.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Hurwitz zeta `ζ(s, a) = Σ_{m≥0} (m + a)^{−s}` for `s > 1`, `a > 0`, by
/// Euler-Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    const B2K: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let terms = 16;
    let mut sum: f64 = (0..terms).map(|m| (m as f64 + a).powf(-s)).sum();
    let x = terms as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Σ_k B_{2k}/(2k)! · s(s+1)…(s+2k−2) · x^{−s−2k+1}
    let mut rising = s;
    let mut factorial = 2.0;
    let mut power = x.powf(-s - 1.0);
    for (k, b) in B2K.iter().enumerate() {
        let term = b / factorial * rising * power;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        let kk = (k + 1) as f64;
        rising *= (s + 2.0 * kk - 1.0) * (s + 2.0 * kk);
        factorial *= (2.0 * kk + 1.0) * (2.0 * kk + 2.0);
        power /= x * x;
    }
    sum
}

/// Composite Simpson rule on a non-uniform grid. An odd number of intervals is
/// closed with the quadratic through the last three points.
pub fn simpson(t: &[f64], y: &[f64]) -> f64 {
    assert_eq!(t.len(), y.len());
    match t.len() {
        0 | 1 => 0.0,
        2 => 0.5 * (t[1] - t[0]) * (y[0] + y[1]),
        len => {
            let mut total = 0.0;
            let mut i = 0;
            while i + 2 < len {
                total += simpson_pair(t[i], t[i + 1], t[i + 2], y[i], y[i + 1], y[i + 2]);
                i += 2;
            }
            if i + 1 < len {
                total += last_interval(&t[len - 3..], &y[len - 3..]);
            }
            total
        }
    }
}

/// Running Simpson integral, one value per sample.
pub fn cumulative_simpson(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut acc = CumulativeSimpson::default();
    t.iter().zip(y).map(|(&t, &y)| acc.push(t, y)).collect()
}

/// Incremental form of [`cumulative_simpson`].
#[derive(Debug, Clone, Default)]
pub struct CumulativeSimpson {
    t: Vec<f64>,
    y: Vec<f64>,
    // Integral up to the latest even-indexed sample.
    even_total: f64,
}

impl CumulativeSimpson {
    pub fn push(&mut self, t: f64, y: f64) -> f64 {
        self.t.push(t);
        self.y.push(y);
        let len = self.t.len();
        match len {
            1 => 0.0,
            2 => 0.5 * (self.t[1] - self.t[0]) * (self.y[0] + self.y[1]),
            _ if len % 2 == 1 => {
                let i = len - 3;
                self.even_total += simpson_pair(
                    self.t[i],
                    self.t[i + 1],
                    self.t[i + 2],
                    self.y[i],
                    self.y[i + 1],
                    self.y[i + 2],
                );
                self.even_total
            }
            _ => self.even_total + last_interval(&self.t[len - 3..], &self.y[len - 3..]),
        }
    }
}

fn simpson_pair(t0: f64, t1: f64, t2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    let h0 = t1 - t0;
    let h1 = t2 - t1;
    let hs = h0 + h1;
    hs / 6.0 * ((2.0 - h1 / h0) * y0 + hs * hs / (h0 * h1) * y1 + (2.0 - h0 / h1) * y2)
}

// ∫_{t1}^{t2} of the quadratic through three points.
fn last_interval(t: &[f64], y: &[f64]) -> f64 {
    let (t0, t1, t2) = (t[0], t[1], t[2]);
    let h0 = t1 - t0;
    let h1 = t2 - t1;
    let w0 = -h1.powi(3) / (6.0 * h0 * (h0 + h1));
    let w1 = h1 * (h1 + 3.0 * h0) / (6.0 * h0);
    let w2 = h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
    w0 * y[0] + w1 * y[1] + w2 * y[2]
}
