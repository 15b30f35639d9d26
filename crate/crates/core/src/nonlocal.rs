//! Nonlocal operators as Fourier multipliers, a direct principal-value quadrature
//! of the fractional Laplacian, and the Hilbert-transform product identity.
//!
//! Every multiplier is zero on the mean mode (`sgn 0 = 0`, `|0|^s = 0` for all `s`),
//! and odd symbols vanish on the Nyquist bin so that real fields map to real fields.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::quadrature::{gauss_legendre, hurwitz_zeta};
use crate::spectral::{dealiased_product, lp_norm, GridRef, SpectralField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A diagonal Fourier-space operator.
#[derive(Debug, Clone)]
pub struct MultiplierOp {
    grid: GridRef,
    symbol: Vec<Complex64>,
    label: String,
}

impl MultiplierOp {
    /// Tabulates `symbol(index, k)` over the grid's wavenumbers.
    pub fn from_fn(grid: &GridRef, label: impl Into<String>, symbol: impl Fn(usize, f64) -> Complex64) -> Self {
        let symbol = grid
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(i, &k)| symbol(i, k))
            .collect();
        MultiplierOp {
            grid: grid.clone(),
            symbol,
            label: label.into(),
        }
    }

    /// `H`, symbol `−i·sgn(k)`.
    pub fn hilbert(grid: &GridRef) -> Self {
        let nyq = grid.nyquist_index();
        Self::from_fn(grid, "H", |i, k| {
            if i == nyq {
                ZERO
            } else {
                Complex64::new(0.0, -signum(k))
            }
        })
    }

    /// `Λ^s`, symbol `|k|^s`; negative `s` is well defined because the mean mode is 0.
    pub fn lambda(grid: &GridRef, s: f64) -> Self {
        Self::from_fn(grid, format!("Λ^{s}"), |_, k| Complex64::new(abs_pow(k, s), 0.0))
    }

    /// Inhomogeneous smoothing `(1 + k²)^{−α}`, zeroed on the mean mode.
    pub fn bessel_smoothing(grid: &GridRef, alpha: f64) -> Self {
        Self::from_fn(grid, format!("(1-∂xx)^-{alpha}"), |_, k| {
            if k == 0.0 {
                ZERO
            } else {
                Complex64::new((1.0 + k * k).powf(-alpha), 0.0)
            }
        })
    }

    /// `∂_x^order`; odd orders vanish on the Nyquist bin.
    pub fn derivative(grid: &GridRef, order: u32) -> Self {
        let nyq = grid.nyquist_index();
        Self::from_fn(grid, format!("∂x^{order}"), |i, k| {
            if order % 2 == 1 && i == nyq {
                ZERO
            } else {
                Complex64::new(0.0, k).powu(order)
            }
        })
    }

    pub fn grid(&self) -> &GridRef {
        &self.grid
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    pub fn symbol_mut(&mut self) -> &mut [Complex64] {
        &mut self.symbol
    }

    /// Composition `self ∘ other` (symbols multiply).
    pub fn compose(&self, other: &MultiplierOp) -> Result<MultiplierOp> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(MultiplierOp {
            grid: self.grid.clone(),
            symbol: self.symbol.iter().zip(&other.symbol).map(|(a, b)| a * b).collect(),
            label: format!("{}∘{}", self.label, other.label),
        })
    }

    pub fn scaled(mut self, factor: f64) -> MultiplierOp {
        self.symbol.iter_mut().for_each(|s| *s *= factor);
        self
    }

    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        if !self.grid.same_as(f.grid()) {
            return Err(Error::GridMismatch);
        }
        let coeffs = f.spectral();
        let out = coeffs.iter().zip(&self.symbol).map(|(c, s)| c * s).collect();
        SpectralField::from_spectral(f.grid(), out)
    }

    /// Checks `symbol(−k) = conj(symbol(k))` and `symbol(0) = 0`.
    pub fn check_invariants(&self) -> Result<()> {
        if self.symbol[0].norm() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{}: mean-mode symbol is {}",
                self.label, self.symbol[0]
            )));
        }
        let n = self.grid.n();
        for i in 1..n {
            let j = n - i;
            let d = self.symbol[j] - self.symbol[i].conj();
            let scale = self.symbol[i].norm().max(1.0);
            if d.norm() > 1e-14 * scale {
                return Err(Error::InvalidParameter(format!(
                    "{}: symbol is not Hermitian at mode {}",
                    self.label,
                    self.grid.mode(i)
                )));
            }
        }
        Ok(())
    }
}

fn signum(k: f64) -> f64 {
    if k > 0.0 {
        1.0
    } else if k < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn abs_pow(k: f64, s: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k.abs().powf(s)
    }
}

/// Hilbert transform `H f`.
pub fn hilbert(f: &SpectralField) -> SpectralField {
    let nyq = f.grid().nyquist_index();
    f.map_spectral(|i, k| if i == nyq { ZERO } else { Complex64::new(0.0, -signum(k)) })
}

/// `Λ^s f = |D|^s f`.
pub fn lambda_pow(f: &SpectralField, s: f64) -> SpectralField {
    f.map_spectral(|_, k| Complex64::new(abs_pow(k, s), 0.0))
}

/// Normalizing constant `c_γ` of the singular-kernel form of `Λ^γ`, fixed by
/// requiring `c_γ ∫ (1 − cos z) |z|^{−1−γ} dz = 1` over the real line.
pub fn kernel_constant(gamma: f64) -> Result<f64> {
    check_kernel_order(gamma)?;
    Ok(1.0 / (2.0 * one_minus_cos_moment(gamma)))
}

fn check_kernel_order(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "kernel order must lie in (0, 2), got {gamma}"
        )));
    }
    Ok(())
}

// ∫_0^∞ (1 − cos z) z^{−1−γ} dz by series on [0, 1], Gauss-Legendre panels on
// [1, Z] and a two-term asymptotic tail.
fn one_minus_cos_moment(gamma: f64) -> f64 {
    let s = 1.0 + gamma;
    let mut head = 0.0;
    let mut factorial = 1.0;
    for k in 1..40 {
        let two_k = 2 * k;
        factorial *= (two_k - 1) as f64 * two_k as f64;
        let term = 1.0 / (factorial * (two_k as f64 - gamma));
        head += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }

    let (nodes, weights) = gauss_legendre(16);
    let panels = 1600;
    let width = std::f64::consts::PI;
    let mut oscillatory = 0.0;
    for p in 0..panels {
        let a = 1.0 + p as f64 * width;
        let mid = a + 0.5 * width;
        for (x, w) in nodes.iter().zip(&weights) {
            let z = mid + 0.5 * width * x;
            oscillatory += 0.5 * width * w * z.cos() * z.powf(-s);
        }
    }
    let z = 1.0 + panels as f64 * width;
    let tail_cos = -z.sin() * z.powf(-s) + s * z.cos() * z.powf(-s - 1.0)
        + s * (s + 1.0) * z.sin() * z.powf(-s - 2.0);
    let cos_integral = oscillatory + tail_cos;
    head + 1.0 / gamma - cos_integral
}

/// Periodized principal-value quadrature of `Λ^γ f`, independent of the FFT.
///
/// Uses `Λ^γ f(x) = c_γ ∫_0^{L/2} D(z) K(z) dz` with the symmetric second difference
/// `D(z) = 2f(x) − f(x+z) − f(x−z)` and the image-summed kernel
/// `K(z) = Σ_m |z + mL|^{−1−γ}` (far images through the Hurwitz zeta function).
/// `D(z)/z²` is interpolated by piecewise quadratics against the weight `z² K(z)`;
/// the singular factor `z^{1−γ}` of the first panel is integrated exactly, which
/// replaces the excluded singular cell by its local Taylor contribution.
pub fn lambda_pv_oracle(f: &SpectralField, gamma: f64) -> Result<SpectralField> {
    check_kernel_order(gamma)?;
    let grid = f.grid();
    let weights = pv_weights(grid.n(), grid.period(), gamma)?;
    let values = f.physical();
    let n = grid.n();
    let out: Vec<f64> = (0..n)
        .map(|i| {
            let fi = values[i];
            weights
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, w)| w * (2.0 * fi - values[(i + j) % n] - values[(i + n - j) % n]))
                .sum()
        })
        .collect();
    SpectralField::from_physical(grid, out)
}

// Coefficients A_j (j = 0..=n/2, A_0 unused) with Λ^γ f(x_i) ≈ Σ_j A_j D_j(x_i).
fn pv_weights(n: usize, period: f64, gamma: f64) -> Result<Vec<f64>> {
    let c = kernel_constant(gamma)?;
    let h = period / n as f64;
    let half = n / 2;
    let s = 1.0 + gamma;
    let far = |z: f64| {
        period.powf(-s) * (hurwitz_zeta(s, 1.0 - z / period) + hurwitz_zeta(s, 1.0 + z / period))
    };
    let (nodes, gl) = gauss_legendre(8);
    // Node weights for ∫ E(z) w(z) dz, w(z) = z^{1−γ} + z² G(z).
    let mut node_w = vec![0.0; half + 1];
    let lagrange = |t: f64| [(t - 1.0) * (t - 2.0) / 2.0, -t * (t - 2.0), t * (t - 1.0) / 2.0];
    for pair in 0..half / 2 {
        let a = 2 * pair;
        let mut acc = [0.0; 3];
        for (x, wq) in nodes.iter().zip(&gl) {
            let t = 1.0 + x; // local coordinate in [0, 2]
            let z = (a as f64 + t) * h;
            let weight = if pair == 0 {
                z * z * far(z)
            } else {
                z.powf(1.0 - gamma) + z * z * far(z)
            };
            let l = lagrange(t);
            for q in 0..3 {
                acc[q] += wq * l[q] * weight * h;
            }
        }
        if pair == 0 {
            // Exact moments of t^{1−γ} on [0, 2] for the singular part.
            let mu = |p: f64| 2f64.powf(p + 2.0 - gamma) / (p + 2.0 - gamma);
            let scale = h.powf(2.0 - gamma);
            acc[0] += scale * 0.5 * (mu(2.0) - 3.0 * mu(1.0) + 2.0 * mu(0.0));
            acc[1] += scale * (-mu(2.0) + 2.0 * mu(1.0));
            acc[2] += scale * 0.5 * (mu(2.0) - mu(1.0));
        }
        for q in 0..3 {
            node_w[a + q] += acc[q];
        }
    }
    // E(0) = (4E(h) − E(2h))/3, E(z) = D(z)/z².
    let w0 = node_w[0];
    node_w[1] += 4.0 * w0 / 3.0;
    node_w[2] -= w0 / 3.0;
    node_w[0] = 0.0;
    Ok(node_w
        .iter()
        .enumerate()
        .map(|(j, w)| if j == 0 { 0.0 } else { c * w / ((j as f64 * h).powi(2)) })
        .collect())
}

/// Outcome of the product identity `2 H(f·Hf) = (Hf)² − f²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyReport {
    /// `L^∞` norm of `2H(f·Hf) − ((Hf)² − f²)`.
    pub residual: f64,
    /// `(‖g‖_{L¹} + ‖Hg‖_{L¹}) / ‖f‖²_{L²}` for `g = f·Hf`.
    pub hardy_ratio: f64,
}

/// Evaluates the product identity with dealiased products. Exact for mean-zero
/// fields whose bandwidth is at most `n/4`.
pub fn hardy_identity_residual(f: &SpectralField) -> Result<HardyReport> {
    let hf = hilbert(f);
    let g = dealiased_product(f, &hf)?;
    let hg = hilbert(&g);
    let hf2 = dealiased_product(&hf, &hf)?;
    let f2 = dealiased_product(f, f)?;
    let rhs = hf2.sub(&f2)?;
    let lhs = hg.scaled(2.0);
    let residual = lp_norm(&lhs.sub(&rhs)?, f64::INFINITY)?;
    let energy = lp_norm(f, 2.0)?.powi(2);
    let hardy_ratio = if energy == 0.0 {
        0.0
    } else {
        (lp_norm(&g, 1.0)? + lp_norm(&hg, 1.0)?) / energy
    };
    Ok(HardyReport {
        residual,
        hardy_ratio,
    })
}

/// Advecting velocity `u = N(θ)` of the model family.
pub fn velocity(theta: &SpectralField, spec: &ModelSpec) -> Result<SpectralField> {
    spec.check_velocity_law()?;
    let nyq = theta.grid().nyquist_index();
    Ok(theta.map_spectral(|i, k| if i == nyq { ZERO } else { spec.velocity_symbol(k) }))
}
