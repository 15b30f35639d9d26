//! Periodic grid, transforms, dealiased products and discrete norms.
//!
//! Spectral coefficients are stored in FFT order (`m = 0, 1, …, n/2, −n/2+1, …, −1`)
//! with the normalization `c_m = (1/n) Σ_j f_j e^{−i k_m x_j}`, so a constant field
//! `f ≡ a` has `c_0 = a`. The Nyquist bin `m = n/2` is reported with the positive
//! wavenumber `π n / L`.

use std::borrow::Cow;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type GridRef = Arc<Grid>;

/// Uniform collocation grid on `[0, L)` with cached FFT plans.
pub struct Grid {
    n: usize,
    period: f64,
    dx: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    padded_forward: Arc<dyn Fft<f64>>,
    padded_inverse: Arc<dyn Fft<f64>>,
    planner: Mutex<FftPlanner<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("period", &self.period)
            .finish()
    }
}

/// Builds the grid `x_i = i L / n` together with its wavenumber table.
pub fn make_grid(n: usize, period: f64) -> Result<GridRef> {
    Grid::new(n, period)
}

impl Grid {
    pub fn new(n: usize, period: f64) -> Result<GridRef> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidPeriod(period));
        }
        let base = 2.0 * std::f64::consts::PI / period;
        let wavenumbers = (0..n).map(|i| base * mode_number(i, n) as f64).collect();
        let mut planner = FftPlanner::new();
        let padded = 3 * n / 2;
        Ok(Arc::new(Grid {
            n,
            period,
            dx: period / n as f64,
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            padded_forward: planner.plan_fft_forward(padded),
            padded_inverse: planner.plan_fft_inverse(padded),
            planner: Mutex::new(planner),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Fundamental wavenumber `2π / L`.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }

    /// Largest resolved wavenumber `π n / L` (the Nyquist bin).
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.period
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Signed mode number of storage slot `index`.
    pub fn mode(&self, index: usize) -> i64 {
        mode_number(index, self.n)
    }

    /// Storage slot of signed mode `m`, for `−n/2 < m ≤ n/2`.
    pub fn index_of(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || (self.n == other.n && self.period == other.period)
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.n);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.n);
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Alias-free product of two coefficient tables: both are zero-padded to `3n/2`
    /// modes, multiplied pointwise and truncated back. The Nyquist bin of the
    /// result is zero.
    pub fn dealiased_product_coeffs(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let m = 3 * n / 2;
        let mut pa = self.pad(a, m);
        let mut pb = self.pad(b, m);
        self.padded_inverse.process(&mut pa);
        self.padded_inverse.process(&mut pb);
        let mut prod: Vec<Complex64> = pa
            .iter()
            .zip(&pb)
            .map(|(x, y)| Complex64::new(x.re * y.re, 0.0))
            .collect();
        self.padded_forward.process(&mut prod);
        let scale = 1.0 / m as f64;
        let half = n / 2;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for mode in 0..half as i64 {
            out[mode as usize] = prod[mode as usize] * scale;
            if mode > 0 {
                out[n - mode as usize] = prod[m - mode as usize] * scale;
            }
        }
        out
    }

    // Copies |m| < n/2 into a table of length `len`; the Nyquist bin is dropped.
    fn pad(&self, coeffs: &[Complex64], len: usize) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for mode in 0..(n / 2) {
            out[mode] = coeffs[mode];
            if mode > 0 {
                out[len - mode] = coeffs[n - mode];
            }
        }
        out
    }

    /// Band-limited interpolation of `coeffs` onto the grid refined by `factor`.
    pub fn interpolate(&self, coeffs: &[Complex64], factor: usize) -> Vec<f64> {
        assert!(factor >= 1, "refinement factor must be positive");
        if factor == 1 {
            return self.inverse(coeffs);
        }
        let n = self.n;
        let len = n * factor;
        let mut buf = self.pad(coeffs, len);
        let nyq = coeffs[n / 2] * 0.5;
        buf[n / 2] = nyq;
        buf[len - n / 2] = nyq;
        let plan = self
            .planner
            .lock()
            .expect("fft planner poisoned")
            .plan_fft_inverse(len);
        plan.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

fn mode_number(index: usize, n: usize) -> i64 {
    if index <= n / 2 {
        index as i64
    } else {
        index as i64 - n as i64
    }
}

/// A real scalar field with lazily synchronized physical and spectral views.
#[derive(Clone)]
pub struct SpectralField {
    grid: GridRef,
    physical: Vec<f64>,
    spectral: Vec<Complex64>,
    physical_current: bool,
    spectral_current: bool,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("physical_current", &self.physical_current)
            .field("spectral_current", &self.spectral_current)
            .finish()
    }
}

impl SpectralField {
    pub fn zeros(grid: &GridRef) -> Self {
        let n = grid.n();
        SpectralField {
            grid: grid.clone(),
            physical: vec![0.0; n],
            spectral: vec![Complex64::new(0.0, 0.0); n],
            physical_current: true,
            spectral_current: true,
        }
    }

    pub fn from_physical(grid: &GridRef, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        Ok(SpectralField {
            grid: grid.clone(),
            physical: values,
            spectral: Vec::new(),
            physical_current: true,
            spectral_current: false,
        })
    }

    pub fn from_fn(grid: &GridRef, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        SpectralField {
            grid: grid.clone(),
            physical: values,
            spectral: Vec::new(),
            physical_current: true,
            spectral_current: false,
        }
    }

    pub fn from_spectral(grid: &GridRef, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField {
            grid: grid.clone(),
            physical: Vec::new(),
            spectral: coeffs,
            physical_current: false,
            spectral_current: true,
        })
    }

    pub fn grid(&self) -> &GridRef {
        &self.grid
    }

    pub fn is_physical_current(&self) -> bool {
        self.physical_current
    }

    pub fn is_spectral_current(&self) -> bool {
        self.spectral_current
    }

    /// Point values, transforming on the fly if the physical view is stale.
    pub fn physical(&self) -> Cow<'_, [f64]> {
        if self.physical_current {
            Cow::Borrowed(&self.physical)
        } else {
            Cow::Owned(self.grid.inverse(&self.spectral))
        }
    }

    /// Spectral coefficients, transforming on the fly if the spectral view is stale.
    pub fn spectral(&self) -> Cow<'_, [Complex64]> {
        if self.spectral_current {
            Cow::Borrowed(&self.spectral)
        } else {
            Cow::Owned(self.grid.forward(&self.physical))
        }
    }

    /// Makes the spectral view current.
    pub fn to_spectral(&mut self) -> &mut Self {
        if !self.spectral_current {
            self.spectral = self.grid.forward(&self.physical);
            self.spectral_current = true;
        }
        self
    }

    /// Makes the physical view current.
    pub fn to_physical(&mut self) -> &mut Self {
        if !self.physical_current {
            self.physical = self.grid.inverse(&self.spectral);
            self.physical_current = true;
        }
        self
    }

    /// Mutable point values; the spectral view becomes stale.
    pub fn physical_mut(&mut self) -> &mut [f64] {
        self.to_physical();
        self.spectral_current = false;
        &mut self.physical
    }

    /// Mutable coefficients; the physical view becomes stale.
    pub fn spectral_mut(&mut self) -> &mut [Complex64] {
        self.to_spectral();
        self.physical_current = false;
        &mut self.spectral
    }

    /// Re-derives the spectral view from the point values so the field is fully
    /// determined by its samples.
    pub fn canonicalize(&mut self) {
        self.to_physical();
        self.spectral = self.grid.forward(&self.physical);
        self.spectral_current = true;
    }

    pub fn is_finite(&self) -> bool {
        if self.physical_current {
            self.physical.iter().all(|v| v.is_finite())
        } else {
            self.spectral.iter().all(|c| c.re.is_finite() && c.im.is_finite())
        }
    }

    /// Multiplies every coefficient by `symbol(index, k)`.
    pub fn map_spectral(&self, symbol: impl Fn(usize, f64) -> Complex64) -> SpectralField {
        let coeffs = self.spectral();
        let k = self.grid.wavenumbers();
        let out = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * symbol(i, k[i]))
            .collect();
        SpectralField::from_spectral(&self.grid, out).expect("length preserved")
    }

    /// `a·self + b·other`, evaluated in whichever view both have current.
    pub fn linear_combination(&self, a: f64, other: &SpectralField, b: f64) -> Result<SpectralField> {
        self.check_grid(other)?;
        if self.spectral_current && other.spectral_current {
            let out = self
                .spectral
                .iter()
                .zip(&other.spectral)
                .map(|(x, y)| x * a + y * b)
                .collect();
            SpectralField::from_spectral(&self.grid, out)
        } else {
            let (x, y) = (self.physical(), other.physical());
            let out = x.iter().zip(y.iter()).map(|(x, y)| a * x + b * y).collect();
            SpectralField::from_physical(&self.grid, out)
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.linear_combination(1.0, other, -1.0)
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.physical.iter_mut().for_each(|v| *v *= a);
        out.spectral.iter_mut().for_each(|c| *c *= a);
        out
    }

    pub fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn mean(&self) -> f64 {
        if self.spectral_current {
            self.spectral[0].re
        } else {
            self.physical.iter().sum::<f64>() / self.physical.len() as f64
        }
    }

    pub fn max(&self) -> f64 {
        self.physical().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.physical().iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Spectral derivative: multiplication by `(i k)^order`. Odd orders zero the
/// Nyquist bin so real fields stay real.
pub fn derivative(f: &SpectralField, order: u32) -> SpectralField {
    let nyq = f.grid().nyquist_index();
    let odd = order % 2 == 1;
    f.map_spectral(|i, k| {
        if odd && i == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k).powu(order)
        }
    })
}

/// Pointwise product computed with 3/2 zero padding; exact on modes `|m| < n/2`.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_grid(g)?;
    let coeffs = f.grid().dealiased_product_coeffs(&f.spectral(), &g.spectral());
    SpectralField::from_spectral(f.grid(), coeffs)
}

/// Trapezoidal `L^p` norm over one period; `p = ∞` gives the grid maximum.
pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("L^p exponent must be ≥ 1, got {p}")));
    }
    Ok(lp_norm_of_samples(&f.physical(), f.grid().dx(), p))
}

pub(crate) fn lp_norm_of_samples(values: &[f64], dx: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    }
    if p == 1.0 {
        return dx * values.iter().map(|v| v.abs()).sum::<f64>();
    }
    if p == 2.0 {
        return (dx * values.iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    (dx * values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
}

/// Parseval-weighted Sobolev norm. The homogeneous variant uses `|k|^s` and drops
/// the zero mode; the inhomogeneous one uses `(1 + k²)^{s/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64, homogeneous: bool) -> f64 {
    let coeffs = f.spectral();
    let k = f.grid().wavenumbers();
    let sum: f64 = coeffs
        .iter()
        .zip(k)
        .map(|(c, &k)| {
            let w = if homogeneous {
                if k == 0.0 {
                    0.0
                } else {
                    k.abs().powf(2.0 * s)
                }
            } else {
                (1.0 + k * k).powf(s)
            };
            w * c.norm_sqr()
        })
        .sum();
    (f.grid().period() * sum).sqrt()
}

/// `∫ f g dx` over one period, evaluated from the coefficients.
pub fn inner_product(f: &SpectralField, g: &SpectralField) -> Result<f64> {
    f.check_grid(g)?;
    let (a, b) = (f.spectral(), g.spectral());
    let sum: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum();
    Ok(f.grid().period() * sum)
}

/// `‖f‖²_{L²}` from the coefficients.
pub fn spectral_energy(f: &SpectralField) -> f64 {
    f.grid().period() * f.spectral().iter().map(|c| c.norm_sqr()).sum::<f64>()
}

/// Fraction of `L²` energy carried by the top eighth of the resolved modes,
/// `|m| > 3n/8`.
pub fn tail_fraction(f: &SpectralField) -> f64 {
    let n = f.grid().n() as i64;
    let cutoff = 3 * n / 8;
    let coeffs = f.spectral();
    let mut total = 0.0;
    let mut tail = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if f.grid().mode(i).abs() > cutoff {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn grid_of_eight() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        assert!((g.point(1) - PI / 4.0).abs() < 1e-15);
        let mut k: Vec<i64> = g.wavenumbers().iter().map(|k| k.round() as i64).collect();
        k.sort();
        assert_eq!(k, vec![-3, -2, -1, 0, 1, 2, 3, 4]);
        assert_eq!(g.wavenumbers().iter().filter(|&&k| k == 0.0).count(), 1);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(make_grid(7, 2.0 * PI), Err(Error::InvalidGridSize(7))));
        assert!(matches!(make_grid(4, 2.0 * PI), Err(Error::InvalidGridSize(4))));
        assert!(matches!(make_grid(16, 0.0), Err(Error::InvalidPeriod(_))));
        assert!(matches!(make_grid(16, -1.0), Err(Error::InvalidPeriod(_))));
    }

    #[test]
    fn large_period_grid() {
        let l = 64.0 * PI;
        let g = make_grid(1024, l).unwrap();
        assert!((g.dx() - l / 1024.0).abs() < 1e-15);
        let kmax = g.wavenumbers().iter().fold(0.0_f64, |m, k| m.max(k.abs()));
        assert!((kmax - 16.0).abs() < 1e-12);
        assert!((g.k_max() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(&g, |_| 1.0);
        let c = f.spectral();
        assert!((c[0].re - 1.0).abs() < 1e-15);
        assert!(c[1..].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn single_harmonic_has_two_modes() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(&g, |x| (3.0 * x).cos());
        let c = f.spectral();
        for (i, c) in c.iter().enumerate() {
            let m = g.mode(i);
            if m.abs() == 3 {
                assert!((c.re - 0.5).abs() < 1e-14 && c.im.abs() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14, "mode {m}: {c}");
            }
        }
    }

    #[test]
    fn derivatives_of_harmonics() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let s = SpectralField::from_fn(&g, f64::sin);
        let ds = derivative(&s, 1);
        let expect: Vec<f64> = g.points().iter().map(|x| x.cos()).collect();
        assert_close(&ds.physical(), &expect, 1e-12);

        let c2 = SpectralField::from_fn(&g, |x| (2.0 * x).cos());
        let d2 = derivative(&c2, 2);
        let expect: Vec<f64> = g.points().iter().map(|x| -4.0 * (2.0 * x).cos()).collect();
        assert_close(&d2.physical(), &expect, 1e-12);

        let one = SpectralField::from_fn(&g, |_| 3.5);
        assert!(derivative(&one, 1).physical().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn cos_squared_is_resolved() {
        let g = make_grid(8, 2.0 * PI).unwrap();
        let c = SpectralField::from_fn(&g, f64::cos);
        let p = dealiased_product(&c, &c).unwrap();
        let expect: Vec<f64> = g.points().iter().map(|x| 0.5 * (1.0 + (2.0 * x).cos())).collect();
        assert_close(&p.physical(), &expect, 1e-14);
    }

    #[test]
    fn product_with_one_is_identity() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(&g, |x| x.sin() + 0.3 * (5.0 * x).cos());
        let one = SpectralField::from_fn(&g, |_| 1.0);
        let p = dealiased_product(&f, &one).unwrap();
        assert_close(&p.physical(), &f.physical(), 1e-14);
    }

    #[test]
    fn top_mode_square_matches_fine_grid_truncation() {
        // Oracle: the same product sampled on a 4n grid, truncated to |m| < n/2.
        let n = 32;
        let g = make_grid(n, 2.0 * PI).unwrap();
        let fine = make_grid(4 * n, 2.0 * PI).unwrap();
        let kmax = (n / 2 - 1) as f64;
        let f = SpectralField::from_fn(&g, |x| (kmax * x).sin());
        let p = dealiased_product(&f, &f).unwrap();
        let exact = SpectralField::from_fn(&fine, |x| (kmax * x).sin().powi(2));
        let ec = exact.spectral();
        let pc = p.spectral();
        for i in 0..n {
            let m = g.mode(i);
            let expect = if m.abs() < (n / 2) as i64 {
                ec[fine.index_of(m)]
            } else {
                Complex64::new(0.0, 0.0)
            };
            assert!((pc[i] - expect).norm() < 1e-14, "mode {m}");
        }
        assert!((pc[0].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = make_grid(16, 2.0 * PI).unwrap();
        let b = make_grid(32, 2.0 * PI).unwrap();
        let f = SpectralField::zeros(&a);
        let g = SpectralField::zeros(&b);
        assert!(matches!(dealiased_product(&f, &g), Err(Error::GridMismatch)));
    }

    #[test]
    fn lp_norm_examples() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let two = SpectralField::from_fn(&g, |_| 2.0);
        assert!((lp_norm(&two, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        let c = SpectralField::from_fn(&g, f64::cos);
        assert!((lp_norm(&c, 2.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        let g256 = make_grid(256, 2.0 * PI).unwrap();
        let s = SpectralField::from_fn(&g256, f64::sin);
        assert!((lp_norm(&s, f64::INFINITY).unwrap() - 1.0).abs() < 1e-4);
        assert!(lp_norm(&s, 0.5).is_err());
    }

    #[test]
    fn sobolev_examples() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let c = SpectralField::from_fn(&g, f64::cos);
        let l2 = lp_norm(&c, 2.0).unwrap();
        for s in [0.25, 0.5, 1.5, 3.0] {
            assert!((sobolev_norm(&c, s, true) - l2).abs() < 1e-12);
        }
        let c4 = SpectralField::from_fn(&g, |x| (4.0 * x).cos());
        let l2 = lp_norm(&c4, 2.0).unwrap();
        assert!((sobolev_norm(&c4, 0.5, true) - 2.0 * l2).abs() < 1e-12);
        let one = SpectralField::from_fn(&g, |_| 1.0);
        assert_eq!(sobolev_norm(&one, 1.0, true), 0.0);
        let h1 = sobolev_norm(&one, 1.0, false);
        assert!((h1 - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tail_fraction_counts_top_modes() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let low = SpectralField::from_fn(&g, |x| (3.0 * x).cos());
        assert!(tail_fraction(&low) < 1e-28);
        let high = SpectralField::from_fn(&g, |x| (3.0 * x).cos() + (30.0 * x).cos());
        assert!((tail_fraction(&high) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn interpolation_reproduces_band_limited_field() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let f = SpectralField::from_fn(&g, |x| x.sin() + 0.5 * (3.0 * x).cos());
        let fine = g.interpolate(&f.spectral(), 4);
        for (i, v) in fine.iter().enumerate() {
            let x = i as f64 * g.dx() / 4.0;
            assert!((v - (x.sin() + 0.5 * (3.0 * x).cos())).abs() < 1e-13);
        }
    }
}
