//! Dyadic Littlewood-Paley blocks on the periodic grid, homogeneous Besov norms,
//! Bernstein ratios and commutator witnesses.
//!
//! The ball profile `χ` equals 1 on `[0, 3/4]`, vanishes beyond `4/3` and is joined
//! by an exp-based smooth step. Ring profiles are `φ(ξ) = χ(ξ/2) − χ(ξ)`, so the
//! sum `χ(ξ) + Σ_{j≥0} φ(2^{−j}ξ)` telescopes to 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlocal::lambda_pow;
use crate::spectral::{dealiased_product, derivative, lp_norm, lp_norm_of_samples, GridRef, SpectralField};

pub const BALL_INNER: f64 = 0.75;
pub const BALL_OUTER: f64 = 4.0 / 3.0;
pub const RING_OUTER: f64 = 8.0 / 3.0;
const EMPTY_SHELL_TOLERANCE: f64 = 1e-12;

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Ball profile `χ(|ξ|)`.
pub fn chi(xi: f64) -> f64 {
    1.0 - smooth_step((xi.abs() - BALL_INNER) / (BALL_OUTER - BALL_INNER))
}

/// Ring profile `φ(|ξ|) = χ(ξ/2) − χ(ξ)`, supported in `[3/4, 8/3]`.
pub fn phi(xi: f64) -> f64 {
    chi(0.5 * xi) - chi(xi)
}

/// Shell truncation attached to every Besov evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub value: f64,
    pub j_min: i32,
    pub j_max: i32,
    /// Share of `‖f‖²_{L²}` (mean excluded) not seen by any shell in range.
    pub uncovered_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: GridRef,
    j_min: i32,
    j_max: i32,
    blocks: Vec<Vec<f64>>,
}

impl DyadicPartition {
    /// Shells with `2^j ≥ 2·(2π/L)` and `(8/3)·2^j ≤ k_Nyquist`.
    pub fn new(grid: &GridRef) -> Result<Self> {
        let j_min = (2.0 * grid.base_wavenumber()).log2().ceil() as i32;
        let j_max = (grid.k_max() / RING_OUTER).log2().floor() as i32;
        if j_max < j_min {
            return Err(Error::InvalidParameter(format!(
                "grid of {} points resolves no dyadic shell",
                grid.n()
            )));
        }
        let blocks = (j_min..=j_max)
            .map(|j| {
                let scale = (-j as f64).exp2();
                grid.wavenumbers().iter().map(|&k| phi(k * scale)).collect()
            })
            .collect();
        Ok(DyadicPartition {
            grid: grid.clone(),
            j_min,
            j_max,
            blocks,
        })
    }

    pub fn grid(&self) -> &GridRef {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn shells(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    fn check_shell(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::ShellOutOfRange {
                j,
                min: self.j_min,
                max: self.j_max,
            });
        }
        Ok(())
    }

    /// Multiplier table `φ(2^{−j}k)` over the grid wavenumbers.
    pub fn block_symbol(&self, j: i32) -> Result<&[f64]> {
        self.check_shell(j)?;
        Ok(&self.blocks[(j - self.j_min) as usize])
    }

    /// Multiplier table `χ(2^{−j}k)`.
    pub fn low_pass_symbol(&self, j: i32) -> Result<Vec<f64>> {
        self.check_shell(j)?;
        let scale = (-j as f64).exp2();
        Ok(self.grid.wavenumbers().iter().map(|&k| chi(k * scale)).collect())
    }

    fn apply_table(&self, f: &SpectralField, table: &[f64]) -> Result<SpectralField> {
        if !self.grid.same_as(f.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(f.map_spectral(|i, _| Complex64::new(table[i], 0.0)))
    }

    /// `Δ_j f`.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        let table = self.block_symbol(j)?;
        self.apply_table(f, table)
    }

    /// `S_j f`.
    pub fn low_pass(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        let table = self.low_pass_symbol(j)?;
        self.apply_table(f, &table)
    }

    /// `S_{j_min} f + Σ_{j_min ≤ j ≤ j_max} Δ_j f`; equals `f` for fields supported
    /// below `(3/2)·2^{j_max}`.
    pub fn reconstruct(&self, f: &SpectralField) -> Result<SpectralField> {
        let mut acc = self.low_pass(f, self.j_min)?;
        for j in self.shells() {
            acc = acc.linear_combination(1.0, &self.block(f, j)?, 1.0)?;
        }
        Ok(acc)
    }

    /// Largest wavenumber reproduced exactly by [`Self::reconstruct`].
    pub fn reconstruction_band(&self) -> f64 {
        BALL_INNER * f64::from(self.j_max + 1).exp2()
    }

    /// `max_k |χ(k) + Σ_{j≥0} φ(2^{−j}k) − 1|` over the grid wavenumbers, with the
    /// sum carried until the rings pass the largest wavenumber.
    pub fn partition_residual(&self) -> f64 {
        let k_top = self.grid.k_max();
        let j_top = (k_top / BALL_INNER).log2().ceil().max(0.0) as i32 + 1;
        self.grid
            .wavenumbers()
            .iter()
            .map(|&k| {
                let k = k.abs();
                let total = chi(k) + (0..=j_top).map(|j| phi(k * (-j as f64).exp2())).sum::<f64>();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `‖Δ_j f‖_{L^p}`; `p = 2` by Parseval, otherwise on a twice-refined grid.
    pub fn block_lp_norm(&self, f: &SpectralField, j: i32, p: f64) -> Result<f64> {
        let b = self.block(f, j)?;
        field_lp_norm(&b, p)
    }

    pub fn besov_norm(&self, f: &SpectralField, s: f64, p: f64, q: f64) -> Result<BesovNorm> {
        if !(p >= 1.0 && q >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Besov indices need p, q ≥ 1 (p = {p}, q = {q})"
            )));
        }
        let mut terms = Vec::with_capacity(self.blocks.len());
        for j in self.shells() {
            terms.push((s * f64::from(j)).exp2() * self.block_lp_norm(f, j, p)?);
        }
        let value = if q.is_infinite() {
            terms.iter().cloned().fold(0.0, f64::max)
        } else {
            terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
        };
        Ok(BesovNorm {
            value,
            j_min: self.j_min,
            j_max: self.j_max,
            uncovered_fraction: self.uncovered_fraction(f),
        })
    }

    fn uncovered_fraction(&self, f: &SpectralField) -> f64 {
        let c = f.spectral();
        let mut total = 0.0;
        let mut covered = 0.0;
        for (i, z) in c.iter().enumerate().skip(1) {
            let e = z.norm_sqr();
            total += e;
            let w: f64 = self.blocks.iter().map(|b| b[i]).sum();
            covered += e * w.min(1.0);
        }
        if total > 0.0 {
            ((total - covered) / total).max(0.0)
        } else {
            0.0
        }
    }

    /// Bernstein witnesses `(‖∂^k Δ_j f‖_p / (2^{jk}‖Δ_j f‖_p),
    /// ‖Δ_j f‖_q / (2^{j(1/p − 1/q)}‖Δ_j f‖_p))`.
    pub fn bernstein_ratio(&self, f: &SpectralField, j: i32, k: u32, p: f64, q: f64) -> Result<(f64, f64)> {
        if !(p >= 1.0 && q >= p) {
            return Err(Error::InvalidParameter(format!("Bernstein ratio needs 1 ≤ p ≤ q (p = {p}, q = {q})")));
        }
        let b = self.block(f, j)?;
        let base = field_lp_norm(&b, p)?;
        // Shells holding only transform round-off count as empty.
        if !(base > EMPTY_SHELL_TOLERANCE * field_lp_norm(f, p)?) {
            return Err(Error::EmptyShell(j));
        }
        let two_j = f64::from(j).exp2();
        let d = field_lp_norm(&derivative(&b, k), p)?;
        let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
        let lq = field_lp_norm(&b, q)?;
        Ok((
            d / (two_j.powi(k as i32) * base),
            lq / (two_j.powf(inv(p) - inv(q)) * base),
        ))
    }

    /// `[f, Δ_j] g_x = f·Δ_j g_x − Δ_j(f g_x)`.
    pub fn commutator_j(&self, f: &SpectralField, g: &SpectralField, j: i32) -> Result<SpectralField> {
        f.check_grid(g)?;
        let gx = derivative(g, 1);
        let first = dealiased_product(f, &self.block(&gx, j)?)?;
        let second = self.block(&dealiased_product(f, &gx)?, j)?;
        first.sub(&second)
    }

    /// `‖[f,Δ_j]g_x‖_{L²} / (2^{−3j/2}‖f_x‖_{Ḃ^{1/2}_{2,1}}‖g‖_{Ḃ^{3/2}_{2,1}})`.
    pub fn commutator_ratio(&self, f: &SpectralField, g: &SpectralField, j: i32) -> Result<f64> {
        let num = lp_norm(&self.commutator_j(f, g, j)?, 2.0)?;
        let fx = self.besov_norm(&derivative(f, 1), 0.5, 2.0, 1.0)?.value;
        let gb = self.besov_norm(g, 1.5, 2.0, 1.0)?.value;
        let den = (-1.5 * f64::from(j)).exp2() * fx * gb;
        if !(den > 0.0) {
            return Err(Error::Degenerate("commutator denominator vanishes"));
        }
        Ok(num / den)
    }
}

/// `L^p` norm of a field evaluated on the twice-refined grid (exact for `p = 2`).
pub fn field_lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("Lp norm needs p ≥ 1, got {p}")));
    }
    if p == 2.0 {
        return lp_norm(f, 2.0);
    }
    let grid = f.grid();
    let fine = grid.interpolate(&f.spectral(), 2);
    Ok(lp_norm_of_samples(&fine, grid.dx() / 2.0, p))
}

/// `[Λ^{1/2}, ψ] f = Λ^{1/2}(ψ f) − ψ Λ^{1/2} f`.
pub fn half_commutator(psi: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    psi.check_grid(f)?;
    let a = lambda_pow(&dealiased_product(psi, f)?, 0.5);
    let b = dealiased_product(psi, &lambda_pow(f, 0.5))?;
    a.sub(&b)
}

/// `‖[Λ^{1/2},ψ](f − g)‖_{L⁶} / ((‖ψ‖_∞ + ‖ψ_x‖_∞)‖f − g‖_{L^{3/2}})`.
pub fn half_commutator_ratio(psi: &SpectralField, f: &SpectralField, g: &SpectralField) -> Result<f64> {
    let diff = f.sub(g)?;
    let den_f = field_lp_norm(&diff, 1.5)?;
    if !(den_f > 0.0) {
        return Err(Error::Degenerate("f and g coincide"));
    }
    let w1 = lp_norm(psi, f64::INFINITY)? + lp_norm(&derivative(psi, 1), f64::INFINITY)?;
    if !(w1 > 0.0) {
        return Err(Error::Degenerate("test function vanishes"));
    }
    let num = field_lp_norm(&half_commutator(psi, &diff)?, 6.0)?;
    Ok(num / (w1 * den_f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{inner_product, make_grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn max_abs(f: &SpectralField) -> f64 {
        lp_norm(f, f64::INFINITY).unwrap()
    }

    fn random_field(grid: &GridRef, band: i64, rng: &mut impl Rng) -> SpectralField {
        let mut c = vec![Complex64::new(0.0, 0.0); grid.n()];
        for m in 1..=band {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (m as f64);
            c[grid.index_of(m)] = z;
            c[grid.index_of(-m)] = z.conj();
        }
        SpectralField::from_spectral(grid, c).unwrap()
    }

    #[test]
    fn profiles() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert_eq!(phi(0.7), 0.0);
        assert_eq!(phi(8.0 / 3.0), 0.0);
        assert!(phi(1.5) > 0.99);
        for i in 0..1000 {
            let x = i as f64 * 0.01;
            assert!((0.0..=1.0).contains(&chi(x)));
            assert!(phi(x) >= 0.0);
        }
    }

    #[test]
    fn shell_range_and_partition() {
        let g = make_grid(512, 2.0 * PI).unwrap();
        let lp = DyadicPartition::new(&g).unwrap();
        assert_eq!(lp.j_min(), 1);
        // k_Nyquist = 256, 256·3/8 = 96 → j_max = 6.
        assert_eq!(lp.j_max(), 6);
        assert!(lp.partition_residual() < 1e-12);
        for j in lp.shells() {
            let lo = 0.75 * f64::from(j).exp2();
            let hi = RING_OUTER * f64::from(j).exp2();
            for (&k, &s) in g.wavenumbers().iter().zip(lp.block_symbol(j).unwrap()) {
                if k.abs() <= lo || k.abs() >= hi {
                    assert_eq!(s, 0.0);
                }
            }
        }
        assert!(matches!(lp.block_symbol(7), Err(Error::ShellOutOfRange { .. })));
        let wide = make_grid(256, 64.0 * PI).unwrap();
        let lpw = DyadicPartition::new(&wide).unwrap();
        assert!(lpw.j_min() < 0);
        assert!(lpw.partition_residual() < 1e-12);
    }

    #[test]
    fn blocks_localize_single_modes() {
        let g = make_grid(1024, 2.0 * PI).unwrap();
        let lp = DyadicPartition::new(&g).unwrap();
        for j in (lp.j_min() + 2)..=(lp.j_max() - 2) {
            // 1.5·2^j sits where φ_j = 1.
            let k = 1.5 * f64::from(j).exp2();
            let f = SpectralField::from_fn(&g, |x| (k * x).cos());
            let b = lp.block(&f, j).unwrap();
            assert!(max_abs(&b.sub(&f).unwrap()) < 1e-13);
            assert!(max_abs(&lp.block(&f, j + 2).unwrap()) < 1e-13);
            assert!(max_abs(&lp.block(&f, j - 2).unwrap()) < 1e-13);
            let low = lp.low_pass(&SpectralField::from_fn(&g, |x| (8.0 * k * x).cos()), j).unwrap();
            assert!(max_abs(&low) < 1e-13);
        }
        let c = SpectralField::from_fn(&g, |_| 3.0);
        for j in lp.shells() {
            assert!(max_abs(&lp.block(&c, j).unwrap()) < 1e-13);
        }
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let g = make_grid(256, 2.0 * PI).unwrap();
        let lp = DyadicPartition::new(&g).unwrap();
        let band = lp.reconstruction_band().floor() as i64;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_field(&g, band, &mut rng);
        assert!(max_abs(&lp.reconstruct(&f).unwrap().sub(&f).unwrap()) < 1e-12);
        let in_band = random_field(&g, (0.75 * f64::from(lp.j_max()).exp2()) as i64, &mut rng);
        assert!(max_abs(&lp.low_pass(&in_band, lp.j_max()).unwrap().sub(&in_band).unwrap()) < 1e-12);
        for j in lp.shells() {
            let mut acc = lp.low_pass(&f, j).unwrap();
            for jj in j..=lp.j_max() {
                acc = acc.linear_combination(1.0, &lp.block(&f, jj).unwrap(), 1.0).unwrap();
            }
            assert!(max_abs(&acc.sub(&f).unwrap()) < 1e-12);
        }
        for j in lp.shells() {
            for jj in (j + 2)..=lp.j_max() {
                let ip = inner_product(&lp.block(&f, j).unwrap(), &lp.block(&f, jj).unwrap()).unwrap();
                assert_eq!(ip, 0.0);
            }
        }
    }

    #[test]
    fn besov_single_mode_and_zero() {
        let g = make_grid(512, 2.0 * PI).unwrap();
        let lp = DyadicPartition::new(&g).unwrap();
        for j in 2..=5 {
            let k = f64::from(j).exp2();
            let f = SpectralField::from_fn(&g, |x| (k * x).sin());
            let l2 = lp_norm(&f, 2.0).unwrap();
            // Mode 2^j is seen by shells j (weight φ(1)) and j−1 (weight φ(2)).
            let expect = (f64::from(j) * 1.5).exp2() * phi(1.0) * l2
                + (f64::from(j - 1) * 1.5).exp2() * phi(2.0) * l2;
            let b = lp.besov_norm(&f, 1.5, 2.0, 1.0).unwrap();
            assert!((b.value - expect).abs() < 1e-10 * expect);
            let ratio = b.value / ((1.5 * f64::from(j)).exp2() * l2);
            assert!((0.25..=1.0).contains(&ratio), "{ratio}");
        }
        let z = SpectralField::zeros(&g);
        assert_eq!(lp.besov_norm(&z, 1.5, 2.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn besov_dilation_about_bump_center() {
        let l = 64.0 * PI;
        let g = make_grid(4096, l).unwrap();
        let lp = DyadicPartition::new(&g).unwrap();
        let c = 0.5 * l;
        let bump = |y: f64| (-(y * y) / 2.0).exp() * (3.0 * y).cos();
        let f = SpectralField::from_fn(&g, |x| bump(x - c));
        let f2 = SpectralField::from_fn(&g, |x| bump(2.0 * (x - c)));
        let b1 = lp.besov_norm(&f, 1.5, 2.0, 1.0).unwrap().value;
        let b2 = lp.besov_norm(&f2, 1.5, 2.0, 1.0).unwrap().value;
        assert!((b2 / b1 / 2.0 - 1.0).abs() < 0.05, "{}", b2 / b1);
    }

    #[test]
    fn bernstein_bounds() {
        let g = make_grid(256, 2.0 * PI).unwrap();
        let lp = DyadicPartition::new(&g).unwrap();
        let j = 4;
        let k0 = f64::from(j).exp2();
        let single = SpectralField::from_fn(&g, |x| (k0 * x).cos());
        let (r, _) = lp.bernstein_ratio(&single, j, 1, 2.0, 2.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let f = random_field(&g, 120, &mut rng);
            for j in lp.shells() {
                let (r, s) = lp.bernstein_ratio(&f, j, 1, 2.0, f64::INFINITY).unwrap();
                worst = worst.max(r);
                assert!(s.is_finite());
            }
        }
        assert!(worst <= RING_OUTER + 1e-9, "{worst}");
        let low = SpectralField::from_fn(&g, |x| x.cos());
        assert!(matches!(lp.bernstein_ratio(&low, 5, 1, 2.0, 2.0), Err(Error::EmptyShell(5))));
    }

    #[test]
    fn commutators_vanish_on_constants() {
        let g = make_grid(128, 2.0 * PI).unwrap();
        let lp = DyadicPartition::new(&g).unwrap();
        let c = SpectralField::from_fn(&g, |_| 2.0);
        let h = SpectralField::from_fn(&g, |x| (x.sin() + (5.0 * x).cos()).exp());
        for j in lp.shells() {
            assert!(max_abs(&lp.commutator_j(&c, &h, j).unwrap()) < 1e-12);
        }
        assert!(max_abs(&half_commutator(&c, &h).unwrap()) < 1e-12);
        assert!(matches!(half_commutator_ratio(&h, &c, &c), Err(Error::Degenerate(_))));
        assert!(lp.commutator_ratio(&c, &h, 2).is_err());
    }

    #[test]
    fn commutator_ratio_bounded_over_shells() {
        let g = make_grid(512, 2.0 * PI).unwrap();
        let lp = DyadicPartition::new(&g).unwrap();
        let f = SpectralField::from_fn(&g, |x| (0.5 * x.cos()).exp());
        let mut worst: f64 = 0.0;
        for j in lp.shells() {
            let k = 1.5 * f64::from(j).exp2();
            let gj = SpectralField::from_fn(&g, |x| (k * x).sin());
            let r = lp.commutator_ratio(&f, &gj, j).unwrap();
            assert!(r.is_finite());
            worst = worst.max(r);
        }
        assert!(worst < 10.0, "{worst}");
    }
}
