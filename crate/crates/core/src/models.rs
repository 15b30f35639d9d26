//! Model catalog: velocity laws, dissipation, ε-regularization, initial data and
//! the right-hand side `θ_t = −u θ_x − ν Λ^γ θ + ε θ_xx`.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::littlewood_paley::DyadicPartition;
use crate::spectral::{sobolev_norm, GridRef, SpectralField};

/// Which velocity law closes the transport equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    /// `u = −Hθ`.
    Model1,
    /// `u = −H (−∂_xx)^{−α} θ`.
    Model2,
    /// `u = −σ H (−∂_xx)^{β} θ`.
    Model3,
}

/// Symbol used for the Model 2 smoothing operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingSymbol {
    /// `|k|^{−2α}`
    #[default]
    Homogeneous,
    /// `(1 + k²)^{−α}`
    Inhomogeneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub epsilon: f64,
    /// Nonlinearity sign σ = ±1 (Model 3 only).
    #[serde(default = "default_sign")]
    pub sign: i8,
    #[serde(default)]
    pub smoothing: SmoothingSymbol,
    /// Drops the transport term, leaving the exactly solvable linear flow.
    #[serde(default)]
    pub linear_only: bool,
}

fn default_gamma() -> f64 {
    1.0
}

fn default_sign() -> i8 {
    1
}

impl ModelSpec {
    /// Inviscid `θ_t − (Hθ) θ_x = 0`.
    pub fn model1() -> Self {
        ModelSpec {
            family: ModelFamily::Model1,
            alpha: 0.0,
            beta: 0.0,
            gamma: 1.0,
            nu: 0.0,
            epsilon: 0.0,
            sign: 1,
            smoothing: SmoothingSymbol::Homogeneous,
            linear_only: false,
        }
    }

    /// `θ_t − (H(∂_xx)^{−α}θ) θ_x + Λ^γ θ = 0`.
    pub fn model2(alpha: f64, gamma: f64) -> Self {
        ModelSpec {
            family: ModelFamily::Model2,
            alpha,
            gamma,
            nu: 1.0,
            ..Self::model1()
        }
    }

    /// `θ_t − (H(∂_xx)^{β}θ) θ_x + Λ^γ θ = 0`.
    pub fn model3(beta: f64, gamma: f64) -> Self {
        ModelSpec {
            family: ModelFamily::Model3,
            beta,
            gamma,
            nu: 1.0,
            ..Self::model1()
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_nu(mut self, nu: f64, gamma: f64) -> Self {
        self.nu = nu;
        self.gamma = gamma;
        self
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.sign = sign;
        self
    }

    pub fn linear(mut self) -> Self {
        self.linear_only = true;
        self
    }

    /// Exponent bookkeeping required to evaluate the velocity law. Zero exponents are
    /// accepted so that Models 2 and 3 can be reduced to Model 1.
    pub fn check_velocity_law(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return bad("exponents must be finite".into());
        }
        if self.sign != 1 && self.sign != -1 {
            return bad(format!("nonlinearity sign must be ±1, got {}", self.sign));
        }
        match self.family {
            ModelFamily::Model1 if self.alpha != 0.0 || self.beta != 0.0 => {
                bad(format!("model1 requires α = β = 0 (α = {}, β = {})", self.alpha, self.beta))
            }
            ModelFamily::Model2 if self.beta != 0.0 || self.alpha < 0.0 => {
                bad(format!("model2 requires β = 0 and α ≥ 0 (α = {}, β = {})", self.alpha, self.beta))
            }
            ModelFamily::Model3 if self.alpha != 0.0 || self.beta < 0.0 => {
                bad(format!("model3 requires α = 0 and β ≥ 0 (α = {}, β = {})", self.alpha, self.beta))
            }
            _ => Ok(()),
        }
    }

    /// Full validation for configured runs.
    pub fn validate(&self) -> Result<()> {
        self.check_velocity_law()?;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self.family {
            ModelFamily::Model2 if self.alpha <= 0.0 => return bad("model2 requires α > 0".into()),
            ModelFamily::Model3 if self.beta <= 0.0 => return bad("model3 requires β > 0".into()),
            _ => {}
        }
        if !(self.gamma > 0.0 && self.gamma <= 2.0) {
            return bad(format!("γ must lie in (0, 2], got {}", self.gamma));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad(format!("ν must be nonnegative, got {}", self.nu));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("ε must be nonnegative, got {}", self.epsilon));
        }
        Ok(())
    }

    /// Fourier symbol of the velocity law at wavenumber `k`.
    pub fn velocity_symbol(&self, k: f64) -> Complex64 {
        if k == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let minus_h = Complex64::new(0.0, k.signum());
        let a = k.abs();
        let weight = match self.family {
            ModelFamily::Model1 => 1.0,
            ModelFamily::Model2 => match self.smoothing {
                SmoothingSymbol::Homogeneous => a.powf(-2.0 * self.alpha),
                SmoothingSymbol::Inhomogeneous => (1.0 + a * a).powf(-self.alpha),
            },
            ModelFamily::Model3 => f64::from(self.sign) * a.powf(2.0 * self.beta),
        };
        minus_h * weight
    }

    /// Symbol of the stiff linear part, `−ν|k|^γ − εk²`.
    pub fn linear_symbol(&self, k: f64) -> f64 {
        let dissipation = if k == 0.0 { 0.0 } else { self.nu * k.abs().powf(self.gamma) };
        -dissipation - self.epsilon * k * k
    }
}

/// A model with its symbol tables tabulated on one grid.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    spec: ModelSpec,
    grid: GridRef,
    velocity: Vec<Complex64>,
    ik: Vec<Complex64>,
    linear: Vec<f64>,
}

impl CompiledModel {
    pub fn new(spec: &ModelSpec, grid: &GridRef) -> Result<Self> {
        spec.check_velocity_law()?;
        let nyq = grid.nyquist_index();
        let zero = Complex64::new(0.0, 0.0);
        let k = grid.wavenumbers();
        let velocity = k
            .iter()
            .enumerate()
            .map(|(i, &k)| if i == nyq { zero } else { spec.velocity_symbol(k) })
            .collect();
        let ik = k
            .iter()
            .enumerate()
            .map(|(i, &k)| if i == nyq { zero } else { Complex64::new(0.0, k) })
            .collect();
        let linear = k.iter().map(|&k| spec.linear_symbol(k)).collect();
        Ok(CompiledModel {
            spec: spec.clone(),
            grid: grid.clone(),
            velocity,
            ik,
            linear,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn grid(&self) -> &GridRef {
        &self.grid
    }

    pub fn linear_symbol(&self) -> &[f64] {
        &self.linear
    }

    pub fn velocity_coeffs(&self, theta: &[Complex64]) -> Vec<Complex64> {
        theta.iter().zip(&self.velocity).map(|(c, s)| c * s).collect()
    }

    pub fn velocity(&self, theta: &SpectralField) -> SpectralField {
        let c = self.velocity_coeffs(&theta.spectral());
        SpectralField::from_spectral(&self.grid, c).expect("grid length")
    }

    /// `−u θ_x` with a dealiased product; zero in linear-only mode.
    pub fn transport_coeffs(&self, theta: &[Complex64]) -> Vec<Complex64> {
        if self.spec.linear_only {
            return vec![Complex64::new(0.0, 0.0); theta.len()];
        }
        let u = self.velocity_coeffs(theta);
        let theta_x: Vec<Complex64> = theta.iter().zip(&self.ik).map(|(c, s)| c * s).collect();
        let mut out = self.grid.dealiased_product_coeffs(&u, &theta_x);
        out.iter_mut().for_each(|c| *c = -*c);
        out
    }

    pub fn rhs(&self, theta: &SpectralField) -> Result<SpectralField> {
        if !self.grid.same_as(theta.grid()) {
            return Err(Error::GridMismatch);
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite);
        }
        let coeffs = theta.spectral();
        let mut out = self.transport_coeffs(&coeffs);
        for ((o, c), l) in out.iter_mut().zip(coeffs.iter()).zip(&self.linear) {
            *o += c * *l;
        }
        SpectralField::from_spectral(&self.grid, out)
    }
}

/// `−u θ_x − ν Λ^γ θ + ε θ_xx` with all products dealiased.
pub fn rhs(theta: &SpectralField, spec: &ModelSpec) -> Result<SpectralField> {
    CompiledModel::new(spec, theta.grid())?.rhs(theta)
}

/// One Fourier term `a cos(k x) + b sin(k x)` with `k = 2π·mode/L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTerm {
    pub mode: i64,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    /// `A exp(−d²/w²)` with `d` the periodic distance to `center` (default `L/2`).
    PositiveBump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Option<f64>,
    },
    /// Gaussian envelope times `cos(carrier·d)`.
    GaussianLike {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: Option<f64>,
        #[serde(default)]
        carrier: f64,
    },
    SingleMode {
        amplitude: f64,
        mode: i64,
        #[serde(default)]
        phase: f64,
    },
    SumOfModes { modes: Vec<ModeTerm> },
    /// Point values from a checkpoint on the same grid.
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataRecipe {
    #[serde(flatten)]
    pub data: InitialData,
    #[serde(default)]
    pub mollify_epsilon: f64,
}

impl InitialDataRecipe {
    pub fn new(data: InitialData) -> Self {
        InitialDataRecipe {
            data,
            mollify_epsilon: 0.0,
        }
    }

    pub fn positive_bump(amplitude: f64, width: f64) -> Self {
        Self::new(InitialData::PositiveBump {
            amplitude,
            width,
            center: None,
        })
    }

    pub fn mollified(mut self, eps: f64) -> Self {
        self.mollify_epsilon = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        match &self.data {
            InitialData::PositiveBump { amplitude, width, .. } => {
                if !(*amplitude >= 0.0) {
                    return bad("positive-bump amplitude must be nonnegative");
                }
                if !(*width > 0.0) {
                    return bad("bump width must be positive");
                }
            }
            InitialData::GaussianLike { width, .. } if !(*width > 0.0) => {
                return bad("bump width must be positive")
            }
            InitialData::SumOfModes { modes } if modes.is_empty() => {
                return bad("sum-of-modes needs at least one term")
            }
            _ => {}
        }
        if !(self.mollify_epsilon >= 0.0) {
            return bad("mollify_epsilon must be nonnegative");
        }
        Ok(())
    }

    pub fn build(&self, grid: &GridRef) -> Result<SpectralField> {
        self.validate()?;
        let l = grid.period();
        let k0 = grid.base_wavenumber();
        let periodic_distance = |x: f64, c: f64| (x - c + 0.5 * l).rem_euclid(l) - 0.5 * l;
        let field = match &self.data {
            InitialData::PositiveBump {
                amplitude,
                width,
                center,
            } => {
                let c = center.unwrap_or(0.5 * l);
                SpectralField::from_fn(grid, |x| {
                    let d = periodic_distance(x, c);
                    amplitude * (-(d * d) / (width * width)).exp()
                })
            }
            InitialData::GaussianLike {
                amplitude,
                width,
                center,
                carrier,
            } => {
                let c = center.unwrap_or(0.5 * l);
                SpectralField::from_fn(grid, |x| {
                    let d = periodic_distance(x, c);
                    amplitude * (-(d * d) / (width * width)).exp() * (carrier * d).cos()
                })
            }
            InitialData::SingleMode {
                amplitude,
                mode,
                phase,
            } => {
                let k = k0 * *mode as f64;
                SpectralField::from_fn(grid, |x| amplitude * (k * x + phase).cos())
            }
            InitialData::SumOfModes { modes } => SpectralField::from_fn(grid, |x| {
                modes
                    .iter()
                    .map(|m| {
                        let k = k0 * m.mode as f64;
                        m.cos * (k * x).cos() + m.sin * (k * x).sin()
                    })
                    .sum()
            }),
            InitialData::FromFile { path } => {
                let cp = Checkpoint::read_file(path)?;
                if cp.values.len() != grid.n() || cp.period != grid.period() {
                    return Err(Error::InvalidParameter(format!(
                        "checkpoint {} has n = {}, L = {}; grid has n = {}, L = {}",
                        path.display(),
                        cp.values.len(),
                        cp.period,
                        grid.n(),
                        grid.period()
                    )));
                }
                SpectralField::from_physical(grid, cp.values)?
            }
        };
        if self.mollify_epsilon > 0.0 {
            mollify(&field, self.mollify_epsilon)
        } else {
            Ok(field)
        }
    }
}

/// Circular convolution with the nonnegative bump `exp(−1/(1 − (x/ε)²))` sampled
/// on the grid and normalized to unit discrete mass. Widths below one grid cell
/// leave the field unchanged.
pub fn mollify(f: &SpectralField, eps: f64) -> Result<SpectralField> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("mollifier width must be positive, got {eps}")));
    }
    let grid = f.grid();
    let n = grid.n();
    let dx = grid.dx();
    let reach = ((eps / dx).ceil() as usize).min(n / 2);
    let mut kernel = Vec::with_capacity(2 * reach + 1);
    for j in -(reach as i64)..=(reach as i64) {
        let r = j as f64 * dx / eps;
        let w = if r.abs() < 1.0 { (-1.0 / (1.0 - r * r)).exp() } else { 0.0 };
        kernel.push((j, w));
    }
    let mass: f64 = kernel.iter().map(|(_, w)| w).sum();
    let values = f.physical();
    let out = (0..n)
        .map(|i| {
            kernel
                .iter()
                .filter(|(_, w)| *w > 0.0)
                .map(|(j, w)| w * values[(i as i64 + j).rem_euclid(n as i64) as usize])
                .sum::<f64>()
                / mass
        })
        .collect();
    SpectralField::from_physical(grid, out)
}

/// Known well-posedness statement covering a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coverage {
    /// Local existence in the critical space `Ḃ^{3/2}_{2,1}` (Model 1, ν = 0).
    CriticalBesovLocal,
    /// Global weak super-solutions for nonnegative `L¹ ∩ L^∞` data (Model 1).
    GlobalWeakSuperSolution,
    /// Global weak solutions for `0 < γ < 1`, `α ≥ 1/2 − γ/2` (Model 2).
    GlobalWeakSolution,
    /// Local `H²` solutions for `0 < γ < 2`, `0 < β ≤ γ/4`, with the gradient
    /// blow-up criterion (Model 3).
    LocalH2,
    /// Local `H²` solutions for `γ = 2`, `0 < β < 1` (Model 3).
    LocalH2Parabolic,
    /// Local solutions from `Ḣ^{1/2}` data for `γ = 2`, `0 < β < 1/2` (Model 3).
    RoughDataLocal,
    /// Global `H²` solutions for `γ = 2`, `β < 1/4` (Model 3).
    GlobalH2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Model 1: local strong solutions, finite-time blow-up possible.
    LocalCritical,
    /// Model 2 inside its weak-solution range.
    WeakSolution,
    /// Model 3 with local well-posedness only.
    Local,
    /// Model 3 with global well-posedness.
    Global,
    Uncovered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub family: ModelFamily,
    pub regime: Regime,
    pub coverage: Vec<Coverage>,
    /// Whether a run may be expected to survive for all time.
    pub expects_global: bool,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::LocalCritical => "local-critical",
            Regime::WeakSolution => "weak-solution",
            Regime::Local => "local",
            Regime::Global => "global",
            Regime::Uncovered => "uncovered",
        }
    }
}

pub fn classify_regime(spec: &ModelSpec) -> RegimeReport {
    let (gamma, alpha, beta) = (spec.gamma, spec.alpha, spec.beta);
    let mut coverage = Vec::new();
    let regime = match spec.family {
        ModelFamily::Model1 => {
            coverage.push(Coverage::CriticalBesovLocal);
            coverage.push(Coverage::GlobalWeakSuperSolution);
            Regime::LocalCritical
        }
        ModelFamily::Model2 => {
            if gamma > 0.0 && gamma < 1.0 && alpha > 0.0 && alpha >= 0.5 - 0.5 * gamma {
                coverage.push(Coverage::GlobalWeakSolution);
                Regime::WeakSolution
            } else {
                Regime::Uncovered
            }
        }
        ModelFamily::Model3 => {
            let parabolic = gamma == 2.0;
            if gamma > 0.0 && gamma < 2.0 && beta > 0.0 && beta <= gamma / 4.0 {
                coverage.push(Coverage::LocalH2);
            }
            if parabolic && beta > 0.0 && beta < 1.0 {
                coverage.push(Coverage::LocalH2Parabolic);
            }
            if parabolic && beta > 0.0 && beta < 0.5 {
                coverage.push(Coverage::RoughDataLocal);
            }
            if parabolic && beta < 0.25 {
                coverage.push(Coverage::GlobalH2);
                Regime::Global
            } else if coverage.is_empty() {
                Regime::Uncovered
            } else {
                Regime::Local
            }
        }
    };
    RegimeReport {
        family: spec.family,
        regime,
        expects_global: matches!(regime, Regime::WeakSolution | Regime::Global),
        coverage,
    }
}

/// Default simulation horizon `c / ‖θ_0‖`, measured in `Ḃ^{3/2}_{2,1}` for Models 1
/// and 2 and in `H²` for Model 3.
pub fn local_horizon_estimate(theta0: &SpectralField, spec: &ModelSpec, c: f64) -> Result<f64> {
    let norm = match spec.family {
        ModelFamily::Model1 | ModelFamily::Model2 => {
            DyadicPartition::new(theta0.grid())?.besov_norm(theta0, 1.5, 2.0, 1.0)?.value
        }
        ModelFamily::Model3 => sobolev_norm(theta0, 2.0, false),
    };
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter(
            "horizon estimate needs nonzero initial data".into(),
        ));
    }
    Ok(c / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlocal::hilbert;
    use crate::spectral::{derivative, inner_product, lp_norm, make_grid};
    use std::f64::consts::PI;

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.physical()
            .iter()
            .zip(b.physical().iter())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn constant_field_has_zero_rhs() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let c = SpectralField::from_fn(&g, |_| 1.3);
        for spec in [
            ModelSpec::model1().with_epsilon(0.1),
            ModelSpec::model2(0.3, 0.5),
            ModelSpec::model3(0.5, 2.0).with_sign(-1),
        ] {
            let r = rhs(&c, &spec).unwrap();
            assert!(lp_norm(&r, f64::INFINITY).unwrap() < 1e-15);
        }
    }

    #[test]
    fn model1_cosine_rhs() {
        // (Hθ)θ_x = sin x · (−sin x) = (cos 2x − 1)/2; the quadrature oracle below
        // forms the same product pointwise from the analytic factors.
        let g = make_grid(32, 2.0 * PI).unwrap();
        let theta = SpectralField::from_fn(&g, f64::cos);
        let r = rhs(&theta, &ModelSpec::model1()).unwrap();
        let expect = SpectralField::from_fn(&g, |x| 0.5 * ((2.0 * x).cos() - 1.0));
        assert!(max_diff(&r, &expect) < 1e-14);
        let pointwise = SpectralField::from_fn(&g, |x| x.sin() * (-x.sin()));
        assert!(max_diff(&r, &pointwise) < 1e-14);
        let hx = crate::spectral::dealiased_product(&hilbert(&theta), &derivative(&theta, 1)).unwrap();
        assert!(max_diff(&r, &hx) < 1e-14);
    }

    #[test]
    fn model3_parabolic_cosine_rhs() {
        // u = −H Λ θ = −sin x; −uθ_x = −sin²x = (cos 2x − 1)/2; −Λ²θ = −cos x.
        let g = make_grid(32, 2.0 * PI).unwrap();
        let theta = SpectralField::from_fn(&g, f64::cos);
        let r = rhs(&theta, &ModelSpec::model3(0.5, 2.0)).unwrap();
        let expect = SpectralField::from_fn(&g, |x| 0.5 * ((2.0 * x).cos() - 1.0) - x.cos());
        assert!(max_diff(&r, &expect) < 1e-13);
    }

    #[test]
    fn reductions_to_model1() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let theta = SpectralField::from_fn(&g, |x| (x.sin() + 0.3 * (3.0 * x).cos()).exp());
        let base = ModelSpec::model1().with_nu(0.7, 0.8).with_epsilon(0.01);
        let r1 = rhs(&theta, &base).unwrap();
        let mut m2 = base.clone();
        m2.family = ModelFamily::Model2;
        let mut m3 = base.clone();
        m3.family = ModelFamily::Model3;
        assert!(max_diff(&rhs(&theta, &m2).unwrap(), &r1) < 1e-12);
        assert!(max_diff(&rhs(&theta, &m3).unwrap(), &r1) < 1e-12);
    }

    #[test]
    fn dissipative_part_has_zero_mean() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let theta = SpectralField::from_fn(&g, |x| (x.cos() + 0.2 * (5.0 * x).sin()).exp());
        let spec = ModelSpec::model2(0.3, 0.5).with_epsilon(0.05).linear();
        let r = rhs(&theta, &spec).unwrap();
        assert!(r.mean().abs() < 1e-12);
    }

    #[test]
    fn energy_split() {
        let g = make_grid(128, 2.0 * PI).unwrap();
        let theta = SpectralField::from_fn(&g, |x| (0.8 * x.cos() + 0.3 * (2.0 * x).sin()).exp());
        for spec in [
            ModelSpec::model1().with_epsilon(0.02),
            ModelSpec::model2(0.3, 0.5).with_epsilon(0.01),
            ModelSpec::model3(0.125, 2.0),
        ] {
            let r = rhs(&theta, &spec).unwrap();
            let lhs = inner_product(&r, &theta).unwrap()
                + spec.nu * sobolev_norm(&theta, spec.gamma / 2.0, true).powi(2)
                + spec.epsilon * sobolev_norm(&theta, 1.0, true).powi(2);
            let u = crate::nonlocal::velocity(&theta, &spec).unwrap();
            let ux_theta = crate::spectral::dealiased_product(&u, &derivative(&theta, 1)).unwrap();
            let transport = -inner_product(&ux_theta, &theta).unwrap();
            assert!((lhs - transport).abs() < 1e-10 * (1.0 + transport.abs()), "{spec:?}");
        }
    }

    #[test]
    fn nan_input_is_rejected() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let theta = SpectralField::from_fn(&g, |x| if x > 1.0 { f64::NAN } else { 0.0 });
        assert!(matches!(rhs(&theta, &ModelSpec::model1()), Err(Error::NonFinite)));
    }

    #[test]
    fn regime_examples() {
        let r = classify_regime(&ModelSpec::model2(0.3, 0.5));
        assert_eq!(r.regime, Regime::WeakSolution);
        assert!(r.expects_global);
        let r = classify_regime(&ModelSpec::model2(0.2, 0.5));
        assert_eq!(r.regime, Regime::Uncovered);
        let r = classify_regime(&ModelSpec::model3(0.125, 2.0));
        assert_eq!(r.regime, Regime::Global);
        assert!(r.coverage.contains(&Coverage::GlobalH2));
        let r = classify_regime(&ModelSpec::model3(0.3, 1.0));
        assert_eq!(r.regime, Regime::Uncovered);
        let r = classify_regime(&ModelSpec::model3(0.25, 1.0));
        assert_eq!(r.regime, Regime::Local);
        let r = classify_regime(&ModelSpec::model3(0.75, 2.0));
        assert_eq!(r.regime, Regime::Local);
        assert_eq!(r.coverage, vec![Coverage::LocalH2Parabolic]);
        let r = classify_regime(&ModelSpec::model1());
        assert_eq!(r.regime, Regime::LocalCritical);
        assert!(!r.expects_global);
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::model1().validate().is_ok());
        assert!(ModelSpec::model2(0.0, 0.5).validate().is_err());
        assert!(ModelSpec::model3(0.1, 2.5).validate().is_err());
        assert!(ModelSpec::model3(0.1, 1.0).with_sign(0).validate().is_err());
        let mut m = ModelSpec::model1();
        m.beta = 0.1;
        assert!(m.validate().is_err());
    }

    #[test]
    fn mollifier_properties() {
        let g = make_grid(256, 2.0 * PI).unwrap();
        let f = InitialDataRecipe::positive_bump(1.0, 0.4).build(&g).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let m = mollify(&f, eps).unwrap();
            assert!(m.min() >= -1e-12 * f.max());
            assert!((m.mean() - f.mean()).abs() < 1e-12);
            let err = lp_norm(&m.sub(&f).unwrap(), 2.0).unwrap();
            assert!(err < prev, "eps = {eps}");
            prev = err;
        }
        let c = SpectralField::from_fn(&g, |_| 2.5);
        let mc = mollify(&c, 0.3).unwrap();
        assert!(max_diff(&mc, &c) < 1e-12);
        assert!(mollify(&c, 0.0).is_err());
    }

    #[test]
    fn recipes_build() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let bump = InitialDataRecipe::positive_bump(2.0, 0.5).build(&g).unwrap();
        assert!(bump.min() >= 0.0);
        assert!((bump.max() - 2.0).abs() < 1e-15);
        let single = InitialDataRecipe::new(InitialData::SingleMode {
            amplitude: 1.0,
            mode: 3,
            phase: 0.0,
        })
        .build(&g)
        .unwrap();
        assert!(max_diff(&single, &SpectralField::from_fn(&g, |x| (3.0 * x).cos())) < 1e-14);
        let sum = InitialDataRecipe::new(InitialData::SumOfModes {
            modes: vec![
                ModeTerm { mode: 1, cos: 1.0, sin: 0.0 },
                ModeTerm { mode: 2, cos: 0.0, sin: 0.5 },
            ],
        })
        .build(&g)
        .unwrap();
        let expect = SpectralField::from_fn(&g, |x| x.cos() + 0.5 * (2.0 * x).sin());
        assert!(max_diff(&sum, &expect) < 1e-14);
        assert!(InitialDataRecipe::positive_bump(-1.0, 0.5).build(&g).is_err());
    }

    #[test]
    fn horizon_estimate_is_reciprocal() {
        let g = make_grid(256, 8.0 * PI).unwrap();
        let f = InitialDataRecipe::positive_bump(1.0, 1.0).build(&g).unwrap();
        let spec = ModelSpec::model1();
        let t1 = local_horizon_estimate(&f, &spec, 1.0).unwrap();
        let t2 = local_horizon_estimate(&f.scaled(2.0), &spec, 1.0).unwrap();
        assert!((t1 / t2 - 2.0).abs() < 1e-12);
        let b = DyadicPartition::new(&g).unwrap().besov_norm(&f, 1.5, 2.0, 1.0).unwrap().value;
        let t = local_horizon_estimate(&f.scaled(4.0 / b), &spec, 1.0).unwrap();
        assert!((t - 0.25).abs() < 1e-12);
        assert!(local_horizon_estimate(&SpectralField::zeros(&g), &spec, 1.0).is_err());
        let t3 = local_horizon_estimate(&f, &ModelSpec::model3(0.1, 2.0), 1.0).unwrap();
        assert!((t3 - 1.0 / sobolev_norm(&f, 2.0, false)).abs() < 1e-14);
    }
}
