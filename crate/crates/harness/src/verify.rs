//! Operator, Littlewood-Paley and commutator property checks behind `verify-ops`.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use nlt_core::littlewood_paley::{half_commutator_ratio, DyadicPartition, RING_OUTER};
use nlt_core::nonlocal::{lambda_pv_oracle, MultiplierOp};
use nlt_core::spectral::{dealiased_product, inner_product, lp_norm, make_grid, GridRef, SpectralField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::run::write_json;

pub const REPORT_FILE: &str = "verify_ops.json";
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const ORACLE_TOLERANCE: f64 = 1e-3;
/// Ceiling for the commutator ratios, which are only claimed to be bounded.
pub const COMMUTATOR_CEILING: f64 = 100.0;
pub const RANDOM_FIELDS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn grid_size(self) -> usize {
        match self {
            Level::Quick => 256,
            Level::Full => 2048,
        }
    }
}

/// Deliberate corruption of an operator table, to confirm the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    HilbertSymbol,
    LambdaSymbol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: Level,
    pub n: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
    pub passed: bool,
    pub elapsed_seconds: f64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Operators {
    hilbert: MultiplierOp,
    derivative: MultiplierOp,
    lambdas: Vec<(f64, MultiplierOp)>,
}

impl Operators {
    fn new(grid: &GridRef, fault: Option<Fault>) -> Self {
        let mut ops = Operators {
            hilbert: MultiplierOp::hilbert(grid),
            derivative: MultiplierOp::derivative(grid, 1),
            lambdas: [0.5, 1.0, 1.5].iter().map(|&g| (g, MultiplierOp::lambda(grid, g))).collect(),
        };
        let i = grid.index_of(3);
        match fault {
            Some(Fault::HilbertSymbol) => ops.hilbert.symbol_mut()[i] *= -1.0,
            Some(Fault::LambdaSymbol) => {
                for (_, op) in &mut ops.lambdas {
                    op.symbol_mut()[i] *= 1.5;
                }
            }
            None => {}
        }
        ops
    }

    fn lambda(&self, gamma: f64) -> &MultiplierOp {
        &self.lambdas.iter().find(|(g, _)| *g == gamma).expect("tabulated order").1
    }
}

/// Real mean-zero field with modes `1..=band` and coefficients decaying like `1/m`.
pub fn random_field(grid: &GridRef, band: i64, rng: &mut impl Rng) -> SpectralField {
    let mut c = vec![Complex64::new(0.0, 0.0); grid.n()];
    for m in 1..=band {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (m as f64);
        c[grid.index_of(m)] = z;
        c[grid.index_of(-m)] = z.conj();
    }
    SpectralField::from_spectral(grid, c).expect("grid length")
}

fn sup(f: &SpectralField) -> Result<f64> {
    Ok(lp_norm(f, f64::INFINITY)?)
}

fn check(name: &str, value: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: value.is_finite() && value <= tolerance,
        value,
        tolerance,
        detail,
    }
}

fn identity_checks(ops: &Operators, fields: &[SpectralField], out: &mut Vec<CheckResult>) -> Result<()> {
    let (mut squared, mut skew, mut lambda, mut hardy) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for (i, f) in fields.iter().enumerate() {
        let g = &fields[(i + 1) % fields.len()];
        let scale = sup(f)?;
        let hf = ops.hilbert.apply(f)?;
        let hhf = ops.hilbert.apply(&hf)?;
        squared = squared.max(sup(&hhf.linear_combination(1.0, f, 1.0)?)? / scale);

        let hg = ops.hilbert.apply(g)?;
        let s = inner_product(&hf, g)? + inner_product(f, &hg)?;
        skew = skew.max(s.abs() / (lp_norm(f, 2.0)? * lp_norm(g, 2.0)?));

        let lf = ops.lambda(1.0).apply(f)?;
        let hfx = ops.hilbert.apply(&ops.derivative.apply(f)?)?;
        lambda = lambda.max(sup(&lf.sub(&hfx)?)? / sup(&lf)?);

        let lhs = ops.hilbert.apply(&dealiased_product(f, &hf)?)?.scaled(2.0);
        let rhs = dealiased_product(&hf, &hf)?.sub(&dealiased_product(f, f)?)?;
        hardy = hardy.max(sup(&lhs.sub(&rhs)?)? / scale.powi(2));
    }
    let n = fields.len();
    out.push(check("hilbert-squared", squared, IDENTITY_TOLERANCE, format!("max |H²f + f|∞/|f|∞ over {n} fields")));
    out.push(check("hilbert-skew", skew, IDENTITY_TOLERANCE, format!("max |<Hf,g> + <f,Hg>|/(|f||g|) over {n} pairs")));
    out.push(check("lambda-equals-hilbert-derivative", lambda, IDENTITY_TOLERANCE, format!("max |Λf − H f_x|∞/|Λf|∞ over {n} fields")));
    out.push(check("hardy-identity", hardy, IDENTITY_TOLERANCE, format!("max |2H(fHf) − (Hf)² + f²|∞/|f|²∞ over {n} fields")));
    Ok(())
}

fn oracle_check(ops: &Operators, grid: &GridRef, out: &mut Vec<CheckResult>) -> Result<()> {
    let f = SpectralField::from_fn(grid, |x| (-(x - PI).powi(2) / 0.05).exp());
    let mut worst = 0.0_f64;
    let mut detail = Vec::new();
    for (gamma, op) in &ops.lambdas {
        let spectral = op.apply(&f)?;
        let pv = lambda_pv_oracle(&f, *gamma)?;
        let err = lp_norm(&pv.sub(&spectral)?, 2.0)? / lp_norm(&spectral, 2.0)?;
        detail.push(format!("γ={gamma}: {err:.3e}"));
        worst = worst.max(err);
    }
    out.push(check("pv-oracle", worst, ORACLE_TOLERANCE, detail.join(", ")));
    Ok(())
}

/// Cauchy-Schwarz bound `‖Δ_j f‖_∞ ≤ sqrt(#modes/L)·‖Δ_j f‖_2`, divided by `2^{j/2}`.
fn sup_bound(lp: &DyadicPartition, j: i32) -> Result<f64> {
    let count = lp.block_symbol(j)?.iter().filter(|&&w| w != 0.0).count() as f64;
    Ok((count / lp.grid().period()).sqrt() / (0.5 * f64::from(j)).exp2())
}

fn littlewood_paley_checks(
    grid: &GridRef,
    fields: &[SpectralField],
    rng: &mut ChaCha8Rng,
    out: &mut Vec<CheckResult>,
) -> Result<()> {
    let lp = DyadicPartition::new(grid)?;
    out.push(check(
        "partition-of-unity",
        lp.partition_residual(),
        IDENTITY_TOLERANCE,
        "max |χ + Σφ_j − 1| over grid wavenumbers".into(),
    ));

    let band = lp.reconstruction_band().floor() as i64 - 1;
    let mut recon = 0.0_f64;
    for _ in 0..fields.len() {
        let f = random_field(grid, band, rng);
        recon = recon.max(sup(&lp.reconstruct(&f)?.sub(&f)?)? / sup(&f)?);
    }
    out.push(check(
        "lp-reconstruction",
        recon,
        IDENTITY_TOLERANCE,
        format!("fields band-limited to |m| ≤ {band}"),
    ));

    let (mut derivative, mut integrability) = (0.0_f64, 0.0_f64);
    for f in fields {
        for j in lp.shells() {
            let (r, s) = match lp.bernstein_ratio(f, j, 1, 2.0, f64::INFINITY) {
                Ok(v) => v,
                Err(nlt_core::Error::EmptyShell(_)) => continue,
                Err(e) => return Err(e.into()),
            };
            derivative = derivative.max(r);
            integrability = integrability.max(s / sup_bound(&lp, j)?);
        }
    }
    out.push(check(
        "bernstein-derivative",
        derivative,
        RING_OUTER * (1.0 + 1e-9),
        format!("max |∂Δ_j f|_2/(2^j|Δ_j f|_2), bound {RING_OUTER:.6} (outer ring radius)"),
    ));
    out.push(check(
        "bernstein-integrability",
        integrability,
        1.0 + 1e-9,
        "max |Δ_j f|_∞/(2^{j/2}|Δ_j f|_2) over its mode-count bound".into(),
    ));

    let mut worst = 0.0_f64;
    for (i, f) in fields.iter().enumerate() {
        let g = &fields[(i + 1) % fields.len()];
        for j in lp.shells() {
            match lp.commutator_ratio(f, g, j) {
                Ok(r) => worst = worst.max(r),
                Err(nlt_core::Error::Degenerate(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    out.push(check(
        "besov-commutator",
        worst,
        COMMUTATOR_CEILING,
        format!("max ratio {worst:.4} over {} field pairs and all shells", fields.len()),
    ));

    let mut half = 0.0_f64;
    for (i, f) in fields.iter().enumerate() {
        let g = &fields[(i + 2) % fields.len()];
        let psi = random_field(grid, 4, rng).linear_combination(1.0, &SpectralField::from_fn(grid, |_| 3.0), 1.0)?;
        half = half.max(half_commutator_ratio(&psi, f, g)?);
    }
    out.push(check(
        "half-commutator",
        half,
        COMMUTATOR_CEILING,
        format!("max ratio {half:.4} over {} triples", fields.len()),
    ));
    Ok(())
}

pub fn verify_ops(level: Level, seed: u64, fault: Option<Fault>, out: Option<&Path>) -> Result<VerifyReport> {
    let start = Instant::now();
    let n = level.grid_size();
    let grid = make_grid(n, 2.0 * PI)?;
    let ops = Operators::new(&grid, fault);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = (n / 8) as i64;
    let fields: Vec<SpectralField> = (0..RANDOM_FIELDS).map(|_| random_field(&grid, band, &mut rng)).collect();

    let mut checks = Vec::new();
    identity_checks(&ops, &fields, &mut checks)?;
    oracle_check(&ops, &grid, &mut checks)?;
    littlewood_paley_checks(&grid, &fields, &mut rng, &mut checks)?;

    let report = VerifyReport {
        level,
        n,
        seed,
        fault,
        passed: checks.iter().all(|c| c.passed),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        checks,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::HarnessError::io(dir, e))?;
        write_json(&dir.join(REPORT_FILE), &report)?;
    }
    Ok(report)
}
