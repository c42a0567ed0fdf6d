//! The acceptance suite behind `cvqec verify`.
//!
//! Each criterion returns a [`CriterionResult`] with its own PASS/FAIL and a
//! few detail lines. Reference values here are transcribed independently of
//! the model code so a corrupted constant shows up as a named failure.

use std::fmt;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::decoder::{build_covariance, estimator_variance, variance_change_table, WhitenedDecoder};
use crate::gkp::{run_suppression_round, sample_input, suppress_unchecked};
use crate::gkp_analytics::{lattice_crossing_probability, residual_pdf, residual_variance, SeriesControl};
use crate::phase_space::{NoiseParams, Quadrature, RngStream, Squeezing, CODE_SIZE, LATTICE_SPACING, SQRT_PI};
use crate::quadrature::integrate;
use crate::report::{generate_fig5_data, generate_table3_comparison, strip_comments};
use crate::simulator::{Mode, Simulator};
use crate::steane::{symplectic_check, syndrome_table, syndrome_unchecked, EncodingMatrix, SyndromeModel};

/// Seed for every Monte Carlo criterion. Fixed before any run was made.
pub const VERIFY_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Full,
    /// Reduced sample counts and proportionally looser tolerances.
    Quick,
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// A failure here is reported but does not fail the suite.
    pub advisory: bool,
    pub elapsed: Duration,
    pub budget: Duration,
    pub details: Vec<String>,
}

impl CriterionResult {
    pub fn blocks_suite(&self) -> bool {
        !self.passed && !self.advisory
    }

    pub fn status(&self) -> &'static str {
        match (self.passed, self.advisory) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (advisory)",
        }
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {}: {:.3} s (budget {} s)",
            self.status(),
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64()
        )?;
        for d in &self.details {
            write!(f, "\n    {d}")?;
        }
        Ok(())
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "table1_exactness"),
    (2, "table2_exactness"),
    (3, "residual_variance_consistency"),
    (4, "fig6_reproduction"),
    (5, "miscorrection_bounds"),
    (6, "estimator_statistics"),
    (7, "finite_squeezing_model"),
    (8, "symplectic_diagnostic"),
    (9, "table3_reporting"),
    (10, "determinism"),
];

/// Collects named checks for one criterion.
struct Checks {
    ok: bool,
    details: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self { ok: true, details: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.details.push(format!("[{}] {what}", if ok { "ok" } else { "FAIL" }));
        self.ok &= ok;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.details.push(format!("[info] {}", what.into()));
    }
}

fn finish(id: u8, budget_s: f64, start: Instant, mut checks: Checks, advisory: bool) -> CriterionResult {
    let elapsed = start.elapsed();
    let budget = Duration::from_secs_f64(budget_s);
    checks.check(elapsed <= budget, format!("runtime {:.3} s within {budget_s} s", elapsed.as_secs_f64()));
    let name = CRITERIA[usize::from(id) - 1].1;
    CriterionResult { id, name, passed: checks.ok, advisory, elapsed, budget, details: checks.details }
}

/// The unit-error signature table, row by row: `ε_x1..ε_x7` then `ε_p1..ε_p7`,
/// columns `s1..s6`.
pub const TABLE1_REFERENCE: [[i64; 6]; 14] = [
    [-1, -1, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0],
    [-1, -1, -1, 0, 0, 0],
    [-1, -2, -1, 0, 0, 0],
    [-2, -1, -1, 0, 0, 0],
    [0, 0, 0, 0, 1, 1],
    [0, 0, 0, -1, 0, -1],
    [0, 0, 0, -1, -1, 0],
    [0, 0, 0, -1, -1, -1],
    [0, 0, 0, -1, 0, 0],
    [0, 0, 0, 0, -1, 0],
    [0, 0, 0, 0, 0, -1],
];

pub fn check_table1(model: &SyndromeModel) -> CriterionResult {
    let start = Instant::now();
    let rows = syndrome_table(model);
    let mut c = Checks::new();
    c.check(rows.len() == 14, format!("{} rows", rows.len()));
    let mut mismatches = Vec::new();
    for (row, reference) in rows.iter().zip(TABLE1_REFERENCE.iter()) {
        for (k, (&got, &want)) in row.syndromes.iter().zip(reference.iter()).enumerate() {
            if got != want {
                mismatches.push(format!("{} s{}: got {got}, expected {want}", row.label(), k + 1));
            }
        }
    }
    c.check(mismatches.is_empty(), format!("{} mismatched cells of 84", mismatches.len()));
    for m in mismatches.into_iter().take(8) {
        c.note(m);
    }
    finish(1, 0.001, start, c, false)
}

type Q = Ratio<i64>;

/// Gauss-Jordan inverse over the rationals.
fn invert_exact(m: [[i64; 3]; 3]) -> Option<[[Q; 3]; 3]> {
    let mut a: [[Q; 6]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| if j < 3 { Q::from_integer(m[i][j]) } else { Q::from_integer((j - 3 == i) as i64) })
    });
    for col in 0..3 {
        let pivot = (col..3).find(|&r| a[r][col] != Q::from_integer(0))?;
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..3 {
            if r != col {
                let factor = a[r][col];
                let pivot_row = a[col];
                for (v, &pv) in a[r].iter_mut().zip(pivot_row.iter()) {
                    *v -= factor * pv;
                }
            }
        }
    }
    Some(std::array::from_fn(|i| std::array::from_fn(|j| a[i][j + 3])))
}

/// `Var(d̂_j)/σ²_res − 2` from the exact inverse Gram matrix and the
/// reference table's position columns.
pub fn exact_variance_changes() -> Option<[Q; CODE_SIZE]> {
    let gram = [[8, 6, 4], [6, 8, 4], [4, 4, 4]];
    let inv = invert_exact(gram)?;
    Some(std::array::from_fn(|j| {
        let m: [Q; 3] = std::array::from_fn(|r| Q::from_integer(TABLE1_REFERENCE[j][r]));
        let mut quad = Q::from_integer(0);
        for a in 0..3 {
            for b in 0..3 {
                quad += m[a] * inv[a][b] * m[b];
            }
        }
        quad.recip() - Q::from_integer(2)
    }))
}

pub fn check_table2(model: &SyndromeModel) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let tabulated: [Q; CODE_SIZE] = [
        Q::from_integer(1),
        Q::from_integer(1),
        Q::from_integer(1),
        Q::new(-2, 7),
        Q::from_integer(2),
        Q::new(-2, 7),
        Q::new(-2, 7),
    ];
    match exact_variance_changes() {
        Some(exact) => {
            c.check(exact == tabulated, format!("exact rational oracle gives {}", fmt_ratios(&exact)));
            let mut worst: f64 = 0.0;
            for s2 in [0.1, 1.0, 0.37, 2.5e-3] {
                match build_covariance(model, Quadrature::X, s2, Squeezing::Ideal) {
                    Ok(cov) => {
                        let table = variance_change_table(model, &cov);
                        for (v, r) in table.iter().zip(tabulated.iter()) {
                            let want = *r.numer() as f64 / *r.denom() as f64 * s2;
                            worst = worst.max(((v - want) / want).abs());
                        }
                    }
                    Err(e) => c.check(false, format!("covariance at sigma_res_sq {s2}: {e}")),
                }
            }
            c.check(worst < 1e-12, format!("worst relative deviation {worst:.3e} (limit 1e-12)"));
        }
        None => c.check(false, "reference Gram matrix is singular"),
    }
    finish(2, 0.010, start, c, false)
}

fn fmt_ratios(r: &[Q]) -> String {
    let parts: Vec<String> = r.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Mean and variance of a stream of values, reduced in chunk order.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments { n, mean: self.mean + d * o.n / n, m2: self.m2 + o.m2 + d * d * self.n * o.n / n }
    }

    fn variance(&self) -> f64 {
        self.m2 / (self.n - 1.0)
    }
}

/// Data-quadrature residual moments over `samples` inner rounds.
fn residual_moments(params: &NoiseParams, samples: u64, seed: u64) -> Moments {
    const CHUNK: u64 = 100_000;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut s = RngStream::new(seed, i);
            let mut m = Moments::default();
            for _ in 0..CHUNK.min(samples - i * CHUNK) {
                m.push(suppress_unchecked(&sample_input(&mut s, params)).xi_x_data);
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

pub fn check_residual_variance(profile: Profile) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let (samples, tol) = match profile {
        Profile::Full => (10_000_000, 0.01),
        Profile::Quick => (1_000_000, 0.02),
    };
    let ctrl = SeriesControl::default();
    for (i, s2) in [0.01f64, 0.04, 0.2].into_iter().enumerate() {
        let sigma = s2.sqrt();
        let analytic = residual_variance(sigma, &ctrl);
        let params = NoiseParams::new(sigma, Squeezing::Ideal);
        match (analytic, params) {
            (Ok(v), Ok(p)) => {
                let m = residual_moments(&p, samples, VERIFY_SEED.wrapping_add(i as u64));
                let rel = m.variance() / v - 1.0;
                c.check(
                    rel.abs() < tol,
                    format!("sigma^2 {s2}: series {v:.6}, empirical {:.6} ({} samples), rel {rel:+.2e}", m.variance(), samples),
                );
            }
            (Err(e), _) | (_, Err(e)) => c.check(false, format!("sigma^2 {s2}: {e}")),
        }
    }
    for sigma in [0.2, 0.4472, 1.0] {
        let half = 8.0 * sigma + 4.0 * SQRT_PI;
        let mass = integrate(|x| residual_pdf(x, sigma, &ctrl).unwrap_or(f64::NAN), -half, half, 1e-13);
        match mass {
            Ok(m) => c.check((m - 1.0).abs() < 1e-8, format!("pdf mass at sigma {sigma}: {m:.12}")),
            Err(e) => c.check(false, format!("pdf mass at sigma {sigma}: {e}")),
        }
    }
    match residual_variance(0.05, &ctrl) {
        Ok(v) => {
            let rel = v / 0.00125 - 1.0;
            c.check(rel.abs() < 1e-6, format!("sigma 0.05 limit: rel gap {rel:.2e}"));
        }
        Err(e) => c.check(false, e.to_string()),
    }
    finish(3, 60.0, start, c, false)
}

/// Final statistics of the three scenarios.
#[derive(Debug, Clone, Copy)]
pub struct Fig6Summary {
    pub std: [f64; 3],
    pub mean: [f64; 3],
}

pub fn run_fig6(trajectories: usize, seed: u64, workers: usize) -> crate::Result<Fig6Summary> {
    let cfg = RunConfig { trajectories, seed, ..RunConfig::default() };
    let mut out = Fig6Summary { std: [0.0; 3], mean: [0.0; 3] };
    for (i, mode) in Mode::ALL.into_iter().enumerate() {
        let stats = Simulator::new(cfg.scenario(mode))?.run(workers, 0)?;
        out.std[i] = stats.final_std();
        out.mean[i] = stats.final_mean();
    }
    Ok(out)
}

pub fn check_fig6(profile: Profile) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let (trajectories, widen) = match profile {
        Profile::Full => (2000, 1.0),
        Profile::Quick => (250, 3.0),
    };
    match run_fig6(trajectories, VERIFY_SEED, 0) {
        Ok(s) => {
            let names = ["no_qec", "gkp_only", "concatenated"];
            let targets = [200f64.sqrt(), 10.19, 10.20];
            for i in 0..3 {
                let rel = s.std[i] / targets[i] - 1.0;
                c.check(
                    rel.abs() <= 0.05 * widen,
                    format!("{} final std {:.4} vs {:.2} ({:+.1}%)", names[i], s.std[i], targets[i], 100.0 * rel),
                );
            }
            let ratio = (s.std[1] / s.std[0]).powi(2);
            let (lo, hi) = match profile {
                Profile::Full => (0.47, 0.55),
                Profile::Quick => (0.40, 0.62),
            };
            c.check((lo..=hi).contains(&ratio), format!("suppression ratio {ratio:.4} in [{lo:.2}, {hi:.2}]"));
            c.check(
                s.mean[2].abs() < 0.5 * widen,
                format!("concatenated final |mean| {:.4} < {}", s.mean[2].abs(), 0.5 * widen),
            );
            let drift = 10.0 * LATTICE_SPACING;
            for (name, mean) in names.iter().zip(&s.mean).take(2) {
                let rel = mean / drift - 1.0;
                c.check(
                    rel.abs() <= 0.05 * widen,
                    format!("{name} final mean {mean:.4} vs {drift:.4} ({:+.1}%)", 100.0 * rel),
                );
            }
            c.note(format!("trajectories {trajectories}, seed {VERIFY_SEED}"));
        }
        Err(e) => c.check(false, format!("simulation failed: {e}")),
    }
    finish(4, 300.0, start, c, false)
}

pub fn check_miscorrection(profile: Profile) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let samples = match profile {
        Profile::Full => 100_000,
        Profile::Quick => 10_000,
    };
    let grid = [2.0, 4.0, 6.0, 8.0, 10.0];
    let model = SyndromeModel::standard();
    match generate_fig5_data(&model, 0.1, &grid, samples, VERIFY_SEED) {
        Ok(d) => {
            let bound = d.reals("bound").unwrap_or_default();
            let g = d.reals("d_over_sigma_res").unwrap_or_default();
            let lower = d.reals("empirical_wilson_lower_3sigma").unwrap_or_default();
            let mf_lower = d.reals("matched_filter_wilson_lower_3sigma").unwrap_or_default();
            let violations: Vec<usize> = (0..bound.len()).filter(|&i| lower[i] > bound[i]).collect();
            c.check(
                violations.is_empty() && !bound.is_empty(),
                format!("{} of {} points have empirical rate above bound + 3-sigma slack", violations.len(), bound.len()),
            );
            let at10: Vec<usize> = (0..bound.len()).filter(|&i| g[i] == 10.0).collect();
            let (worst, wi) = at10.iter().map(|&i| (bound[i], i)).fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a });
            let over = at10.iter().filter(|&&i| bound[i] >= 1e-4).count();
            c.check(
                over == 0,
                format!(
                    "at d/sigma_res = 10: {over} of {} bounds >= 1e-4, largest {worst:.3e} ({} qumode {})",
                    at10.len(),
                    row_text(&d, wi, "quadrature"),
                    row_text(&d, wi, "qumode"),
                ),
            );
            let monotone = bound.chunks(grid.len()).all(|w| w.windows(2).all(|p| p[1] < p[0]));
            c.check(monotone, "bounds decrease along the grid");
            let mf_over = (0..bound.len()).filter(|&i| mf_lower[i] > bound[i]).count();
            c.note(format!("matched filter with estimated d exceeds the bound at {mf_over} points"));
        }
        Err(e) => c.check(false, e.to_string()),
    }
    finish(5, 120.0, start, c, false)
}

fn row_text(d: &crate::report::Dataset, row: usize, col: &str) -> String {
    match d.column(col).map(|c| &d.rows[row][c]) {
        Some(crate::report::Value::Text(s)) => s.clone(),
        Some(crate::report::Value::Int(i)) => i.to_string(),
        Some(crate::report::Value::Real(v)) => v.to_string(),
        None => "?".into(),
    }
}

/// Decoded magnitudes for `s = M ε + d m_j`, `ε ~ N(0, σ²_res I)`, kept
/// only when the decoder localizes `j` correctly. Returns the estimates and
/// the number of trials.
pub fn conditioned_estimates(
    model: &SyndromeModel,
    decoder: &WhitenedDecoder,
    qumode: usize,
    d: f64,
    sigma_res: f64,
    trials: u64,
    stream: &mut RngStream,
) -> Vec<f64> {
    let q = decoder.quadrature();
    let m = model.signature(q);
    let col = model.column0(q, qumode - 1);
    let mut kept = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let eps: [f64; CODE_SIZE] = std::array::from_fn(|_| sigma_res * stream.standard_normal());
        let mut s = syndrome_unchecked(m, &eps);
        for (si, &c) in s.iter_mut().zip(col.iter()) {
            *si += d * c as f64;
        }
        let r = decoder.decode_unchecked(&s, 0.0);
        if r.j_star == qumode {
            kept.push(r.d_hat);
        }
    }
    kept
}

pub fn check_estimator(profile: Profile) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let (trials, var_tol) = match profile {
        Profile::Full => (100_000, 0.05),
        Profile::Quick => (20_000, 0.10),
    };
    let model = SyndromeModel::standard();
    let s2 = 0.1;
    let d = LATTICE_SPACING;
    match build_covariance(&model, Quadrature::X, s2, Squeezing::Ideal) {
        Ok(cov) => {
            let dec = WhitenedDecoder::new(&model, &cov);
            for j in [1usize, 4, 6] {
                let mut stream = RngStream::new(VERIFY_SEED, 600 + j as u64);
                let kept = conditioned_estimates(&model, &dec, j, d, s2.sqrt(), trials, &mut stream);
                let mut m = Moments::default();
                kept.iter().for_each(|&v| m.push(v));
                let var = m.variance();
                let se = (var / m.n).sqrt();
                let z = (m.mean - d) / se;
                let expect = estimator_variance(&model, &cov, j).unwrap_or(f64::NAN);
                let rel = var / expect - 1.0;
                c.check(z.abs() < 4.0, format!("qumode {j}: mean {:.5} vs {d:.5}, {z:+.2} SE ({} of {trials} kept)", m.mean, kept.len()));
                c.check(rel.abs() < var_tol, format!("qumode {j}: var {var:.5} vs {expect:.5} ({:+.2}%)", 100.0 * rel));
            }
        }
        Err(e) => c.check(false, e.to_string()),
    }
    finish(6, 30.0, start, c, false)
}

pub fn check_finite_squeezing(profile: Profile) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let rounds = match profile {
        Profile::Full => 1_000_000u64,
        Profile::Quick => 200_000,
    };
    let r = 0.5 * 10f64.ln();
    let expect = 0.04 / 2.0 + 0.1 / 8.0;
    match NoiseParams::new(0.2, Squeezing::Finite { r }) {
        Ok(params) => {
            let mut stream = RngStream::new(VERIFY_SEED, 700);
            let mut m = Moments::default();
            for _ in 0..rounds {
                match run_suppression_round(&mut stream, &params) {
                    Ok(o) => m.push(o.xi_x_data),
                    Err(e) => {
                        c.check(false, e.to_string());
                        break;
                    }
                }
            }
            let rel = m.variance() / expect - 1.0;
            c.check(
                rel.abs() < 0.05,
                format!("residual variance {:.6} vs {expect} ({:+.2}%, {rounds} rounds)", m.variance(), 100.0 * rel),
            );
        }
        Err(e) => c.check(false, e.to_string()),
    }
    let model = SyndromeModel::standard();
    let mut monotone = true;
    for q in Quadrature::BOTH {
        for j in 1..=CODE_SIZE {
            let mut prev = f64::INFINITY;
            for i in 1..=60 {
                let r = 0.05 * i as f64;
                let v = build_covariance(&model, q, 0.02, Squeezing::Finite { r })
                    .and_then(|cov| estimator_variance(&model, &cov, j));
                match v {
                    Ok(v) if v < prev => prev = v,
                    _ => monotone = false,
                }
            }
        }
    }
    c.check(monotone, "estimator variance strictly decreases in r on 0.05..3.0, both quadratures, all qumodes");
    finish(7, 60.0, start, c, false)
}

pub fn check_symplectic(enc: &EncodingMatrix) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let report = symplectic_check(enc);
    // spot checks, independent of the full sweep
    let omega = |a: usize, b: usize| -> i64 {
        (0..CODE_SIZE)
            .map(|k| enc.s[a][2 * k] * enc.s[b][2 * k + 1] - enc.s[a][2 * k + 1] * enc.s[b][2 * k])
            .sum()
    };
    c.check(omega(0, 1) == 1, format!("[x1, p1] = {} (expected 1)", omega(0, 1)));
    c.check(omega(0, 3) == 0, format!("[x1, p2] = {} (expected 0)", omega(0, 3)));
    c.check(omega(0, 2) == 0, format!("[x1, x2] = {} (expected 0)", omega(0, 2)));
    c.check(report.symplectic, format!("{} violating pairs, max deviation {}", report.violations.len(), report.max_deviation));
    for v in report.violations.iter().take(10) {
        c.note(format!("[{}, {}] = {} (expected {})", v.first, v.second, v.found, v.expected));
    }
    finish(8, 0.001, start, c, true)
}

pub fn check_table3() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let reference = [(0.005, 0.016), (0.02, 0.081), (0.03, 0.17), (0.2, 7.6)];
    match generate_table3_comparison() {
        Ok(d) => {
            let vars = d.reals("noise_variance").unwrap_or_default();
            let reported = d.reals("reported_probability_percent").unwrap_or_default();
            let verbatim = vars.len() == 4
                && reference.iter().enumerate().all(|(i, &(v, p))| vars[i] == v && reported[i] == p);
            c.check(verbatim, "four platform rows match the tabulated values verbatim");
            let formula = d.reals("formula_probability_percent").unwrap_or_default();
            let mut worst: f64 = 0.0;
            for (i, &(v, _)) in reference.iter().enumerate() {
                let sigma = f64::sqrt(v);
                let density =
                    |x: f64| (-(x * x) / (2.0 * v)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
                let a = 0.5 * SQRT_PI;
                let tail = integrate(density, a, a + 40.0 * sigma, 1e-14).map(|t| 200.0 * t);
                match tail {
                    Ok(t) if i < formula.len() => worst = worst.max((formula[i] / t - 1.0).abs()),
                    _ => worst = f64::INFINITY,
                }
            }
            c.check(worst < 1e-10, format!("formula vs tail integral: worst relative {worst:.2e}"));
            let deltas = d.reals("abs_delta_percent").unwrap_or_default();
            c.check(deltas.len() == 4 && deltas.iter().all(|x| x.is_finite()), "discrepancy column populated");
            c.check(!d.notes.is_empty(), "ambiguity note attached");
            if let Ok(p) = lattice_crossing_probability(0.2f64.sqrt()) {
                c.note(format!("formula at sigma^2 = 0.2: {:.4}% (tabulated 7.6%)", 100.0 * p));
            }
        }
        Err(e) => c.check(false, e.to_string()),
    }
    finish(9, 0.010, start, c, false)
}

/// Worker count and (file name, comment-stripped body) pairs.
type Run = (usize, Vec<(String, String)>);

pub fn check_determinism() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let result = (|| -> crate::Result<Vec<Run>> {
        let mut runs = Vec::new();
        for workers in [1usize, 8, 1, 8] {
            let dir = tempfile::tempdir()?;
            let cfg = RunConfig {
                rounds: 200,
                trajectories: 96,
                trace_count: 4,
                workers,
                seed: VERIFY_SEED,
                output_dir: dir.path().to_path_buf(),
                verbosity: 0,
                ..RunConfig::default()
            };
            crate::cli::cmd_simulate(&cfg, &mut std::io::sink())?;
            let mut files = Vec::new();
            let mut names: Vec<_> = std::fs::read_dir(dir.path())?
                .filter_map(|e| e.ok())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .filter(|n| n.ends_with(".csv"))
                .collect();
            names.sort();
            for n in names {
                let body = strip_comments(&std::fs::read_to_string(dir.path().join(&n))?);
                files.push((n, body));
            }
            runs.push((workers, files));
        }
        Ok(runs)
    })();
    match result {
        Ok(runs) => {
            let first = &runs[0].1;
            c.check(!first.is_empty(), format!("{} CSV files per run", first.len()));
            for (workers, files) in &runs[1..] {
                c.check(files == first, format!("workers {workers}: CSV bodies identical to workers 1"));
            }
        }
        Err(e) => c.check(false, format!("simulate failed: {e}")),
    }
    finish(10, 60.0, start, c, false)
}

pub fn run_criterion(id: u8, profile: Profile) -> Option<CriterionResult> {
    let model = SyndromeModel::standard();
    Some(match id {
        1 => check_table1(&model),
        2 => check_table2(&model),
        3 => check_residual_variance(profile),
        4 => check_fig6(profile),
        5 => check_miscorrection(profile),
        6 => check_estimator(profile),
        7 => check_finite_squeezing(profile),
        8 => check_symplectic(&EncodingMatrix::steane()),
        9 => check_table3(),
        10 => check_determinism(),
        _ => return None,
    })
}

pub fn run_all(profile: Profile) -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|&(id, _)| run_criterion(id, profile)).collect()
}
