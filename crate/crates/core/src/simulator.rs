//! Multi-round Monte Carlo over independent trajectories.
//!
//! Each round injects fresh Gaussian displacements, optionally runs the inner
//! and outer correction layers, and adds whatever is left onto the
//! accumulated residual `ζ`. Only the current round's residual reaches the
//! outer syndrome: accumulated displacement looks exactly like logical signal.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{build_covariance, matched_filter_plain, WhitenedDecoder, DEFAULT_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::gkp::{sample_input, suppress_unchecked};
use crate::phase_space::{DisplacementState, NoiseParams, Quadrature, RngStream, Squeezing, CODE_SIZE, LATTICE_SPACING};
use crate::steane::{syndrome_unchecked, SyndromeModel, ANCILLA_TERMS};

/// Trajectories per reduction block. Fixed so the floating-point reduction
/// order never depends on the thread count.
const BLOCK: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NoQec,
    GkpOnly,
    Concatenated,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::NoQec, Mode::GkpOnly, Mode::Concatenated];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::NoQec => "no_qec",
            Mode::GkpOnly => "gkp_only",
            Mode::Concatenated => "concatenated",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "no_qec" | "noqec" => Ok(Mode::NoQec),
            "gkp_only" | "gkponly" => Ok(Mode::GkpOnly),
            "concatenated" => Ok(Mode::Concatenated),
            _ => Err(invalid(format!("unknown mode '{s}' (expected no_qec, gkp_only or concatenated)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbruptSchedule {
    /// Inject on every round `t` (1-based) with `t % period == 0`.
    pub period: u64,
    pub magnitude: f64,
    pub target_qumode: usize,
    pub quadrature: Quadrature,
}

impl Default for AbruptSchedule {
    fn default() -> Self {
        Self { period: 100, magnitude: LATTICE_SPACING, target_qumode: 1, quadrature: Quadrature::X }
    }
}

impl AbruptSchedule {
    pub fn fires(&self, round: u64) -> bool {
        round.is_multiple_of(self.period)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub sigma_sq: f64,
    pub squeezing: Squeezing,
    pub rounds: usize,
    pub trajectories: usize,
    /// `None` disables injection; statistics then track `x` of qumode 1.
    pub abrupt: Option<AbruptSchedule>,
    pub decoder_threshold: f64,
    pub master_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Concatenated,
            sigma_sq: 0.2,
            squeezing: Squeezing::Ideal,
            rounds: 1000,
            trajectories: 2000,
            abrupt: Some(AbruptSchedule::default()),
            decoder_threshold: DEFAULT_THRESHOLD,
            master_seed: 0x5EED_2024,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_sq.is_finite() && self.sigma_sq >= 0.0) {
            return Err(invalid(format!("sigma_sq must be finite and >= 0, got {}", self.sigma_sq)));
        }
        if let Squeezing::Finite { r } = self.squeezing {
            Squeezing::finite(r)?;
        }
        if self.rounds == 0 {
            return Err(invalid("rounds must be >= 1"));
        }
        if self.trajectories == 0 {
            return Err(invalid("trajectories must be >= 1"));
        }
        if self.decoder_threshold.is_nan() || self.decoder_threshold < 0.0 {
            return Err(invalid(format!("decoder_threshold must be >= 0, got {}", self.decoder_threshold)));
        }
        if let Some(a) = &self.abrupt {
            if a.period == 0 {
                return Err(invalid("abrupt period must be >= 1"));
            }
            if !a.magnitude.is_finite() {
                return Err(invalid("abrupt magnitude must be finite"));
            }
            if !(1..=CODE_SIZE).contains(&a.target_qumode) {
                return Err(invalid(format!("target_qumode must be in 1..=7, got {}", a.target_qumode)));
            }
        }
        Ok(())
    }

    /// Quadrature and 0-based qumode whose residual is reported.
    pub fn tracked(&self) -> (Quadrature, usize) {
        match &self.abrupt {
            Some(a) => (a.quadrature, a.target_qumode - 1),
            None => (Quadrature::X, 0),
        }
    }
}

/// What happened in one round.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RoundDiagnostics {
    pub injected: bool,
    /// Outer decoder fired on the tracked quadrature.
    pub triggered: bool,
    /// 1-based qumode corrected on the tracked quadrature.
    pub corrected_qumode: Option<usize>,
    /// Inner-layer lattice crossings on the tracked quadrature, all qumodes.
    pub crossings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub trajectory_id: u64,
    pub zeta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub mode: Mode,
    pub trajectories: usize,
    /// Per-round mean of `ζ` on the tracked quadrature.
    pub mean: Vec<f64>,
    /// Per-round sample standard deviation (`n − 1`; zero for one trajectory).
    pub std: Vec<f64>,
    /// Per-round number of trajectories whose decoder fired on the tracked quadrature.
    pub triggers: Vec<u64>,
    /// Per-round inner-layer crossing count on the tracked quadrature.
    pub crossings: Vec<u64>,
    pub traces: Vec<Trace>,
}

impl TrajectoryStats {
    pub fn rounds(&self) -> usize {
        self.mean.len()
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean.last().expect("at least one round")
    }

    pub fn final_std(&self) -> f64 {
        *self.std.last().expect("at least one round")
    }
}

enum Outer {
    Plain,
    Whitened(Box<[WhitenedDecoder; 2]>),
}

/// Immutable per-experiment setup shared by all trajectories.
pub struct Simulator {
    config: ScenarioConfig,
    params: NoiseParams,
    model: SyndromeModel,
    outer: Outer,
    ancilla_std: f64,
}

fn quadrature_slot(q: Quadrature) -> usize {
    match q {
        Quadrature::X => 0,
        Quadrature::P => 1,
    }
}

impl Simulator {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let params = NoiseParams::new(config.sigma_sq.sqrt(), config.squeezing)?;
        let model = SyndromeModel::standard();
        let outer = match build_covariance(&model, Quadrature::X, params.sigma_res_sq, config.squeezing) {
            Ok(cx) => {
                let cp = build_covariance(&model, Quadrature::P, params.sigma_res_sq, config.squeezing)?;
                Outer::Whitened(Box::new([WhitenedDecoder::new(&model, &cx), WhitenedDecoder::new(&model, &cp)]))
            }
            // noiseless ideal: the syndrome is exact, so unwhitened matching is optimal
            Err(Error::DegenerateModel(_)) => Outer::Plain,
            Err(e) => return Err(e),
        };
        let ancilla_std = params.peak_std();
        Ok(Self { config, params, model, outer, ancilla_std })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn noise(&self) -> &NoiseParams {
        &self.params
    }

    fn injection(&self, round: u64) -> Option<&AbruptSchedule> {
        self.config.abrupt.as_ref().filter(|a| a.fires(round))
    }

    /// Advances one trajectory by one round (`round` is 1-based).
    pub fn run_round(&self, state: &mut DisplacementState, stream: &mut RngStream, round: u64) -> RoundDiagnostics {
        let (tq, tj) = self.config.tracked();
        let abrupt = self.injection(round);
        let mut diag = RoundDiagnostics { injected: abrupt.is_some(), ..Default::default() };
        match self.config.mode {
            Mode::NoQec => {
                let mut step = stream.normal_unchecked(self.params.sigma);
                if let Some(a) = abrupt {
                    step += a.magnitude;
                }
                state.quadrature_mut(tq)[tj] += step;
            }
            Mode::GkpOnly => {
                let mut input = sample_input(stream, &self.params);
                if let Some(a) = abrupt {
                    match tq {
                        Quadrature::X => input.eps_x_data += a.magnitude,
                        Quadrature::P => input.eps_p_data += a.magnitude,
                    }
                }
                let out = suppress_unchecked(&input);
                let (xi, crossed) = match tq {
                    Quadrature::X => (out.xi_x_data, out.crossed_x),
                    Quadrature::P => (out.xi_p_data, out.crossed_p),
                };
                diag.crossings = crossed as u32;
                state.quadrature_mut(tq)[tj] += xi;
            }
            Mode::Concatenated => {
                let mut xi = DisplacementState::zero();
                for k in 0..CODE_SIZE {
                    let mut input = sample_input(stream, &self.params);
                    if let Some(a) = abrupt.filter(|a| a.target_qumode == k + 1) {
                        match a.quadrature {
                            Quadrature::X => input.eps_x_data += a.magnitude,
                            Quadrature::P => input.eps_p_data += a.magnitude,
                        }
                    }
                    let out = suppress_unchecked(&input);
                    xi.x[k] = out.xi_x_data;
                    xi.p[k] = out.xi_p_data;
                    let crossed = match tq {
                        Quadrature::X => out.crossed_x,
                        Quadrature::P => out.crossed_p,
                    };
                    diag.crossings += crossed as u32;
                }
                for q in Quadrature::BOTH {
                    let residual = xi.quadrature_mut(q);
                    let mut s = syndrome_unchecked(self.model.signature(q), residual);
                    if self.ancilla_std > 0.0 {
                        let a = self.model.ancilla(q);
                        let noise: [f64; ANCILLA_TERMS] =
                            std::array::from_fn(|_| stream.normal_unchecked(self.ancilla_std));
                        for (si, row) in s.iter_mut().zip(a.iter()) {
                            *si += row.iter().zip(noise.iter()).map(|(&c, &n)| c as f64 * n).sum::<f64>();
                        }
                    }
                    let res = match &self.outer {
                        Outer::Plain => matched_filter_plain(&self.model, q, &s).expect("finite syndrome"),
                        Outer::Whitened(d) => d[quadrature_slot(q)].decode_unchecked(&s, self.config.decoder_threshold),
                    };
                    if res.triggered {
                        residual[res.j_star - 1] -= res.d_hat;
                        if q == tq {
                            diag.triggered = true;
                            diag.corrected_qumode = Some(res.j_star);
                        }
                    }
                }
                for k in 0..CODE_SIZE {
                    state.x[k] += xi.x[k];
                    state.p[k] += xi.p[k];
                }
            }
        }
        diag
    }

    /// Runs one full trajectory and returns `ζ` on the tracked quadrature per round.
    fn trajectory(&self, id: u64, sink: &mut impl FnMut(usize, f64, &RoundDiagnostics)) {
        let (tq, tj) = self.config.tracked();
        let mut stream = RngStream::new(self.config.master_seed, id);
        let mut state = DisplacementState::zero();
        for t in 0..self.config.rounds {
            let diag = self.run_round(&mut state, &mut stream, t as u64 + 1);
            sink(t, state.quadrature(tq)[tj], &diag);
        }
    }

    fn run_block(&self, block: usize, trace_count: usize) -> BlockStats {
        let rounds = self.config.rounds;
        let lo = block * BLOCK;
        let hi = (lo + BLOCK).min(self.config.trajectories);
        let mut stats = BlockStats::new(rounds);
        for id in lo..hi {
            let mut trace = (id < trace_count).then(|| Vec::with_capacity(rounds));
            stats.n += 1;
            let n = stats.n as f64;
            self.trajectory(id as u64, &mut |t, z, d| {
                let delta = z - stats.mean[t];
                stats.mean[t] += delta / n;
                stats.m2[t] += delta * (z - stats.mean[t]);
                stats.triggers[t] += d.triggered as u64;
                stats.crossings[t] += u64::from(d.crossings);
                if let Some(tr) = trace.as_mut() {
                    tr.push(z);
                }
            });
            if let Some(zeta) = trace {
                stats.traces.push(Trace { trajectory_id: id as u64, zeta });
            }
        }
        stats
    }

    /// Runs every trajectory on `workers` threads (0 = all cores), keeping
    /// full traces for the first `trace_count` trajectories.
    pub fn run(&self, workers: usize, trace_count: usize) -> Result<TrajectoryStats> {
        let blocks = self.config.trajectories.div_ceil(BLOCK);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Runtime(format!("thread pool: {e}")))?;
        let parts: Vec<BlockStats> =
            pool.install(|| (0..blocks).into_par_iter().map(|b| self.run_block(b, trace_count)).collect());
        let mut total = BlockStats::new(self.config.rounds);
        for part in parts {
            total.merge(part);
        }
        let n = total.n;
        let std = total
            .m2
            .iter()
            .map(|&m2| if n > 1 { (m2 / (n - 1) as f64).max(0.0).sqrt() } else { 0.0 })
            .collect();
        Ok(TrajectoryStats {
            mode: self.config.mode,
            trajectories: n,
            mean: total.mean,
            std,
            triggers: total.triggers,
            crossings: total.crossings,
            traces: total.traces,
        })
    }
}

struct BlockStats {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
    triggers: Vec<u64>,
    crossings: Vec<u64>,
    traces: Vec<Trace>,
}

impl BlockStats {
    fn new(rounds: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; rounds],
            m2: vec![0.0; rounds],
            triggers: vec![0; rounds],
            crossings: vec![0; rounds],
            traces: Vec::new(),
        }
    }

    /// Chan et al. pairwise combination.
    fn merge(&mut self, other: BlockStats) {
        if other.n == 0 {
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for t in 0..self.mean.len() {
            let delta = other.mean[t] - self.mean[t];
            self.mean[t] += delta * nb / n;
            self.m2[t] += other.m2[t] + delta * delta * na * nb / n;
            self.triggers[t] += other.triggers[t];
            self.crossings[t] += other.crossings[t];
        }
        self.n += other.n;
        self.traces.extend(other.traces);
    }
}

/// Runs `config` on all cores without retaining traces.
pub fn run_experiment(config: &ScenarioConfig) -> Result<TrajectoryStats> {
    Simulator::new(config.clone())?.run(0, 0)
}
