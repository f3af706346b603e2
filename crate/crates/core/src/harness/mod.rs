//! Multi-seed experiment runs: assembly from a config, transcripts, summaries
//! and horizon sweeps.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::baselines::{EpsNet, EpsNetUcb};
use crate::bco::{Bco, BcoConfig};
use crate::conversion::{
    choose_k, expected_bias_bound, lower_bound_k, ConversionParams, InputAlgorithm, Partition,
    Router,
};
use crate::environments::{
    ContextProcess, ContextualQuadratic, LossModel, LowerBoundFamily, LowerBoundSpec, QuadraticSpec,
};
use crate::error::{Error, Result};
use crate::geometry::{Barrier, ConvexBody};
use crate::randomness::{draw_noise, SeedStream};
use crate::regret::{rate_fit, static_regret, RateFit, RatePoints, RegretLedger, RoundRecord};

pub use config::{
    AlgorithmKind, AlgorithmSpec, BaselineSpec, BodySpec, CellCount, CellPolicy, ContextSpec,
    ExperimentConfig, LossSpec, OutputSpec, RowSpec, Seeds, Tolerances, SPEC_VERSION,
};

/// Environment variable overriding the default worker cap.
pub const WORKERS_ENV: &str = "CTXBAND_WORKERS";

/// Everything built from a config at one horizon, shared by all seeds.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub horizon: u64,
    pub model: Arc<LossModel>,
    pub contexts: ContextProcess,
    /// Cells per axis used by the router; 1 for the bare algorithm.
    pub k: usize,
    pub bco: Arc<BcoConfig>,
    pub net: Option<Arc<EpsNet>>,
    pub params: Option<ConversionParams>,
}

/// Builds the environment and algorithm configuration at `horizon`.
pub fn assemble(cfg: &ExperimentConfig, horizon: u64) -> Result<Assembly> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let body = Arc::new(cfg.body.build()?);
    let barrier = Arc::new(Barrier::new((*body).clone())?);
    let d = body.dim();
    let p = cfg.loss.context_dim();
    let beta_over_alpha = cfg.loss.condition();

    let params = match cfg.algorithm.kind {
        AlgorithmKind::Bco => None,
        _ if cfg.loss.gamma() == 0.0 => None,
        _ => Some(match cfg.algorithm.tau {
            Some([t1, t2, t3]) => {
                let preset = ConversionParams::strongly_convex(
                    cfg.algorithm.rho,
                    barrier.mu(),
                    beta_over_alpha,
                    cfg.loss.lipschitz(),
                    cfg.loss.gamma(),
                )?;
                ConversionParams::new(t1, t2, t3, preset.t0, preset.lipschitz, preset.gamma)?
            }
            None => ConversionParams::strongly_convex(
                cfg.algorithm.rho,
                barrier.mu(),
                beta_over_alpha,
                cfg.loss.lipschitz(),
                cfg.loss.gamma(),
            )?,
        }),
    };
    let k = match (cfg.algorithm.kind, cfg.algorithm.k) {
        (AlgorithmKind::Bco, _) => 1,
        (_, CellCount::Fixed(0)) => return Err(Error::Config("K must be at least 1".into())),
        (_, CellCount::Fixed(k)) => k,
        (_, CellCount::Policy(CellPolicy::LowerBound)) => {
            lower_bound_k(cfg.loss.lipschitz(), cfg.loss.gamma(), p, horizon)
        }
        (_, CellCount::Policy(CellPolicy::Auto)) => match &params {
            Some(params) => choose_k(params, d, p, horizon),
            None => {
                return Err(Error::Config(
                    "K = \"auto\" needs gamma > 0; give K explicitly".into(),
                ))
            }
        },
    };
    if let Some(params) = &params {
        let needed = (k as f64).powi(p as i32) * params.t0;
        if (horizon as f64) < needed {
            log::warn!(
                "horizon {horizon} is below K^p T0 = {needed:.0}; per-cell guarantees do not apply"
            );
        }
    }

    let model = match &cfg.loss {
        LossSpec::Quadratic {
            alpha,
            gamma,
            lipschitz,
            map,
            shift,
            offset,
            clip,
            sup_bound,
        } => {
            if shift.len() != d {
                return Err(Error::Config(format!(
                    "loss.shift has length {}, body dimension is {d}",
                    shift.len()
                )));
            }
            LossModel::Quadratic(ContextualQuadratic::new(
                body.clone(),
                QuadraticSpec {
                    alpha: *alpha,
                    gamma: *gamma,
                    map: LossSpec::quadratic_map(map, d)?,
                    shift: DVector::from_column_slice(shift),
                    offset: *offset,
                    clip: (*clip > 0.0).then_some(*clip),
                    lipschitz: *lipschitz,
                    sup_bound: *sup_bound,
                },
            )?)
        }
        LossSpec::LowerBound {
            alpha,
            lipschitz,
            r1,
            r2,
            omega_seed,
            tau_seed,
            k: loss_k,
            sup_bound,
            ..
        }
        | LossSpec::LowerBoundGamma0 {
            alpha,
            lipschitz,
            r1,
            r2,
            omega_seed,
            tau_seed,
            k: loss_k,
            sup_bound,
            ..
        } => LossModel::LowerBound(LowerBoundFamily::new(
            body.clone(),
            LowerBoundSpec {
                alpha: *alpha,
                lipschitz: *lipschitz,
                gamma: cfg.loss.gamma(),
                k: loss_k.unwrap_or(k),
                p,
                horizon,
                r1: *r1,
                r2: *r2,
                omega_seed: *omega_seed,
                tau_seed: *tau_seed,
                sup_bound: *sup_bound,
            },
        )?),
    };

    let contexts = match &cfg.context {
        ContextSpec::Fixed { values } => ContextProcess::fixed(
            values
                .iter()
                .map(|c| DVector::from_column_slice(c))
                .collect(),
        )?,
        ContextSpec::IidUniform { p } => ContextProcess::iid_uniform(*p)?,
        ContextSpec::Pk { p, k: ctx_k } => ContextProcess::pk(*p, ctx_k.unwrap_or(k))?,
    };
    if let ContextProcess::Fixed(seq) = &contexts {
        if (seq.len() as u64) < horizon {
            return Err(Error::Config(format!(
                "fixed context list has {} entries, horizon is {horizon}",
                seq.len()
            )));
        }
    }

    let c = model.constants();
    let bco = Arc::new(BcoConfig::new(
        c.alpha,
        c.beta,
        c.sup_bound,
        cfg.noise.sub_gaussian_proxy(),
        horizon,
        barrier,
    )?);
    let net = match (cfg.algorithm.kind, &cfg.baseline) {
        (AlgorithmKind::RouterEpsNetUcb, Some(b)) => Some(Arc::new(EpsNet::new(&body, b.eps)?)),
        (AlgorithmKind::RouterEpsNetUcb, None) => {
            return Err(Error::Config("router_eps_net_ucb needs [baseline]".into()))
        }
        _ => None,
    };
    Ok(Assembly {
        horizon,
        model: Arc::new(model),
        contexts,
        k,
        bco,
        net,
        params,
    })
}

/// Result of one seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub contextual_regret: f64,
    pub static_regret: f64,
    /// Cells that received at least one round.
    pub cells_visited: usize,
    /// `(cell, N_i(T))` by cell index.
    #[serde(skip)]
    pub visits: Vec<(usize, u64)>,
    pub transcript_hash: String,
    #[serde(skip)]
    pub transcript: String,
}

/// SHA-256 over `"blob <len>\0"` followed by the bytes, as hex.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// `t,c0..,z0..,y,f_value,f_star,inst_regret,cum_regret`
pub fn transcript_header(p: usize, d: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..p).map(|j| format!("c{j}")));
    cols.extend((0..d).map(|j| format!("z{j}")));
    cols.extend(["y", "f_value", "f_star", "inst_regret", "cum_regret"].map(String::from));
    cols.join(",")
}

fn push_row(out: &mut String, r: &RoundRecord, cum: f64) {
    let _ = write!(out, "{}", r.t);
    for v in r.c.iter().chain(r.z.iter()) {
        let _ = write!(out, ",{v}");
    }
    let _ = writeln!(
        out,
        ",{},{},{},{},{}",
        r.y,
        r.f_value,
        r.f_star,
        r.regret(),
        cum
    );
}

/// One round of whichever algorithm is configured.
trait Driver {
    fn round(
        &mut self,
        c: &DVector<f64>,
        observe: &mut dyn FnMut(&DVector<f64>) -> f64,
    ) -> Result<DVector<f64>>;
    fn visits(&self) -> Vec<(usize, u64)>;
}

struct Bare(Bco);

impl Driver for Bare {
    fn round(
        &mut self,
        _c: &DVector<f64>,
        observe: &mut dyn FnMut(&DVector<f64>) -> f64,
    ) -> Result<DVector<f64>> {
        Ok(self.0.round(|z| observe(z))?.z)
    }

    fn visits(&self) -> Vec<(usize, u64)> {
        vec![(0, self.0.rounds_completed())]
    }
}

impl<A, F> Driver for Router<A, F>
where
    A: InputAlgorithm,
    F: FnMut(usize, &SeedStream) -> Result<A>,
{
    fn round(
        &mut self,
        c: &DVector<f64>,
        observe: &mut dyn FnMut(&DVector<f64>) -> f64,
    ) -> Result<DVector<f64>> {
        Ok(self.route_round(c, |z| observe(z))?.z)
    }

    fn visits(&self) -> Vec<(usize, u64)> {
        Router::visits(self).collect()
    }
}

fn driver(asm: &Assembly, kind: AlgorithmKind, stream: SeedStream) -> Result<Box<dyn Driver>> {
    let p = asm.model.context_dim();
    Ok(match kind {
        AlgorithmKind::Bco => Box::new(Bare(Bco::new(asm.bco.clone(), &stream.child("cell:0")))),
        AlgorithmKind::RouterBco => {
            let cfg = asm.bco.clone();
            Box::new(Router::new(
                Partition::new(p, asm.k)?,
                stream,
                move |_, s: &SeedStream| Ok(Bco::new(cfg.clone(), s)),
            ))
        }
        AlgorithmKind::RouterEpsNetUcb => {
            let net = asm
                .net
                .clone()
                .ok_or_else(|| Error::Config("router_eps_net_ucb needs [baseline]".into()))?;
            Box::new(Router::new(
                Partition::new(p, asm.k)?,
                stream,
                move |_, _: &SeedStream| EpsNetUcb::new(net.clone()),
            ))
        }
    })
}

/// Runs `T` rounds for one seed with the substreams `context`, `noise` and
/// `algorithm` under the seed's root.
pub fn run_seed(cfg: &ExperimentConfig, asm: &Assembly, seed: u64) -> Result<SeedOutcome> {
    let root = SeedStream::new(seed);
    let mut ctx_rng = root.child("context").rng();
    let mut noise_rng = root.child("noise").rng();
    let mut alg = driver(asm, cfg.algorithm.kind, root.child("algorithm"))?;
    let model = &asm.model;
    let body = model.body();
    let slack = cfg.tolerances.feasibility;

    let mut ledger = RegretLedger::new();
    let mut transcript = transcript_header(model.context_dim(), model.dim());
    transcript.push('\n');
    for t in 0..asm.horizon {
        let c = asm.contexts.sample(t as usize, &mut ctx_rng)?;
        let mut f_value = Ok(0.0);
        let mut y = 0.0;
        let z = alg.round(&c, &mut |z| {
            f_value = model.value(z, &c);
            y = *f_value.as_ref().unwrap_or(&0.0) + draw_noise(&cfg.noise, &mut noise_rng);
            y
        })?;
        if !body.contains(&z, slack) {
            return Err(Error::InvariantViolation(format!(
                "round {} queried z = {:?} outside the body",
                t + 1,
                z.as_slice()
            )));
        }
        let f_star = model.minimize(&c)?.value;
        ledger.push(RoundRecord {
            t: t + 1,
            c,
            z,
            y,
            f_value: f_value?,
            f_star,
        })?;
        let record = ledger.records().last().expect("just pushed");
        push_row(&mut transcript, record, ledger.cumulative());
    }
    let static_regret = static_regret(ledger.records(), model)?;
    let visits = alg.visits();
    let cells_visited = visits.iter().filter(|(_, n)| *n > 0).count();
    Ok(SeedOutcome {
        seed,
        contextual_regret: ledger.cumulative(),
        static_regret,
        cells_visited,
        visits,
        transcript_hash: content_hash(transcript.as_bytes()),
        transcript,
    })
}

/// Run-level constants echoed into the summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunParams {
    pub alpha: f64,
    pub beta: f64,
    pub sup_bound: f64,
    pub lipschitz: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub q_t: f64,
    pub nu: f64,
    /// `2L(√p/K)^γ`, the per-round discretization bias.
    pub bias_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub spec_version: u32,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub seeds: Vec<u64>,
    #[serde(rename = "K")]
    pub k: usize,
    pub num_cells: usize,
    pub mean_regret: f64,
    pub sd_regret: f64,
    pub mean_static_regret: f64,
    pub sd_static_regret: f64,
    pub per_seed: Vec<SeedOutcome>,
    pub params: RunParams,
    /// The config with output paths removed, so the summary depends only on
    /// what was simulated.
    pub config: ExperimentConfig,
    /// Not serialized: it would break byte-for-byte reproducibility.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Worker cap: the explicit value, else `CTXBAND_WORKERS`, else all cores.
pub fn resolve_workers(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| {
            std::env::var(WORKERS_ENV)
                .ok()
                .and_then(|v| v.trim().parse().ok())
        })
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub workers: Option<usize>,
    /// Overrides the config's horizon.
    pub horizon: Option<u64>,
}

/// Runs every seed (in parallel, up to the worker cap), writes outputs if the
/// config names a directory, and aggregates by seed order.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let started = Instant::now();
    let horizon = opts.horizon.unwrap_or(cfg.horizon);
    let asm = assemble(cfg, horizon)?;
    let seeds = cfg.seeds.resolve();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolve_workers(opts.workers))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<SeedOutcome> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                run_seed(cfg, &asm, seed).map_err(|e| Error::Seed {
                    seed,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()
    })?;

    let (mean_regret, sd_regret) = mean_sd(
        &outcomes
            .iter()
            .map(|o| o.contextual_regret)
            .collect::<Vec<_>>(),
    );
    let (mean_static_regret, sd_static_regret) =
        mean_sd(&outcomes.iter().map(|o| o.static_regret).collect::<Vec<_>>());
    let c = asm.model.constants();
    let p = asm.model.context_dim();
    let mut echo = cfg.clone();
    echo.output = None;
    echo.horizon = horizon;
    let summary = RunSummary {
        spec_version: SPEC_VERSION,
        horizon,
        seeds,
        k: asm.k,
        num_cells: asm.k.pow(p as u32),
        mean_regret,
        sd_regret,
        mean_static_regret,
        sd_static_regret,
        params: RunParams {
            alpha: c.alpha,
            beta: c.beta,
            sup_bound: c.sup_bound,
            lipschitz: c.lipschitz,
            gamma: c.gamma,
            sigma: asm.bco.sigma(),
            q_t: asm.bco.q_t(),
            nu: asm.bco.nu(),
            bias_bound: expected_bias_bound(c.lipschitz, c.gamma, p, asm.k),
        },
        per_seed: outcomes,
        config: echo,
        wall_clock: started.elapsed(),
    };
    if let Some(out) = &cfg.output {
        write_outputs(&summary, &out.dir, out.transcript)?;
    }
    Ok(summary)
}

/// `summary.json`, plus `transcript_seed<N>.csv` per seed when asked.
pub fn write_outputs(summary: &RunSummary, dir: &Path, transcripts: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if transcripts {
        for o in &summary.per_seed {
            let path = dir.join(format!("transcript_seed{}.csv", o.seed));
            std::fs::write(&path, &o.transcript)?;
            written.push(path);
        }
    }
    let path = dir.join("summary.json");
    std::fs::write(&path, summary.to_json())?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub mean_regret: f64,
    pub mean_static_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

impl From<RateFit> for FitReport {
    fn from(f: RateFit) -> Self {
        Self {
            slope: f.slope,
            intercept: f.intercept,
            max_residual: f.max_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub contextual_fit: FitReport,
    /// Absent when some mean static regret is not positive.
    pub static_fit: Option<FitReport>,
}

/// Evaluates `run` at each horizon and fits `log R` against `log T`.
pub fn sweep_by<F>(horizons: &[u64], mut run: F) -> Result<(RatePoints, RateFit)>
where
    F: FnMut(u64) -> Result<f64>,
{
    if horizons.len() < 3 {
        return Err(Error::Config(format!(
            "a sweep needs at least 3 horizons, got {}",
            horizons.len()
        )));
    }
    let regrets = horizons
        .iter()
        .map(|&t| run(t))
        .collect::<Result<Vec<_>>>()?;
    let points = RatePoints::new(horizons.iter().map(|&t| t as f64).collect(), regrets)?;
    let fit = rate_fit(&points)?;
    Ok((points, fit))
}

/// Re-assembles (K and `q_T` included) and runs every seed at each horizon;
/// fits the seed-averaged contextual and static regrets.
pub fn sweep_rates(
    cfg: &ExperimentConfig,
    horizons: &[u64],
    workers: Option<usize>,
) -> Result<SweepReport> {
    let mut points = Vec::new();
    let mut base = cfg.clone();
    base.output = None;
    let (_, fit) = sweep_by(horizons, |t| {
        let s = run_experiment(
            &base,
            &RunOptions {
                workers,
                horizon: Some(t),
            },
        )?;
        log::info!(
            "T = {t}: K = {}, mean regret {:.4}, static {:.4}",
            s.k,
            s.mean_regret,
            s.mean_static_regret
        );
        points.push(SweepPoint {
            horizon: t,
            k: s.k,
            mean_regret: s.mean_regret,
            mean_static_regret: s.mean_static_regret,
        });
        Ok(s.mean_regret)
    })?;
    let static_points = RatePoints::new(
        points.iter().map(|p| p.horizon as f64).collect(),
        points.iter().map(|p| p.mean_static_regret).collect(),
    )?;
    Ok(SweepReport {
        static_fit: rate_fit(&static_points).ok().map(FitReport::from),
        contextual_fit: fit.into(),
        points,
    })
}

/// Parses `2^a..2^b` (powers of two, inclusive) or a comma-separated list.
pub fn parse_horizons(text: &str) -> Result<Vec<u64>> {
    let bad = || {
        Error::Config(format!(
            "cannot parse horizons {text:?}; use 2^a..2^b or a comma list"
        ))
    };
    if let Some((a, b)) = text.split_once("..") {
        let exp = |s: &str| {
            s.trim()
                .strip_prefix("2^")
                .and_then(|e| e.parse::<u32>().ok())
        };
        let (a, b) = (exp(a).ok_or_else(bad)?, exp(b).ok_or_else(bad)?);
        if a > b || b > 62 {
            return Err(bad());
        }
        return Ok((a..=b).map(|e| 1u64 << e).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
        .collect()
}

/// Body membership helper used by callers that audit foreign transcripts.
pub fn audit_queries<'a>(
    body: &ConvexBody,
    zs: impl IntoIterator<Item = &'a DVector<f64>>,
    slack: f64,
) -> Result<usize> {
    let mut n = 0;
    for (i, z) in zs.into_iter().enumerate() {
        if !body.contains(z, slack) {
            return Err(Error::InvariantViolation(format!(
                "query {} lies outside the body",
                i + 1
            )));
        }
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(algorithm: &str, horizon: u64, seeds: u64) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!(
            r#"
spec_version = 1
horizon = {horizon}
seeds = {seeds}

[body]
kind = "ball"
center = [0.0, 0.0]
radius = 1.0

[loss]
kind = "quadratic"
alpha = 1.0
lipschitz = 1.0
map = [[0.5], [0.0]]
shift = [-0.25, 0.1]

[context]
kind = "iid_uniform"
p = 1

[noise]
kind = "gaussian"
sigma = 0.1

[algorithm]
kind = "{algorithm}"
K = 3

[baseline]
eps = 0.25
"#
        ))
        .unwrap()
    }

    fn one_worker() -> RunOptions {
        RunOptions {
            workers: Some(1),
            horizon: None,
        }
    }

    #[test]
    fn single_round_run() {
        let s = run_experiment(&cfg("bco", 1, 1), &one_worker()).unwrap();
        let lines: Vec<_> = s.per_seed[0].transcript.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "t,c0,z0,z1,y,f_value,f_star,inst_regret,cum_regret"
        );
        assert!(lines[1].starts_with("1,"));
    }

    #[test]
    fn replay_is_identical() {
        let c = cfg("router_bco", 200, 2);
        let a = run_experiment(&c, &one_worker()).unwrap();
        let b = run_experiment(
            &c,
            &RunOptions {
                workers: Some(2),
                horizon: None,
            },
        )
        .unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_ne!(a.per_seed[0].transcript_hash, a.per_seed[1].transcript_hash);
    }

    #[test]
    fn mean_matches_per_seed_values() {
        let s = run_experiment(&cfg("router_bco", 50, 20), &one_worker()).unwrap();
        let finals: Vec<f64> = s.per_seed.iter().map(|o| o.contextual_regret).collect();
        let mean = finals.iter().sum::<f64>() / 20.0;
        assert!((s.mean_regret - mean).abs() <= 1e-12);
        let var = finals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 19.0;
        assert!((s.sd_regret - var.sqrt()).abs() <= 1e-12);
        assert_eq!(s.seeds, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn router_visits_sum_to_horizon() {
        let c = cfg("router_bco", 300, 1);
        let asm = assemble(&c, 300).unwrap();
        let o = run_seed(&c, &asm, 4).unwrap();
        assert_eq!(o.visits.iter().map(|(_, n)| n).sum::<u64>(), 300);
        assert_eq!(o.cells_visited, 3);
    }

    #[test]
    fn one_cell_router_matches_bare() {
        let mut routed = cfg("router_bco", 100, 1);
        routed.algorithm.k = CellCount::Fixed(1);
        let bare = cfg("bco", 100, 1);
        for seed in 0..3 {
            let a = run_seed(&routed, &assemble(&routed, 100).unwrap(), seed).unwrap();
            let b = run_seed(&bare, &assemble(&bare, 100).unwrap(), seed).unwrap();
            assert_eq!(a.transcript, b.transcript);
        }
    }

    #[test]
    fn eps_net_router_runs() {
        let s = run_experiment(&cfg("router_eps_net_ucb", 100, 1), &one_worker()).unwrap();
        assert!(s.mean_regret >= 0.0);
    }

    #[test]
    fn hash_is_git_style() {
        // `printf 'hello\n' | git hash-object --object-format=sha256 --stdin`
        assert_eq!(
            content_hash(b"hello\n"),
            "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }

    #[test]
    fn stub_sweep_recovers_square_root() {
        let hs = parse_horizons("2^10..2^16").unwrap();
        assert_eq!(hs.len(), 7);
        let (_, fit) = sweep_by(&hs, |t| Ok((t as f64).sqrt())).unwrap();
        assert!((fit.slope - 0.5).abs() <= 1e-12);
        assert!(sweep_by(&hs[..2], |t| Ok(t as f64)).is_err());
    }

    #[test]
    fn horizon_parsing() {
        assert_eq!(parse_horizons("2^3..2^5").unwrap(), vec![8, 16, 32]);
        assert_eq!(parse_horizons("10, 20,40").unwrap(), vec![10, 20, 40]);
        assert!(parse_horizons("2^5..2^3").is_err());
        assert!(parse_horizons("ten").is_err());
    }

    #[test]
    fn seed_errors_carry_the_seed() {
        let mut c = cfg("bco", 5, 1);
        c.context = ContextSpec::Fixed {
            values: vec![vec![0.5]; 5],
        };
        c.seeds = Seeds::List(vec![7]);
        assert!(run_experiment(&c, &one_worker()).is_ok());
        let err = run_experiment(
            &c,
            &RunOptions {
                workers: Some(1),
                horizon: Some(6),
            },
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let asm = assemble(&c, 5).unwrap();
        let mut short = asm.clone();
        short.horizon = 6;
        let err = run_seed(&c, &short, 7).unwrap_err();
        assert!(matches!(err, Error::ExhaustedSequence(5)));
    }
}
