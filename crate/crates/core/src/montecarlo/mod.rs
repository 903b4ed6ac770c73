//! Direct simulation of the slotted link: a static PPP of interferers in a
//! disk around the receiver, independent ALOHA marks and Rayleigh fading
//! in every slot, and the desired transmitter at distance `r` outside the
//! point process.
//!
//! Interferers are generated in order of distance from the receiver, so a
//! larger window only appends points and reuses every earlier draw.
//! Realizations are split into a fixed number of chunks which are reduced
//! in index order, making estimates independent of the thread count.

pub mod rng;
pub mod stats;

use rand::RngCore;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local_delay::{DistanceMode, InterferenceMode};
use crate::network::NetworkParams;
use rng::stream;
pub use stats::{batch_means, Moments, SimEstimate};

/// Path gain of an interferer or of the desired link at distance `v`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLoss {
    /// `v^{−α}`.
    #[default]
    Unbounded,
    /// `min(1, v^{−α})`.
    Bounded,
}

/// What each realization contributes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Estimator {
    /// Success in every one of `n_slots` slots at threshold θ.
    JointSuccess,
    /// At least one success in `n_slots` slots.
    AtLeastOnce,
    /// `SIR_1 > θ₁` and `SIR_2 > θ₂`.
    JointSuccessTwo { theta1: f64, theta2: f64 },
    /// `SIR_1 ≤ θ₁` and `SIR_2 ≤ θ₂`.
    JointCdf { theta1: f64, theta2: f64 },
    /// Index of the first success, censored after `max_slots`.
    LocalDelay { max_slots: u32 },
    /// Correlation coefficient of the success indicators of slots 1 and 2.
    Correlation,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: NetworkParams,
    pub distance: DistanceMode,
    pub n_slots: u32,
    pub n_realizations: u64,
    /// `None` sizes the disk per realization from the truncation-bias rule
    /// (see [`SimConfig::window_for`]).
    pub window_radius: Option<f64>,
    pub seed: u64,
    pub path_loss: PathLoss,
    pub estimator: Estimator,
    pub interference: InterferenceMode,
}

/// Realizations are reduced in this many chunks at most; each chunk is
/// also one batch for the batch-means estimators.
const CHUNKS: u64 = 256;

/// Refuse windows that would hold more points than this on average.
const MAX_MEAN_POINTS: f64 = 2e7;

/// Stream offset of the per-slot geometry in independent mode.
const INDEPENDENT_GEOMETRY: u64 = 1 << 62;

impl SimConfig {
    pub fn new(params: NetworkParams, n_slots: u32, n_realizations: u64, seed: u64) -> Self {
        Self {
            params,
            distance: DistanceMode::Fixed { r: params.r },
            n_slots,
            n_realizations,
            window_radius: None,
            seed,
            path_loss: PathLoss::Unbounded,
            estimator: Estimator::JointSuccess,
            interference: InterferenceMode::Dependent,
        }
    }

    pub fn with_estimator(self, estimator: Estimator) -> Self {
        let n_slots = match estimator {
            Estimator::JointSuccessTwo { .. } | Estimator::JointCdf { .. } | Estimator::Correlation => 2,
            Estimator::LocalDelay { max_slots } => max_slots,
            _ => self.n_slots,
        };
        Self {
            estimator,
            n_slots,
            ..self
        }
    }

    pub fn with_path_loss(self, path_loss: PathLoss) -> Self {
        Self { path_loss, ..self }
    }

    pub fn with_distance(self, distance: DistanceMode) -> Self {
        Self { distance, ..self }
    }

    pub fn with_window(self, radius: f64) -> Self {
        Self {
            window_radius: Some(radius),
            ..self
        }
    }

    pub fn with_interference(self, interference: InterferenceMode) -> Self {
        Self { interference, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_realizations < 100 {
            return bad("at least 100 realizations are required");
        }
        if self.n_slots == 0 {
            return bad("at least one slot is required");
        }
        match self.distance {
            DistanceMode::Fixed { r } if !(r > 0.0 && r.is_finite()) => return bad("link distance must be > 0"),
            DistanceMode::Rayleigh { mu } if !(mu > 0.0 && mu.is_finite()) => {
                return bad("receiver intensity must be > 0")
            }
            _ => {}
        }
        if let Some(w) = self.window_radius {
            if !(w > 0.0 && w.is_finite()) {
                return bad("window radius must be > 0");
            }
            if self.params.lambda * std::f64::consts::PI * w * w > MAX_MEAN_POINTS {
                return bad("window holds too many points");
            }
        }
        match self.estimator {
            Estimator::JointSuccessTwo { theta1, theta2 } | Estimator::JointCdf { theta1, theta2 } => {
                if !(theta1 > 0.0 && theta2 > 0.0) {
                    return bad("thresholds must be > 0");
                }
                if self.n_slots != 2 {
                    return bad("two-threshold estimators use exactly two slots");
                }
            }
            Estimator::Correlation if self.n_slots != 2 => return bad("correlation uses exactly two slots"),
            Estimator::LocalDelay { max_slots } if max_slots != self.n_slots || max_slots == 0 => {
                return bad("local delay needs n_slots = max_slots >= 1")
            }
            _ => {}
        }
        Ok(())
    }

    /// Disk radius for link distance `r`.
    ///
    /// Interferers beyond `W` would multiply the per-slot success
    /// probability by about `exp(−c)` with
    /// `c = λπpθ r^α δ/(1−δ)·W^{2−α}`; the radius keeps `c` below
    /// `min(1e-3, 0.1/√N)` and is never smaller than `20r`.
    pub fn window_for(&self, r: f64) -> f64 {
        if let Some(w) = self.window_radius {
            return w;
        }
        let alpha = 2.0 / self.params.delta;
        let tol = (0.1 / (self.n_realizations as f64).sqrt()).min(1e-3);
        let c0 = self.truncation_constant(r);
        if c0 <= 0.0 {
            return 20.0 * r;
        }
        // c = c0 W^{2−α}
        let w = (c0 / tol).powf(1.0 / (alpha - 2.0));
        w.max(20.0 * r)
    }

    /// `c0` with `c = c0 W^{2−α}`.
    fn truncation_constant(&self, r: f64) -> f64 {
        let NetworkParams {
            lambda, theta, delta, p, ..
        } = self.params;
        let theta_max = match self.estimator {
            Estimator::JointSuccessTwo { theta1, theta2 } | Estimator::JointCdf { theta1, theta2 } => {
                theta1.max(theta2)
            }
            _ => theta,
        };
        let gain_inv = match self.path_loss {
            PathLoss::Unbounded => r.powf(2.0 / delta),
            PathLoss::Bounded => r.powf(2.0 / delta).max(1.0),
        };
        lambda * std::f64::consts::PI * p * theta_max * gain_inv * delta / (1.0 - delta)
    }

    fn mean_points(&self, r: f64) -> f64 {
        let w = self.window_for(r);
        self.params.lambda * std::f64::consts::PI * w * w
    }
}

/// With the toggle on, the interferer positions are redrawn every slot.
pub fn independent_interference_toggle(config: SimConfig) -> SimConfig {
    config.with_interference(InterferenceMode::Independent)
}

fn chunk_bounds(n: u64) -> Vec<(u64, u64)> {
    let chunks = CHUNKS.min(n);
    (0..chunks).map(|c| (c * n / chunks, (c + 1) * n / chunks)).collect()
}

/// Runs `body` for every realization, accumulating per chunk in parallel
/// and returning the chunk accumulators in index order.
fn per_chunk<A, F>(n: u64, body: F) -> Vec<A>
where
    A: Default + Send,
    F: Fn(&mut A, u64) + Sync,
{
    chunk_bounds(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut acc = A::default();
            for i in lo..hi {
                body(&mut acc, i);
            }
            acc
        })
        .collect()
}

/// Per-realization state: the link and the interferer path gains.
struct Realization {
    /// Path gain of the desired link.
    signal: f64,
    /// Link distance.
    r: f64,
    /// Interferer path gains sorted by distance, for dependent mode.
    gains: Vec<f64>,
}

struct Simulator<'a> {
    cfg: &'a SimConfig,
    half_alpha: f64,
    /// `p` scaled to 2^64 for the ALOHA comparison; `None` means always on.
    aloha: Option<u64>,
}

impl<'a> Simulator<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        let p = cfg.params.p;
        let aloha = if p >= 1.0 { None } else { Some((p * 2f64.powi(64)) as u64) };
        let sim = Self {
            cfg,
            half_alpha: 1.0 / cfg.params.delta,
            aloha,
        };
        let r_ref = match cfg.distance {
            DistanceMode::Fixed { r } => r,
            // 0.999 quantile of the Rayleigh distance.
            DistanceMode::Rayleigh { mu } => (1000f64.ln() / (std::f64::consts::PI * mu)).sqrt(),
        };
        if cfg.mean_points(r_ref) > MAX_MEAN_POINTS {
            return Err(Error::Config(format!(
                "the default window would hold {:.3e} points; set window_radius explicitly",
                cfg.mean_points(r_ref)
            )));
        }
        Ok(sim)
    }

    fn path_gain_sq(&self, v2: f64) -> f64 {
        // v^{−α} = (v²)^{−α/2}
        let g = v2.powf(-self.half_alpha);
        match self.cfg.path_loss {
            PathLoss::Unbounded => g,
            PathLoss::Bounded => g.min(1.0),
        }
    }

    /// Points in order of distance up to `w`.
    fn geometry(&self, rng: &mut impl RngCore, w: f64) -> Vec<f64> {
        let lambda = self.cfg.params.lambda;
        let mut gains = Vec::new();
        if lambda <= 0.0 {
            return gains;
        }
        let area_max = std::f64::consts::PI * w * w;
        let mut area = 0.0;
        loop {
            let e: f64 = Exp1.sample(rng);
            area += e / lambda;
            if area > area_max {
                return gains;
            }
            gains.push(self.path_gain_sq(area / std::f64::consts::PI));
        }
    }

    fn realization(&self, i: u64) -> Realization {
        let seed = self.cfg.seed;
        let r = match self.cfg.distance {
            DistanceMode::Fixed { r } => r,
            DistanceMode::Rayleigh { mu } => {
                let e: f64 = Exp1.sample(&mut stream(seed, i, rng::DISTANCE));
                (e / (std::f64::consts::PI * mu)).sqrt()
            }
        };
        let gains = match self.cfg.interference {
            InterferenceMode::Dependent => self.geometry(&mut stream(seed, i, rng::GEOMETRY), self.cfg.window_for(r)),
            InterferenceMode::Independent => Vec::new(),
        };
        Realization {
            signal: self.path_gain_sq(r * r),
            r,
            gains,
        }
    }

    /// Interference in slot `k` (0-based) and the desired fading draw.
    fn slot(&self, i: u64, k: u32, real: &Realization) -> (f64, f64) {
        let mut rng = stream(self.cfg.seed, i, u64::from(k));
        let h0: f64 = Exp1.sample(&mut rng);
        let fresh;
        let gains = match self.cfg.interference {
            InterferenceMode::Dependent => &real.gains,
            InterferenceMode::Independent => {
                let mut g = stream(self.cfg.seed, i, INDEPENDENT_GEOMETRY + u64::from(k));
                fresh = self.geometry(&mut g, self.cfg.window_for(real.r));
                &fresh
            }
        };
        let mut interference = 0.0;
        for &g in gains {
            let on = match self.aloha {
                None => true,
                Some(t) => rng.next_u64() < t,
            };
            if on {
                let h: f64 = Exp1.sample(&mut rng);
                interference += h * g;
            }
        }
        (h0, interference)
    }

    fn sir(&self, i: u64, k: u32, real: &Realization) -> f64 {
        let (h0, interference) = self.slot(i, k, real);
        h0 * real.signal / interference
    }

    /// First successful slot (1-based) at threshold θ, or `None` within `max`.
    fn first_success(&self, i: u64, real: &Realization, max: u32) -> Option<u32> {
        let theta = self.cfg.params.theta;
        (0..max).find(|&k| self.sir(i, k, real) > theta).map(|k| k + 1)
    }

    /// Number of leading successes, capped at `max`.
    fn leading_successes(&self, i: u64, real: &Realization, max: u32) -> u32 {
        let theta = self.cfg.params.theta;
        (0..max).take_while(|&k| self.sir(i, k, real) > theta).count() as u32
    }
}

/// Estimate of the configured quantity.
///
/// For [`Estimator::LocalDelay`] this is the mean of `min(M, max_slots+1)`
/// with a batch-means interval.
pub fn run(config: &SimConfig) -> Result<SimEstimate> {
    let sim = Simulator::new(config)?;
    let n = config.n_realizations;
    match config.estimator {
        Estimator::Correlation => return correlation(&sim),
        Estimator::LocalDelay { max_slots } => {
            return Ok(local_delay_inner(&sim, max_slots).truncated_mean);
        }
        _ => {}
    }
    let chunks = per_chunk::<Moments, _>(n, |acc, i| {
        let real = sim.realization(i);
        let hit = match config.estimator {
            Estimator::JointSuccess => sim.leading_successes(i, &real, config.n_slots) == config.n_slots,
            Estimator::AtLeastOnce => sim.first_success(i, &real, config.n_slots).is_some(),
            Estimator::JointSuccessTwo { theta1, theta2 } => {
                sim.sir(i, 0, &real) > theta1 && sim.sir(i, 1, &real) > theta2
            }
            Estimator::JointCdf { theta1, theta2 } => {
                sim.sir(i, 0, &real) <= theta1 && sim.sir(i, 1, &real) <= theta2
            }
            Estimator::LocalDelay { .. } | Estimator::Correlation => unreachable!(),
        };
        acc.push(if hit { 1.0 } else { 0.0 });
    });
    Ok(merge(&chunks).estimate())
}

fn merge(chunks: &[Moments]) -> Moments {
    let mut total = Moments::default();
    for c in chunks {
        total.merge(c);
    }
    total
}

/// `P(S_1 ∩ ... ∩ S_n)` for every `n ≤ n_slots` from one set of
/// realizations.
pub fn joint_success_curve(config: &SimConfig) -> Result<Vec<SimEstimate>> {
    let sim = Simulator::new(config)?;
    let m = config.n_slots as usize;
    let chunks = per_chunk::<Vec<Moments>, _>(config.n_realizations, |acc, i| {
        if acc.is_empty() {
            acc.resize(m, Moments::default());
        }
        let real = sim.realization(i);
        let lead = sim.leading_successes(i, &real, config.n_slots) as usize;
        for (j, mo) in acc.iter_mut().enumerate() {
            mo.push(if j < lead { 1.0 } else { 0.0 });
        }
    });
    Ok((0..m)
        .map(|j| {
            let mut t = Moments::default();
            for c in &chunks {
                t.merge(&c[j]);
            }
            t.estimate()
        })
        .collect())
}

/// Which joint event a grid point counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridEvent {
    /// `SIR_1 > θ₁, SIR_2 > θ₂`.
    Success,
    /// `SIR_1 ≤ θ₁, SIR_2 ≤ θ₂`.
    Cdf,
}

/// Two-slot joint probabilities over a threshold grid, with every grid
/// point evaluated on the same SIR pairs.
pub fn joint_grid(config: &SimConfig, grid: &[(f64, f64)], event: GridEvent) -> Result<Vec<SimEstimate>> {
    if grid.is_empty() {
        return Err(Error::Config("empty threshold grid".into()));
    }
    let (t1, t2) = grid[0];
    let cfg = config.with_estimator(Estimator::JointCdf {
        theta1: grid.iter().map(|g| g.0).fold(t1, f64::max),
        theta2: grid.iter().map(|g| g.1).fold(t2, f64::max),
    });
    let sim = Simulator::new(&cfg)?;
    let chunks = per_chunk::<Vec<Moments>, _>(cfg.n_realizations, |acc, i| {
        if acc.is_empty() {
            acc.resize(grid.len(), Moments::default());
        }
        let real = sim.realization(i);
        let (s1, s2) = (sim.sir(i, 0, &real), sim.sir(i, 1, &real));
        for (mo, &(a, b)) in acc.iter_mut().zip(grid) {
            let hit = match event {
                GridEvent::Success => s1 > a && s2 > b,
                GridEvent::Cdf => s1 <= a && s2 <= b,
            };
            mo.push(if hit { 1.0 } else { 0.0 });
        }
    });
    Ok((0..grid.len())
        .map(|j| {
            let mut t = Moments::default();
            for c in &chunks {
                t.merge(&c[j]);
            }
            t.estimate()
        })
        .collect())
}

#[derive(Default)]
struct PairCounts {
    n: u64,
    a: u64,
    b: u64,
    ab: u64,
}

impl PairCounts {
    fn zeta(&self) -> f64 {
        let n = self.n as f64;
        let (pa, pb, pab) = (self.a as f64 / n, self.b as f64 / n, self.ab as f64 / n);
        let den = (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt();
        if den == 0.0 {
            0.0
        } else {
            (pab - pa * pb) / den
        }
    }
}

fn correlation(sim: &Simulator) -> Result<SimEstimate> {
    let theta = sim.cfg.params.theta;
    let chunks = per_chunk::<PairCounts, _>(sim.cfg.n_realizations, |acc, i| {
        let real = sim.realization(i);
        let a = sim.sir(i, 0, &real) > theta;
        let b = sim.sir(i, 1, &real) > theta;
        acc.n += 1;
        acc.a += a as u64;
        acc.b += b as u64;
        acc.ab += (a && b) as u64;
    });
    let total = chunks.iter().fold(PairCounts::default(), |t, c| PairCounts {
        n: t.n + c.n,
        a: t.a + c.a,
        b: t.b + c.b,
        ab: t.ab + c.ab,
    });
    let per_batch: Vec<f64> = chunks.iter().map(PairCounts::zeta).collect();
    let spread = batch_means(&per_batch);
    Ok(SimEstimate::new(total.zeta(), spread.std_error, total.n))
}

/// Empirical local-delay distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayTail {
    pub max_slots: u32,
    /// `survival[n]` estimates `P(M > n)`, `n = 0..=max_slots`.
    pub survival: Vec<SimEstimate>,
    /// Mean of `min(M, max_slots + 1)`, batch means over chunks.
    pub truncated_mean: SimEstimate,
}

#[derive(Default)]
struct DelayCounts {
    /// failures[n] = realizations with M > n.
    failures: Vec<u64>,
    n: u64,
    sum: f64,
}

/// Empirical `P(M > n)`; realizations without success by `max_slots`
/// count towards every tail value.
pub fn local_delay_samples(config: &SimConfig) -> Result<DelayTail> {
    let max_slots = match config.estimator {
        Estimator::LocalDelay { max_slots } => max_slots,
        _ => return Err(Error::Config("local delay samples need the local-delay estimator".into())),
    };
    let sim = Simulator::new(config)?;
    Ok(local_delay_inner(&sim, max_slots))
}

fn local_delay_inner(sim: &Simulator, max_slots: u32) -> DelayTail {
    let m = max_slots as usize;
    let chunks = per_chunk::<DelayCounts, _>(sim.cfg.n_realizations, |acc, i| {
        if acc.failures.is_empty() {
            acc.failures.resize(m + 1, 0);
        }
        let real = sim.realization(i);
        let delay = sim.first_success(i, &real, max_slots).unwrap_or(max_slots + 1);
        for f in acc.failures.iter_mut().take(delay as usize) {
            *f += 1;
        }
        acc.n += 1;
        acc.sum += f64::from(delay);
    });
    let n: u64 = chunks.iter().map(|c| c.n).sum();
    let nf = n as f64;
    let survival = (0..=m)
        .map(|k| {
            let hits: u64 = chunks.iter().map(|c| c.failures[k]).sum();
            let q = hits as f64 / nf;
            SimEstimate::new(q, (q * (1.0 - q) / nf).sqrt(), n)
        })
        .collect();
    let batches: Vec<f64> = chunks.iter().map(|c| c.sum / c.n as f64).collect();
    let spread = batch_means(&batches);
    let mean = chunks.iter().map(|c| c.sum).sum::<f64>() / nf;
    DelayTail {
        max_slots,
        survival,
        truncated_mean: SimEstimate::new(mean, spread.std_error, n),
    }
}

/// First-slot interference at the receiver, one value per realization.
pub fn interference_samples(config: &SimConfig) -> Result<Vec<f64>> {
    let sim = Simulator::new(config)?;
    let chunks = per_chunk::<Vec<f64>, _>(config.n_realizations, |acc, i| {
        let real = sim.realization(i);
        acc.push(sim.slot(i, 0, &real).1);
    });
    Ok(chunks.concat())
}

/// One row of the optional raw output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub realization_id: u64,
    pub n_points: usize,
    /// `'1'` or `'0'` per slot at threshold θ.
    pub success_bits: String,
    /// First successful slot, empty if none.
    pub delay: Option<u32>,
}

pub fn raw_records(config: &SimConfig) -> Result<Vec<RawRecord>> {
    let sim = Simulator::new(config)?;
    let theta = config.params.theta;
    let chunks = per_chunk::<Vec<RawRecord>, _>(config.n_realizations, |acc, i| {
        let real = sim.realization(i);
        let bits: String = (0..config.n_slots)
            .map(|k| if sim.sir(i, k, &real) > theta { '1' } else { '0' })
            .collect();
        let delay = bits.find('1').map(|k| k as u32 + 1);
        acc.push(RawRecord {
            realization_id: i,
            n_points: real.gains.len(),
            success_bits: bits,
            delay,
        });
    });
    Ok(chunks.concat())
}

/// The truncation exponent `c` of [`SimConfig::window_for`] at link
/// distance `r`.
pub fn window_bias(config: &SimConfig, r: f64) -> f64 {
    let alpha = 2.0 / config.params.delta;
    config.truncation_constant(r) * config.window_for(r).powf(2.0 - alpha)
}

#[cfg(test)]
mod tests;
