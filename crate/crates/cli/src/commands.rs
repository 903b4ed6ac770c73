use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use tempcorr_core::diversity::div_poly;
use tempcorr_core::joint_stats::{
    at_least_one_success, cond_outage_after_failures, cond_success_after_failure, cond_success_after_successes,
    correlation_coefficient, joint_outage, joint_success, joint_success_bounded,
};
use tempcorr_core::local_delay::{
    critical_probabilities, delay_pmf_independent, delay_pmf_link, delay_tail_independent,
    delay_tail_random, mean_delay_fixed, mean_delay_random, taylor_mean_delay, DelayRegime, InterferenceMode,
    MeanDelay,
};
use tempcorr_core::montecarlo::{
    independent_interference_toggle, joint_success_curve, local_delay_samples, raw_records, run, Estimator,
    PathLoss,
};
use tempcorr_core::two_threshold::{joint_sir_cdf, joint_success_two, AsymmetricLink};
use tempcorr_core::{
    DelayModel, DistanceMode, LinkModel, NetworkParams, Precision, SimConfig, SimEstimate, TwoThresholdSpec,
};

use crate::table::{Cell, Table};
use crate::{ComparisonFailed, Resolved};

/// Network parameters plus `mu` and seed when set, for the CSV header.
fn describe(t: &mut Table, params: &NetworkParams, res: &Resolved) -> Result<()> {
    let c = params.contention()?;
    t.param("lambda", params.lambda)
        .param("r", params.r)
        .param("theta", params.theta)
        .param("delta", params.delta)
        .param("p", params.p)
        .param("contention", c.big_delta);
    if let Some(mu) = res.file.mu {
        t.param("mu", mu);
    }
    Ok(())
}

fn link_for(params: &NetworkParams, n: u32) -> Result<LinkModel> {
    let link = LinkModel::from_params(params)?;
    Ok(if n > Precision::Standard.max_n() {
        link.with_precision(Precision::High)
    } else {
        link
    })
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Largest number of slots.
    #[arg(long, default_value_t = 4)]
    n: u32,
    /// Second-slot threshold for the two-threshold quantities.
    #[arg(long)]
    theta2: Option<f64>,
}

pub fn eval(res: &Resolved, a: &EvalArgs) -> Result<Table> {
    let params = res.network()?;
    let link = link_for(&params, a.n + 1)?;
    let mut t = Table::new("eval", &["quantity", "n", "value"]);
    describe(&mut t, &params, res)?;
    let c = params.contention()?;
    let scalar = |t: &mut Table, q: &str, v: f64| t.push(vec![q.into(), "".into(), v.into()]);
    scalar(&mut t, "delta_hat", c.delta_hat);
    scalar(&mut t, "delta_prime", c.delta_prime);
    scalar(&mut t, "correlation", correlation_coefficient(&link));
    if params.p > 0.0 {
        scalar(&mut t, "cond_success_after_failure", cond_success_after_failure(&link)?.value);
    }
    for k in 1..=a.n {
        let mut row = |q: &str, v: f64| t.push(vec![q.into(), k.into(), v.into()]);
        row("div_poly", div_poly(k, params.p, params.delta));
        row("joint_success", joint_success(&link, k));
        row("joint_outage", joint_outage(&link, k)?);
        row("at_least_once", at_least_one_success(&link, k)?);
        row("cond_success_after_successes", cond_success_after_successes(&link, k));
        row("cond_outage_after_failures", cond_outage_after_failures(&link, k)?);
        row("joint_success_bounded", joint_success_bounded(&params, k)?);
    }
    if let Some(theta2) = a.theta2 {
        let asym = AsymmetricLink::from_params(&params)?;
        let spec = TwoThresholdSpec::new(params.theta, theta2)?;
        t.param("theta2", theta2);
        scalar(&mut t, "joint_success_two", joint_success_two(&asym, &spec));
        scalar(&mut t, "joint_sir_cdf", joint_sir_cdf(&asym, &spec));
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    P,
    Delta,
    Theta,
    Lambda,
    R,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::P => "p",
            Axis::Delta => "delta",
            Axis::Theta => "theta",
            Axis::Lambda => "lambda",
            Axis::R => "r",
        }
    }

    fn set(self, params: NetworkParams, x: f64) -> Result<NetworkParams> {
        let mut q = params;
        match self {
            Axis::P => q.p = x,
            Axis::Delta => q.delta = x,
            Axis::Theta => q.theta = x,
            Axis::Lambda => q.lambda = x,
            Axis::R => q.r = x,
        }
        q.validate()?;
        Ok(q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    DivPoly,
    JointSuccess,
    JointOutage,
    AtLeastOnce,
    CondSuccess,
    CondOutage,
    Bounded,
    Correlation,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Quantity::DivPoly => "div_poly",
            Quantity::JointSuccess => "joint_success",
            Quantity::JointOutage => "joint_outage",
            Quantity::AtLeastOnce => "at_least_once",
            Quantity::CondSuccess => "cond_success",
            Quantity::CondOutage => "cond_outage",
            Quantity::Bounded => "joint_success_bounded",
            Quantity::Correlation => "correlation",
        }
    }

    fn per_slot(self) -> bool {
        self != Quantity::Correlation
    }

    fn value(self, params: &NetworkParams, n: u32) -> Result<f64> {
        let link = link_for(params, n + 1)?;
        Ok(match self {
            Quantity::DivPoly => div_poly(n, params.p, params.delta),
            Quantity::JointSuccess => joint_success(&link, n),
            Quantity::JointOutage => joint_outage(&link, n)?,
            Quantity::AtLeastOnce => at_least_one_success(&link, n)?,
            Quantity::CondSuccess => cond_success_after_successes(&link, n),
            Quantity::CondOutage => cond_outage_after_failures(&link, n)?,
            Quantity::Bounded => joint_success_bounded(params, n)?,
            Quantity::Correlation => correlation_coefficient(&link),
        })
    }
}

/// An explicit list or an evenly spaced range.
#[derive(Args, Debug)]
pub struct GridArgs {
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to"])]
    grid: Vec<f64>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    /// Number of points in the range, ends included.
    #[arg(long, default_value_t = 21)]
    steps: usize,
}

impl GridArgs {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !self.grid.is_empty() {
            return Ok(self.grid.clone());
        }
        match (self.from, self.to) {
            (Some(a), Some(b)) => Ok(linspace(a, b, self.steps)?),
            _ => bail!(tempcorr_core::Error::Config("give --grid or both --from and --to".into())),
        }
    }
}

pub fn linspace(a: f64, b: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        bail!(tempcorr_core::Error::Config("grid must not be empty".into()));
    }
    if steps == 1 {
        return Ok(vec![a]);
    }
    let h = (b - a) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { b } else { a + h * i as f64 }).collect())
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[arg(long, value_enum)]
    axis: Axis,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Quantity::JointSuccess)]
    quantity: Quantity,
    /// Largest number of slots.
    #[arg(long, default_value_t = 4)]
    n: u32,
}

pub fn curve(res: &Resolved, a: &CurveArgs) -> Result<Table> {
    let params = res.network()?;
    let xs = a.grid.values()?;
    let q = a.quantity;
    let mut cols = vec![a.axis.name().to_string()];
    let slots: Vec<u32> = if q.per_slot() { (1..=a.n).collect() } else { vec![0] };
    for &k in &slots {
        cols.push(if q.per_slot() { format!("{}_n{k}", q.name()) } else { q.name().to_string() });
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("curve", &col_refs);
    describe(&mut t, &params, res)?;
    t.param("axis", a.axis.name()).param("quantity", q.name());
    for &x in &xs {
        let at = a.axis.set(params, x)?;
        let mut row: Vec<Cell> = vec![x.into()];
        for &k in &slots {
            row.push(q.value(&at, k)?.into());
        }
        t.push(row);
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    JointSuccess,
    AtLeastOnce,
    TwoThreshold,
    JointCdf,
    Delay,
    Correlation,
}

/// Simulator knobs shared by `simulate` and `compare`.
#[derive(Args, Debug, Clone)]
pub struct SimArgs {
    #[arg(long, default_value_t = 100_000)]
    realizations: u64,
    /// Path gain min(1, v^-α) instead of v^-α.
    #[arg(long)]
    bounded: bool,
    /// Fresh interferer positions in every slot.
    #[arg(long)]
    independent: bool,
    /// Observation disk radius; sized automatically when omitted.
    #[arg(long)]
    window: Option<f64>,
}

impl SimArgs {
    fn config(&self, params: NetworkParams, slots: u32, seed: u64) -> SimConfig {
        let mut cfg = SimConfig::new(params, slots, self.realizations, seed);
        if self.bounded {
            cfg = cfg.with_path_loss(PathLoss::Bounded);
        }
        if let Some(w) = self.window {
            cfg = cfg.with_window(w);
        }
        cfg
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = EstimatorKind::JointSuccess)]
    estimator: EstimatorKind,
    /// Number of slots.
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[arg(long)]
    theta1: Option<f64>,
    #[arg(long)]
    theta2: Option<f64>,
    /// Censoring point of the delay estimator.
    #[arg(long, default_value_t = 20)]
    max_slots: u32,
    /// Draw the link distance from the Rayleigh law with density `mu`.
    #[arg(long)]
    rayleigh: bool,
    /// Also write per-realization records (CSV) to this file.
    #[arg(long)]
    raw: Option<std::path::PathBuf>,
    #[command(flatten)]
    sim: SimArgs,
}

fn estimate_row(label: &str, slots: u32, e: &SimEstimate) -> Vec<Cell> {
    vec![
        label.into(),
        slots.into(),
        e.mean.into(),
        e.std_error.into(),
        e.ci95.0.into(),
        e.ci95.1.into(),
        e.n_effective.into(),
    ]
}

const ESTIMATE_COLUMNS: [&str; 7] = ["estimator", "slots", "mean", "std_error", "ci_lo", "ci_hi", "n_effective"];

pub fn simulate(res: &Resolved, a: &SimulateArgs) -> Result<Table> {
    let params = res.network()?;
    let th1 = a.theta1.unwrap_or(params.theta);
    let th2 = a.theta2.unwrap_or(params.theta);
    let estimator = match a.estimator {
        EstimatorKind::JointSuccess => Estimator::JointSuccess,
        EstimatorKind::AtLeastOnce => Estimator::AtLeastOnce,
        EstimatorKind::TwoThreshold => Estimator::JointSuccessTwo {
            theta1: th1,
            theta2: th2,
        },
        EstimatorKind::JointCdf => Estimator::JointCdf {
            theta1: th1,
            theta2: th2,
        },
        EstimatorKind::Delay => Estimator::LocalDelay { max_slots: a.max_slots },
        EstimatorKind::Correlation => Estimator::Correlation,
    };
    let mut cfg = a.sim.config(params, a.n, res.seed()).with_estimator(estimator);
    if a.rayleigh {
        let Some(mu) = res.file.mu else {
            bail!(tempcorr_core::Error::Config("--rayleigh needs --mu".into()));
        };
        cfg = cfg.with_distance(DistanceMode::Rayleigh { mu });
    }
    if a.sim.independent {
        cfg = independent_interference_toggle(cfg);
    }
    if let Some(path) = &a.raw {
        let mut w = csv::Writer::from_path(path)?;
        for rec in raw_records(&cfg)? {
            w.serialize(rec)?;
        }
        w.flush()?;
    }
    let label = a.estimator.to_possible_value().expect("named").get_name().to_string();
    let mut t;
    if let Estimator::LocalDelay { max_slots } = cfg.estimator {
        let tail = local_delay_samples(&cfg)?;
        t = Table::new("simulate", &["n", "tail", "std_error", "ci_lo", "ci_hi"]);
        for (n, e) in tail.survival.iter().enumerate() {
            t.push(vec![n.into(), e.mean.into(), e.std_error.into(), e.ci95.0.into(), e.ci95.1.into()]);
        }
        t.note("truncated_mean", tail.truncated_mean.mean)
            .note("truncated_mean_std_error", tail.truncated_mean.std_error)
            .note("max_slots", max_slots);
    } else {
        t = Table::new("simulate", &ESTIMATE_COLUMNS);
        t.push(estimate_row(&label, cfg.n_slots, &run(&cfg)?));
    }
    describe(&mut t, &params, res)?;
    t.param("seed", res.seed())
        .param("realizations", cfg.n_realizations)
        .param("estimator", label.as_str())
        .param("path_loss", if a.sim.bounded { "bounded" } else { "unbounded" })
        .param("interference", if a.sim.independent { "independent" } else { "dependent" })
        .param("distance", if a.rayleigh { "rayleigh" } else { "fixed" });
    if matches!(a.estimator, EstimatorKind::TwoThreshold | EstimatorKind::JointCdf) {
        t.param("theta1", th1).param("theta2", th2);
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CompareQuantity {
    JointSuccess,
    AtLeastOnce,
    Bounded,
    Correlation,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long, value_enum, default_value_t = CompareQuantity::JointSuccess)]
    quantity: CompareQuantity,
    /// Largest number of slots.
    #[arg(long, default_value_t = 4)]
    n: u32,
    /// Largest acceptable |z|.
    #[arg(long, default_value_t = 4.0)]
    z_max: f64,
    #[command(flatten)]
    sim: SimArgs,
}

struct Pair {
    n: u32,
    analytic: f64,
    est: SimEstimate,
}

impl Pair {
    fn z(&self) -> f64 {
        self.est.z_score(self.analytic)
    }
}

/// Ratio of two independent estimates with a delta-method error.
fn ratio(a: &SimEstimate, b: &SimEstimate) -> (f64, f64) {
    let r = a.mean / b.mean;
    let rel = ((a.std_error / a.mean).powi(2) + (b.std_error / b.mean).powi(2)).sqrt();
    (r, r * rel)
}

fn gap_z(mc: f64, se: f64, analytic: f64) -> f64 {
    let d = mc - analytic;
    if d == 0.0 {
        0.0
    } else {
        d / se
    }
}

pub fn compare(res: &Resolved, a: &CompareArgs) -> Result<(Table, Option<ComparisonFailed>)> {
    let params = res.network()?;
    if a.n == 0 {
        bail!(tempcorr_core::Error::Config("--n must be at least 1".into()));
    }
    let toggle = a.sim.independent;
    if toggle && a.quantity != CompareQuantity::JointSuccess {
        bail!(tempcorr_core::Error::Config("--independent applies to --quantity joint-success".into()));
    }
    let link = link_for(&params, a.n + 1)?;
    let seed = res.seed();
    let base = SimArgs {
        bounded: a.sim.bounded || a.quantity == CompareQuantity::Bounded,
        ..a.sim.clone()
    };
    let analytic_ind = |k: u32| (-link.big_delta * params.p * f64::from(k)).exp();
    let pairs: Vec<Pair> = match a.quantity {
        CompareQuantity::JointSuccess => {
            let curve = joint_success_curve(&base.config(params, a.n, seed))?;
            (1..=a.n)
                .zip(curve)
                .map(|(k, est)| Pair {
                    n: k,
                    analytic: joint_success(&link, k),
                    est,
                })
                .collect()
        }
        CompareQuantity::Bounded => {
            let mut out = Vec::new();
            for k in 1..=a.n {
                let est = run(&base.config(params, k, seed))?;
                out.push(Pair {
                    n: k,
                    analytic: joint_success_bounded(&params, k)?,
                    est,
                });
            }
            out
        }
        CompareQuantity::AtLeastOnce => {
            let mut out = Vec::new();
            for k in 1..=a.n {
                let cfg = base.config(params, k, seed).with_estimator(Estimator::AtLeastOnce);
                out.push(Pair {
                    n: k,
                    analytic: at_least_one_success(&link, k)?,
                    est: run(&cfg)?,
                });
            }
            out
        }
        CompareQuantity::Correlation => {
            let cfg = base.config(params, 2, seed).with_estimator(Estimator::Correlation);
            vec![Pair {
                n: 2,
                analytic: correlation_coefficient(&link),
                est: run(&cfg)?,
            }]
        }
    };
    let mut cols = vec!["n", "analytic", "mc_mean", "std_error", "ci_lo", "ci_hi", "z"];
    if toggle {
        cols.extend([
            "ind_analytic",
            "ind_mc_mean",
            "ind_std_error",
            "ind_z",
            "gap_analytic",
            "gap_mc",
            "gap_std_error",
            "gap_z",
        ]);
    }
    let mut t = Table::new("compare", &cols);
    describe(&mut t, &params, res)?;
    let qname = a.quantity.to_possible_value().expect("named").get_name().to_string();
    t.param("seed", seed)
        .param("realizations", a.sim.realizations)
        .param("quantity", qname.as_str())
        .param("z_max", a.z_max);
    let ind = if toggle {
        let cfg = independent_interference_toggle(base.config(params, a.n, seed.wrapping_add(1)));
        Some(joint_success_curve(&cfg)?)
    } else {
        None
    };
    let mut worst: f64 = 0.0;
    for (i, pr) in pairs.iter().enumerate() {
        let z = pr.z();
        worst = worst.max(z.abs());
        let e = &pr.est;
        let mut row: Vec<Cell> = vec![
            pr.n.into(),
            pr.analytic.into(),
            e.mean.into(),
            e.std_error.into(),
            e.ci95.0.into(),
            e.ci95.1.into(),
            z.into(),
        ];
        if let Some(ind) = &ind {
            let ie = &ind[i];
            let ia = analytic_ind(pr.n);
            let iz = ie.z_score(ia);
            let ga = pr.analytic / ia;
            let (gm, gse) = ratio(e, ie);
            let gz = gap_z(gm, gse, ga);
            worst = worst.max(iz.abs()).max(gz.abs());
            row.extend([ia.into(), ie.mean.into(), ie.std_error.into(), iz.into(), ga.into(), gm.into(), gse.into(), gz.into()]);
        }
        t.push(row);
    }
    t.note("max_abs_z", worst);
    let verdict = (worst > a.z_max || worst.is_nan()).then_some(ComparisonFailed { worst, limit: a.z_max });
    Ok((t, verdict))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistanceKind {
    Fixed,
    Rayleigh,
}

#[derive(Args, Debug)]
pub struct DelayArgs {
    #[arg(long, value_enum, default_value_t = DistanceKind::Fixed)]
    mode: DistanceKind,
    /// Fresh interferer positions in every slot.
    #[arg(long)]
    independent: bool,
    /// Largest n in the distribution table.
    #[arg(long, default_value_t = 10)]
    n: u32,
}

fn mean_summary(t: &mut Table, m: &MeanDelay) {
    match *m {
        MeanDelay::Finite {
            value,
            terms,
            tail_estimate,
            tail_uncertainty,
            ..
        } => {
            t.note("mean_delay_status", "finite")
                .note("mean_delay", value)
                .note("mean_delay_terms", terms)
                .note("mean_delay_tail", tail_estimate)
                .note("mean_delay_uncertainty", tail_uncertainty);
        }
        MeanDelay::Infinite => {
            t.note("mean_delay_status", "infinite").note("mean_delay", f64::INFINITY);
        }
        MeanDelay::NotConverged {
            partial_sum,
            terms,
            decay_exponent,
            ..
        } => {
            t.note("mean_delay_status", "not_converged")
                .note("mean_delay", m.value())
                .note("mean_delay_partial_sum", partial_sum)
                .note("mean_delay_terms", terms)
                .note("mean_delay_decay_exponent", decay_exponent);
        }
    }
}

pub fn delay(res: &Resolved, a: &DelayArgs) -> Result<Table> {
    let params = res.network()?;
    let interference = if a.independent { "independent" } else { "dependent" };
    let mut t;
    match a.mode {
        DistanceKind::Fixed => {
            t = Table::new("delay", &["n", "tail", "pmf"]);
            describe(&mut t, &params, res)?;
            let link = link_for(&params, a.n)?;
            if a.independent {
                // Geometric: every slot succeeds with e^{−Δp} on its own.
                let ps = (-link.big_delta * params.p).exp();
                for n in 0..=a.n {
                    let tail = (1.0 - ps).powi(n as i32);
                    let pmf = if n == 0 { 0.0 } else { ps * (1.0 - ps).powi(n as i32 - 1) };
                    t.push(vec![n.into(), tail.into(), pmf.into()]);
                }
                t.note("mean_delay_status", "finite").note("mean_delay", 1.0 / ps);
            } else {
                t.push(vec![0u32.into(), 1.0.into(), 0.0.into()]);
                for n in 1..=a.n {
                    let pmf = delay_pmf_link(&link, n)?;
                    t.push(vec![n.into(), joint_outage(&link, n)?.into(), pmf.into()]);
                }
                if params.p < 1.0 {
                    t.note("mean_delay_status", "finite").note("mean_delay", mean_delay_fixed(&params)?);
                    if params.delta < 1.0 {
                        t.note("mean_delay_taylor", taylor_mean_delay(&params, 0)?.m_hat);
                    }
                } else {
                    t.note("mean_delay_status", "infinite").note("mean_delay", f64::INFINITY);
                }
            }
        }
        DistanceKind::Rayleigh => {
            let Some(mu) = res.file.mu else {
                bail!(tempcorr_core::Error::Config("Rayleigh mode needs --mu".into()));
            };
            let model = DelayModel::rayleigh(params, mu)?;
            let beta = model.delta_prime_ratio()? * params.p;
            if a.independent {
                t = Table::new("delay", &["n", "tail", "pmf", "pmf_asymptotic"]);
                describe(&mut t, &params, res)?;
                t.push(vec![0u32.into(), 1.0.into(), 0.0.into(), 0.0.into()]);
                for n in 1..=a.n {
                    let pmf = delay_pmf_independent(&model, n)?;
                    t.push(vec![
                        n.into(),
                        delay_tail_independent(beta, n)?.into(),
                        pmf.exact.into(),
                        pmf.asymptotic.into(),
                    ]);
                }
                mean_summary(&mut t, &mean_delay_random(&model, InterferenceMode::Independent)?);
            } else {
                t = Table::new("delay", &["n", "tail", "pmf"]);
                describe(&mut t, &params, res)?;
                let tail = delay_tail_random(&model, a.n)?;
                for (n, &v) in tail.iter().enumerate() {
                    let pmf = if n == 0 { 0.0 } else { tail[n - 1] - v };
                    t.push(vec![n.into(), v.into(), pmf.into()]);
                }
                mean_summary(&mut t, &mean_delay_random(&model, InterferenceMode::Dependent)?);
            }
            let crit = critical_probabilities(&model)?;
            let regime = match crit.regime(params.p) {
                DelayRegime::Finite => "finite",
                DelayRegime::FiniteIfIndependent => "finite_if_independent",
                DelayRegime::Infinite => "infinite",
            };
            t.note("delta_prime_ratio", model.delta_prime_ratio()?)
                .note("p_c", crit.p_c)
                .note("p_c_ind", crit.p_c_ind)
                .note("regime", regime);
        }
    }
    t.param("distance", if a.mode == DistanceKind::Fixed { "fixed" } else { "rayleigh" })
        .param("interference", interference);
    Ok(t)
}
