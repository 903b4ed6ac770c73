//! Data behind the reference figures. Each figure owns a named parameter
//! block; `--set key=value` and the matching global flags override it.

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use tempcorr_core::joint_stats::{cond_success_after_successes, correlation_coefficient, joint_success_bounded};
use tempcorr_core::local_delay::critical_probabilities;
use tempcorr_core::network::gamma_product;
use tempcorr_core::two_threshold::{
    equalize_at_least_once, equalize_at_least_once_exact, psi_two, quadratic_coeffs, AsymmetricLink,
};
use tempcorr_core::{DelayModel, Error, LinkModel, NetworkParams};

use crate::commands::linspace;
use crate::table::{Cell, Table};
use crate::Resolved;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    /// Conditional success after n successes.
    Fig2,
    /// Correlation coefficient over (p, δ).
    Fig3,
    /// Fig2 with bounded path gain.
    Fig4,
    /// At-least-once probability in two slots and its quadratic model.
    Fig5,
    /// Asymmetric threshold design at θ̄ = 10.
    Fig6,
    /// Critical transmit probabilities against δ.
    Fig7,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(value_enum)]
    name: FigureName,
    /// Override a figure parameter, e.g. `--set p=0.25`.
    #[arg(long = "set", value_parser = parse_kv)]
    set: Vec<(String, f64)>,
    /// Number of points on the x axis.
    #[arg(long)]
    points: Option<usize>,
}

fn parse_kv(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{v:?}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Ordered named parameters of a figure.
struct Block(Vec<(&'static str, f64)>);

impl Block {
    fn get(&self, key: &str) -> f64 {
        self.0.iter().find(|(k, _)| *k == key).map(|&(_, v)| v).expect("known key")
    }

    fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match self.0.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => {
                slot.1 = value;
                Ok(())
            }
            None => {
                let keys: Vec<&str> = self.0.iter().map(|(k, _)| *k).collect();
                bail!(Error::Config(format!("unknown parameter {key:?}; this figure has {}", keys.join(", "))))
            }
        }
    }
}

fn defaults(name: FigureName) -> Block {
    let pi = std::f64::consts::PI;
    Block(match name {
        FigureName::Fig2 => vec![("delta", 0.5), ("contention", 0.5)],
        FigureName::Fig3 => vec![("lambda_pi_r2", 0.5), ("theta", 5.0)],
        FigureName::Fig4 => vec![("delta", 0.5), ("r", 1.0), ("theta", 1.0), ("lambda", 1.0 / (pi * pi))],
        FigureName::Fig5 => vec![("delta", 2.0 / 3.0), ("delta_hat_theta_bar_delta", 2.0), ("p1", 0.5), ("p2", 0.25)],
        FigureName::Fig6 => vec![("delta_hat", 1.0 / 3.0), ("p", 1.0 / 3.0), ("delta", 0.4), ("theta_bar", 10.0)],
        FigureName::Fig7 => vec![("theta", 10.0), ("lambda_over_mu_1", 1.0), ("lambda_over_mu_2", 0.25)],
    })
}

/// Global flags that name a key of the block.
fn flag_overrides(res: &Resolved) -> Vec<(&'static str, f64)> {
    let f = &res.file;
    let mut out = Vec::new();
    let mut push = |k, v: Option<f64>| {
        if let Some(v) = v {
            out.push((k, v));
        }
    };
    push("delta", f.delta_value());
    push("p", f.p);
    push("theta", f.theta);
    push("lambda", f.lambda);
    push("r", f.r);
    push("contention", res.contention);
    out
}

pub fn figure(res: &Resolved, a: &FigureArgs) -> Result<Table> {
    let mut b = defaults(a.name);
    for (k, v) in flag_overrides(res) {
        if b.0.iter().any(|(key, _)| *key == k) {
            b.set(k, v)?;
        }
    }
    for (k, v) in &a.set {
        b.set(k, *v)?;
    }
    let points = a.points;
    let mut t = match a.name {
        FigureName::Fig2 => fig2(&b, points.unwrap_or(101))?,
        FigureName::Fig3 => fig3(&b, points.unwrap_or(21))?,
        FigureName::Fig4 => fig4(&b, points.unwrap_or(101))?,
        FigureName::Fig5 => fig5(&b, points.unwrap_or(81))?,
        FigureName::Fig6 => fig6(&b, points.unwrap_or(61))?,
        FigureName::Fig7 => fig7(&b, points.unwrap_or(19))?,
    };
    let name = a.name.to_possible_value().expect("named").get_name().to_string();
    let mut params = vec![("figure".to_string(), Cell::Text(name))];
    params.extend(b.0.iter().map(|&(k, v)| (k.to_string(), Cell::Num(v))));
    t.parameters = params;
    Ok(t)
}

fn cond_columns(extra: &str) -> Vec<String> {
    let mut c = vec!["p".to_string()];
    c.extend((1..=4).map(|n| format!("cond_success_n{n}")));
    c.push(extra.to_string());
    c
}

fn table(cols: &[String]) -> Table {
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    Table::new("figure", &refs)
}

fn fig2(b: &Block, points: usize) -> Result<Table> {
    let (delta, contention) = (b.get("delta"), b.get("contention"));
    let mut t = table(&cond_columns("baseline"));
    for p in linspace(0.0, 1.0, points)? {
        let link = LinkModel::new(contention, p, delta)?;
        let mut row: Vec<Cell> = vec![p.into()];
        row.extend((1..=4).map(|n| Cell::Num(cond_success_after_successes(&link, n))));
        row.push((-contention * p).exp().into());
        t.push(row);
    }
    Ok(t)
}

fn fig3(b: &Block, points: usize) -> Result<Table> {
    let (scale, theta) = (b.get("lambda_pi_r2"), b.get("theta"));
    let mut t = Table::new("figure", &["p", "delta", "correlation"]);
    for delta in linspace(0.05, 0.95, 19)? {
        let contention = scale * theta.powf(delta) * gamma_product(delta)?;
        for p in linspace(0.0, 1.0, points)? {
            let link = LinkModel::new(contention, p, delta)?;
            t.push(vec![p.into(), delta.into(), correlation_coefficient(&link).into()]);
        }
    }
    Ok(t)
}

fn fig4(b: &Block, points: usize) -> Result<Table> {
    let mut t = table(&cond_columns("baseline"));
    for p in linspace(0.0, 1.0, points)? {
        let params = NetworkParams::new(b.get("lambda"), b.get("r"), b.get("theta"), b.get("delta"), p)?;
        let s: Vec<f64> = (1..=5).map(|n| joint_success_bounded(&params, n)).collect::<Result<_, _>>()?;
        let mut row: Vec<Cell> = vec![p.into()];
        row.extend((0..4).map(|i| Cell::Num(s[i + 1] / s[i])));
        row.push(s[0].into());
        t.push(row);
    }
    Ok(t)
}

fn fig5(b: &Block, points: usize) -> Result<Table> {
    let (delta, scale) = (b.get("delta"), b.get("delta_hat_theta_bar_delta"));
    let cols: Vec<String> = ["nu", "psi2_p1", "quadratic_p1", "psi2_p2", "quadratic_p2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut t = table(&cols);
    // θ̄ = 1 so that Δ̂ carries the whole scale.
    let links = [
        AsymmetricLink::new(scale, b.get("p1"), delta)?,
        AsymmetricLink::new(scale, b.get("p2"), delta)?,
    ];
    let coeffs = [quadratic_coeffs(&links[0], 1.0)?, quadratic_coeffs(&links[1], 1.0)?];
    for nu in linspace(-2.0, 2.0, points)? {
        let mut row: Vec<Cell> = vec![nu.into()];
        for (l, (a, bq)) in links.iter().zip(coeffs) {
            row.push(psi_two(l, 1.0, nu).into());
            row.push((a + bq * nu * nu).into());
        }
        t.push(row);
    }
    for (i, (a, bq)) in coeffs.iter().enumerate() {
        t.note(&format!("a_p{}", i + 1), *a).note(&format!("b_p{}", i + 1), *bq);
    }
    Ok(t)
}

fn fig6(b: &Block, points: usize) -> Result<Table> {
    let link = AsymmetricLink::new(b.get("delta_hat"), b.get("p"), b.get("delta"))?;
    let tb = b.get("theta_bar");
    let cols: Vec<String> = ["nu", "psi2", "independent", "psi2_min"].iter().map(|s| s.to_string()).collect();
    let mut t = table(&cols);
    let min = psi_two(&link, tb, 0.0);
    for nu in linspace(-1.5, 1.5, points)? {
        let single = link.single_success(tb * (-nu).exp());
        let indep = 1.0 - (1.0 - single).powi(2);
        t.push(vec![nu.into(), psi_two(&link, tb, nu).into(), indep.into(), min.into()]);
    }
    let eq = equalize_at_least_once(&link, tb)?;
    t.note("psi2_at_zero", min)
        .note("design_nu", eq.nu)
        .note("design_theta1", eq.thresholds.theta1)
        .note("design_theta2", eq.thresholds.theta2)
        .note("design_success", eq.success);
    if let Ok(ex) = equalize_at_least_once_exact(&link, tb) {
        t.note("exact_nu", ex.nu).note("exact_success", ex.success);
    }
    Ok(t)
}

fn fig7(b: &Block, points: usize) -> Result<Table> {
    let theta = b.get("theta");
    let ratios = [b.get("lambda_over_mu_1"), b.get("lambda_over_mu_2")];
    let cols: Vec<String> = ["delta", "p_c_1", "p_c_ind_1", "p_c_2", "p_c_ind_2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut t = table(&cols);
    for delta in linspace(0.05, 0.95, points)? {
        let mut row: Vec<Cell> = vec![delta.into()];
        for &ratio in &ratios {
            // Only λ/μ matters, so μ = 1.
            let base = NetworkParams::new(ratio, 1.0, theta, delta, 0.5)?;
            let c = critical_probabilities(&DelayModel::rayleigh(base, 1.0)?)?;
            row.push(c.p_c.into());
            row.push(c.p_c_ind.into());
        }
        t.push(row);
    }
    Ok(t)
}
