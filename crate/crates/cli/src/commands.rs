//! Subcommands other than `reproduce`.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use wpc_core::df::{self, DfSplit, KappaZ};
use wpc_core::dt::{self, Binding, DtSplit};
use wpc_core::montecarlo::{self, SimConfig};
use wpc_core::SystemParams;

use crate::args::{DfAxis, DfMethod, Format, OutArgs, Protocol, SplitArgs};
use crate::output::{write_atomic, Cell, Table};

/// What a finished command reports back to `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Infeasible,
}

pub fn emit(table: &Table, out: &OutArgs, default: Format) -> Result<()> {
    let bytes = match out.format.unwrap_or(default) {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json()?,
    };
    match &out.out {
        Some(path) => write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .context("writing to stdout")
        }
    }
}

pub fn binding_name(b: Binding) -> &'static str {
    match b {
        Binding::Interior => "interior",
        Binding::OutageConstraint => "outage_constraint",
        Binding::Infeasible => "infeasible",
    }
}

fn analytic_ok(p: &SystemParams) -> bool {
    p.check_analytic().is_ok()
}

pub const DT_SWEEP_COLUMNS: [&str; 6] = [
    "alpha",
    "analytic_throughput",
    "analytic_outage",
    "sim_throughput",
    "sim_stderr",
    "sim_outage",
];

pub fn dt_sweep_table(p: &SystemParams, alphas: &[f64], cfg: &SimConfig) -> Result<Table> {
    let analytic = analytic_ok(p);
    let rows = alphas
        .par_iter()
        .map(|&a| -> Result<Vec<Cell>> {
            let split = DtSplit::new(a)?;
            let (e, o) = if analytic {
                let s = dt::link_stats(p, split)?;
                (Some(s.expected_throughput), Some(s.outage))
            } else {
                (None, None)
            };
            let sim = montecarlo::simulate_dt(p, split, cfg)?;
            Ok(vec![
                a.into(),
                e.into(),
                o.into(),
                sim.mean_throughput.into(),
                sim.stderr.into(),
                sim.outage_rate.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&DT_SWEEP_COLUMNS);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn dt_optimize_table(p: &SystemParams) -> Result<Table> {
    let opt = dt::optimize(p)?;
    Ok(Table::record(vec![
        ("alpha_star", opt.alpha_star.into()),
        ("throughput", opt.throughput.into()),
        ("outage", opt.outage.into()),
        ("binding", binding_name(opt.binding).into()),
    ]))
}

/// Splits for a relaying sweep plus the swept value of each.
fn df_axis_points(
    p: &SystemParams,
    axis: DfAxis,
    split: &SplitArgs,
    values: impl Fn(f64, f64, f64) -> Result<Vec<f64>>,
) -> Result<Vec<(f64, DfSplit)>> {
    let pts = match axis {
        DfAxis::Beta => {
            let alpha = split.alpha.unwrap_or(0.5);
            if !(alpha > 0.0 && alpha < 1.0) {
                bail!("alpha must lie in (0, 1), got {alpha}");
            }
            let top = crate::output::round_sig(1.0 - alpha - 0.01).max(0.01);
            values(0.01, top, 0.01)?
                .into_iter()
                .map(|b| Ok((b, DfSplit::new(alpha, b)?)))
                .collect::<Result<Vec<_>>>()?
        }
        DfAxis::Z => {
            let kappa = match split.kappa {
                Some(k) => k,
                None => df::optimize_kappa(p)?,
            };
            values(0.01, 0.99, 0.01)?
                .into_iter()
                .map(|z| Ok((z, KappaZ::new(kappa, z)?.to_split()?)))
                .collect::<Result<Vec<_>>>()?
        }
        DfAxis::Kappa => {
            let z = split.z.unwrap_or(0.9);
            values(0.1, 5.0, 0.1)?
                .into_iter()
                .map(|k| Ok((k, KappaZ::new(k, z)?.to_split()?)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(pts)
}

pub fn df_sweep_table(
    p: &SystemParams,
    axis: DfAxis,
    split: &SplitArgs,
    sweep: &crate::args::SweepArgs,
    cfg: &SimConfig,
) -> Result<Table> {
    let points = df_axis_points(p, axis, split, |a, b, c| sweep.points(a, b, c))?;
    let analytic = analytic_ok(p);
    let name = match axis {
        DfAxis::Beta => "beta",
        DfAxis::Z => "z",
        DfAxis::Kappa => "kappa",
    };
    let mut t = Table::new(&[
        name,
        "alpha",
        "beta",
        "analytic_sr",
        "analytic_rd",
        "analytic_throughput",
        "analytic_outage",
        "sim_sr",
        "sim_rd",
        "sim_throughput",
        "sim_stderr",
        "sim_outage",
        "sim_slot_min",
    ]);
    let rows = points
        .par_iter()
        .map(|&(x, s)| -> Result<Vec<Cell>> {
            let closed = if analytic {
                Some((
                    df::expected_throughput_sr(p, s)?,
                    df::expected_throughput_rd(p, s)?,
                    df::outage(p, s)?,
                ))
            } else {
                None
            };
            let sim = montecarlo::simulate_df(p, s, cfg)?;
            let relay = sim.relay.expect("relay statistics");
            Ok(vec![
                x.into(),
                s.alpha().into(),
                s.beta().into(),
                closed.map(|c| c.0).into(),
                closed.map(|c| c.1).into(),
                closed.map(|c| c.0.min(c.1)).into(),
                closed.map(|c| c.2).into(),
                relay.sr.mean.into(),
                relay.rd.mean.into(),
                sim.mean_throughput.into(),
                sim.stderr.into(),
                sim.outage_rate.into(),
                relay.mean_slot_min.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

pub fn df_optimize_table(p: &SystemParams, method: DfMethod) -> Result<(Table, Outcome)> {
    let opt = match method {
        DfMethod::Joint => df::optimize(p)?,
        DfMethod::ThreeStep => df::optimize_three_step(p)?,
    };
    let t = Table::record(vec![
        ("kappa_star", opt.kappa_star.into()),
        ("z_star", opt.z_star.into()),
        ("alpha_star", opt.alpha_star.into()),
        ("beta_star", opt.beta_star.into()),
        ("throughput", opt.throughput.into()),
        ("outage", opt.outage.into()),
        ("feasible", opt.feasible.into()),
        ("z_lower", opt.z_lower.into()),
        ("z_upper", opt.z_upper.into()),
    ]);
    let outcome = if opt.feasible {
        Outcome::Done
    } else {
        Outcome::Infeasible
    };
    Ok((t, outcome))
}

fn relay_split(split: &SplitArgs) -> Result<DfSplit> {
    Ok(match (split.alpha, split.beta, split.kappa, split.z) {
        (Some(a), Some(b), None, None) => DfSplit::new(a, b)?,
        (None, None, Some(k), Some(z)) => KappaZ::new(k, z)?.to_split()?,
        (None, None, None, None) => DfSplit::new(0.5, 0.25)?,
        _ => bail!("give either --alpha and --beta, or --kappa and --z"),
    })
}

pub fn simulate_table(
    p: &SystemParams,
    protocol: Protocol,
    split: &SplitArgs,
    cfg: &SimConfig,
) -> Result<Table> {
    let analytic = analytic_ok(p);
    let mut fields: Vec<(&str, Cell)> = Vec::new();
    match protocol {
        Protocol::Dt => {
            if split.beta.is_some() || split.kappa.is_some() || split.z.is_some() {
                bail!("direct transmission takes only --alpha");
            }
            let s = DtSplit::new(split.alpha.unwrap_or(0.5))?;
            let sim = montecarlo::simulate_dt(p, s, cfg)?;
            let closed = if analytic {
                Some(dt::link_stats(p, s)?)
            } else {
                None
            };
            fields.extend([
                ("protocol", "dt".into()),
                ("alpha", s.alpha().into()),
                ("slots", sim.slots.into()),
                ("seed", cfg.seed.into()),
                ("mean_throughput", sim.mean_throughput.into()),
                ("stderr", sim.stderr.into()),
                ("outage_rate", sim.outage_rate.into()),
                ("outage_stderr", sim.outage_stderr.into()),
                ("conditional_mean", sim.conditional_mean.into()),
                (
                    "analytic_throughput",
                    closed.map(|c| c.expected_throughput).into(),
                ),
                ("analytic_outage", closed.map(|c| c.outage).into()),
            ]);
        }
        Protocol::Df => {
            let s = relay_split(split)?;
            let sim = montecarlo::simulate_df(p, s, cfg)?;
            let relay = sim.relay.expect("relay statistics");
            let closed = if analytic {
                Some((
                    df::expected_throughput_sr(p, s)?,
                    df::expected_throughput_rd(p, s)?,
                    df::outage(p, s)?,
                ))
            } else {
                None
            };
            fields.extend([
                ("protocol", "df".into()),
                ("alpha", s.alpha().into()),
                ("beta", s.beta().into()),
                ("slots", sim.slots.into()),
                ("seed", cfg.seed.into()),
                ("mean_throughput", sim.mean_throughput.into()),
                ("stderr", sim.stderr.into()),
                ("outage_rate", sim.outage_rate.into()),
                ("outage_stderr", sim.outage_stderr.into()),
                ("conditional_mean", sim.conditional_mean.into()),
                ("analytic_throughput", closed.map(|c| c.0.min(c.1)).into()),
                ("analytic_outage", closed.map(|c| c.2).into()),
                ("sr_mean", relay.sr.mean.into()),
                ("sr_stderr", relay.sr.stderr.into()),
                ("sr_outage", relay.sr.outage_rate.into()),
                ("analytic_sr", closed.map(|c| c.0).into()),
                ("rd_mean", relay.rd.mean.into()),
                ("rd_stderr", relay.rd.stderr.into()),
                ("rd_outage", relay.rd.outage_rate.into()),
                ("analytic_rd", closed.map(|c| c.1).into()),
                ("mean_slot_min", relay.mean_slot_min.into()),
                ("slot_min_stderr", relay.slot_min_stderr.into()),
            ]);
        }
    }
    Ok(Table::record(fields))
}
