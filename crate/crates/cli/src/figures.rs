//! Datasets behind the figure presets of `wpc reproduce`.
//!
//! Each preset starts from its own parameter set; any flag given on the
//! command line is laid over it, except for the quantity the figure sweeps
//! or enumerates.

use std::path::Path;

use anyhow::Result;
use rayon::prelude::*;
use wpc_core::channel::expected_log2_one_plus;
use wpc_core::montecarlo::{simulate_first_hop, SimConfig};
use wpc_core::{db_to_linear, df, dt, SystemParams};

use crate::args::{sweep_points, Figure, ParamArgs};
use crate::commands::{binding_name, dt_sweep_table};
use crate::output::{write_atomic, Cell, Table};

const THETAS: [f64; 2] = [0.02, 0.05];

pub fn reproduce(
    fig: Figure,
    flags: &ParamArgs,
    cfg: &SimConfig,
    dir: &Path,
) -> Result<Vec<String>> {
    let figs: Vec<Figure> = match fig {
        Figure::All => vec![
            Figure::Fig3,
            Figure::Fig4,
            Figure::Fig5,
            Figure::Fig6,
            Figure::Fig7,
            Figure::Fig8,
        ],
        f => vec![f],
    };
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for f in figs {
        let (name, table) = build(f, flags, cfg)?;
        write_atomic(&dir.join(&name), &table.to_csv()?)?;
        written.push(name);
    }
    Ok(written)
}

pub fn build(fig: Figure, flags: &ParamArgs, cfg: &SimConfig) -> Result<(String, Table)> {
    let (name, table) = match fig {
        Figure::Fig3 => ("fig3", fig3(flags, cfg)?),
        Figure::Fig4 => ("fig4", fig4(flags)?),
        Figure::Fig5 => ("fig5", fig5(flags)?),
        Figure::Fig6 => ("fig6", fig6(flags, cfg)?),
        Figure::Fig7 => ("fig7", fig7(flags)?),
        Figure::Fig8 => ("fig8", fig8(flags)?),
        Figure::All => unreachable!("expanded by the caller"),
    };
    Ok((format!("{name}.csv"), table))
}

fn theta_tag(theta: f64) -> String {
    format!("theta_{}", crate::output::fmt_num(theta))
}

fn fig3(flags: &ParamArgs, cfg: &SimConfig) -> Result<Table> {
    let p = flags.apply(SystemParams::default())?;
    let alphas = sweep_points(0.01, 0.99, 0.01)?;
    let mut t = dt_sweep_table(&p, &alphas, cfg)?;
    t.notes.push(format!(
        "direct link, gamma_o = {} dB, {} slots, seed {}",
        crate::output::fmt_num(wpc_core::linear_to_db(p.gamma_o)),
        cfg.slots,
        cfg.seed
    ));
    Ok(t)
}

fn fig4(flags: &ParamArgs) -> Result<Table> {
    let base = flags.apply(SystemParams::default())?;
    let zetas = sweep_points(0.1, 1.0, 0.05)?;
    let mut cols = vec!["zeta".to_string()];
    for th in THETAS {
        cols.push(format!("throughput_{}", theta_tag(th)));
        cols.push(format!("alpha_{}", theta_tag(th)));
    }
    cols.push("throughput_unconstrained".into());
    cols.push("alpha_unconstrained".into());
    let mut t = Table::new(&cols);
    t.notes.push("zeta from 0.1 to 1 is a preset range".into());
    let rows = zetas
        .par_iter()
        .map(|&zeta| -> Result<Vec<Cell>> {
            let mut row = vec![Cell::Num(zeta)];
            for theta in THETAS.into_iter().chain([1.0]) {
                let opt = dt::optimize(&SystemParams {
                    zeta,
                    theta,
                    ..base
                })?;
                row.push(opt.throughput.into());
                row.push(opt.alpha_star.into());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

fn fig5(flags: &ParamArgs) -> Result<Table> {
    let base = flags.apply(SystemParams::default())?;
    let mut cols = vec!["gamma_o_db".to_string()];
    for th in THETAS {
        cols.push(format!("alpha_{}", theta_tag(th)));
        cols.push(format!("throughput_{}", theta_tag(th)));
        cols.push(format!("binding_{}", theta_tag(th)));
    }
    let mut t = Table::new(&cols);
    for db in sweep_points(-20.0, 0.0, 0.5)? {
        let mut row = vec![Cell::Num(db)];
        for theta in THETAS {
            let p = SystemParams {
                gamma_o: db_to_linear(db),
                theta,
                ..base
            };
            let opt = dt::optimize(&p)?;
            row.push(opt.alpha_star.into());
            row.push(opt.throughput.into());
            row.push(binding_name(opt.binding).into());
        }
        t.push(row);
    }
    Ok(t)
}

fn fig6(flags: &ParamArgs, cfg: &SimConfig) -> Result<Table> {
    let p = flags.apply(SystemParams::default())?;
    let mut t = Table::new(&[
        "kappa",
        "alpha",
        "beta",
        "analytic_esr",
        "sim_esr",
        "sim_stderr",
    ]);
    t.notes.push(format!(
        "first hop with z = 1, d = {}, mu = {}, {} slots, seed {}",
        crate::output::fmt_num(p.d),
        crate::output::fmt_num(p.mu),
        cfg.slots,
        cfg.seed
    ));
    let kappas = sweep_points(0.1, 4.0, 0.1)?;
    let rows = kappas
        .par_iter()
        .map(|&kappa| -> Result<Vec<Cell>> {
            let alpha = kappa / (1.0 + kappa);
            let beta = 1.0 / (1.0 + kappa);
            let gain = p.zeta * kappa * p.d.powf(-p.mu);
            let analytic = expected_log2_one_plus(gain)? / (1.0 + kappa);
            let sim = simulate_first_hop(&p, alpha, beta, cfg)?;
            Ok(vec![
                kappa.into(),
                alpha.into(),
                beta.into(),
                analytic.into(),
                sim.mean.into(),
                sim.stderr.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

fn fig7(flags: &ParamArgs) -> Result<Table> {
    let base = flags.apply(SystemParams::default())?;
    let kappa = df::optimize_kappa(&base)?;
    let mut cols = vec!["gamma_o_db".to_string(), "kappa_star".to_string()];
    for th in THETAS {
        cols.push(format!("z_lower_{}", theta_tag(th)));
        cols.push(format!("z_upper_{}", theta_tag(th)));
        cols.push(format!("feasible_{}", theta_tag(th)));
    }
    let mut t = Table::new(&cols);
    t.notes.push(format!(
        "warning: d = 0 is singular for the source-relay path loss; this dataset uses d = {} (set with --d)",
        crate::output::fmt_num(base.d)
    ));
    t.notes
        .push("kappa_star maximizes first-hop throughput with both constraints ignored".into());
    for db in sweep_points(-20.0, 0.0, 0.5)? {
        let mut row = vec![Cell::Num(db), Cell::Num(kappa)];
        for theta in THETAS {
            let p = SystemParams {
                gamma_o: db_to_linear(db),
                theta,
                ..base
            };
            let lower = df::z_lower(&p, kappa)?;
            let b = df::feasibility(&p, kappa)?;
            row.push(lower.into());
            row.push(b.z_upper.into());
            row.push(b.feasible.into());
        }
        t.push(row);
    }
    Ok(t)
}

fn fig8(flags: &ParamArgs) -> Result<Table> {
    let preset = SystemParams {
        gamma_o: db_to_linear(-18.0),
        theta: 0.05,
        ..Default::default()
    };
    let base = flags.apply(preset)?;
    let mus = [2.0, 3.0];
    let mut cols = vec!["d".to_string()];
    for mu in mus {
        let m = crate::output::fmt_num(mu);
        cols.push(format!("dt_mu_{m}"));
        cols.push(format!("df_mu_{m}"));
        cols.push(format!("df_three_step_mu_{m}"));
    }
    let mut t = Table::new(&cols);
    t.notes.push(format!(
        "gamma_o = {} dB, theta = {} (set with --gamma-o-db and --theta); empty cells are infeasible",
        crate::output::fmt_num(wpc_core::linear_to_db(base.gamma_o)),
        crate::output::fmt_num(base.theta)
    ));
    let ds = sweep_points(0.05, 0.95, 0.05)?;
    let rows = ds
        .par_iter()
        .map(|&d| -> Result<Vec<Cell>> {
            let mut row = vec![Cell::Num(d)];
            for mu in mus {
                let p = SystemParams { d, mu, ..base };
                let direct = dt::optimize(&p)?;
                let joint = df::optimize(&p)?;
                let three = df::optimize_three_step(&p)?;
                row.push(direct.throughput.into());
                row.push(joint.feasible.then_some(joint.throughput).into());
                row.push(three.feasible.then_some(three.throughput).into());
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}
