use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use levinson2d_core::analysis::{
    centrifugal_phase_curve, cross_sections, default_m_max, levinson_audit, partial_wave_phases, LevinsonReport,
};
use levinson2d_core::potential::{
    darboux_partner, make_partial, make_partial_shared, PartialPotential, Region, Side, Term,
};
use levinson2d_core::solver::{bound_state, count_bound_states_with, ground_state, phase_curve_adaptive};
use levinson2d_core::Error;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::output::{num, Table};
use crate::CliError;

/// Refinement rounds allowed when unwrapping a user-supplied `k` grid.
const UNWRAP_DEPTH: usize = 12;

/// Options that override the configuration file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub m_max: Option<i32>,
}

fn partial(cfg: &ExperimentConfig, m: i32) -> Result<PartialPotential, CliError> {
    make_partial(cfg.potential.clone(), m).map_err(|e| CliError::Config(format!("channels: m = {m}: {e}")))
}

/// `(ν, μ)` when the potential is a pure inverse-square model switching at `R`.
fn centrifugal_indices(u: &PartialPotential) -> Option<(f64, f64)> {
    let pot = u.potential();
    let range = pot.range();
    let pure = pot.terms().iter().all(|t| match t {
        Term::InverseSquare { region: Region::Everywhere, .. } => true,
        Term::InverseSquare { region: Region::Inside(r) | Region::Outside(r), .. } => *r == range,
        _ => false,
    });
    pure.then(|| (u.channel().nu(), u.channel().mu()))
}

pub fn phase_shift(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let ks = cfg.k.as_ref().ok_or_else(|| CliError::Config("k: a [k] grid is required for phase-shift".into()))?;
    let channels = cfg.channels.iter().map(|&m| partial(cfg, m)).collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = channels
        .par_iter()
        .map(|u| -> Result<_, Error> {
            let curve = phase_curve_adaptive(u, ks, &cfg.phase, UNWRAP_DEPTH)?;
            let delta: Vec<f64> = ks.iter().map(|&k| curve.at(k).expect("grid point kept")).collect();
            let spectrum = count_bound_states_with(u, &cfg.levinson.bound)?;
            Ok((delta, spectrum))
        })
        .collect::<Result<_, _>>()?;

    let oracle = channels.iter().all(|u| centrifugal_indices(u).is_some());
    let mut header = "m,k,delta_rad,delta_over_pi,sigma_m".to_string();
    if oracle {
        header.push_str(",delta_exact_rad");
    }
    let mut table = Table::new(&cfg.hash, &header);
    table.comment(format!("R = {}; k in 1/length; sigma_m = (4/k) sin^2 delta", num(cfg.range)));
    if oracle {
        table.comment("delta_exact_rad: closed-form phase, shifted by a multiple of pi to meet delta_rad at the first k");
    }
    let mut summary = Table::new(&cfg.hash, "m,nu,mu,N_b,near_threshold");
    for (u, (delta, spectrum)) in channels.iter().zip(&results) {
        let m = u.channel().m();
        let exact = match centrifugal_indices(u).filter(|_| oracle) {
            Some((nu, mu)) => {
                let krs: Vec<f64> = ks.iter().map(|k| k * cfg.range).collect();
                let mut e = centrifugal_phase_curve(nu, mu, m, &krs)?;
                let shift = PI * ((delta[0] - e[0]) / PI).round();
                e.iter_mut().for_each(|x| *x += shift);
                Some(e)
            }
            None => None,
        };
        for (i, (&k, &d)) in ks.iter().zip(delta).enumerate() {
            let mut row = vec![m.to_string(), num(k), num(d), num(d / PI), num(4.0 / k * d.sin().powi(2))];
            if let Some(e) = &exact {
                row.push(num(e[i]));
            }
            table.row(&row);
        }
        summary.row(&[
            m.to_string(),
            num(u.channel().nu()),
            num(u.channel().mu()),
            spectrum.count().to_string(),
            spectrum.near_threshold.to_string(),
        ]);
    }
    table.write(out, "phase_shifts.csv")?;
    summary.write(out, "channels.csv")?;
    Ok(format!("phase-shift: {} channels x {} wavenumbers", channels.len(), ks.len()))
}

const LEVINSON_HEADER: &str =
    "m,nu,mu,N_b,delta0_rad,deltainf_rad,predicted_rad,measured_rad,discrepancy_rad,noncritical";

fn levinson_cells(r: &LevinsonReport) -> Vec<String> {
    vec![
        r.channel.m().to_string(),
        num(r.channel.nu()),
        num(r.channel.mu()),
        r.n_bound.to_string(),
        num(r.delta_zero),
        num(r.delta_infinity),
        num(r.predicted_jump),
        num(r.measured_jump),
        num(r.discrepancy),
        r.noncritical.to_string(),
    ]
}

/// Splits reports into failures (noncritical and off by more than `tol`)
/// and warnings (flagged critical).
fn judge(reports: &[(&str, &LevinsonReport)], tol: f64) -> (Vec<String>, Vec<String>) {
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for (label, r) in reports {
        let m = r.channel.m();
        if !r.noncritical {
            warnings.push(format!("{label}m = {m}: near threshold, discrepancy {:.3e} rad not judged", r.discrepancy));
        } else if !r.passes(tol) {
            failures.push(format!("{label}m = {m}: discrepancy {:.3e} rad exceeds {tol:e}", r.discrepancy));
        }
    }
    (failures, warnings)
}

pub fn levinson(cfg: &ExperimentConfig, out: &Path, o: Overrides) -> Result<String, CliError> {
    let tol = o.tolerance.unwrap_or(cfg.levinson_tolerance);
    let channels = cfg.channels.iter().map(|&m| partial(cfg, m)).collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<LevinsonReport> =
        channels.par_iter().map(|u| levinson_audit(u, &cfg.levinson)).collect::<Result<_, _>>()?;
    let mut table = Table::new(&cfg.hash, LEVINSON_HEADER);
    table.comment(format!("tolerance {} rad", num(tol)));
    for r in &reports {
        table.row(&levinson_cells(r));
    }
    table.write(out, "levinson.csv")?;
    let labelled: Vec<(&str, &LevinsonReport)> = reports.iter().map(|r| ("", r)).collect();
    let (failures, warnings) = judge(&labelled, tol);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if !failures.is_empty() {
        return Err(CliError::Failed(failures.join("\n")));
    }
    let worst = reports.iter().map(|r| r.discrepancy.abs()).fold(0.0, f64::max);
    Ok(format!("levinson: {} channels, max |discrepancy| {worst:.3e} rad", reports.len()))
}

pub fn bound_states(cfg: &ExperimentConfig, out: &Path) -> Result<String, CliError> {
    let channels = cfg.channels.iter().map(|&m| partial(cfg, m)).collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = channels
        .par_iter()
        .map(|u| -> Result<_, Error> {
            let spectrum = count_bound_states_with(u, &cfg.levinson.bound)?;
            let nodes = (0..spectrum.count())
                .map(|i| bound_state(u, i).map(|s| s.node_count()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((spectrum, nodes))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&cfg.hash, "m,index,energy,kappa,nodes");
    table.comment(format!("R = {}; energies in 1/length^2", num(cfg.range)));
    let mut total = 0;
    for (spectrum, nodes) in &results {
        let m = spectrum.channel.m();
        if spectrum.near_threshold {
            eprintln!("warning: m = {m}: a state lies near threshold");
        }
        for (i, (&e, &n)) in spectrum.energies.iter().zip(nodes).enumerate() {
            table.row(&[m.to_string(), i.to_string(), num(e), num((-e).sqrt()), n.to_string()]);
        }
        total += spectrum.count();
    }
    table.write(out, "bound_states.csv")?;
    Ok(format!("bound-states: {total} states in {} channels", results.len()))
}

pub fn darboux(cfg: &ExperimentConfig, out: &Path, o: Overrides) -> Result<String, CliError> {
    let m = match (cfg.darboux_channel, cfg.channels.as_slice()) {
        (Some(m), _) => m,
        (None, [m]) => *m,
        _ => return Err(CliError::Config("darboux.channel: required when several channels are listed".into())),
    };
    let u = partial(cfg, m)?;
    let psi0 = ground_state(&u)?;
    let partner = darboux_partner(&u, &psi0)?;
    let (before, after) = rayon::join(|| levinson_audit(&u, &cfg.levinson), || levinson_audit(&partner.partial, &cfg.levinson));
    let (before, after) = (before?, after?);

    let range = cfg.range;
    let Some(Term::Tabulated(correction)) = partner.partial.potential().terms().last() else {
        unreachable!("partner ends with its tabulated correction")
    };
    let tail = partner.partial.potential().tail_strength();
    let mut table = Table::new(&cfg.hash, "rho,u_tilde,rho2_v");
    table
        .comment(format!("partner of channel m = {m} after removing E0 = {} (1/length^2)", num(partner.removed_energy)))
        .comment(format!(
            "core index: |nu| + 1 = {}, fitted {}",
            num(partner.nu_tilde_analytic),
            num(partner.nu_tilde_measured)
        ))
        .comment("rho in units of R, u_tilde in units of 1/R^2, rho2_v = rho^2 u_tilde - m^2")
        .comment(format!("reload as [[term]] kind = \"tabulated\", file = \"partner_potential.csv\", tail = {}", num(tail)));
    let mut previous = None;
    for (r, _) in correction.samples() {
        let side = if previous == Some(r) { Side::Right } else { Side::Left };
        previous = Some(r);
        let rho2u = partner.partial.rho2u(r, side);
        let x = r / range;
        table.row(&[num(x), num(rho2u / (x * x)), num(rho2u - f64::from(m * m))]);
    }
    table.write(out, "partner_potential.csv")?;

    let mut report = Table::new(&cfg.hash, &format!("stage,{LEVINSON_HEADER}"));
    report.comment(format!("tolerance {} rad", num(o.tolerance.unwrap_or(cfg.levinson_tolerance))));
    for (stage, r) in [("original", &before), ("partner", &after)] {
        let mut cells = vec![stage.to_string()];
        cells.extend(levinson_cells(r));
        report.row(&cells);
    }
    report.write(out, "darboux.csv")?;
    let mut levels = Table::new(&cfg.hash, "stage,index,energy");
    for (stage, r) in [("original", &before), ("partner", &after)] {
        for (i, e) in r.energies.iter().enumerate() {
            levels.row(&[stage.to_string(), i.to_string(), num(*e)]);
        }
    }
    levels.write(out, "darboux_levels.csv")?;

    let tol = o.tolerance.unwrap_or(cfg.levinson_tolerance);
    let (failures, warnings) = judge(&[("original ", &before), ("partner ", &after)], tol);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if !failures.is_empty() {
        return Err(CliError::Failed(failures.join("\n")));
    }
    Ok(format!(
        "darboux: m = {m}, N_b {} -> {}, nu {:.6} -> {:.6}",
        before.n_bound,
        after.n_bound,
        before.channel.nu(),
        after.channel.nu()
    ))
}

pub fn cross_section(cfg: &ExperimentConfig, out: &Path, o: Overrides) -> Result<String, CliError> {
    let ks = cfg
        .cross_section_k
        .as_ref()
        .ok_or_else(|| CliError::Config("cross_section.k: a [cross_section] table is required".into()))?;
    if let Some(m) = o.m_max {
        if m < 0 {
            return Err(CliError::Config(format!("--mmax: must be >= 0, got {m}")));
        }
    }
    let potential = Arc::new(cfg.potential.clone());
    make_partial_shared(Arc::clone(&potential), 0).map_err(|e| CliError::Config(format!("term: {e}")))?;
    let mut partials = Table::new(&cfg.hash, "k,m,delta_rad,sigma_m");
    let mut lines = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let m_max = o.m_max.unwrap_or_else(|| default_m_max(k, cfg.range));
        let waves = partial_wave_phases(&potential, k, m_max, &cfg.phase)?;
        let set = match cross_sections(&waves, Some(cfg.truncation_cutoff)) {
            Err(Error::TruncationNotConverged { m_max, last_term }) => {
                eprintln!("warning: k = {k}: partial-wave sum truncated at m_max = {m_max}, last term {last_term:.3e}");
                cross_sections(&waves, None)?
            }
            r => r?,
        };
        for (&m, &d) in &waves.deltas {
            partials.row(&[num(k), m.to_string(), num(d), num(set.partial[&m])]);
        }
        let mut table = Table::new(&cfg.hash, "chi,abs_f_squared");
        table
            .comment(format!("k = {} (1/length), m_max = {m_max}", num(k)))
            .comment(format!("total cross section {}", num(set.total)))
            .comment(format!("integral of |F|^2 {}", num(set.integrated)))
            .comment(format!("sum-rule residual {:.3e}", set.sum_rule_residual()));
        for (chi, f) in set.chi.iter().zip(&set.amplitude) {
            table.row(&[num(*chi), num(f.norm_sqr())]);
        }
        table.write(out, &format!("cross_section_{i}.csv"))?;
        lines.push(format!(
            "k = {k}: total {:.9e}, integral of |F|^2 {:.9e}, sum-rule residual {:.3e}",
            set.total,
            set.integrated,
            set.sum_rule_residual()
        ));
    }
    partials.write(out, "partial_cross_sections.csv")?;
    Ok(format!("cross-section:\n  {}", lines.join("\n  ")))
}
