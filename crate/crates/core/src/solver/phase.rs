use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::wkb_phase;
use crate::cylfun::{cylinder, CylOrder};
use crate::error::{Error, Result};
use crate::potential::{Channel, PartialPotential, Side};

use super::grid::{GridOptions, RadialGrid};
use super::numerov::{integrate_radial, RadialSolution};

/// Controls for phase-shift extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    pub grid: GridOptions,
    /// Largest allowed change (mod π) between the phases matched at
    /// `rho_match` and `1.5·rho_match`.
    pub match_tolerance: f64,
    /// Required closeness of `ρ²U` to `μ²` at the matching radius,
    /// relative to `max(μ², 1)`.
    pub tail_tolerance: f64,
    /// Preferred closeness; the matching radius is pushed out (at most 8×)
    /// while the tail is further from `μ²` than this.
    pub tail_preference: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            grid: GridOptions::default(),
            match_tolerance: 1e-4,
            tail_tolerance: 1e-2,
            tail_preference: 1e-9,
        }
    }
}

/// Reduces an angle to `(-π/2, π/2]`.
pub fn principal(x: f64) -> f64 {
    let mut y = x - PI * (x / PI).round();
    if y <= -FRAC_PI_2 {
        y += PI;
    } else if y > FRAC_PI_2 {
        y -= PI;
    }
    y
}

/// Phase shift at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShift {
    pub k: f64,
    /// `δ̃_μ + (|m| - |μ|)π/2` with `δ̃_μ` principal.
    pub delta: f64,
    /// `δ̃_μ` in `(-π/2, π/2]`.
    pub delta_tilde: f64,
    pub rho_match: f64,
}

fn tail_deviation(u: &PartialPotential, rho: f64) -> f64 {
    let mu = u.channel().mu();
    (u.rho2u(rho, Side::Right) - mu * mu).abs() / (mu * mu).max(1.0)
}

/// Matching radius for wavenumber `k`: at least `10R` and `10·max(1,|μ|)/k`,
/// then pushed out until the potential has reached its inverse-square tail.
pub fn matching_radius(u: &PartialPotential, k: f64, opts: &PhaseOptions) -> Result<f64> {
    let mu = u.channel().mu();
    let base = (10.0 * u.range()).max(10.0 * mu.max(1.0) / k);
    let mut rho = base;
    while tail_deviation(u, rho) > opts.tail_preference && rho < 8.0 * base {
        rho *= 2.0;
    }
    while tail_deviation(u, rho) > opts.tail_tolerance {
        if rho > 1e3 * base {
            return Err(Error::TailNotAsymptotic { rho_match: rho, deviation: tail_deviation(u, rho) });
        }
        rho *= 2.0;
    }
    Ok(rho)
}

/// `δ̃_μ` from the solution at node `i`.
fn matched_phase(sol: &RadialSolution, mu: f64, k: f64, i: usize) -> Result<f64> {
    let rho = sol.grid().rho()[i];
    let psi = sol.psi(i);
    let dpsi = sol.log_derivative(i, Side::Right) * psi;
    let c = cylinder(CylOrder::new(mu)?, k * rho)?;
    let num = dpsi * c.j - k * c.jp * psi;
    let den = k * c.yp * psi - dpsi * c.y;
    Ok(principal((-num).atan2(den)))
}

/// Phase shift from a regular solution, matched to `J_μ`, `Y_μ` at `rho_match`.
pub fn extract_phase(
    u: &PartialPotential,
    sol: &RadialSolution,
    k: f64,
    rho_match: f64,
    opts: &PhaseOptions,
) -> Result<PhaseShift> {
    let ch = u.channel();
    let mu = ch.mu();
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    if k * rho_match < 10.0 * mu.max(1.0) * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "k*rho_match = {} below 10*max(1,|mu|)",
            k * rho_match
        )));
    }
    let dev = tail_deviation(u, rho_match);
    if dev > opts.tail_tolerance {
        return Err(Error::TailNotAsymptotic { rho_match, deviation: dev });
    }
    let grid = sol.grid();
    let n = grid.len();
    let i1 = grid.index_at_or_after(rho_match).filter(|&i| i + 2 < n);
    let i2 = grid.index_at_or_after(1.5 * rho_match).filter(|&i| i + 2 < n);
    let (i1, i2) = match (i1, i2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Domain(format!("grid ends before 1.5*rho_match = {}", 1.5 * rho_match))),
    };
    let d1 = matched_phase(sol, mu, k, i1)?;
    let d2 = matched_phase(sol, mu, k, i2)?;
    let difference = principal(d2 - d1).abs();
    if difference > opts.match_tolerance {
        return Err(Error::MatchUnstable { difference });
    }
    Ok(PhaseShift {
        k,
        delta: d1 + (ch.abs_m() - mu) * FRAC_PI_2,
        delta_tilde: d1,
        rho_match: grid.rho()[i1],
    })
}

/// Builds the grid, integrates and extracts `δ_m(k)`.
pub fn scattering_phase(u: &PartialPotential, k: f64, opts: &PhaseOptions) -> Result<PhaseShift> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    let rho_match = matching_radius(u, k, opts)?;
    let scale = u.range().max(1.0 / k);
    let grid = Arc::new(RadialGrid::build(u, k * k, 2.0 * rho_match, scale, &opts.grid)?);
    let sol = integrate_radial(u, k * k, &grid)?;
    extract_phase(u, &sol, k, rho_match, opts)
}

/// How the overall multiple of π of a phase curve was fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnchorRule {
    /// Eikonal estimate at the largest wavenumber.
    Eikonal,
    /// Short-wavelength limit `π(|m| - |ν|)/2`, used when the eikonal
    /// integral is not available.
    ShortWavelengthLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub rule: AnchorRule,
    pub k: f64,
    pub reference: f64,
}

/// Unwrapped `δ_m(k)` on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftCurve {
    pub channel: Channel,
    pub k: Vec<f64>,
    pub delta: Vec<f64>,
    pub anchor: Anchor,
}

impl PhaseShiftCurve {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Value at an exact grid wavenumber.
    pub fn at(&self, k: f64) -> Option<f64> {
        self.k.iter().position(|&x| x == k).map(|i| self.delta[i])
    }
}

/// Largest jump between neighbours accepted by [`phase_curve`].
const MAX_JUMP: f64 = PI / 3.0;
/// Jumps above this are bisected by [`phase_curve_adaptive`].
const REFINE_JUMP: f64 = PI / 8.0;

fn check_grid(ks: &[f64]) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::Domain("empty wavenumber grid".into()));
    }
    if ks.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(Error::Domain("wavenumbers must be positive and finite".into()));
    }
    if ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("wavenumber grid must be strictly ascending".into()));
    }
    Ok(())
}

fn raw_phases(u: &PartialPotential, ks: &[f64], opts: &PhaseOptions) -> Result<Vec<f64>> {
    ks.par_iter()
        .map(|&k| scattering_phase(u, k, opts).map(|p| p.delta))
        .collect()
}

fn anchor_for(u: &PartialPotential, k: f64) -> Anchor {
    match wkb_phase(u, k) {
        Ok(reference) => Anchor { rule: AnchorRule::Eikonal, k, reference },
        Err(_) => {
            let ch = u.channel();
            Anchor {
                rule: AnchorRule::ShortWavelengthLimit,
                k,
                reference: (ch.abs_m() - ch.nu()) * FRAC_PI_2,
            }
        }
    }
}

fn nearest_branch(raw: f64, target: f64) -> f64 {
    raw + PI * ((target - raw) / PI).round()
}

fn unwrap(ks: &[f64], raw: &[f64], anchor: &Anchor, max_jump: f64) -> Result<Vec<f64>> {
    let n = raw.len();
    let mut out = vec![0.0; n];
    out[n - 1] = nearest_branch(raw[n - 1], anchor.reference);
    for i in (0..n - 1).rev() {
        out[i] = nearest_branch(raw[i], out[i + 1]);
        if (out[i] - out[i + 1]).abs() > max_jump {
            return Err(Error::UnwrapAmbiguous { k_lo: ks[i], k_hi: ks[i + 1] });
        }
    }
    Ok(out)
}

/// Phase shifts on the given grid, unwrapped downward from an eikonal anchor
/// at the largest wavenumber.
pub fn phase_curve(u: &PartialPotential, ks: &[f64], opts: &PhaseOptions) -> Result<PhaseShiftCurve> {
    check_grid(ks)?;
    let raw = raw_phases(u, ks, opts)?;
    let anchor = anchor_for(u, *ks.last().unwrap());
    let delta = unwrap(ks, &raw, &anchor, MAX_JUMP)?;
    Ok(PhaseShiftCurve { channel: u.channel(), k: ks.to_vec(), delta, anchor })
}

/// Like [`phase_curve`] but inserts geometric midpoints wherever neighbouring
/// phases differ by more than π/8, up to `max_depth` rounds.
pub fn phase_curve_adaptive(
    u: &PartialPotential,
    ks: &[f64],
    opts: &PhaseOptions,
    max_depth: usize,
) -> Result<PhaseShiftCurve> {
    check_grid(ks)?;
    let mut k = ks.to_vec();
    let mut raw = raw_phases(u, &k, opts)?;
    for _ in 0..max_depth {
        let mut fresh = Vec::new();
        for i in 0..k.len() - 1 {
            if principal(raw[i + 1] - raw[i]).abs() > REFINE_JUMP {
                fresh.push((k[i] * k[i + 1]).sqrt());
            }
        }
        if fresh.is_empty() {
            break;
        }
        let extra = raw_phases(u, &fresh, opts)?;
        let mut merged: Vec<(f64, f64)> = k.iter().copied().zip(raw.iter().copied()).collect();
        merged.extend(fresh.into_iter().zip(extra));
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        k = merged.iter().map(|p| p.0).collect();
        raw = merged.iter().map(|p| p.1).collect();
    }
    let anchor = anchor_for(u, *k.last().unwrap());
    let delta = unwrap(&k, &raw, &anchor, MAX_JUMP)?;
    Ok(PhaseShiftCurve { channel: u.channel(), k, delta, anchor })
}
