//! Numerical audit of `δ(0) - δ(∞) = π(N_b + (|ν| - |μ|)/2)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::Result;
use crate::potential::{Channel, PartialPotential};
use crate::solver::{
    count_bound_states_with, phase_curve_adaptive, BoundOptions, BoundStateSpectrum, PhaseOptions,
    PhaseShiftCurve,
};

/// Settings for [`levinson_audit`]; wavenumbers are in units of `1/R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevinsonOptions {
    pub k_min: f64,
    pub k_max: f64,
    /// Log-spaced points between `k_min` and `k_max` before refinement.
    pub points: usize,
    pub refine_depth: usize,
    /// Agreement required between the two threshold extrapolations.
    pub threshold_tolerance: f64,
    pub phase: PhaseOptions,
    pub bound: BoundOptions,
}

impl Default for LevinsonOptions {
    fn default() -> Self {
        Self {
            k_min: 1e-3,
            k_max: 50.0,
            points: 120,
            refine_depth: 12,
            threshold_tolerance: 1e-3,
            phase: PhaseOptions::default(),
            bound: BoundOptions::default(),
        }
    }
}

/// Threshold limit of the phase estimated from three low wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEstimate {
    pub delta_zero: f64,
    /// Difference between the two independent estimates (or the residual
    /// at the third point for the logarithmic law).
    pub spread: f64,
}

/// `δ(k) ≈ δ(0) + c·k^{2|μ|}`: Richardson steps on `(k₁, 2k₁)` and `(2k₁, 4k₁)`.
fn power_law_limit(mu: f64, d: [f64; 3]) -> ThresholdEstimate {
    let f = 2f64.powf(2.0 * mu) - 1.0;
    let a = d[0] - (d[1] - d[0]) / f;
    let b = d[1] - (d[2] - d[1]) / f;
    ThresholdEstimate { delta_zero: a, spread: (a - b).abs() }
}

/// `cot(δ - δ(0)) = (2/π) ln k + c`, i.e. `δ = δ(0) - π/2 - arctan((2/π) ln k + c)`,
/// fitted through the first two points; the third selects between the two
/// roots and measures the fit quality.
fn log_law_limit(ks: [f64; 3], d: [f64; 3]) -> ThresholdEstimate {
    let a = 2.0 / PI;
    let t = ks.map(f64::ln);
    let theta = |c: f64, t: f64| -FRAC_PI_2 - (a * t + c).atan();
    let gap = |c: f64| (a * t[1] + c).atan() - (a * t[0] + c).atan();
    let target = d[0] - d[1];
    let peak = -0.5 * a * (t[0] + t[1]);
    let unstable = ThresholdEstimate { delta_zero: d[0], spread: f64::INFINITY };
    if !(target > 0.0 && target < gap(peak)) {
        return unstable;
    }
    let solve = |mut lo: f64, mut hi: f64, rising: bool| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (gap(mid) < target) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let span = 1e8;
    let roots = [solve(peak - span, peak, true), solve(peak, peak + span, false)];
    roots
        .iter()
        .map(|&c| {
            let d0 = d[0] - theta(c, t[0]);
            ThresholdEstimate { delta_zero: d0, spread: (d0 + theta(c, t[2]) - d[2]).abs() }
        })
        .min_by(|x, y| x.spread.total_cmp(&y.spread))
        .unwrap_or(unstable)
}

pub fn threshold_limit(mu: f64, ks: [f64; 3], d: [f64; 3]) -> ThresholdEstimate {
    if mu > 0.0 {
        power_law_limit(mu, d)
    } else {
        log_law_limit(ks, d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevinsonReport {
    pub channel: Channel,
    pub n_bound: usize,
    pub energies: Vec<f64>,
    /// Extrapolated `δ(0)`.
    pub delta_zero: f64,
    /// `π(|m| - |ν|)/2`.
    pub delta_infinity: f64,
    /// Raw curve value at the largest wavenumber, for comparison.
    pub delta_at_k_max: f64,
    pub predicted_jump: f64,
    pub measured_jump: f64,
    pub discrepancy: f64,
    pub threshold: ThresholdEstimate,
    /// False when a state is near threshold or the threshold extrapolation
    /// is unstable.
    pub noncritical: bool,
    pub curve: PhaseShiftCurve,
}

impl LevinsonReport {
    pub fn discrepancy_over_pi(&self) -> f64 {
        self.discrepancy / PI
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.noncritical && self.discrepancy.abs() <= tolerance
    }
}

/// `π(N_b + (|ν| - |μ|)/2)`.
pub fn predicted_jump(n_bound: usize, nu: f64, mu: f64) -> f64 {
    PI * (n_bound as f64 + (nu - mu) / 2.0)
}

/// Wavenumber grid of the audit: log-spaced, always containing the three
/// threshold points `k_min`, `2k_min`, `4k_min`.
pub fn audit_grid(range: f64, opts: &LevinsonOptions) -> Vec<f64> {
    let lo = opts.k_min / range;
    let hi = opts.k_max / range;
    let n = opts.points.max(4);
    let mut ks: Vec<f64> = (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect();
    ks.extend([2.0 * lo, 4.0 * lo]);
    ks.sort_by(f64::total_cmp);
    ks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * *b);
    ks
}

pub fn levinson_audit(u: &PartialPotential, opts: &LevinsonOptions) -> Result<LevinsonReport> {
    let spectrum = count_bound_states_with(u, &opts.bound)?;
    levinson_audit_with_spectrum(u, &spectrum, opts)
}

pub fn levinson_audit_with_spectrum(
    u: &PartialPotential,
    spectrum: &BoundStateSpectrum,
    opts: &LevinsonOptions,
) -> Result<LevinsonReport> {
    let ch = u.channel();
    let ks = audit_grid(u.range(), opts);
    let curve = phase_curve_adaptive(u, &ks, &opts.phase, opts.refine_depth)?;
    let k1 = opts.k_min / u.range();
    let nearest = |k: f64| {
        (0..curve.k.len())
            .min_by(|&a, &b| (curve.k[a] - k).abs().total_cmp(&(curve.k[b] - k).abs()))
            .unwrap()
    };
    let idx = [k1, 2.0 * k1, 4.0 * k1].map(nearest);
    let threshold = threshold_limit(ch.mu(), idx.map(|i| curve.k[i]), idx.map(|i| curve.delta[i]));

    let n_bound = spectrum.count();
    let delta_infinity = (ch.abs_m() - ch.nu()) * FRAC_PI_2;
    let predicted = predicted_jump(n_bound, ch.nu(), ch.mu());
    let measured = threshold.delta_zero - delta_infinity;
    let noncritical = !spectrum.near_threshold && threshold.spread <= opts.threshold_tolerance;
    Ok(LevinsonReport {
        channel: ch,
        n_bound,
        energies: spectrum.energies.clone(),
        delta_zero: threshold.delta_zero,
        delta_infinity,
        delta_at_k_max: *curve.delta.last().unwrap(),
        predicted_jump: predicted,
        measured_jump: measured,
        discrepancy: measured - predicted,
        threshold,
        noncritical,
        curve,
    })
}
