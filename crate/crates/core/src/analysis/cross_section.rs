//! Partial-wave sum for the amplitude `F(χ)` and the cross sections.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::{make_partial_shared, RadialPotential};
use crate::solver::{scattering_phase, PhaseOptions};

/// Phases `δ_m` for `|m| ≤ m_max` at one wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialWaves {
    pub k: f64,
    pub deltas: BTreeMap<i32, f64>,
}

impl PartialWaves {
    pub fn new(k: f64, deltas: BTreeMap<i32, f64>) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("k must be positive, got {k}")));
        }
        Ok(Self { k, deltas })
    }

    /// Largest `|m|` present.
    pub fn m_max(&self) -> i32 {
        self.deltas.keys().map(|m| m.abs()).max().unwrap_or(0)
    }
}

/// `⌈3kR⌉ + 8`.
pub fn default_m_max(k: f64, range: f64) -> i32 {
    (3.0 * k * range).ceil() as i32 + 8
}

/// Solves every channel `0 ≤ m ≤ m_max` (in parallel) and mirrors to `-m`;
/// the potential itself does not depend on the sign of `m`.
pub fn partial_wave_phases(
    potential: &Arc<RadialPotential>,
    k: f64,
    m_max: i32,
    opts: &PhaseOptions,
) -> Result<PartialWaves> {
    if m_max < 0 {
        return Err(Error::Domain(format!("m_max must be >= 0, got {m_max}")));
    }
    let phases: Vec<(i32, f64)> = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let u = make_partial_shared(Arc::clone(potential), m)?;
            Ok((m, scattering_phase(&u, k, opts)?.delta))
        })
        .collect::<Result<_>>()?;
    let mut deltas = BTreeMap::new();
    for (m, d) in phases {
        deltas.insert(m, d);
        deltas.insert(-m, d);
    }
    PartialWaves::new(k, deltas)
}

/// Largest `|e^{2iδ} - 1| = 2|sin δ|` among the outermost channels.
fn last_term(waves: &PartialWaves) -> f64 {
    let m = waves.m_max();
    [m, -m]
        .iter()
        .filter_map(|j| waves.deltas.get(j))
        .map(|d| 2.0 * d.sin().abs())
        .fold(0.0, f64::max)
}

fn check_truncation(waves: &PartialWaves, cutoff: Option<f64>) -> Result<()> {
    if let Some(c) = cutoff {
        let last = last_term(waves);
        if !(last < c) {
            return Err(Error::TruncationNotConverged { m_max: waves.m_max(), last_term: last });
        }
    }
    Ok(())
}

/// `F(χ) = e^{-iπ/4}/√(2πk) Σ_m (e^{2iδ_m} - 1) e^{imχ}`.
///
/// With `cutoff = Some(c)` the outermost retained term must be below `c`.
pub fn scattering_amplitude(waves: &PartialWaves, chi: &[f64], cutoff: Option<f64>) -> Result<Vec<Complex64>> {
    check_truncation(waves, cutoff)?;
    let pre = Complex64::from_polar(1.0 / (2.0 * PI * waves.k).sqrt(), -FRAC_PI_4);
    let terms: Vec<(f64, Complex64)> = waves
        .deltas
        .iter()
        .map(|(&m, &d)| (f64::from(m), Complex64::from_polar(1.0, 2.0 * d) - 1.0))
        .collect();
    Ok(chi
        .iter()
        .map(|&x| pre * terms.iter().map(|&(m, t)| t * Complex64::from_polar(1.0, m * x)).sum::<Complex64>())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionSet {
    pub k: f64,
    /// `ϱ_m = (4/k) sin²δ_m`.
    pub partial: BTreeMap<i32, f64>,
    pub total: f64,
    pub chi: Vec<f64>,
    pub amplitude: Vec<Complex64>,
    /// `∫₀^{2π} |F|² dχ` by the periodic trapezoid rule on `chi`.
    pub integrated: f64,
}

impl CrossSectionSet {
    /// `|∫|F|² - ϱ| / ϱ` (absolute when `ϱ = 0`).
    pub fn sum_rule_residual(&self) -> f64 {
        let d = (self.integrated - self.total).abs();
        if self.total > 0.0 {
            d / self.total
        } else {
            d
        }
    }
}

/// Cross sections and amplitude samples on a uniform `χ` grid of
/// `4·m_max + 4` points, enough for the trapezoid rule to integrate
/// `|F|²` exactly.
pub fn cross_sections(waves: &PartialWaves, cutoff: Option<f64>) -> Result<CrossSectionSet> {
    check_truncation(waves, cutoff)?;
    let k = waves.k;
    let partial: BTreeMap<i32, f64> = waves.deltas.iter().map(|(&m, &d)| (m, 4.0 / k * d.sin().powi(2))).collect();
    let total = partial.values().sum();
    let n = 4 * waves.m_max() as usize + 4;
    let h = 2.0 * PI / n as f64;
    let chi: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let amplitude = scattering_amplitude(waves, &chi, None)?;
    let integrated = h * amplitude.iter().map(|f| f.norm_sqr()).sum::<f64>();
    Ok(CrossSectionSet { k, partial, total, chi, amplitude, integrated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn waves(k: f64, d: &[(i32, f64)]) -> PartialWaves {
        PartialWaves::new(k, d.iter().copied().collect()).unwrap()
    }

    #[test]
    fn zero_phases_give_nothing() {
        let w = waves(2.0, &[(-1, 0.0), (0, 0.0), (1, 0.0)]);
        let s = cross_sections(&w, Some(1e-6)).unwrap();
        assert_eq!(s.total, 0.0);
        assert!(s.amplitude.iter().all(|f| f.norm() == 0.0));
    }

    #[test]
    fn unitary_s_wave() {
        let w = waves(1.0, &[(0, FRAC_PI_2)]);
        let s = cross_sections(&w, None).unwrap();
        assert!((s.total - 4.0).abs() < 1e-15);
        let f0 = s.amplitude[0].norm_sqr();
        assert!(s.amplitude.iter().all(|f| (f.norm_sqr() - f0).abs() < 1e-15));
        assert!(s.sum_rule_residual() < 1e-14);
    }

    #[test]
    fn sum_rule_for_arbitrary_phases() {
        let d: Vec<(i32, f64)> = (-6..=6).map(|m| (m, 0.3 * (m as f64).cos() + 0.1 * m as f64)).collect();
        let s = cross_sections(&waves(3.0, &d), None).unwrap();
        assert!(s.sum_rule_residual() < 1e-13);
    }

    #[test]
    fn truncation_is_enforced() {
        let w = waves(1.0, &[(-1, 0.2), (0, 0.5), (1, 0.2)]);
        assert!(matches!(
            scattering_amplitude(&w, &[0.0], Some(1e-3)),
            Err(Error::TruncationNotConverged { m_max: 1, .. })
        ));
    }

    #[test]
    fn default_cutoff() {
        assert_eq!(default_m_max(5.0, 1.0), 23);
        assert_eq!(default_m_max(0.5, 1.0), 10);
    }
}
