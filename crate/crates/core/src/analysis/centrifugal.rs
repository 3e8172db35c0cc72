//! Closed forms for the centrifugal model `U = ν²/ρ²` (ρ < R), `μ²/ρ²` (ρ ≥ R).

use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::gamma::gamma;

use crate::cylfun::{cylinder, CylOrder};
use crate::error::{Error, Result};
use crate::solver::principal;

fn check_indices(nu: f64, mu: f64) -> Result<()> {
    if !(nu.is_finite() && nu >= 0.0 && mu.is_finite() && mu >= 0.0) {
        return Err(Error::Domain(format!("indices must be finite and >= 0 (nu={nu}, mu={mu})")));
    }
    Ok(())
}

/// `δ = (|m| - |μ|)π/2 - arctan σ̃` with the principal arctangent, where
/// `σ̃ = [J'_ν J_μ - J'_μ J_ν] / [J_ν Y'_μ - J'_ν Y_μ]` at `x = kR`.
pub fn centrifugal_phase_exact(nu: f64, mu: f64, m: i32, kr: f64) -> Result<f64> {
    check_indices(nu, mu)?;
    if !(kr > 0.0 && kr.is_finite()) {
        return Err(Error::Domain(format!("kR must be positive, got {kr}")));
    }
    let a = cylinder(CylOrder::new(nu)?, kr)?;
    let b = cylinder(CylOrder::new(mu)?, kr)?;
    let num = a.jp * b.j - b.jp * a.j;
    let den = a.j * b.yp - a.jp * b.y;
    let offset = (f64::from(m.abs()) - mu) * FRAC_PI_2;
    Ok(offset - principal(num.atan2(den)))
}

/// Exact phase on an ascending `kR` grid, made continuous by stepping
/// upward from the smallest `kR` (where the principal branch is the
/// threshold branch).
pub fn centrifugal_phase_curve(nu: f64, mu: f64, m: i32, krs: &[f64]) -> Result<Vec<f64>> {
    if krs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("kR grid must be strictly ascending".into()));
    }
    let mut out: Vec<f64> = Vec::with_capacity(krs.len());
    for &x in krs {
        let d = centrifugal_phase_exact(nu, mu, m, x)?;
        let d = match out.last() {
            Some(&prev) => d + PI * ((prev - d) / PI).round(),
            None => d,
        };
        out.push(d);
    }
    Ok(out)
}

/// `A_m` in `δ ≈ (|m| - |μ|)π/2 + A_m (kR/2)^{2|μ|}` for `kR → 0`,
/// obtained by expanding the exact phase:
/// `A_m = π|μ|/Γ(|μ|+1)² · (|μ| - |ν|)/(|μ| + |ν|)`.
pub fn centrifugal_small_kr_coefficient(nu: f64, mu: f64) -> Result<f64> {
    check_indices(nu, mu)?;
    if mu == 0.0 {
        return Err(Error::Domain("no power-law threshold branch for |mu| = 0".into()));
    }
    let g = gamma(mu + 1.0);
    Ok(PI * mu / (g * g) * (mu - nu) / (mu + nu))
}

/// Small-`kR` asymptote of the exact phase.
pub fn centrifugal_small_kr_phase(nu: f64, mu: f64, m: i32, kr: f64) -> Result<f64> {
    let a = centrifugal_small_kr_coefficient(nu, mu)?;
    Ok((f64::from(m.abs()) - mu) * FRAC_PI_2 + a * (kr / 2.0).powf(2.0 * mu))
}

/// Large-`kR` asymptote `(|m| - |ν|)π/2 - (μ² - ν²)/(2kR)`.
pub fn centrifugal_large_kr_phase(nu: f64, mu: f64, m: i32, kr: f64) -> Result<f64> {
    check_indices(nu, mu)?;
    Ok((f64::from(m.abs()) - nu) * FRAC_PI_2 - (mu * mu - nu * nu) / (2.0 * kr))
}

/// `δ(0) - δ(∞) = π(|ν| - |μ|)/2`.
pub fn centrifugal_levinson(nu: f64, mu: f64, _m: i32) -> f64 {
    PI * (nu - mu) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_indices_give_constant_phase() {
        for &x in &[0.01, 1.0, 37.0] {
            let d = centrifugal_phase_exact(1.5, 1.5, 1, x).unwrap();
            assert!((d - (1.0 - 1.5) * FRAC_PI_2).abs() < 1e-12, "{x}: {d}");
        }
    }

    #[test]
    fn levinson_values() {
        assert_eq!(centrifugal_levinson(1.0, 1.0, 1), 0.0);
        assert!((centrifugal_levinson(2.0, 1.0, 1) - FRAC_PI_2).abs() < 1e-15);
        assert!((centrifugal_levinson(0.5, 1.7, 0) + 0.6 * PI).abs() < 1e-15);
    }

    #[test]
    fn curve_runs_between_limits() {
        let krs: Vec<f64> = (0..400).map(|i| 1e-3 * 1.04f64.powi(i)).collect();
        let c = centrifugal_phase_curve(2.0, 1.0, 1, &krs).unwrap();
        assert!(c[0].abs() < 1e-5);
        assert!((c.last().unwrap() + FRAC_PI_2).abs() < 0.01);
    }

    #[test]
    fn small_kr_coefficient_is_refused_at_mu_zero() {
        assert!(centrifugal_small_kr_coefficient(1.0, 0.0).is_err());
        assert!((centrifugal_small_kr_coefficient(2.0, 1.0).unwrap() + PI / 3.0).abs() < 1e-14);
    }
}
