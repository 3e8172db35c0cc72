//! Short-wavelength (eikonal) asymptotics.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::potential::{PartialPotential, Side};

use super::quadrature::integrate;

const QUAD_TOL: f64 = 1e-12;
const MAX_INTERVALS: usize = 4000;

/// `∫₀^∞ ΔU dρ` with `ΔU = V + (m² - ν²)/ρ² = (ρ²U - ν²)/ρ²`.
///
/// The half-line is split at every jump and at the radius where the
/// potential settles; the `(μ² - ν²)/ρ²` tail beyond that radius is added in
/// closed form and only the remainder is integrated, in `t = ρ_T/ρ`.
pub fn eikonal_integral(u: &PartialPotential) -> Result<f64> {
    let ch = u.channel();
    let nu2 = ch.nu() * ch.nu();
    let mu2 = ch.mu() * ch.mu();
    // differences at the rounding level of ρ²U are treated as exact zeros
    let delta = |rho: f64| {
        let y = u.rho2u(rho, Side::Right);
        let d = y - nu2;
        if d.abs() <= 64.0 * f64::EPSILON * y.abs().max(nu2) {
            0.0
        } else {
            d / (rho * rho)
        }
    };

    let mut breaks = vec![0.0];
    breaks.extend(u.jumps().iter().copied());
    let settled = u.potential().settled_radius().max(u.range());
    breaks.push(settled);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    // ΔU must stay integrable at the origin
    let probe = 1e-12 * breaks[1];
    let edge = probe * delta(probe).abs();
    if !(edge <= 1e-6 * nu2.max(1.0)) {
        return Err(Error::DivergentIntegral(format!(
            "rho*DeltaU = {edge:e} at rho = {probe:e}; the core is not a pure inverse square"
        )));
    }

    let scale = nu2.max(mu2).max(1.0) / u.range();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (v, e) = integrate(delta, w[0], w[1], QUAD_TOL * scale, QUAD_TOL, MAX_INTERVALS);
        if !v.is_finite() || e > 1e-6 * scale.max(v.abs()) {
            return Err(Error::DivergentIntegral(format!("no convergence on [{}, {}]", w[0], w[1])));
        }
        total += v;
    }
    let rt = settled;
    let remainder = |t: f64| {
        let rho = rt / t;
        (u.rho2u(rho, Side::Right) - mu2) / (rho * rho) * rt / (t * t)
    };
    let (v, e) = integrate(remainder, 0.0, 1.0, QUAD_TOL * scale, QUAD_TOL, MAX_INTERVALS);
    if !v.is_finite() || e > 1e-6 * scale.max(v.abs()) {
        return Err(Error::DivergentIntegral("tail does not approach mu^2/rho^2".into()));
    }
    let far = u.rho2u(1e8 * rt, Side::Right);
    if (far - mu2).abs() > 1e-6 * mu2.max(1.0) {
        return Err(Error::DivergentIntegral(format!(
            "rho^2 U tends to {far}, not mu^2 = {mu2}"
        )));
    }
    Ok(total + v + (mu2 - nu2) / rt)
}

/// `δ ≈ π(|m| - |ν|)/2 - (1/2k)∫ΔU dρ`; requires `kR ≥ 5`.
pub fn wkb_phase(u: &PartialPotential, k: f64) -> Result<f64> {
    if !(k * u.range() >= 5.0) {
        return Err(Error::Domain(format!("eikonal phase needs kR >= 5, got {}", k * u.range())));
    }
    let ch = u.channel();
    Ok((ch.abs_m() - ch.nu()) * FRAC_PI_2 - eikonal_integral(u)? / (2.0 * k))
}

/// Threshold value `π(N_b + (|m| - |μ|)/2)` of the semiclassical phase.
pub fn wkb_threshold_phase(n_bound: usize, m: i32, mu: f64) -> f64 {
    PI * (n_bound as f64 + (f64::from(m.abs()) - mu) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{centrifugal_model, make_partial, RadialPotential, Region, Term};

    #[test]
    fn centrifugal_integral_is_the_outer_tail() {
        let u = centrifugal_model(2.0, 1.0, 1, 1.5).unwrap();
        let i = eikonal_integral(&u).unwrap();
        assert!((i - (1.0 - 4.0) / 1.5).abs() < 1e-12, "{i}");
        let k = 20.0;
        let d = wkb_phase(&u, k).unwrap();
        assert!((d - ((1.0 - 2.0) * FRAC_PI_2 - (1.0 - 4.0) / (2.0 * k * 1.5))).abs() < 1e-12);
    }

    #[test]
    fn scale_free_potential_has_constant_phase() {
        let v = RadialPotential::new(vec![Term::InverseSquare { beta: 2.0, region: Region::Everywhere }], 1.0).unwrap();
        let u = make_partial(v, 1).unwrap();
        assert!(eikonal_integral(&u).unwrap().abs() < 1e-14);
    }

    #[test]
    fn well_integral() {
        let v = RadialPotential::new(vec![Term::Well { depth: 7.0, radius: 2.0 }], 2.0).unwrap();
        let u = make_partial(v, 0).unwrap();
        assert!((eikonal_integral(&u).unwrap() + 14.0).abs() < 1e-11);
    }

    #[test]
    fn gaussian_core_integral() {
        // ∫ β (e^{-ρ²} - 1)/ρ² dρ = -β√π
        let v = RadialPotential::new(vec![Term::GaussianCore { beta: 0.75, length: 1.0 }], 1.0).unwrap();
        let u = make_partial(v, 1).unwrap();
        let i = eikonal_integral(&u).unwrap();
        assert!((i + 0.75 * PI.sqrt()).abs() < 1e-10, "{i}");
    }

    #[test]
    fn exponential_core_diverges() {
        let v = RadialPotential::new(vec![Term::ScreenedCore { beta: 1.0, length: 1.0 }], 1.0).unwrap();
        let u = make_partial(v, 0).unwrap();
        assert!(matches!(eikonal_integral(&u), Err(Error::DivergentIntegral(_))));
    }

    #[test]
    fn threshold_values() {
        assert_eq!(wkb_threshold_phase(0, 1, 1.0), 0.0);
        assert!((wkb_threshold_phase(2, 1, 1.5) - PI * 1.75).abs() < 1e-15);
        assert!((wkb_threshold_phase(1, 0, 0.0) - PI).abs() < 1e-15);
    }
}
