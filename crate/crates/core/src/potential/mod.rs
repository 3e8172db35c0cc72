//! Radial potentials, partial potentials and the Darboux transformation.
//!
//! Units: the Schrödinger equation reads `-∇²ψ + Vψ = Eψ`, so energies are
//! inverse squared lengths.

mod darboux;
mod tabulated;

pub use darboux::{
    apply_lowering, apply_raising, darboux_partner, superpotential, DarbouxPartner, GridFunction, Superpotential,
};
pub use crate::solver::BoundStateFunction;
pub use tabulated::Tabulated;

use std::sync::Arc;

use crate::error::{Error, Result};

/// Which one-sided limit to take when evaluating exactly on a jump radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Support of an inverse-square term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Everywhere,
    /// `ρ < r`
    Inside(f64),
    /// `ρ ≥ r`
    Outside(f64),
}

impl Region {
    fn contains(&self, rho: f64, side: Side) -> bool {
        match *self {
            Region::Everywhere => true,
            Region::Inside(r) => rho < r || (rho == r && side == Side::Left),
            Region::Outside(r) => rho > r || (rho == r && side == Side::Right),
        }
    }
}

/// Primitive building block of a [`RadialPotential`].
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    /// `β/ρ²` on a region.
    InverseSquare { beta: f64, region: Region },
    /// `-V₀` for `ρ < radius`.
    Well { depth: f64, radius: f64 },
    /// `β e^{-ρ/a} / ρ²`
    ScreenedCore { beta: f64, length: f64 },
    /// `β e^{-(ρ/a)²} / ρ²`
    GaussianCore { beta: f64, length: f64 },
    /// Samples of `V` with cubic interpolation of `ρ²V` in `ln ρ`.
    Tabulated(Tabulated),
}

impl Term {
    fn rho2v(&self, rho: f64, side: Side) -> f64 {
        match self {
            Term::InverseSquare { beta, region } => {
                if region.contains(rho, side) {
                    *beta
                } else {
                    0.0
                }
            }
            Term::Well { depth, radius } => {
                if Region::Inside(*radius).contains(rho, side) {
                    -depth * rho * rho
                } else {
                    0.0
                }
            }
            Term::ScreenedCore { beta, length } => beta * (-rho / length).exp(),
            Term::GaussianCore { beta, length } => {
                let t = rho / length;
                beta * (-t * t).exp()
            }
            Term::Tabulated(t) => t.rho2v(rho, side),
        }
    }

    fn core(&self) -> f64 {
        match self {
            Term::InverseSquare { beta, region } => match region {
                Region::Outside(_) => 0.0,
                _ => *beta,
            },
            Term::Well { .. } => 0.0,
            Term::ScreenedCore { beta, .. } | Term::GaussianCore { beta, .. } => *beta,
            Term::Tabulated(t) => t.first_value(),
        }
    }

    fn tail(&self) -> f64 {
        match self {
            Term::InverseSquare { beta, region } => match region {
                Region::Inside(_) => 0.0,
                _ => *beta,
            },
            Term::Tabulated(t) => t.last_value(),
            _ => 0.0,
        }
    }

    fn jumps(&self, out: &mut Vec<f64>) {
        match self {
            Term::InverseSquare { region: Region::Inside(r) | Region::Outside(r), .. } => out.push(*r),
            Term::Well { radius, .. } => out.push(*radius),
            Term::Tabulated(t) => out.extend(t.jumps()),
            _ => {}
        }
    }

    /// Radius beyond which `ρ²V` equals its tail value to working precision.
    fn settled_radius(&self) -> f64 {
        match self {
            Term::InverseSquare { region, .. } => match region {
                Region::Everywhere => 0.0,
                Region::Inside(r) | Region::Outside(r) => *r,
            },
            Term::Well { radius, .. } => *radius,
            Term::ScreenedCore { beta, length } => {
                length * (beta.abs() / f64::EPSILON).max(1.0).ln()
            }
            Term::GaussianCore { beta, length } => {
                length * (beta.abs() / f64::EPSILON).max(1.0).ln().sqrt()
            }
            Term::Tabulated(t) => t.last_knot(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidPotential(what.to_string()));
        match self {
            Term::InverseSquare { beta, region } => {
                if !beta.is_finite() {
                    return bad("inverse-square strength must be finite");
                }
                match region {
                    Region::Inside(r) | Region::Outside(r) if !(r.is_finite() && *r > 0.0) => {
                        bad("window radius must be positive")
                    }
                    _ => Ok(()),
                }
            }
            Term::Well { depth, radius } => {
                if !depth.is_finite() || !(radius.is_finite() && *radius > 0.0) {
                    bad("well needs finite depth and positive radius")
                } else {
                    Ok(())
                }
            }
            Term::ScreenedCore { beta, length } | Term::GaussianCore { beta, length } => {
                if !beta.is_finite() || !(length.is_finite() && *length > 0.0) {
                    bad("screened core needs finite strength and positive length")
                } else {
                    Ok(())
                }
            }
            Term::Tabulated(_) => Ok(()),
        }
    }
}

/// A central potential `V(ρ)` built from primitive terms.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPotential {
    terms: Vec<Term>,
    range: f64,
    core_strength: f64,
    tail_strength: f64,
    jumps: Vec<f64>,
}

impl RadialPotential {
    /// `range` is the length scale `R` used for grids and limit checks.
    pub fn new(terms: Vec<Term>, range: f64) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::InvalidPotential(format!("range must be positive, got {range}")));
        }
        for t in &terms {
            t.validate()?;
        }
        let core_strength = terms.iter().map(Term::core).sum();
        let tail_strength = terms.iter().map(Term::tail).sum();
        let mut jumps = Vec::new();
        for t in &terms {
            t.jumps(&mut jumps);
        }
        jumps.sort_by(f64::total_cmp);
        jumps.dedup();
        Ok(Self { terms, range, core_strength, tail_strength, jumps })
    }

    pub fn zero(range: f64) -> Result<Self> {
        Self::new(Vec::new(), range)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    /// `β₀ = lim ρ²V` at the origin.
    pub fn core_strength(&self) -> f64 {
        self.core_strength
    }

    /// `β∞ = lim ρ²V` at infinity.
    pub fn tail_strength(&self) -> f64 {
        self.tail_strength
    }

    /// Radii where `V` is discontinuous, ascending.
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// `ρ²V(ρ)`, with the one-sided limit `side` on jump radii.
    pub fn rho2v(&self, rho: f64, side: Side) -> f64 {
        self.terms.iter().map(|t| t.rho2v(rho, side)).sum()
    }

    /// `V(ρ)`; on a jump radius the outer value is returned.
    pub fn value(&self, rho: f64) -> f64 {
        self.rho2v(rho, Side::Right) / (rho * rho)
    }

    /// Radius beyond which `ρ²V` has reached `β∞`.
    pub fn settled_radius(&self) -> f64 {
        self.terms.iter().map(Term::settled_radius).fold(self.range, f64::max)
    }

    /// Numerically measured `(ρ²V` near the origin, `ρ²V` far out`)`.
    pub fn measured_limits(&self) -> (f64, f64) {
        let near = self.rho2v(1e-8 * self.range, Side::Right);
        let far = self.rho2v(1e6 * self.settled_radius(), Side::Right);
        (near, far)
    }

    /// Checks the declared strengths against direct evaluation.
    pub fn check_limits(&self, tol: f64) -> Result<()> {
        let (near, far) = self.measured_limits();
        let scale = |b: f64| tol * b.abs().max(1.0);
        if (near - self.core_strength).abs() > scale(self.core_strength) {
            return Err(Error::InvalidPotential(format!(
                "rho^2 V near origin is {near}, declared core strength {}",
                self.core_strength
            )));
        }
        if (far - self.tail_strength).abs() > scale(self.tail_strength) {
            return Err(Error::InvalidPotential(format!(
                "rho^2 V far out is {far}, declared tail strength {}",
                self.tail_strength
            )));
        }
        Ok(())
    }
}

/// Azimuthal number with its singularity indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    m: i32,
    nu: f64,
    mu: f64,
}

impl Channel {
    pub fn new(m: i32, beta0: f64, beta_inf: f64) -> Result<Self> {
        let m2 = f64::from(m) * f64::from(m);
        let core = m2 + beta0;
        if !(core >= 0.0) {
            return Err(Error::OvercriticalCore { value: core });
        }
        let tail = m2 + beta_inf;
        if !(tail >= 0.0) {
            return Err(Error::OvercriticalTail { value: tail });
        }
        let index = |b: f64, v: f64| if b == 0.0 { f64::from(m.abs()) } else { v.sqrt() };
        Ok(Self { m, nu: index(beta0, core), mu: index(beta_inf, tail) })
    }

    /// Channel with the indices given directly.
    pub fn with_indices(m: i32, nu: f64, mu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0 && mu.is_finite() && mu >= 0.0) {
            return Err(Error::Domain(format!("indices must be finite and >= 0 (nu={nu}, mu={mu})")));
        }
        Ok(Self { m, nu, mu })
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn abs_m(&self) -> f64 {
        f64::from(self.m.abs())
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// `U_m(ρ) = V(ρ) + m²/ρ²` for a fixed channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialPotential {
    potential: Arc<RadialPotential>,
    channel: Channel,
}

impl PartialPotential {
    pub fn potential(&self) -> &RadialPotential {
        &self.potential
    }

    pub fn shared_potential(&self) -> Arc<RadialPotential> {
        Arc::clone(&self.potential)
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn range(&self) -> f64 {
        self.potential.range
    }

    pub fn jumps(&self) -> &[f64] {
        &self.potential.jumps
    }

    /// `ρ²U_m(ρ)`.
    pub fn rho2u(&self, rho: f64, side: Side) -> f64 {
        let m = f64::from(self.channel.m);
        self.potential.rho2v(rho, side) + m * m
    }

    /// `U_m(ρ)`; on a jump radius the outer value is returned.
    pub fn value(&self, rho: f64) -> f64 {
        self.rho2u(rho, Side::Right) / (rho * rho)
    }

    /// Same potential in another channel.
    pub fn with_m(&self, m: i32) -> Result<Self> {
        make_partial_shared(Arc::clone(&self.potential), m)
    }
}

pub fn make_partial(potential: RadialPotential, m: i32) -> Result<PartialPotential> {
    make_partial_shared(Arc::new(potential), m)
}

pub fn make_partial_shared(potential: Arc<RadialPotential>, m: i32) -> Result<PartialPotential> {
    let channel = Channel::new(m, potential.core_strength, potential.tail_strength)?;
    Ok(PartialPotential { potential, channel })
}

/// `U = ν²/ρ²` for `ρ < R` and `μ²/ρ²` for `ρ ≥ R`.
pub fn centrifugal_model(nu: f64, mu: f64, m: i32, radius: f64) -> Result<PartialPotential> {
    let channel = Channel::with_indices(m, nu, mu)?;
    let m2 = f64::from(m) * f64::from(m);
    let mut terms = Vec::new();
    if nu * nu != m2 {
        terms.push(Term::InverseSquare { beta: nu * nu - m2, region: Region::Inside(radius) });
    }
    if mu * mu != m2 {
        terms.push(Term::InverseSquare { beta: mu * mu - m2, region: Region::Outside(radius) });
    }
    let potential = Arc::new(RadialPotential::new(terms, radius)?);
    Ok(PartialPotential { potential, channel })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particle_channel() {
        let u = make_partial(RadialPotential::zero(1.0).unwrap(), 2).unwrap();
        assert_eq!(u.channel().nu(), 2.0);
        assert_eq!(u.channel().mu(), 2.0);
        assert_eq!(u.value(0.5), 16.0);
    }

    #[test]
    fn global_inverse_square_shifts_both_indices() {
        let v = RadialPotential::new(
            vec![Term::InverseSquare { beta: 3.0, region: Region::Everywhere }],
            1.0,
        )
        .unwrap();
        let u = make_partial(v, 1).unwrap();
        assert_eq!(u.channel().nu(), 2.0);
        assert_eq!(u.channel().mu(), 2.0);
    }

    #[test]
    fn cored_well_indices() {
        let v = RadialPotential::new(
            vec![
                Term::InverseSquare { beta: 2.25, region: Region::Inside(1.0) },
                Term::Well { depth: 20.0, radius: 1.0 },
            ],
            1.0,
        )
        .unwrap();
        v.check_limits(1e-6).unwrap();
        let u = make_partial(v, 0).unwrap();
        assert_eq!(u.channel().nu(), 1.5);
        assert_eq!(u.channel().mu(), 0.0);
        let (near, far) = u.potential().measured_limits();
        assert!((near - 2.25).abs() < 1e-6 * 2.25);
        assert_eq!(far, 0.0);
    }

    #[test]
    fn overcritical_is_rejected() {
        let v = RadialPotential::new(
            vec![Term::InverseSquare { beta: -2.0, region: Region::Inside(1.0) }],
            1.0,
        )
        .unwrap();
        assert!(matches!(make_partial(v.clone(), 1), Err(Error::OvercriticalCore { .. })));
        assert!(make_partial(v, 2).is_ok());
        let t = RadialPotential::new(
            vec![Term::InverseSquare { beta: -0.5, region: Region::Outside(1.0) }],
            1.0,
        )
        .unwrap();
        assert!(matches!(make_partial(t, 0), Err(Error::OvercriticalTail { .. })));
    }

    #[test]
    fn centrifugal_jump() {
        let u = centrifugal_model(2.0, 1.0, 1, 1.0).unwrap();
        assert_eq!(u.rho2u(1.0, Side::Left), 4.0);
        assert_eq!(u.rho2u(1.0, Side::Right), 1.0);
        assert_eq!(u.value(1.0), 1.0);
        assert_eq!(u.jumps(), &[1.0]);
        let free = centrifugal_model(1.0, 1.0, -1, 1.0).unwrap();
        assert!(free.potential().terms().is_empty());
        let core = centrifugal_model(0.0, 1.0, 0, 2.0).unwrap();
        assert_eq!(core.value(1.0), 0.0);
        assert_eq!(core.value(4.0), 1.0 / 16.0);
    }

    #[test]
    fn screened_cores_settle() {
        let v = RadialPotential::new(vec![Term::ScreenedCore { beta: 2.0, length: 1.0 }], 1.0).unwrap();
        let r = v.settled_radius();
        assert!(v.rho2v(r, Side::Right) < 2.0 * f64::EPSILON * 1.01);
        v.check_limits(1e-6).unwrap();
    }
}
