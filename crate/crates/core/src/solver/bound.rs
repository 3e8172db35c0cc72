use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::{Channel, PartialPotential, Side};

use super::grid::{GridOptions, RadialGrid};
use super::numerov::{count_sign_changes, integrate_radial, propagate};

/// Controls for the bound-state search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub grid: GridOptions,
    /// Bisection stops once the bracket is this small relative to `|E|`.
    pub relative_tolerance: f64,
    /// Grid extends this many decay lengths `1/κ` past the turning point.
    pub decay_lengths: f64,
    /// Eigenvalues with `|E|·R²` below this are flagged as near threshold.
    pub threshold_margin: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            grid: GridOptions { phase_step: 0.005, ..GridOptions::default() },
            relative_tolerance: 1e-13,
            decay_lengths: 40.0,
            threshold_margin: 1e-6,
        }
    }
}

/// Negative-energy spectrum of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateSpectrum {
    pub channel: Channel,
    /// Ascending, all negative.
    pub energies: Vec<f64>,
    /// Set when an eigenvalue sits within the threshold margin of zero or
    /// the zero-energy solution is close to a half-bound state.
    pub near_threshold: bool,
}

impl BoundStateSpectrum {
    pub fn count(&self) -> usize {
        self.energies.len()
    }
}

/// Node-free or excited bound state tabulated on its own grid.
#[derive(Debug, Clone)]
pub struct BoundStateFunction {
    channel: Channel,
    energy: f64,
    index: usize,
    grid: Arc<RadialGrid>,
    phi: Vec<f64>,
}

impl BoundStateFunction {
    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn kappa(&self) -> f64 {
        (-self.energy).sqrt()
    }

    /// Number of the state in the spectrum, counted from the ground state.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Normalized `u = √ρ·ψ` at node `i`, `∫u²dρ = 1`.
    pub fn u(&self, i: usize) -> f64 {
        self.grid.jacobian(i).sqrt() * self.phi[i]
    }

    pub fn psi(&self, i: usize) -> f64 {
        let r = self.grid.rho()[i];
        let b = self.grid.scale();
        (b / (b + r)).sqrt() * self.phi[i]
    }

    pub fn psi_values(&self) -> Vec<f64> {
        (0..self.phi.len()).map(|i| self.psi(i)).collect()
    }

    /// `ln|ψ|` at every node, computed without forming `ψ`.
    pub fn log_psi(&self) -> Vec<f64> {
        let b = self.grid.scale();
        self.grid
            .rho()
            .iter()
            .zip(&self.phi)
            .map(|(r, p)| p.abs().ln() + 0.5 * (b / (b + r)).ln())
            .collect()
    }

    pub fn node_count(&self) -> usize {
        count_sign_changes(&self.phi)
    }
}

fn structure_radius(u: &PartialPotential) -> f64 {
    u.potential().settled_radius().max(u.range())
}

/// Lower bound on the spectrum: the operator minus `U` is non-negative.
fn spectrum_floor(u: &PartialPotential) -> f64 {
    let r = u.range();
    let hi = 1e3 * structure_radius(u);
    let n = 4000;
    let mut lo: f64 = 0.0;
    for j in 0..=n {
        let rho = 1e-6 * r * (hi / (1e-6 * r)).powf(j as f64 / n as f64);
        for side in [Side::Left, Side::Right] {
            lo = lo.min(u.rho2u(rho, side) / (rho * rho));
        }
    }
    for &j in u.jumps() {
        for side in [Side::Left, Side::Right] {
            lo = lo.min(u.rho2u(j, side) / (j * j));
        }
    }
    lo
}

/// Largest radius where `U - 1/4ρ² < E`.
fn turning_point(u: &PartialPotential, energy: f64) -> f64 {
    let kappa = (-energy).sqrt();
    let r = u.range();
    let hi = (100.0 * r).max(10.0 * structure_radius(u)).max(10.0 / kappa);
    let n = 4000;
    let mut last = r;
    for j in 0..=n {
        let rho = 1e-6 * r * (hi / (1e-6 * r)).powf(j as f64 / n as f64);
        if (u.rho2u(rho, Side::Left).min(u.rho2u(rho, Side::Right)) - 0.25) / (rho * rho) < energy {
            last = rho;
        }
    }
    last
}

fn bound_grid(u: &PartialPotential, energy: f64, opts: &BoundOptions) -> Result<(Arc<RadialGrid>, f64)> {
    let kappa = (-energy).sqrt();
    let turn = turning_point(u, energy);
    let far = turn.max(structure_radius(u)) + opts.decay_lengths / kappa;
    let scale = u.range().max(1.0 / kappa);
    Ok((Arc::new(RadialGrid::build(u, energy, far, scale, &opts.grid)?), turn))
}

/// Nodes of the regular solution at `energy < 0`.
fn nodes_below(u: &PartialPotential, energy: f64, opts: &BoundOptions) -> Result<usize> {
    let (grid, _) = bound_grid(u, energy, opts)?;
    Ok(integrate_radial(u, energy, &grid)?.node_count())
}

/// Zero-energy node count, including a node beyond the grid when the far
/// solution decays faster than `ρ^{-|μ|}`, and a half-bound indicator.
fn zero_energy_nodes(u: &PartialPotential, opts: &BoundOptions) -> Result<(usize, bool)> {
    let far = 2.0 * structure_radius(u) + 20.0 * u.range();
    let grid = Arc::new(RadialGrid::build(u, 0.0, far, u.range(), &opts.grid)?);
    let sol = integrate_radial(u, 0.0, &grid)?;
    let last = grid.len() - 3;
    let rho = grid.rho()[last];
    let slope = rho * sol.log_derivative(last, Side::Left);
    let mu = u.channel().mu();
    // ψ ≈ aρ^μ + bρ^{-μ} (or a + b ln ρ); half-bound when the growing part vanishes
    let half_bound = if mu > 0.0 {
        let p = slope / mu;
        (1.0 + p).abs() < 1e-4 * ((1.0 + p).abs() + (1.0 - p).abs())
    } else {
        slope.abs() < 1e-4
    };
    let beyond = !half_bound && slope < -mu;
    Ok((sol.node_count() + usize::from(beyond), half_bound))
}

pub fn count_bound_states(u: &PartialPotential) -> Result<BoundStateSpectrum> {
    count_bound_states_with(u, &BoundOptions::default())
}

/// Counts bound states by the zero-energy node count, then locates each
/// eigenvalue by bisection on the node count.
pub fn count_bound_states_with(u: &PartialPotential, opts: &BoundOptions) -> Result<BoundStateSpectrum> {
    let (count, half_bound) = zero_energy_nodes(u, opts)?;
    let mut energies = Vec::with_capacity(count);
    if count > 0 {
        let mut floor = 1.01 * spectrum_floor(u);
        if !(floor < 0.0) {
            return Err(Error::EigenSearch(format!(
                "{count} zero-energy nodes but U_m is nowhere negative"
            )));
        }
        while nodes_below(u, floor, opts)? > 0 {
            floor *= 2.0;
            if floor < -1e12 {
                return Err(Error::EigenSearch("no lower bound for the spectrum".into()));
            }
        }
        let mut lower = floor;
        for n in 0..count {
            // nodes_below(E) is the number of eigenvalues below E
            let mut lo = lower;
            let mut hi = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if nodes_below(u, mid, opts)? > n {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= opts.relative_tolerance * lo.abs() {
                    break;
                }
            }
            if hi == 0.0 {
                return Err(Error::EigenSearch(format!(
                    "state {n} not found below threshold; zero-energy count {count} disagrees"
                )));
            }
            let e = 0.5 * (lo + hi);
            energies.push(e);
            lower = hi;
        }
    }
    let near_threshold = half_bound
        || energies.last().is_some_and(|e| e.abs() * u.range() * u.range() < opts.threshold_margin);
    Ok(BoundStateSpectrum { channel: u.channel(), energies, near_threshold })
}

/// Eigenfunction at a known eigenvalue, matched at the outer turning point
/// from an outward regular and an inward decaying solution.
pub fn bound_state_at(
    u: &PartialPotential,
    energy: f64,
    index: usize,
    opts: &BoundOptions,
) -> Result<BoundStateFunction> {
    if !(energy < 0.0) {
        return Err(Error::Domain(format!("bound-state energy must be negative, got {energy}")));
    }
    let (grid, turn) = bound_grid(u, energy, opts)?;
    let n = grid.len();
    let c = grid
        .index_at_or_after(turn)
        .unwrap_or(n / 2)
        .clamp(8, n - 9);

    let out = integrate_radial(u, energy, &grid)?;
    let mut phi: Vec<f64> = out.phi().to_vec();

    let kappa = (-energy).sqrt();
    let mu = u.channel().mu();
    let rho = grid.rho();
    let rev = grid.reversed_segments();
    let mut inward = vec![0.0; n];
    let far = rho[n - 1];
    let decaying = |i: usize| {
        let r = rho[i];
        let corr = 1.0 + (4.0 * mu * mu - 1.0) / (8.0 * kappa * r);
        (-kappa * (r - far)).exp() * corr / grid.jacobian(i).sqrt()
    };
    inward[0] = decaying(n - 1);
    inward[1] = decaying(n - 2);
    propagate(&rev, energy, &mut inward, 0, n - 1 - c);
    let scale = phi[c] / inward[n - 1 - c];
    for i in c + 1..n {
        phi[i] = inward[n - 1 - i] * scale;
    }

    // ∫u² dρ = ∫ (dρ/ds)² φ² ds, trapezoid per segment
    let mut norm = 0.0;
    for seg in &grid.segments {
        for i in seg.first..seg.last {
            let f0 = (grid.jacobian(i) * phi[i]).powi(2);
            let f1 = (grid.jacobian(i + 1) * phi[i + 1]).powi(2);
            norm += 0.5 * seg.ds * (f0 + f1);
        }
    }
    let s = norm.sqrt().recip() * phi[c].signum();
    phi.iter_mut().for_each(|p| *p *= s);

    let state = BoundStateFunction { channel: u.channel(), energy, index, grid, phi };
    let nodes = state.node_count();
    if nodes != index {
        return Err(Error::EigenSearch(format!(
            "state {index} at E = {energy} has {nodes} nodes"
        )));
    }
    Ok(state)
}

/// The `index`-th bound state of the channel.
pub fn bound_state(u: &PartialPotential, index: usize) -> Result<BoundStateFunction> {
    let opts = BoundOptions::default();
    let spectrum = count_bound_states_with(u, &opts)?;
    match spectrum.energies.get(index) {
        Some(&e) => bound_state_at(u, e, index, &opts),
        None if spectrum.energies.is_empty() => Err(Error::NoBoundState { m: u.channel().m() }),
        None => Err(Error::EigenSearch(format!(
            "requested state {index}, channel has {}",
            spectrum.count()
        ))),
    }
}

pub fn ground_state(u: &PartialPotential) -> Result<BoundStateFunction> {
    bound_state(u, 0)
}
