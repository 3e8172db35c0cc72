//! Factorization `H = A†A + E₀` with `A = -d/dρ + W`, `W = (ln ψ₀)'`, and the
//! partner `Ũ = U + 1/ρ² - 2W'` of `AA† + E₀`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::solver::{bound_state_at, BoundOptions, BoundStateFunction, RadialGrid, RadialSolution};

use super::{make_partial_shared, PartialPotential, RadialPotential, Side, Tabulated, Term};

/// Tolerated change of `ρ²Ũ` implied by the estimated error of `W`,
/// relative to `max(ν², 1)`.
const RESOLUTION_TOLERANCE: f64 = 1e-6;

/// Halvings of the grid step tried when the given ground state is too coarse.
const REFINEMENTS: usize = 3;

/// Nodes used for the fit of `ρ²Ũ` near the origin.
const CORE_FIT_NODES: usize = 12;

/// Samples of a radial function `ψ` on a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values on {} nodes", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn from_solution(sol: &RadialSolution) -> Self {
        Self { grid: Arc::clone(sol.grid()), values: sol.psi_values() }
    }

    pub fn from_bound_state(state: &BoundStateFunction) -> Self {
        Self { grid: Arc::clone(state.grid()), values: state.psi_values() }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rho(&self) -> &[f64] {
        self.grid.rho()
    }

    /// `(∫ψ² ρ dρ)^{1/2}` by the trapezoid rule.
    pub fn norm(&self) -> f64 {
        let r = self.grid.rho();
        let mut s = 0.0;
        for i in 1..r.len() {
            let f0 = self.values[i - 1].powi(2) * r[i - 1];
            let f1 = self.values[i].powi(2) * r[i];
            s += 0.5 * (r[i] - r[i - 1]) * (f0 + f1);
        }
        s.sqrt()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { grid: Arc::clone(&self.grid), values: self.values.iter().map(|v| a * v).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: Arc::clone(&self.grid), values })
    }
}

fn check_grid(a: &RadialGrid, b: &RadialGrid) -> Result<()> {
    if !a.same_nodes(b) {
        return Err(Error::GridMismatch("functions live on different grids".into()));
    }
    Ok(())
}

/// `W = (ln ψ₀)'` on the grid of `ψ₀`.
#[derive(Debug, Clone)]
pub struct Superpotential {
    grid: Arc<RadialGrid>,
    energy: f64,
    w: Vec<f64>,
    /// Richardson estimate of the error in `w`.
    error: Vec<f64>,
}

impl Superpotential {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Energy `E₀` of the factorizing state.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn rho(&self) -> &[f64] {
        self.grid.rho()
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// `W' = U - E₀ - W/ρ - W²` at node `i`, the Riccati form of the
    /// radial equation for `ψ₀`.
    pub fn dw(&self, u: &PartialPotential, i: usize, side: Side) -> f64 {
        let r = self.grid.rho()[i];
        let w = self.w[i];
        u.rho2u(r, side) / (r * r) - self.energy - w / r - w * w
    }
}

/// Differentiates `ln|ψ₀|` on its own grid.
pub fn superpotential(psi0: &BoundStateFunction) -> Result<Superpotential> {
    let grid = Arc::clone(psi0.grid());
    let psi = psi0.psi_values();
    if let Some(i) = (1..psi.len()).find(|&i| psi[i] == 0.0 || psi[i].signum() != psi[i - 1].signum()) {
        return Err(Error::NodePresent { rho: grid.rho()[i] });
    }
    let log_psi = psi0.log_psi();
    let n = grid.len();
    let w: Vec<f64> = (0..n).map(|i| grid.derivative(&log_psi, i, Side::Left)).collect();
    let error = (0..n)
        .map(|i| match grid.wide_derivative(&log_psi, i) {
            Some(w2) => (w[i] - w2).abs() / 15.0,
            None => 0.0,
        })
        .collect();
    Ok(Superpotential { grid, energy: psi0.energy(), w, error })
}

/// Largest change of `ρ²Ũ` implied by the error estimate of `W`, relative
/// to `max(ν², 1)`; `δ(ρ²Ũ) = 2ρ(1 + 2ρW)·δW`.
fn resolution_of(sw: &Superpotential, nu: f64) -> f64 {
    sw.rho()
        .iter()
        .zip(sw.w.iter().zip(&sw.error))
        .map(|(&r, (&w, &e))| (2.0 * r * (1.0 + 2.0 * r * w) * e).abs())
        .fold(0.0, f64::max)
        / (nu * nu).max(1.0)
}

/// Partner of a channel with its ground state removed.
#[derive(Debug, Clone)]
pub struct DarbouxPartner {
    pub partial: PartialPotential,
    pub superpotential: Superpotential,
    /// Removed eigenvalue `E₀`.
    pub removed_energy: f64,
    /// `|ν| + 1`, the core index that `ρ²(1/ρ² - 2W')` adds to a core `ν²/ρ²`.
    pub nu_tilde_analytic: f64,
    /// `√(ρ²Ũ)` extrapolated to the origin from the innermost nodes.
    pub nu_tilde_measured: f64,
    /// Largest change of `ρ²Ũ` implied by the error estimate of `W`,
    /// relative to `max(ν², 1)`.
    pub resolution: f64,
}

/// `Ũ = U + 1/ρ² - 2W'`, represented as the original terms plus a tabulated
/// `ρ²ΔV = 1 - 2ρ²W'` that decays like `1/ρ` past the last node.
///
/// When `ln ψ₀` is not resolved on its grid, the state is recomputed at the
/// same energy on finer grids before giving up.
pub fn darboux_partner(u: &PartialPotential, psi0: &BoundStateFunction) -> Result<DarbouxPartner> {
    if psi0.channel() != u.channel() {
        return Err(Error::GridMismatch(format!(
            "bound state belongs to m = {}, potential channel is m = {}",
            psi0.channel().m(),
            u.channel().m()
        )));
    }
    if psi0.index() != 0 {
        return Err(Error::Domain(format!("factorization needs the ground state, got state {}", psi0.index())));
    }
    let nu = u.channel().nu();
    let mut sw = superpotential(psi0)?;
    let mut resolution = resolution_of(&sw, nu);
    let mut opts = BoundOptions::default();
    for _ in 0..REFINEMENTS {
        if resolution <= RESOLUTION_TOLERANCE {
            break;
        }
        opts.grid.phase_step *= 0.5;
        sw = superpotential(&bound_state_at(u, psi0.energy(), 0, &opts)?)?;
        resolution = resolution_of(&sw, nu);
    }
    if !(resolution <= RESOLUTION_TOLERANCE) {
        return Err(Error::GridTooCoarse(format!(
            "ln psi0 not resolved: estimated change of rho^2 U {resolution:e}"
        )));
    }
    let rho = sw.rho();

    let jumps: Vec<usize> = sw.grid.jump_nodes().collect();
    let mut knots = Vec::with_capacity(rho.len() + jumps.len());
    let mut values = Vec::with_capacity(rho.len() + jumps.len());
    for (i, &r) in rho.iter().enumerate() {
        knots.push(r);
        values.push(1.0 - 2.0 * r * r * sw.dw(u, i, Side::Left));
        if jumps.contains(&i) {
            knots.push(r);
            values.push(1.0 - 2.0 * r * r * sw.dw(u, i, Side::Right));
        }
    }
    let correction = Tabulated::from_rho2v(&knots, &values)?.with_tail(0.0);
    let mut terms = u.potential().terms().to_vec();
    terms.push(Term::Tabulated(correction));
    let potential = Arc::new(RadialPotential::new(terms, u.range())?);
    let partial = make_partial_shared(potential, u.channel().m())?;

    let nu_tilde_measured = core_index_fit(&partial, &rho[..CORE_FIT_NODES.min(rho.len())]);
    Ok(DarbouxPartner {
        partial,
        superpotential: sw,
        removed_energy: psi0.energy(),
        nu_tilde_analytic: nu + 1.0,
        nu_tilde_measured,
        resolution,
    })
}

/// Least-squares fit `ρ²U ≈ a + bρ²` over the given radii, returning `√a`.
fn core_index_fit(u: &PartialPotential, rho: &[f64]) -> f64 {
    let n = rho.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &r in rho {
        let x = r * r;
        let y = u.rho2u(r, Side::Right);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let a = (sy - b * sx) / n;
    a.max(0.0).sqrt()
}

/// `Aψ = -ψ' + Wψ`.
pub fn apply_lowering(psi: &GridFunction, w: &Superpotential) -> Result<GridFunction> {
    check_grid(&psi.grid, &w.grid)?;
    let g = &psi.grid;
    let values = (0..g.len()).map(|i| -g.derivative(&psi.values, i, Side::Left) + w.w[i] * psi.values[i]).collect();
    Ok(GridFunction { grid: Arc::clone(g), values })
}

/// `A†χ = χ' + (W + 1/ρ)χ`, the adjoint of `A` under `∫ · ρ dρ`.
pub fn apply_raising(chi: &GridFunction, w: &Superpotential) -> Result<GridFunction> {
    check_grid(&chi.grid, &w.grid)?;
    let g = &chi.grid;
    let rho = g.rho();
    let values = (0..g.len())
        .map(|i| g.derivative(&chi.values, i, Side::Left) + (w.w[i] + 1.0 / rho[i]) * chi.values[i])
        .collect();
    Ok(GridFunction { grid: Arc::clone(g), values })
}
