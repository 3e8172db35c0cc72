use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::{PartialPotential, Side};

use super::grid::{frobenius_remainder, RadialGrid, Segment};

const RESCALE_ABOVE: f64 = 1e200;
const RESCALE_BY: f64 = 1e-200;

/// Numerov steps along `segments` from node `start` to node `stop`.
///
/// `phi[start]` and `phi[start + 1]` must already hold the initial data and
/// both nodes must lie in the same segment. Across segment boundaries the
/// solution is continued with a fifth-order Taylor step using one-sided
/// derivatives of `G`, so jumps in the potential cost no accuracy.
pub(crate) fn propagate(segments: &[Segment], energy: f64, phi: &mut [f64], start: usize, stop: usize) {
    if stop <= start + 1 {
        return;
    }
    let mut k = segments.partition_point(|s| s.last <= start);
    let mut i = start + 1;
    loop {
        let seg = &segments[k];
        let h2 = seg.ds * seg.ds / 12.0;
        let end = seg.last.min(stop);
        while i < end {
            let l = i - seg.first;
            let gm = seg.g(l - 1, energy);
            let g0 = seg.g(l, energy);
            let gp = seg.g(l + 1, energy);
            let next = (2.0 * (1.0 + 5.0 * h2 * g0) * phi[i] - (1.0 - h2 * gm) * phi[i - 1]) / (1.0 - h2 * gp);
            phi[i + 1] = next;
            i += 1;
            if next.abs() > RESCALE_ABOVE {
                phi[start..=i].iter_mut().for_each(|v| *v *= RESCALE_BY);
            }
        }
        if i >= stop {
            return;
        }
        // restart across the segment boundary at node i
        debug_assert!(i >= start + 4 && i - 4 >= seg.first);
        let h = seg.ds;
        let y = phi[i];
        let dy = (25.0 * phi[i] - 48.0 * phi[i - 1] + 36.0 * phi[i - 2] - 16.0 * phi[i - 3] + 3.0 * phi[i - 4])
            / (12.0 * h);
        k += 1;
        let seg = &segments[k];
        let [g, g1, g2, g3] = seg.head.g(energy);
        let h = seg.ds;
        let h2 = h * h;
        let next = y
            + h * dy
            + h2 / 2.0 * g * y
            + h2 * h / 6.0 * (g1 * y + g * dy)
            + h2 * h2 / 24.0 * (g2 * y + 2.0 * g1 * dy + g * g * y)
            + h2 * h2 * h / 120.0 * ((g3 + 4.0 * g * g1) * y + (3.0 * g2 + g * g) * dy);
        phi[i + 1] = next;
        i += 1;
        if i >= stop {
            return;
        }
    }
}

/// `φ` at the first two nodes for the solution regular at the origin,
/// `ψ ≈ ρ^ν (1 + w)` with the leading Frobenius correction `w`.
fn regular_start(u: &PartialPotential, energy: f64, grid: &RadialGrid) -> (f64, f64) {
    let nu = u.channel().nu();
    let b = grid.scale();
    let r0 = grid.rho()[0];
    let q0 = frobenius_remainder(u, energy, r0);
    let q1 = frobenius_remainder(u, energy, 2.0 * r0);
    let p = if q0 != 0.0 && q1 != 0.0 && q0.signum() == q1.signum() {
        (q1 / q0).log2().clamp(0.25, 8.0)
    } else {
        2.0
    };
    let denom = p * (p + 2.0 * nu);
    let phi = |r: f64| {
        let w = frobenius_remainder(u, energy, r) / denom;
        (r / r0).powf(nu) * ((b + r) / b).sqrt() * (1.0 + w)
    };
    (phi(r0), phi(grid.rho()[1]))
}

/// Regular solution of the radial equation tabulated on a grid.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    grid: Arc<RadialGrid>,
    energy: f64,
    phi: Vec<f64>,
}

impl RadialSolution {
    pub(crate) fn from_parts(grid: Arc<RadialGrid>, energy: f64, phi: Vec<f64>) -> Self {
        Self { grid, energy, phi }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Values in the mapped representation, `u = √(dρ/ds)·φ`.
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `u(ρ_i) = √ρ·ψ(ρ_i)`.
    pub fn u(&self, i: usize) -> f64 {
        self.grid.jacobian(i).sqrt() * self.phi[i]
    }

    /// `ψ(ρ_i)`.
    pub fn psi(&self, i: usize) -> f64 {
        let r = self.grid.rho()[i];
        let b = self.grid.scale();
        (b / (b + r)).sqrt() * self.phi[i]
    }

    pub fn psi_values(&self) -> Vec<f64> {
        (0..self.phi.len()).map(|i| self.psi(i)).collect()
    }

    /// `ψ'/ψ` at node `i`.
    pub fn log_derivative(&self, i: usize, side: Side) -> f64 {
        let r = self.grid.rho()[i];
        let b = self.grid.scale();
        let dphi = self.grid.ds_derivative(&self.phi, i, side);
        dphi / (self.phi[i] * self.grid.jacobian(i)) - 0.5 / (b + r)
    }

    /// Sign changes of the solution over the whole grid.
    pub fn node_count(&self) -> usize {
        count_sign_changes(&self.phi)
    }
}

pub(crate) fn count_sign_changes(v: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut n = 0;
    for &x in v {
        if x != 0.0 {
            if last != 0.0 && x.signum() != last.signum() {
                n += 1;
            }
            last = x;
        }
    }
    n
}

/// Integrates outward the solution regular at the origin, `u ∝ ρ^{ν+1/2}`.
pub fn integrate_radial(u: &PartialPotential, energy: f64, grid: &Arc<RadialGrid>) -> Result<RadialSolution> {
    if grid.channel() != u.channel() {
        return Err(Error::GridMismatch(format!(
            "grid built for m = {}, potential has m = {}",
            grid.channel().m(),
            u.channel().m()
        )));
    }
    let n = grid.len();
    let mut phi = vec![0.0; n];
    let (p0, p1) = regular_start(u, energy, grid);
    phi[0] = p0;
    phi[1] = p1;
    propagate(&grid.segments, energy, &mut phi, 0, n - 1);
    Ok(RadialSolution::from_parts(Arc::clone(grid), energy, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylfun::{bessel_j, CylOrder};
    use crate::potential::{centrifugal_model, make_partial, RadialPotential};
    use crate::solver::grid::GridOptions;

    fn ratio_spread(sol: &RadialSolution, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let rho = sol.grid().rho();
        let ratios: Vec<f64> = (0..rho.len())
            .filter(|&i| rho[i] >= lo && rho[i] <= hi && f(rho[i]).abs() > 0.1)
            .map(|i| sol.psi(i) / f(rho[i]))
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        ratios.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn free_s_wave_is_j0() {
        let u = make_partial(RadialPotential::zero(1.0).unwrap(), 0).unwrap();
        let k = 3.0;
        let grid = Arc::new(RadialGrid::build(&u, k * k, 30.0, 1.0, &GridOptions::default()).unwrap());
        let sol = integrate_radial(&u, k * k, &grid).unwrap();
        let j0 = |r: f64| bessel_j(CylOrder::new(0.0).unwrap(), k * r).unwrap();
        assert!(ratio_spread(&sol, j0, 0.01, 30.0) < 1e-8);
    }

    #[test]
    fn centrifugal_interior_is_j_nu() {
        let u = centrifugal_model(1.7, 2.0, -2, 1.0).unwrap();
        let k = 4.0;
        let grid = Arc::new(RadialGrid::build(&u, k * k, 20.0, 1.0, &GridOptions::default()).unwrap());
        let sol = integrate_radial(&u, k * k, &grid).unwrap();
        let j = |r: f64| bessel_j(CylOrder::new(1.7).unwrap(), k * r).unwrap();
        assert!(ratio_spread(&sol, j, 0.2, 1.0) < 1e-8);
    }

    #[test]
    fn grid_from_other_channel_is_rejected() {
        let u = centrifugal_model(1.0, 1.0, 1, 1.0).unwrap();
        let w = centrifugal_model(2.0, 2.0, 2, 1.0).unwrap();
        let grid = Arc::new(RadialGrid::build(&u, 1.0, 20.0, 1.0, &GridOptions::default()).unwrap());
        assert!(matches!(integrate_radial(&w, 1.0, &grid), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn sign_changes() {
        assert_eq!(count_sign_changes(&[1.0, 0.0, -1.0, -2.0, 0.0, 3.0]), 2);
        assert_eq!(count_sign_changes(&[0.0, 0.0]), 0);
    }
}
