//! Radial grid in the mapped coordinate `s = ln ρ + ρ/b`.
//!
//! With `u = √(dρ/ds)·φ` the radial equation `u'' = (U - 1/4ρ² - E)u` becomes
//! `φ_ss = G(s)φ` with `G = c²(ρ²U - 1/4 - Eρ²) + b³(b/2 + 2ρ)/(2(b+ρ)⁴)`,
//! `c = b/(b+ρ)`. Near the origin the steps are uniform in `ln ρ`, far out
//! they are uniform in `ρ` with spacing `b·ds`. The grid is split at every
//! jump of the potential so each segment sees a smooth `G`.

use crate::error::{Error, Result};
use crate::potential::{Channel, PartialPotential, Side};

/// Parameters controlling grid construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Target value of `ds·√max|G|` in each segment.
    pub phase_step: f64,
    /// Lower bound on the number of steps per segment.
    pub min_steps: usize,
    /// Tolerated size of the non-singular part of `ρ²U` at `ρ_min`,
    /// relative to `max(ν², 1)`.
    pub core_tolerance: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { phase_step: 0.02, min_steps: 8, core_tolerance: 1e-8 }
    }
}

/// Numerov truncation tolerance per step.
const STEP_TOLERANCE: f64 = 1e-6;
const SAMPLES_PER_SEGMENT: usize = 256;

pub(crate) fn s_of_rho(rho: f64, b: f64) -> f64 {
    rho.ln() + rho / b
}

pub(crate) fn rho_of_s(s: f64, b: f64) -> f64 {
    let lb = b.ln();
    // g(t) = t + e^t/b - s is convex and increasing; start where g >= 0
    let mut t = if s <= lb + 1.0 { s } else { (b * (s - lb)).ln() };
    for _ in 0..100 {
        let e = t.exp() / b;
        let dt = (t + e - s) / (1.0 + e);
        t -= dt;
        if dt.abs() <= 1e-16 * (1.0 + t.abs()) {
            break;
        }
    }
    t.exp()
}

/// `(A, B)` with `G = A - E·B` at radius `rho`.
fn g_parts(u: &PartialPotential, rho: f64, side: Side, b: f64) -> (f64, f64) {
    let c = b / (b + rho);
    let c2 = c * c;
    let bp = b + rho;
    let schwarz = b * b * b * (0.5 * b + 2.0 * rho) / (2.0 * bp * bp * bp * bp);
    (c2 * (u.rho2u(rho, side) - 0.25) + schwarz, c2 * rho * rho)
}

/// Value and first three derivatives of `A` and `B` at a segment end,
/// taken along the direction pointing into the segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet {
    pub a: [f64; 4],
    pub b: [f64; 4],
}

impl Jet {
    pub fn g(&self, energy: f64) -> [f64; 4] {
        [
            self.a[0] - energy * self.b[0],
            self.a[1] - energy * self.b[1],
            self.a[2] - energy * self.b[2],
            self.a[3] - energy * self.b[3],
        ]
    }
}

fn one_sided_jet(samples: [(f64, f64); 5], h: f64) -> Jet {
    let d = |v: [f64; 5]| {
        [
            v[0],
            (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h),
            (35.0 * v[0] - 104.0 * v[1] + 114.0 * v[2] - 56.0 * v[3] + 11.0 * v[4]) / (12.0 * h * h),
            (-5.0 * v[0] + 18.0 * v[1] - 24.0 * v[2] + 14.0 * v[3] - 3.0 * v[4]) / (2.0 * h * h * h),
        ]
    };
    Jet {
        a: d(samples.map(|p| p.0)),
        b: d(samples.map(|p| p.1)),
    }
}

/// One smooth stretch of the grid, nodes `first..=last`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Segment {
    pub first: usize,
    pub last: usize,
    pub ds: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub head: Jet,
    pub tail: Jet,
}

impl Segment {
    pub fn g(&self, local: usize, energy: f64) -> f64 {
        self.a[local] - energy * self.b[local]
    }

    fn reversed(&self, n: usize) -> Self {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        a.reverse();
        b.reverse();
        Self {
            first: n - 1 - self.last,
            last: n - 1 - self.first,
            ds: self.ds,
            a,
            b,
            head: self.tail,
            tail: self.head,
        }
    }
}

/// Discretization of `[ρ_min, ρ_max]` for one partial potential.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    scale: f64,
    channel: Channel,
    energy_hint: f64,
    rho: Vec<f64>,
    pub(crate) segments: Vec<Segment>,
}

impl RadialGrid {
    /// Builds a grid for `u` up to `rho_max`.
    ///
    /// `scale` is the crossover length `b` between logarithmic and linear
    /// spacing; `energy` sets the step (the grid is valid for energies of
    /// comparable magnitude).
    pub fn build(
        u: &PartialPotential,
        energy: f64,
        rho_max: f64,
        scale: f64,
        opts: &GridOptions,
    ) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!("grid scale must be positive, got {scale}")));
        }
        if !(energy.is_finite()) {
            return Err(Error::Domain("energy must be finite".into()));
        }
        let eta = opts.phase_step;
        if !(eta > 0.0) {
            return Err(Error::Domain(format!("phase step must be positive, got {eta}")));
        }
        let estimate = eta.powi(6) / 240.0;
        if estimate > STEP_TOLERANCE {
            return Err(Error::StepTooLarge { estimate });
        }
        let rho_min = core_start(u, energy, opts.core_tolerance)?;
        if !(rho_max > rho_min) {
            return Err(Error::Domain(format!("rho_max {rho_max} not beyond rho_min {rho_min}")));
        }

        let mut breaks = vec![rho_min];
        breaks.extend(u.jumps().iter().copied().filter(|&r| r > rho_min && r < rho_max));
        breaks.push(rho_max);

        let b = scale;
        let mut rho = vec![rho_min];
        let mut segments = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let (r0, r1) = (w[0], w[1]);
            let (s0, s1) = (s_of_rho(r0, b), s_of_rho(r1, b));
            let mut gmax: f64 = 0.0;
            for j in 0..=SAMPLES_PER_SEGMENT {
                let (r, side) = match j {
                    0 => (r0, Side::Right),
                    j if j == SAMPLES_PER_SEGMENT => (r1, Side::Left),
                    j => (rho_of_s(s0 + (s1 - s0) * j as f64 / SAMPLES_PER_SEGMENT as f64, b), Side::Right),
                };
                let (ga, gb) = g_parts(u, r, side, b);
                gmax = gmax.max((ga - energy * gb).abs());
            }
            let target = eta / gmax.max(1.0).sqrt();
            let n = (((s1 - s0) / target).ceil() as usize).max(opts.min_steps);
            let ds = (s1 - s0) / n as f64;

            let first = rho.len() - 1;
            let mut a = Vec::with_capacity(n + 1);
            let mut bb = Vec::with_capacity(n + 1);
            for j in 0..=n {
                let r = if j == 0 {
                    r0
                } else if j == n {
                    r1
                } else {
                    rho_of_s(s0 + ds * j as f64, b)
                };
                let side = if j == n { Side::Left } else { Side::Right };
                let (ga, gb) = g_parts(u, r, side, b);
                a.push(ga);
                bb.push(gb);
                if j > 0 {
                    rho.push(r);
                }
            }
            let h = ds / 4.0;
            let head = one_sided_jet(
                std::array::from_fn(|j| {
                    let r = if j == 0 { r0 } else { rho_of_s(s0 + h * j as f64, b) };
                    g_parts(u, r, Side::Right, b)
                }),
                h,
            );
            let tail = one_sided_jet(
                std::array::from_fn(|j| {
                    let r = if j == 0 { r1 } else { rho_of_s(s1 - h * j as f64, b) };
                    g_parts(u, r, Side::Left, b)
                }),
                h,
            );
            segments.push(Segment { first, last: first + n, ds, a, b: bb, head, tail });
        }
        Ok(Self { scale: b, channel: u.channel(), energy_hint: energy, rho, segments })
    }

    /// Same nodes walked from the far end inward.
    pub(crate) fn reversed_segments(&self) -> Vec<Segment> {
        let n = self.rho.len();
        self.segments.iter().rev().map(|s| s.reversed(n)).collect()
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn rho_min(&self) -> f64 {
        self.rho[0]
    }

    pub fn rho_max(&self) -> f64 {
        *self.rho.last().unwrap()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn energy_hint(&self) -> f64 {
        self.energy_hint
    }

    /// Largest step in `ρ` anywhere on the grid.
    pub fn max_rho_step(&self) -> f64 {
        self.rho.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// `dρ/ds` at node `i`.
    pub fn jacobian(&self, i: usize) -> f64 {
        let r = self.rho[i];
        r * self.scale / (self.scale + r)
    }

    /// First node with `ρ ≥ rho`.
    pub fn index_at_or_after(&self, rho: f64) -> Option<usize> {
        let i = self.rho.partition_point(|&r| r < rho);
        (i < self.rho.len()).then_some(i)
    }

    /// Segment owning node `i`, with `side` deciding at segment boundaries.
    pub(crate) fn segment_of(&self, i: usize, side: Side) -> &Segment {
        let k = self.segments.partition_point(|s| s.last < i);
        let seg = &self.segments[k];
        if side == Side::Right && seg.last == i && k + 1 < self.segments.len() {
            &self.segments[k + 1]
        } else {
            seg
        }
    }

    /// Indices of nodes that sit on a jump.
    pub fn jump_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.segments[..self.segments.len() - 1].iter().map(|s| s.last)
    }

    /// `d f/ds` at node `i` from five-point stencils confined to one segment.
    pub fn ds_derivative(&self, f: &[f64], i: usize, side: Side) -> f64 {
        let seg = self.segment_of(i, side);
        stencil_derivative(f, i, seg.first, seg.last, seg.ds)
    }

    /// `d f/dρ` at node `i`.
    pub fn derivative(&self, f: &[f64], i: usize, side: Side) -> f64 {
        self.ds_derivative(f, i, side) / self.jacobian(i)
    }

    /// `d f/dρ` at node `i` from a five-point stencil with doubled spacing,
    /// when the segment holding `i` has room for one.
    pub(crate) fn wide_derivative(&self, f: &[f64], i: usize) -> Option<f64> {
        let seg = self.segment_of(i, Side::Left);
        if seg.last - seg.first < 8 {
            return None;
        }
        let lo = i.saturating_sub(4).max(seg.first).min(seg.last - 8);
        let lo = match (i - lo) % 2 {
            0 => lo,
            _ if lo + 9 <= seg.last && lo < i => lo + 1,
            _ if lo > seg.first => lo - 1,
            _ => return None,
        };
        if lo + 8 > seg.last || i - lo > 8 {
            return None;
        }
        let p = (i - lo) / 2;
        let w = &STENCIL[p];
        let d = (0..5).map(|j| w[j] * f[lo + 2 * j]).sum::<f64>() / (24.0 * seg.ds);
        Some(d / self.jacobian(i))
    }

    pub(crate) fn same_nodes(&self, other: &RadialGrid) -> bool {
        self.scale == other.scale && self.rho == other.rho
    }
}

const STENCIL: [[f64; 5]; 5] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

pub(crate) fn stencil_derivative(f: &[f64], i: usize, first: usize, last: usize, h: f64) -> f64 {
    debug_assert!(last - first >= 4);
    let lo = i.saturating_sub(2).max(first).min(last - 4);
    let w = &STENCIL[i - lo];
    (0..5).map(|j| w[j] * f[lo + j]).sum::<f64>() / (12.0 * h)
}

/// Radius where the regular solution is started: deep enough that
/// `ρ²U - ν² - Eρ²` is negligible next to `max(ν², 1)`.
pub fn core_start(u: &PartialPotential, energy: f64, tolerance: f64) -> Result<f64> {
    let nu = u.channel().nu();
    let scale = (nu * nu).max(1.0);
    let structure = u.jumps().first().copied().unwrap_or(f64::INFINITY).min(u.range());
    let mut rho = 1e-3 * structure;
    if energy != 0.0 {
        rho = rho.min(1e-3 / energy.abs().sqrt());
    }
    let floor = 1e-14 * structure;
    loop {
        let q = frobenius_remainder(u, energy, rho);
        let ratio = q.abs() / scale;
        if ratio <= tolerance {
            return Ok(rho);
        }
        if rho < floor {
            return Err(Error::CoreUnresolved { rho_min: rho, ratio });
        }
        rho *= 0.25;
    }
}

pub(crate) fn frobenius_remainder(u: &PartialPotential, energy: f64, rho: f64) -> f64 {
    let nu = u.channel().nu();
    u.rho2u(rho, Side::Right) - nu * nu - energy * rho * rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::centrifugal_model;

    #[test]
    fn mapping_inverts() {
        for &b in &[0.01, 1.0, 30.0] {
            for &r in &[1e-12, 1e-3, 0.5, 7.0, 1e4] {
                let s = s_of_rho(r, b);
                let back = rho_of_s(s, b);
                assert!((back - r).abs() <= 1e-14 * r, "b={b} r={r} back={back}");
            }
        }
    }

    #[test]
    fn grid_respects_jumps_and_steps() {
        let u = centrifugal_model(2.0, 1.0, 1, 1.0).unwrap();
        let k: f64 = 5.0;
        let g = RadialGrid::build(&u, k * k, 40.0, 1.0, &GridOptions::default()).unwrap();
        assert!(g.rho_min() < 0.01);
        assert_eq!(g.rho_max(), 40.0);
        assert_eq!(g.jump_nodes().map(|i| g.rho()[i]).collect::<Vec<_>>(), vec![1.0]);
        assert!(k * g.max_rho_step() <= 0.05);
        assert!(g.rho().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn stencil_is_exact_on_quartics() {
        let f: Vec<f64> = (0..9).map(|i| { let x = i as f64 * 0.1; x.powi(4) - x }).collect();
        for i in 0..9 {
            let x = i as f64 * 0.1;
            let d = stencil_derivative(&f, i, 0, 8, 0.1);
            assert!((d - (4.0 * x.powi(3) - 1.0)).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn oversized_step_is_refused() {
        let u = centrifugal_model(1.0, 1.0, 1, 1.0).unwrap();
        let opts = GridOptions { phase_step: 0.5, ..GridOptions::default() };
        assert!(matches!(
            RadialGrid::build(&u, 1.0, 20.0, 1.0, &opts),
            Err(Error::StepTooLarge { .. })
        ));
    }
}
