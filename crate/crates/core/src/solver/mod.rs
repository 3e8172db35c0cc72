//! Radial integration, phase-shift extraction and bound states.

mod bound;
mod grid;
mod numerov;
mod phase;

pub use bound::{
    bound_state, bound_state_at, count_bound_states, count_bound_states_with, ground_state, BoundOptions,
    BoundStateFunction, BoundStateSpectrum,
};
pub use grid::{core_start, GridOptions, RadialGrid};
pub use numerov::{integrate_radial, RadialSolution};
pub use phase::{
    extract_phase, matching_radius, phase_curve, phase_curve_adaptive, principal, scattering_phase, Anchor,
    AnchorRule, PhaseOptions, PhaseShift, PhaseShiftCurve,
};
