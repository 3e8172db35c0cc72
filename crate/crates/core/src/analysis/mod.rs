//! Closed-form oracles, asymptotics, the Levinson audit and cross sections.

mod centrifugal;
mod cross_section;
mod levinson;
pub mod quadrature;
mod wkb;

pub use centrifugal::{
    centrifugal_large_kr_phase, centrifugal_levinson, centrifugal_phase_curve, centrifugal_phase_exact,
    centrifugal_small_kr_coefficient, centrifugal_small_kr_phase,
};
pub use cross_section::{
    cross_sections, default_m_max, partial_wave_phases, scattering_amplitude, CrossSectionSet, PartialWaves,
};
pub use levinson::{
    audit_grid, levinson_audit, levinson_audit_with_spectrum, predicted_jump, threshold_limit, LevinsonOptions,
    LevinsonReport, ThresholdEstimate,
};
pub use wkb::{eikonal_integral, wkb_phase, wkb_threshold_phase};
