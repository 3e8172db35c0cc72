//! Experiment configuration.
//!
//! Lengths are given in units of `R`, energies in units of `1/R²` and
//! wavenumbers in units of `1/R`; everything is converted to absolute
//! units at load time.

use std::path::{Path, PathBuf};

use levinson2d_core::analysis::LevinsonOptions;
use levinson2d_core::potential::{make_partial, RadialPotential, Region, Tabulated, Term};
use levinson2d_core::solver::{BoundOptions, PhaseOptions};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Relative tolerance for the declared `beta0`/`beta_inf` check.
const LIMIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "R")]
    range: f64,
    beta0: Option<f64>,
    beta_inf: Option<f64>,
    channels: Vec<i32>,
    k: Option<RawGrid>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    levinson: RawLevinson,
    darboux: Option<RawDarboux>,
    cross_section: Option<RawCrossSection>,
    #[serde(rename = "term", default)]
    terms: Vec<RawTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    min: f64,
    max: f64,
    count: usize,
    #[serde(default)]
    spacing: Spacing,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    phase_step: Option<f64>,
    bound_phase_step: Option<f64>,
    core_tolerance: Option<f64>,
    match_tolerance: Option<f64>,
    tail_tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevinson {
    k_min: Option<f64>,
    k_max: Option<f64>,
    points: Option<usize>,
    tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDarboux {
    channel: i32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCrossSection {
    k: Vec<f64>,
    cutoff: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawTerm {
    InverseSquare {
        beta: f64,
        #[serde(default)]
        region: RawRegion,
        radius: Option<f64>,
    },
    Well {
        depth: f64,
        radius: Option<f64>,
    },
    ScreenedCore {
        beta: f64,
        length: Option<f64>,
    },
    GaussianCore {
        beta: f64,
        length: Option<f64>,
    },
    Tabulated {
        file: PathBuf,
        tail: Option<f64>,
    },
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawRegion {
    #[default]
    Everywhere,
    Inside,
    Outside,
}

/// Validated configuration in absolute units.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub range: f64,
    pub potential: RadialPotential,
    pub channels: Vec<i32>,
    /// Wavenumbers of the phase-shift scan, if configured.
    pub k: Option<Vec<f64>>,
    pub phase: PhaseOptions,
    pub levinson: LevinsonOptions,
    pub levinson_tolerance: f64,
    pub darboux_channel: Option<i32>,
    pub cross_section_k: Option<Vec<f64>>,
    pub truncation_cutoff: f64,
    /// SHA-256 of the configuration file and any tables it loads.
    pub hash: String,
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn positive(field: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(field_error(field, format!("must be positive and finite, got {x}")))
    }
}

fn finite(field: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(field_error(field, format!("must be finite, got {x}")))
    }
}

fn wavenumbers(field: &str, g: &RawGrid) -> Result<Vec<f64>, CliError> {
    let lo = positive(&format!("{field}.min"), g.min)?;
    let hi = positive(&format!("{field}.max"), g.max)?;
    if g.count == 0 {
        return Err(field_error(&format!("{field}.count"), "must be at least 1"));
    }
    if hi < lo || (g.count > 1 && hi == lo) {
        return Err(field_error(field, format!("max ({hi}) must exceed min ({lo})")));
    }
    if g.count == 1 {
        return Ok(vec![lo]);
    }
    let n = (g.count - 1) as f64;
    Ok((0..g.count)
        .map(|i| {
            let t = i as f64 / n;
            match g.spacing {
                Spacing::Linear => lo + (hi - lo) * t,
                Spacing::Log => lo * (hi / lo).powf(t),
            }
        })
        .collect())
}

/// Reads a `rho` column and either `rho2_v` or `v`, all in units of `R`.
fn read_table(path: &Path, range: f64, field: &str) -> Result<(Tabulated, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| field_error(field, format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8_lossy(&bytes);
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or_else(|| field_error(field, format!("{} is empty", path.display())))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| names.iter().position(|n| *n == name);
    let rho_col = col("rho").ok_or_else(|| field_error(field, "table has no `rho` column"))?;
    let (value_col, is_rho2v) = match (col("rho2_v"), col("v")) {
        (Some(c), _) => (c, true),
        (None, Some(c)) => (c, false),
        _ => return Err(field_error(field, "table needs a `rho2_v` or `v` column")),
    };
    let mut rho = Vec::new();
    let mut y = Vec::new();
    for (n, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |c: usize| -> Result<f64, CliError> {
            cells
                .get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| field_error(field, format!("{} line {}: bad number", path.display(), n + 1)))
        };
        let r = get(rho_col)? * range;
        let v = get(value_col)?;
        rho.push(r);
        y.push(if is_rho2v { v } else { v * r * r / (range * range) });
    }
    let table = Tabulated::from_rho2v(&rho, &y).map_err(|e| field_error(field, e))?;
    Ok((table, bytes))
}

fn build_term(i: usize, raw: &RawTerm, range: f64, base: &Path, extra: &mut Vec<u8>) -> Result<Term, CliError> {
    let f = |name: &str| format!("term[{i}].{name}");
    let scaled_radius = |r: Option<f64>| -> Result<f64, CliError> { Ok(positive(&f("radius"), r.unwrap_or(1.0))? * range) };
    let scaled_length = |l: Option<f64>| -> Result<f64, CliError> { Ok(positive(&f("length"), l.unwrap_or(1.0))? * range) };
    Ok(match raw {
        RawTerm::InverseSquare { beta, region, radius } => {
            let beta = finite(&f("beta"), *beta)?;
            let region = match region {
                RawRegion::Everywhere => {
                    if radius.is_some() {
                        return Err(field_error(&f("radius"), "only meaningful with region = inside|outside"));
                    }
                    Region::Everywhere
                }
                RawRegion::Inside => Region::Inside(scaled_radius(*radius)?),
                RawRegion::Outside => Region::Outside(scaled_radius(*radius)?),
            };
            Term::InverseSquare { beta, region }
        }
        RawTerm::Well { depth, radius } => {
            Term::Well { depth: finite(&f("depth"), *depth)? / (range * range), radius: scaled_radius(*radius)? }
        }
        RawTerm::ScreenedCore { beta, length } => {
            Term::ScreenedCore { beta: finite(&f("beta"), *beta)?, length: scaled_length(*length)? }
        }
        RawTerm::GaussianCore { beta, length } => {
            Term::GaussianCore { beta: finite(&f("beta"), *beta)?, length: scaled_length(*length)? }
        }
        RawTerm::Tabulated { file, tail } => {
            let path = if file.is_absolute() { file.clone() } else { base.join(file) };
            let (table, bytes) = read_table(&path, range, &f("file"))?;
            extra.extend_from_slice(&bytes);
            match tail {
                Some(t) => Term::Tabulated(table.with_tail(finite(&f("tail"), *t)?)),
                None => Term::Tabulated(table),
            }
        }
    })
}

fn check_declared(field: &str, declared: Option<f64>, measured: f64) -> Result<(), CliError> {
    if let Some(b) = declared {
        if (b - measured).abs() > LIMIT_TOLERANCE * b.abs().max(1.0) {
            return Err(field_error(field, format!("declared {b}, but the terms give {measured}")));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses a configuration; relative table paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let range = positive("R", raw.range)?;
        if raw.channels.is_empty() {
            return Err(field_error("channels", "at least one channel is required"));
        }

        let mut tables = Vec::new();
        let terms = raw
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| build_term(i, t, range, base, &mut tables))
            .collect::<Result<Vec<_>, _>>()?;
        let potential = RadialPotential::new(terms, range).map_err(|e| field_error("term", e))?;
        let (near, far) = potential.measured_limits();
        check_declared("beta0", raw.beta0, near)?;
        check_declared("beta_inf", raw.beta_inf, far)?;
        potential.check_limits(LIMIT_TOLERANCE).map_err(|e| field_error("term", e))?;
        for &m in &raw.channels {
            make_partial(potential.clone(), m).map_err(|e| field_error("channels", format!("m = {m}: {e}")))?;
        }

        let mut phase = PhaseOptions::default();
        let mut bound = BoundOptions::default();
        let s = &raw.solver;
        if let Some(x) = s.phase_step {
            phase.grid.phase_step = positive("solver.phase_step", x)?;
        }
        if let Some(x) = s.bound_phase_step {
            bound.grid.phase_step = positive("solver.bound_phase_step", x)?;
        }
        if let Some(x) = s.core_tolerance {
            let x = positive("solver.core_tolerance", x)?;
            phase.grid.core_tolerance = x;
            bound.grid.core_tolerance = x;
        }
        if let Some(x) = s.match_tolerance {
            phase.match_tolerance = positive("solver.match_tolerance", x)?;
        }
        if let Some(x) = s.tail_tolerance {
            phase.tail_tolerance = positive("solver.tail_tolerance", x)?;
        }

        let mut levinson = LevinsonOptions { phase, bound, ..LevinsonOptions::default() };
        if let Some(x) = raw.levinson.k_min {
            levinson.k_min = positive("levinson.k_min", x)?;
        }
        if let Some(x) = raw.levinson.k_max {
            levinson.k_max = positive("levinson.k_max", x)?;
        }
        if levinson.k_max <= 4.0 * levinson.k_min {
            return Err(field_error("levinson.k_max", "must exceed 4 * levinson.k_min"));
        }
        if let Some(n) = raw.levinson.points {
            if n < 8 {
                return Err(field_error("levinson.points", "must be at least 8"));
            }
            levinson.points = n;
        }
        let levinson_tolerance = positive("levinson.tolerance", raw.levinson.tolerance.unwrap_or(1e-2))?;

        let k = raw
            .k
            .as_ref()
            .map(|g| wavenumbers("k", g).map(|ks| ks.into_iter().map(|k| k / range).collect()))
            .transpose()?;

        let (cross_section_k, truncation_cutoff) = match &raw.cross_section {
            Some(c) => {
                if c.k.is_empty() {
                    return Err(field_error("cross_section.k", "needs at least one wavenumber"));
                }
                let ks = c
                    .k
                    .iter()
                    .map(|&k| positive("cross_section.k", k).map(|k| k / range))
                    .collect::<Result<Vec<_>, _>>()?;
                (Some(ks), positive("cross_section.cutoff", c.cutoff.unwrap_or(1e-8))?)
            }
            None => (None, 1e-8),
        };

        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        hasher.update(&tables);
        let hash = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();

        Ok(Self {
            range,
            potential,
            channels: raw.channels,
            k,
            phase,
            levinson,
            levinson_tolerance,
            darboux_channel: raw.darboux.map(|d| d.channel),
            cross_section_k,
            truncation_cutoff,
            hash,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::parse(text, Path::new("."))
    }

    const CENTRIFUGAL: &str = r#"
R = 2.0
beta0 = 3.0
beta_inf = 0.0
channels = [1]

[k]
min = 0.5
max = 4.0
count = 8
spacing = "log"

[[term]]
kind = "inverse_square"
beta = 3.0
region = "inside"
"#;

    #[test]
    fn lengths_and_wavenumbers_scale_with_r() {
        let c = parse(CENTRIFUGAL).unwrap();
        assert_eq!(c.potential.jumps(), &[2.0]);
        let k = c.k.unwrap();
        assert_eq!(k.len(), 8);
        assert!((k[0] - 0.25).abs() < 1e-15 && (k[7] - 2.0).abs() < 1e-15);
        assert_eq!(c.hash.len(), 64);
    }

    #[test]
    fn well_depth_is_in_units_of_inverse_r_squared() {
        let c = parse("R = 2.0\nchannels = [0]\n[[term]]\nkind = \"well\"\ndepth = 8.0\n").unwrap();
        assert_eq!(c.potential.terms(), &[Term::Well { depth: 2.0, radius: 2.0 }]);
    }

    #[test]
    fn missing_r_is_named() {
        let e = parse("channels = [0]\n").unwrap_err();
        assert!(e.to_string().contains("`R`"), "{e}");
    }

    #[test]
    fn wrong_declared_core_is_refused() {
        let e = parse(&CENTRIFUGAL.replace("beta0 = 3.0", "beta0 = 2.0")).unwrap_err();
        assert!(e.to_string().contains("beta0:"), "{e}");
    }

    #[test]
    fn bad_term_fields_are_located() {
        let e = parse("R = 1.0\nchannels = [0]\n[[term]]\nkind = \"well\"\ndepth = 1.0\nradius = -1.0\n").unwrap_err();
        assert!(e.to_string().contains("term[0].radius"), "{e}");
        let e = parse("R = 1.0\nchannels = [0]\n[[term]]\nkind = \"lake\"\n").unwrap_err();
        assert!(e.to_string().contains("lake"), "{e}");
    }

    #[test]
    fn k_grid_must_be_ordered() {
        let e = parse(&CENTRIFUGAL.replace("max = 4.0", "max = 0.1")).unwrap_err();
        assert!(e.to_string().contains("k:"), "{e}");
    }
}
