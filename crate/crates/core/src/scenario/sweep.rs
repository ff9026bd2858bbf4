//! Sweep orchestration and CSV emission.
//!
//! Rows are independent and evaluated on the rayon pool; `collect` keeps
//! them in grid order, and every row is a pure function of the config, so
//! the CSV is bit-identical from run to run.

use std::io::{self, Write};

use rayon::prelude::*;

use super::config::{CompareAxis, ScenarioConfig, SweepKind, SweepSpec};
use crate::constants::constants;
use crate::cp::{resonant_coefficient, single_plate_coefficient, CavitySetup, CpError, Flags, Transition};
use crate::material::{surface_resonance, MaterialError};
use crate::spectroscopy::observables;

pub const DETUNING_HEADER: [&str; 6] = [
    "detuning_rad_s",
    "omega_rad_s",
    "gamma_per_s",
    "gamma_over_gamma0",
    "shift_res_rad_s",
    "flags",
];

pub const VELOCITY_HEADER: [&str; 7] = [
    "v_m_s",
    "v_over_c",
    "gamma_per_s",
    "gamma_ratio_to_static",
    "gamma_minus_static_per_s",
    "shift_res_rad_s",
    "flags",
];

pub const COMPARE_HEADER: [&str; 6] = [
    "z_m",
    "omega_rad_s",
    "gamma_double_per_s",
    "gamma_single_per_s",
    "ratio",
    "flags",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Numeric columns, in header order.
    pub values: Vec<f64>,
    /// Tokens for the trailing `flags` column.
    pub flags: Vec<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.flags.iter().any(|f| f.starts_with("error="))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub kind: SweepKind,
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn header(&self) -> &'static [&'static str] {
        match self.kind {
            SweepKind::Detuning => &DETUNING_HEADER,
            SweepKind::Velocity => &VELOCITY_HEADER,
            SweepKind::PlateCompare => &COMPARE_HEADER,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header().join(","))?;
        for row in &self.rows {
            for v in &row.values {
                write!(w, "{},", format_number(*v))?;
            }
            writeln!(w, "{}", row.flags.join(";"))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// 12 significant digits, scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.11e}")
}

/// Makes an error message safe for the `;`-separated flags column.
fn sanitize(msg: &str) -> String {
    msg.chars()
        .map(|c| if matches!(c, ',' | ';' | '\n' | '\r' | '"') { ' ' } else { c })
        .collect()
}

fn flag_tokens(flags: &Flags) -> Vec<String> {
    flags.iter().map(|f| f.token().to_string()).collect()
}

fn finish(mut tokens: Vec<String>, hash: &str) -> Vec<String> {
    tokens.push(format!("cfg={hash}"));
    tokens
}

/// Zero of the detuning axis: the surface resonance of the {+} plate, or of
/// the {-} plate when the {+} side is empty.
pub fn detuning_reference(cfg: &ScenarioConfig) -> Result<f64, MaterialError> {
    surface_resonance(&cfg.material_plus).or_else(|_| surface_resonance(&cfg.material_minus))
}

/// A row that could not be computed: NaN values, error token kept.
fn failed_row(leading: &[f64], width: usize, err: &CpError, mut tokens: Vec<String>, hash: &str) -> SweepRow {
    let mut values = leading.to_vec();
    values.resize(width, f64::NAN);
    tokens.push(format!("error={}", sanitize(&err.to_string())));
    SweepRow {
        values,
        flags: finish(tokens, hash),
    }
}

fn detuning_rows(cfg: &ScenarioConfig, spec: &SweepSpec, omega_res: f64, hash: &str) -> Vec<SweepRow> {
    let setup = cfg.setup();
    spec.grid()
        .par_iter()
        .map(|&delta| {
            let omega = omega_res + delta;
            let tr = cfg.transition().with_omega_tilde(omega);
            match observables(&setup, &tr, &cfg.quadrature) {
                Ok(r) => SweepRow {
                    values: vec![delta, omega, r.gamma_induced, r.enhancement, r.shift_res],
                    flags: finish(flag_tokens(&r.flags), hash),
                },
                Err(e) => failed_row(&[delta, omega], 5, &e, Vec::new(), hash),
            }
        })
        .collect()
}

/// Velocity grid, with a v = 0 reference row in front when the grid does
/// not start there.
fn velocity_grid(spec: &SweepSpec) -> Vec<f64> {
    let mut grid = spec.grid();
    if grid[0] > 0.0 {
        grid.insert(0, 0.0);
    }
    grid
}

fn velocity_rows(cfg: &ScenarioConfig, spec: &SweepSpec, omega_res: f64, hash: &str) -> Vec<SweepRow> {
    let c = constants().c;
    let grid = velocity_grid(spec);
    let tasks: Vec<(f64, f64)> = spec
        .detunings
        .iter()
        .flat_map(|&d| grid.iter().map(move |&v| (d, v)))
        .collect();
    let results: Vec<Result<_, CpError>> = tasks
        .par_iter()
        .map(|&(delta, v)| {
            let setup = cfg.setup().with_velocity(v);
            let tr = cfg.transition().with_omega_tilde(omega_res + delta);
            resonant_coefficient(&setup, &tr, &cfg.quadrature)
        })
        .collect();

    let mut rows = Vec::with_capacity(tasks.len());
    for (group, chunk) in tasks.chunks(grid.len()).zip(results.chunks(grid.len())) {
        let delta = group[0].0;
        // grid[0] is always v = 0
        let reference = chunk[0].as_ref().ok().map(|c| c.gamma);
        for (&(_, v), res) in group.iter().zip(chunk) {
            let tokens = vec![format!("delta={}", format_number(delta))];
            let row = match (res, reference) {
                (Ok(coef), Some(g0)) => {
                    let mut t = tokens;
                    t.splice(0..0, flag_tokens(&coef.validity_flags));
                    SweepRow {
                        values: vec![v, v / c, coef.gamma, coef.gamma / g0, coef.gamma - g0, coef.shift_res],
                        flags: finish(t, hash),
                    }
                }
                (Ok(coef), None) => {
                    let err = chunk[0].as_ref().unwrap_err();
                    let values = vec![v, v / c, coef.gamma, f64::NAN, f64::NAN, coef.shift_res];
                    let mut t = flag_tokens(&coef.validity_flags);
                    t.extend(tokens);
                    t.push(format!("error=static reference failed: {}", sanitize(&err.to_string())));
                    SweepRow {
                        values,
                        flags: finish(t, hash),
                    }
                }
                (Err(e), _) => failed_row(&[v, v / c], 6, e, tokens, hash),
            };
            rows.push(row);
        }
    }
    rows
}

fn compare_row(cfg: &ScenarioConfig, z: f64, omega: f64) -> Result<(f64, f64, Flags), CpError> {
    let tr = Transition::new(omega, cfg.dipole);
    let double = CavitySetup::new(2.0 * z, 0.0, cfg.material_plus, cfg.material_minus)?;
    let a = resonant_coefficient(&double, &tr, &cfg.quadrature)?;
    let b = single_plate_coefficient(z, &cfg.material_plus, &tr, 0.0, &cfg.quadrature)?;
    let mut flags = a.validity_flags;
    flags.extend(b.validity_flags);
    Ok((a.gamma, b.gamma, flags))
}

fn compare_rows(cfg: &ScenarioConfig, spec: &SweepSpec, omega_res: f64, hash: &str) -> Vec<SweepRow> {
    let points: Vec<(f64, f64)> = match spec.axis {
        CompareAxis::Z => spec.grid().into_iter().map(|z| (z, omega_res + spec.detuning)).collect(),
        CompareAxis::Detuning => spec.grid().into_iter().map(|d| (spec.z, omega_res + d)).collect(),
    };
    points
        .par_iter()
        .map(|&(z, omega)| match compare_row(cfg, z, omega) {
            Ok((double, single, flags)) => SweepRow {
                values: vec![z, omega, double, single, double / single],
                flags: finish(flag_tokens(&flags), hash),
            },
            Err(e) => failed_row(&[z, omega], 5, &e, Vec::new(), hash),
        })
        .collect()
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SweepError {
    #[error("config has no sweep block")]
    NoSweep,
    #[error("no surface resonance to measure detunings from: {0}")]
    NoReference(MaterialError),
}

pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepTable, SweepError> {
    let spec = cfg.sweep.as_ref().ok_or(SweepError::NoSweep)?;
    let omega_res = detuning_reference(cfg).map_err(SweepError::NoReference)?;
    let hash = cfg.hash();
    let rows = match spec.kind {
        SweepKind::Detuning => detuning_rows(cfg, spec, omega_res, &hash),
        SweepKind::Velocity => velocity_rows(cfg, spec, omega_res, &hash),
        SweepKind::PlateCompare => compare_rows(cfg, spec, omega_res, &hash),
    };
    Ok(SweepTable {
        kind: spec.kind,
        config_hash: hash,
        rows,
    })
}
