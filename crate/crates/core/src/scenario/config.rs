//! Flat `section.key = value` scenario files.
//!
//! ```text
//! # Cs 6P3/2 -> 6S1/2 line between sapphire plates
//! atom.omega_mn_rad_s = 1.544e14
//! atom.dipole_cm = 5.85e-29
//! cavity.L_m = 1e-6
//! ...
//! ```
//!
//! Every problem in a file is reported at once, each with its line number.

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::angular::DipoleSpec;
use crate::constants::constants;
use crate::cp::{CavitySetup, Transition};
use crate::material::MaterialParams;
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Detuning,
    Velocity,
    PlateCompare,
}

impl SweepKind {
    pub fn name(&self) -> &'static str {
        match self {
            SweepKind::Detuning => "detuning",
            SweepKind::Velocity => "velocity",
            SweepKind::PlateCompare => "plate-compare",
        }
    }
}

/// Grid variable of a plate comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareAxis {
    /// Atom–plate distance z, at fixed detuning.
    Z,
    /// Detuning from the surface resonance, at fixed z.
    Detuning,
}

impl CompareAxis {
    pub fn name(&self) -> &'static str {
        match self {
            CompareAxis::Z => "z",
            CompareAxis::Detuning => "detuning",
        }
    }
}

/// Grid `[min, max]` with `points` nodes. Units follow the sweep variable:
/// rad/s for detunings, m/s for velocities, m for distances.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log_scale: bool,
    /// Fixed detunings of a velocity sweep, rad/s.
    pub detunings: Vec<f64>,
    /// Plate comparison only.
    pub axis: CompareAxis,
    /// Fixed detuning of a z comparison, rad/s.
    pub detuning: f64,
    /// Fixed atom–plate distance of a detuning comparison, m.
    pub z: f64,
}

impl SweepSpec {
    /// Nodes in ascending order; geometric when `log_scale`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.max;
                }
                let t = i as f64 / (n - 1) as f64;
                if self.log_scale {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub omega_mn: f64,
    pub dipole: DipoleSpec,
    pub separation: f64,
    pub velocity: f64,
    pub material_plus: MaterialParams,
    pub material_minus: MaterialParams,
    /// Apply one self-consistent shift step before evaluating.
    pub refine_shift: bool,
    pub sweep: Option<SweepSpec>,
    pub quadrature: QuadratureSpec,
}

impl ScenarioConfig {
    pub fn setup(&self) -> CavitySetup {
        CavitySetup {
            separation: self.separation,
            velocity: self.velocity,
            material_plus: self.material_plus,
            material_minus: self.material_minus,
        }
    }

    pub fn transition(&self) -> Transition {
        Transition::new(self.omega_mn, self.dipole)
    }

    /// Canonical text form: one `key = value` line per field in a fixed
    /// order, floats in shortest round-trip notation. Comments, spacing and
    /// key order of the source file do not matter.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("atom.omega_mn_rad_s", format!("{:e}", self.omega_mn));
        match self.dipole {
            DipoleSpec::Isotropic(d) => put("atom.dipole_cm", format!("{d:e}")),
            DipoleSpec::Vector([a, b, c]) => put("atom.dipole_vec_cm", format!("{a:e}, {b:e}, {c:e}")),
        }
        put("atom.refine_shift", self.refine_shift.to_string());
        put("cavity.L_m", format!("{:e}", self.separation));
        put("cavity.v_m_s", format!("{:e}", self.velocity));
        for (name, m) in [("material_plus", &self.material_plus), ("material_minus", &self.material_minus)] {
            put(&format!("{name}.eta"), format!("{:e}", m.eta));
            put(&format!("{name}.omega_T_rad_s"), format!("{:e}", m.omega_t));
            put(&format!("{name}.omega_P_rad_s"), format!("{:e}", m.omega_p));
            put(&format!("{name}.gamma_rad_s"), format!("{:e}", m.gamma));
        }
        if let Some(s) = &self.sweep {
            put("sweep.kind", s.kind.name().to_string());
            put("sweep.min", format!("{:e}", s.min));
            put("sweep.max", format!("{:e}", s.max));
            put("sweep.points", s.points.to_string());
            put("sweep.log_scale", s.log_scale.to_string());
            match s.kind {
                SweepKind::Detuning => {}
                SweepKind::Velocity => {
                    let list: Vec<String> = s.detunings.iter().map(|d| format!("{d:e}")).collect();
                    put("sweep.detunings_rad_s", list.join(", "));
                }
                SweepKind::PlateCompare => {
                    put("sweep.axis", s.axis.name().to_string());
                    match s.axis {
                        CompareAxis::Z => put("sweep.detuning_rad_s", format!("{:e}", s.detuning)),
                        CompareAxis::Detuning => put("sweep.z_m", format!("{:e}", s.z)),
                    }
                }
            }
        }
        let q = &self.quadrature;
        put("quadrature.rel_tol", format!("{:e}", q.rel_tol));
        put("quadrature.abs_tol", format!("{:e}", q.abs_tol));
        put("quadrature.max_subdivisions", q.max_subdivisions.to_string());
        put("quadrature.u_max", format!("{:e}", q.u_max));
        put("quadrature.phi_nodes", q.phi_nodes.to_string());
        put("quadrature.phi_max_doublings", q.phi_max_doublings.to_string());
        out
    }

    /// First 16 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigErrorKind {
    Syntax,
    UnknownKey,
    DuplicateKey,
    MissingKey,
    NonNumeric,
    Invariant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based source line; `None` for keys that are missing altogether.
    pub line: Option<usize>,
    pub kind: ConfigErrorKind,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: ")?,
            None => f.write_str("config: ")?,
        }
        if self.key.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Clone, Copy)]
enum Shape {
    Number,
    Integer,
    Flag,
    Triple,
    List,
    Word(&'static [&'static str]),
}

const MATERIAL_FIELDS: [&str; 4] = ["eta", "omega_T_rad_s", "omega_P_rad_s", "gamma_rad_s"];

fn shape_of(key: &str) -> Option<Shape> {
    use Shape::*;
    let (section, field) = key.split_once('.')?;
    Some(match (section, field) {
        ("atom", "omega_mn_rad_s") | ("atom", "dipole_cm") => Number,
        ("atom", "dipole_vec_cm") => Triple,
        ("atom", "refine_shift") => Flag,
        ("cavity", "L_m") | ("cavity", "v_m_s") => Number,
        ("material_plus" | "material_minus", f) if MATERIAL_FIELDS.contains(&f) => Number,
        ("sweep", "kind") => Word(&["detuning", "velocity", "plate-compare"]),
        ("sweep", "axis") => Word(&["z", "detuning"]),
        ("sweep", "min" | "max" | "detuning_rad_s" | "z_m") => Number,
        ("sweep", "points") => Integer,
        ("sweep", "log_scale") => Flag,
        ("sweep", "detunings_rad_s") => List,
        ("quadrature", "rel_tol" | "abs_tol" | "u_max") => Number,
        ("quadrature", "max_subdivisions" | "phi_nodes" | "phi_max_doublings") => Integer,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Integer(usize),
    Flag(bool),
    Numbers(Vec<f64>),
    Word(String),
}

fn number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_value(shape: Shape, raw: &str) -> Result<Value, (ConfigErrorKind, String)> {
    let non_numeric = || (ConfigErrorKind::NonNumeric, format!("expected a finite number, got `{raw}`"));
    match shape {
        Shape::Number => number(raw).map(Value::Number).ok_or_else(non_numeric),
        Shape::Integer => raw
            .parse::<usize>()
            .map(Value::Integer)
            .map_err(|_| (ConfigErrorKind::NonNumeric, format!("expected a non-negative integer, got `{raw}`"))),
        Shape::Flag => match raw {
            "true" => Ok(Value::Flag(true)),
            "false" => Ok(Value::Flag(false)),
            _ => Err((ConfigErrorKind::Syntax, format!("expected true or false, got `{raw}`"))),
        },
        Shape::Triple | Shape::List => {
            let parts: Option<Vec<f64>> = raw.split(',').map(number).collect();
            let parts = parts.ok_or_else(non_numeric)?;
            if matches!(shape, Shape::Triple) && parts.len() != 3 {
                return Err((ConfigErrorKind::Syntax, format!("expected three components, got {}", parts.len())));
            }
            Ok(Value::Numbers(parts))
        }
        Shape::Word(options) => {
            if options.contains(&raw) {
                Ok(Value::Word(raw.to_string()))
            } else {
                Err((ConfigErrorKind::Syntax, format!("expected one of {}, got `{raw}`", options.join(", "))))
            }
        }
    }
}

struct Entry {
    line: usize,
    value: Value,
}

/// Collects values and errors while the config is assembled.
struct Reader {
    entries: BTreeMap<String, Entry>,
    errors: Vec<ConfigError>,
}

impl Reader {
    fn error(&mut self, line: Option<usize>, kind: ConfigErrorKind, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            kind,
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn missing(&mut self, key: &str) {
        self.error(None, ConfigErrorKind::MissingKey, key, "required key is missing");
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        self.entries.get(key).map(|e| &e.value)
    }

    /// Number at `key` that must satisfy `ok`; `what` describes the rule.
    fn number(&mut self, key: &str, required: bool, ok: impl Fn(f64) -> bool, what: &str) -> Option<f64> {
        match self.raw(key) {
            Some(Value::Number(x)) => {
                let x = *x;
                if ok(x) {
                    Some(x)
                } else {
                    self.error(self.line(key), ConfigErrorKind::Invariant, key, format!("{what}, got {x:e}"));
                    None
                }
            }
            Some(_) => None,
            None => {
                if required {
                    self.missing(key);
                }
                None
            }
        }
    }

    fn integer(&mut self, key: &str, ok: impl Fn(usize) -> bool, what: &str) -> Option<usize> {
        match self.raw(key) {
            Some(Value::Integer(n)) => {
                let n = *n;
                if ok(n) {
                    Some(n)
                } else {
                    self.error(self.line(key), ConfigErrorKind::Invariant, key, format!("{what}, got {n}"));
                    None
                }
            }
            _ => None,
        }
    }

    fn flag(&self, key: &str) -> Option<bool> {
        match self.raw(key) {
            Some(Value::Flag(b)) => Some(*b),
            _ => None,
        }
    }

    fn numbers(&self, key: &str) -> Option<Vec<f64>> {
        match self.raw(key) {
            Some(Value::Numbers(v)) => Some(v.clone()),
            _ => None,
        }
    }

    fn word(&self, key: &str) -> Option<String> {
        match self.raw(key) {
            Some(Value::Word(w)) => Some(w.clone()),
            _ => None,
        }
    }

    /// Rejects a key that has no meaning for the chosen sweep.
    fn forbid(&mut self, key: &str, why: &str) {
        if let Some(line) = self.line(key) {
            self.error(Some(line), ConfigErrorKind::Invariant, key, why.to_string());
        }
    }

    fn material(&mut self, section: &str) -> Option<MaterialParams> {
        let k = |f: &str| format!("{section}.{f}");
        let eta = self.number(&k("eta"), true, |x| x >= 1.0, "must be >= 1");
        let omega_t = self.number(&k("omega_T_rad_s"), true, |x| x > 0.0, "must be > 0");
        let omega_p = self.number(&k("omega_P_rad_s"), true, |x| x >= 0.0, "must be >= 0");
        let gamma = self.number(&k("gamma_rad_s"), true, |x| x > 0.0, "must be > 0");
        let m = MaterialParams {
            eta: eta?,
            omega_t: omega_t?,
            omega_p: omega_p?,
            gamma: gamma?,
        };
        if let Err(e) = m.validate() {
            let line = self.line(&k("eta"));
            self.error(line, ConfigErrorKind::Invariant, section, e.to_string());
            return None;
        }
        Some(m)
    }

    fn sweep(&mut self) -> Option<Option<SweepSpec>> {
        let any = self.entries.keys().any(|k| k.starts_with("sweep."));
        if !any {
            return Some(None);
        }
        let kind = match self.word("sweep.kind").as_deref() {
            Some("detuning") => Some(SweepKind::Detuning),
            Some("velocity") => Some(SweepKind::Velocity),
            Some("plate-compare") => Some(SweepKind::PlateCompare),
            Some(_) => None,
            None => {
                if self.line("sweep.kind").is_none() {
                    self.missing("sweep.kind");
                }
                None
            }
        };
        let log_scale = self.flag("sweep.log_scale").unwrap_or(false);
        let axis = match self.word("sweep.axis").as_deref() {
            Some("detuning") => CompareAxis::Detuning,
            _ => CompareAxis::Z,
        };
        let positive_grid = log_scale || (kind == Some(SweepKind::PlateCompare) && axis == CompareAxis::Z);
        let c = constants().c;
        let (lo_ok, lo_what): (Box<dyn Fn(f64) -> bool>, &str) = match kind {
            _ if positive_grid => (Box::new(|x| x > 0.0), "must be > 0 for this grid"),
            Some(SweepKind::Velocity) => (Box::new(|x| x >= 0.0), "velocities must be >= 0"),
            _ => (Box::new(|_| true), ""),
        };
        let min = self.number("sweep.min", true, &lo_ok, lo_what);
        let max = if kind == Some(SweepKind::Velocity) {
            self.number("sweep.max", true, |x| x < c, "velocities must stay below c")
        } else {
            self.number("sweep.max", true, &lo_ok, lo_what)
        };
        if self.line("sweep.points").is_none() {
            self.missing("sweep.points");
        }
        let points = self.integer("sweep.points", |n| n >= 2, "must be >= 2");
        if let (Some(a), Some(b)) = (min, max) {
            if a >= b {
                let line = self.line("sweep.max");
                self.error(line, ConfigErrorKind::Invariant, "sweep.max", format!("must exceed sweep.min ({a:e})"));
            }
        }

        let mut detunings = Vec::new();
        let mut detuning = 0.0;
        let mut z = 0.0;
        match kind {
            Some(SweepKind::Detuning) => {
                for key in ["sweep.detunings_rad_s", "sweep.axis", "sweep.detuning_rad_s", "sweep.z_m"] {
                    self.forbid(key, "not used by detuning sweeps");
                }
            }
            Some(SweepKind::Velocity) => {
                for key in ["sweep.axis", "sweep.detuning_rad_s", "sweep.z_m"] {
                    self.forbid(key, "not used by velocity sweeps");
                }
                match self.numbers("sweep.detunings_rad_s") {
                    Some(v) if !v.is_empty() => detunings = v,
                    Some(_) => {}
                    None if self.line("sweep.detunings_rad_s").is_none() => self.missing("sweep.detunings_rad_s"),
                    None => {}
                }
            }
            Some(SweepKind::PlateCompare) => {
                self.forbid("sweep.detunings_rad_s", "not used by plate comparisons");
                match axis {
                    CompareAxis::Z => {
                        self.forbid("sweep.z_m", "fixed z is only used with sweep.axis = detuning");
                        detuning = self.number("sweep.detuning_rad_s", false, |_| true, "").unwrap_or(0.0);
                    }
                    CompareAxis::Detuning => {
                        self.forbid("sweep.detuning_rad_s", "fixed detuning is only used with sweep.axis = z");
                        z = self.number("sweep.z_m", true, |x| x > 0.0, "must be > 0")?;
                    }
                }
            }
            None => {}
        }
        Some(Some(SweepSpec {
            kind: kind?,
            min: min?,
            max: max?,
            points: points?,
            log_scale,
            detunings,
            axis,
            detuning,
            z,
        }))
    }

    fn quadrature(&mut self) -> Option<QuadratureSpec> {
        let mut q = QuadratureSpec::default();
        if let Some(x) = self.number("quadrature.rel_tol", false, |x| x > 0.0, "must be > 0") {
            q.rel_tol = x;
        }
        if let Some(x) = self.number("quadrature.abs_tol", false, |x| x >= 0.0, "must be >= 0") {
            q.abs_tol = x;
        }
        if let Some(x) = self.number("quadrature.u_max", false, |x| x >= 20.0, "must be >= 20") {
            q.u_max = x;
        }
        if let Some(n) = self.integer("quadrature.max_subdivisions", |n| n >= 1, "must be >= 1") {
            q.max_subdivisions = n;
        }
        if let Some(n) = self.integer("quadrature.phi_nodes", |n| n >= 2 && n % 2 == 0, "must be even and >= 2") {
            q.phi_nodes = n;
        }
        if let Some(n) = self.integer("quadrature.phi_max_doublings", |n| n <= 20, "must be <= 20") {
            q.phi_max_doublings = n as u32;
        }
        match q.validate() {
            Ok(()) => Some(q),
            Err(e) => {
                self.error(None, ConfigErrorKind::Invariant, "quadrature", e.to_string());
                None
            }
        }
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    let mut r = Reader {
        entries: BTreeMap::new(),
        errors: Vec::new(),
    };
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            r.error(Some(line), ConfigErrorKind::Syntax, "", format!("expected `section.key = value`, got `{content}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(shape) = shape_of(key) else {
            r.error(Some(line), ConfigErrorKind::UnknownKey, key, "unknown key");
            continue;
        };
        if let Some(first) = r.line(key) {
            r.error(Some(line), ConfigErrorKind::DuplicateKey, key, format!("already set on line {first}"));
            continue;
        }
        match parse_value(shape, value) {
            Ok(v) => {
                r.entries.insert(key.to_string(), Entry { line, value: v });
            }
            Err((kind, msg)) => {
                r.error(Some(line), kind, key, msg);
                // remember the line so the key is not also reported missing
                r.entries.insert(key.to_string(), Entry { line, value: Value::Word(String::new()) });
            }
        }
    }

    let omega_mn = r.number("atom.omega_mn_rad_s", true, |x| x != 0.0, "must be non-zero");
    let dipole = match (r.line("atom.dipole_cm"), r.line("atom.dipole_vec_cm")) {
        (Some(_), Some(l)) => {
            r.error(Some(l), ConfigErrorKind::Invariant, "atom.dipole_vec_cm", "give either atom.dipole_cm or atom.dipole_vec_cm, not both");
            None
        }
        (None, None) => {
            r.missing("atom.dipole_cm");
            None
        }
        (Some(_), None) => r
            .number("atom.dipole_cm", true, |x| x > 0.0, "must be > 0")
            .map(DipoleSpec::Isotropic),
        (None, Some(l)) => match r.numbers("atom.dipole_vec_cm") {
            Some(v) if v.iter().any(|&x| x != 0.0) => Some(DipoleSpec::Vector([v[0], v[1], v[2]])),
            Some(_) => {
                r.error(Some(l), ConfigErrorKind::Invariant, "atom.dipole_vec_cm", "dipole vector must be non-zero");
                None
            }
            None => None,
        },
    };
    let refine_shift = r.flag("atom.refine_shift").unwrap_or(false);
    let separation = r.number("cavity.L_m", true, |x| x > 0.0, "must be > 0");
    let c = constants().c;
    let velocity = r.number("cavity.v_m_s", true, |x| (0.0..c).contains(&x), "must lie in [0, c)");
    let material_plus = r.material("material_plus");
    let material_minus = r.material("material_minus");
    let sweep = r.sweep();
    let quadrature = r.quadrature();

    if !r.errors.is_empty() {
        r.errors.sort_by_key(|e| (e.line.unwrap_or(usize::MAX), e.key.clone()));
        return Err(ConfigErrors(r.errors));
    }
    Ok(ScenarioConfig {
        omega_mn: omega_mn.unwrap(),
        dipole: dipole.unwrap(),
        separation: separation.unwrap(),
        velocity: velocity.unwrap(),
        material_plus: material_plus.unwrap(),
        material_minus: material_minus.unwrap(),
        refine_shift,
        sweep: sweep.unwrap(),
        quadrature: quadrature.unwrap(),
    })
}
