//! Plain-text experiment configuration: one `key = value` pair per line, `#` comments.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{make_disk, make_ellipse, make_perturbed_disk, PatchBoundary, MIN_NODES};

/// Initial patch shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialShape {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `r(θ) = 1 + η cos(mθ)`.
    Perturbed { mode: u32, amplitude: f64 },
}

impl InitialShape {
    pub fn boundary(&self, nodes: usize) -> Result<PatchBoundary> {
        match *self {
            InitialShape::Disk { radius } => make_disk(radius, nodes),
            InitialShape::Ellipse { a, b } => make_ellipse(a, b, nodes),
            InitialShape::Perturbed { mode, amplitude } => make_perturbed_disk(mode, amplitude, nodes),
        }
    }
}

impl fmt::Display for InitialShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialShape::Disk { radius } => write!(f, "disk({radius:?})"),
            InitialShape::Ellipse { a, b } => write!(f, "ellipse({a:?}, {b:?})"),
            InitialShape::Perturbed { mode, amplitude } => write!(f, "perturbed({mode}, {amplitude:?})"),
        }
    }
}

impl FromStr for InitialShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (name, rest) = s.split_once('(').ok_or_else(|| format!("expected shape(args), got `{s}`"))?;
        let args = rest.strip_suffix(')').ok_or_else(|| format!("missing `)` in `{s}`"))?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let num = |k: usize| -> std::result::Result<f64, String> {
            args[k].parse::<f64>().map_err(|_| format!("`{}` is not a number", args[k]))
        };
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(format!("{} takes {n} argument(s), got {}", name.trim(), args.len()))
            }
        };
        match name.trim() {
            "disk" => {
                arity(1)?;
                Ok(InitialShape::Disk { radius: num(0)? })
            }
            "ellipse" => {
                arity(2)?;
                Ok(InitialShape::Ellipse { a: num(0)?, b: num(1)? })
            }
            "perturbed" => {
                arity(2)?;
                let mode = args[0].parse::<u32>().map_err(|_| format!("`{}` is not a mode number", args[0]))?;
                Ok(InitialShape::Perturbed { mode, amplitude: num(1)? })
            }
            other => Err(format!("unknown shape `{other}` (expected disk, ellipse or perturbed)")),
        }
    }
}

/// Velocity field driving the run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldMode {
    /// Contour dynamics of the evolving boundary.
    Contour,
    /// Frozen unit-disk field; the boundary and tracers rotate rigidly-by-radius.
    ExactDisk,
}

impl fmt::Display for FieldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldMode::Contour => "contour",
            FieldMode::ExactDisk => "exact_disk",
        })
    }
}

impl FromStr for FieldMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "contour" => Ok(FieldMode::Contour),
            "exact_disk" => Ok(FieldMode::ExactDisk),
            other => Err(format!("unknown field mode `{other}` (expected contour or exact_disk)")),
        }
    }
}

pub const MIN_TRACERS: usize = 1;
pub const MIN_PROBES: usize = 1;

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub initial_shape: InitialShape,
    pub nodes: usize,
    pub tracers: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot and `H_{T_n}` series interval.
    pub snapshot_dt: f64,
    pub seed: u64,
    pub field_mode: FieldMode,
    pub epsilon_override: Option<f64>,
    pub output_dir: PathBuf,
    /// Allowed ratio of per-step travel `U_max·dt` to the minimum node spacing.
    pub cfl: f64,
    /// Remesh bounds; default to 0.5× and 2× the initial mean node spacing.
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub r_guard: f64,
    pub rho_min: f64,
    /// Points in `B_2` where `|u − u_D|` is sampled.
    pub probes: usize,
    /// Measured `δ` at or below this is treated as an exact disk (`ε = 0`).
    pub delta_floor: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            initial_shape: InitialShape::Disk { radius: 1.0 },
            nodes: 1024,
            tracers: 1000,
            dt: 0.01,
            t_end: 10.0,
            snapshot_dt: 1.0,
            seed: 0,
            field_mode: FieldMode::Contour,
            epsilon_override: None,
            output_dir: PathBuf::from("patchwind-out"),
            cfl: 10.0,
            h_min: None,
            h_max: None,
            r_guard: 10.0,
            rho_min: 1e-8,
            probes: 400,
            delta_floor: 1e-4,
        }
    }
}

/// Keys in serialization order.
pub const KEYS: &[&str] = &[
    "initial_shape",
    "nodes",
    "tracers",
    "dt",
    "t_end",
    "snapshot_dt",
    "seed",
    "field_mode",
    "epsilon_override",
    "output_dir",
    "cfl",
    "h_min",
    "h_max",
    "r_guard",
    "rho_min",
    "probes",
    "delta_floor",
];

fn parse_num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|_| format!("cannot parse `{v}`"))
}

fn parse_opt(v: &str) -> std::result::Result<Option<f64>, String> {
    if v == "none" || v == "auto" {
        Ok(None)
    } else {
        parse_num(v).map(Some)
    }
}

fn fmt_opt(v: Option<f64>, none: &str) -> String {
    v.map_or_else(|| none.to_string(), |x| format!("{x:?}"))
}

impl SimConfig {
    /// Parses and validates config text. Missing keys take their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::ConfigParse { line: line_no, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) && KEYS.contains(&key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            cfg.set(key, value.trim()).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Assigns one key from its textual value, without validation.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "initial_shape" => self.initial_shape = value.parse()?,
            "nodes" => self.nodes = parse_num(value)?,
            "tracers" => self.tracers = parse_num(value)?,
            "dt" => self.dt = parse_num(value)?,
            "t_end" => self.t_end = parse_num(value)?,
            "snapshot_dt" => self.snapshot_dt = parse_num(value)?,
            "seed" => self.seed = parse_num(value)?,
            "field_mode" => self.field_mode = value.parse()?,
            "epsilon_override" => self.epsilon_override = parse_opt(value)?,
            "output_dir" => {
                if value.is_empty() {
                    return Err("output_dir must not be empty".into());
                }
                self.output_dir = PathBuf::from(value)
            }
            "cfl" => self.cfl = parse_num(value)?,
            "h_min" => self.h_min = parse_opt(value)?,
            "h_max" => self.h_max = parse_opt(value)?,
            "r_guard" => self.r_guard = parse_num(value)?,
            "rho_min" => self.rho_min = parse_num(value)?,
            "probes" => self.probes = parse_num(value)?,
            "delta_floor" => self.delta_floor = parse_num(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: 0,
            message: format!("override must be key=value, got `{assignment}`"),
        })?;
        self.set(k.trim(), v.trim()).map_err(|message| Error::ConfigParse { line: 0, message })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| Err(Error::ConfigValidation { field: field.into(), message });
        let positive = |field: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                bad(field, format!("must be positive and finite, got {v}"))
            }
        };
        match self.initial_shape {
            InitialShape::Disk { radius } => positive("initial_shape", radius)?,
            InitialShape::Ellipse { a, b } => {
                positive("initial_shape", a)?;
                positive("initial_shape", b)?;
            }
            InitialShape::Perturbed { mode, amplitude } => {
                if mode < 2 || !(amplitude.abs() < 0.5) {
                    return bad("initial_shape", format!("perturbed needs mode ≥ 2 and |η| < 0.5, got ({mode}, {amplitude})"));
                }
            }
        }
        if self.nodes < MIN_NODES {
            return bad("nodes", format!("need at least {MIN_NODES}, got {}", self.nodes));
        }
        if self.tracers < MIN_TRACERS {
            return bad("tracers", format!("need at least {MIN_TRACERS}, got {}", self.tracers));
        }
        positive("dt", self.dt)?;
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad("t_end", format!("must be nonnegative and finite, got {}", self.t_end));
        }
        positive("snapshot_dt", self.snapshot_dt)?;
        if let Some(e) = self.epsilon_override {
            if !(0.0..1.0).contains(&e) {
                return bad("epsilon_override", format!("must lie in [0, 1), got {e}"));
            }
        }
        positive("cfl", self.cfl)?;
        if let Some(h) = self.h_min {
            positive("h_min", h)?;
        }
        if let Some(h) = self.h_max {
            positive("h_max", h)?;
        }
        if let (Some(lo), Some(hi)) = (self.h_min, self.h_max) {
            if lo * 2.0 > hi {
                return bad("h_max", format!("must be at least 2·h_min = {}, got {hi}", 2.0 * lo));
            }
        }
        positive("r_guard", self.r_guard)?;
        positive("rho_min", self.rho_min)?;
        if self.probes < MIN_PROBES {
            return bad("probes", format!("need at least {MIN_PROBES}, got {}", self.probes));
        }
        if !(self.delta_floor.is_finite() && self.delta_floor >= 0.0) {
            return bad("delta_floor", format!("must be nonnegative, got {}", self.delta_floor));
        }
        Ok(())
    }

    /// Remesh bounds given the initial mean node spacing `h0`.
    pub fn spacing_bounds(&self, h0: f64) -> (f64, f64) {
        let lo = self.h_min.unwrap_or(0.5 * h0);
        let hi = self.h_max.unwrap_or(2.0 * h0).max(2.0 * lo);
        (lo, hi)
    }

    /// Canonical text form; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let values = [
            self.initial_shape.to_string(),
            self.nodes.to_string(),
            self.tracers.to_string(),
            format!("{:?}", self.dt),
            format!("{:?}", self.t_end),
            format!("{:?}", self.snapshot_dt),
            self.seed.to_string(),
            self.field_mode.to_string(),
            fmt_opt(self.epsilon_override, "none"),
            self.output_dir.display().to_string(),
            format!("{:?}", self.cfl),
            fmt_opt(self.h_min, "auto"),
            fmt_opt(self.h_max, "auto"),
            format!("{:?}", self.r_guard),
            format!("{:?}", self.rho_min),
            self.probes.to_string(),
            format!("{:?}", self.delta_floor),
        ];
        KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = SimConfig::parse("initial_shape = disk(1.0)\n").unwrap();
        assert_eq!(c, SimConfig::default());
    }

    #[test]
    fn negative_dt_names_the_field() {
        match SimConfig::parse("initial_shape = disk(1.0)\ndt = -0.1") {
            Err(Error::ConfigValidation { field, .. }) => assert_eq!(field, "dt"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match SimConfig::parse("# header\n\nnodes = 64\nbogus = 3\n") {
            Err(Error::ConfigParse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(SimConfig::parse("nodes 64"), Err(Error::ConfigParse { line: 1, .. })));
        assert!(matches!(SimConfig::parse("nodes = many"), Err(Error::ConfigParse { line: 1, .. })));
        assert!(matches!(SimConfig::parse("nodes = 1\nnodes = 2"), Err(Error::ConfigParse { line: 2, .. })));
    }

    #[test]
    fn shapes_parse() {
        assert_eq!("ellipse(1.05, 0.95)".parse(), Ok(InitialShape::Ellipse { a: 1.05, b: 0.95 }));
        assert_eq!("perturbed(2,0.05)".parse(), Ok(InitialShape::Perturbed { mode: 2, amplitude: 0.05 }));
        assert!("square(1)".parse::<InitialShape>().is_err());
        assert!("disk(1, 2)".parse::<InitialShape>().is_err());
        assert!(SimConfig::parse("initial_shape = perturbed(1, 0.1)").is_err());
    }

    #[test]
    fn theorem_config_round_trips() {
        let text = "initial_shape = perturbed(2, 0.03)  # δ ≈ 0.12\nnodes = 1024\ntracers = 10000\n\
                    dt = 0.025\nt_end = 50\nsnapshot_dt = 5\nseed = 7\nfield_mode = contour\n\
                    epsilon_override = none\noutput_dir = out/sweep\nh_min = 0.003\n";
        let c = SimConfig::parse(text).unwrap();
        assert_eq!(c.tracers, 10_000);
        assert_eq!(c.h_min, Some(0.003));
        let normalized = c.to_text();
        assert_eq!(SimConfig::parse(&normalized).unwrap(), c);
        assert_eq!(SimConfig::parse(&normalized).unwrap().to_text(), normalized);
    }

    #[test]
    fn overrides() {
        let mut c = SimConfig::default();
        c.apply_override("t_end=2.5").unwrap();
        c.apply_override("field_mode = exact_disk").unwrap();
        assert_eq!(c.t_end, 2.5);
        assert_eq!(c.field_mode, FieldMode::ExactDisk);
        assert!(c.apply_override("nope=1").is_err());
    }
}
