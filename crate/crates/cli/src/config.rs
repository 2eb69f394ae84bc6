//! Run configuration: defaults, flat key=value config file, command-line
//! overrides (CLI > file > defaults), and validation against the library's
//! preconditions before any computation starts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn parse(s: &str) -> Result<Self, ConfigError> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(ConfigError::new(format!(
                "unknown format '{other}' (expected csv|json|svg)"
            ))),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

/// All tunable parameters of a run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub a1sq: f64,
    pub a2sq: f64,
    pub lambda_gamma: f64,
    pub n: u32,
    pub k: u32,
    pub x0: f64,
    pub resolution: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub perturb: f64,
    pub lambda_caustic: Option<f64>,
    pub lambdas: Vec<f64>,
    pub samples: usize,
    /// Check tolerances by check name; defaults hold the published values.
    pub tolerances: BTreeMap<String, f64>,
}

pub fn default_tolerances() -> BTreeMap<String, f64> {
    let mut t = BTreeMap::new();
    // relative to a1² where the check says so
    t.insert("caustic_invariance".into(), 1e-10);
    t.insert("caustic_dichotomy".into(), 0.0);
    t.insert("chart_central_symmetry".into(), 1e-10);
    t.insert("closure_circle_sanity".into(), 1e-12);
    t.insert("closure_porism".into(), 1e-9);
    t.insert("commutation".into(), 1e-9);
    t.insert("composition_closure".into(), 1e-8);
    t.insert("confocal_gradient_orthogonality".into(), 1e-8);
    t.insert("confocality".into(), 1e-6);
    t.insert("elliptic_roundtrip".into(), 1e-10);
    t.insert("family_dual_pencil".into(), 1e-10);
    t.insert("focal_reflection_identity".into(), 1e-10);
    t.insert("graves_string".into(), 1e-6);
    t.insert("grid_coordinates".into(), 1e-9);
    t.insert("grid_counts".into(), 0.0);
    t.insert("grid_fit_residuals".into(), 1e-8);
    t.insert("ivory_coordinate_preservation".into(), 1e-10);
    t.insert("ivory_equivalence".into(), 1e-8);
    t.insert("measure_preservation".into(), 1e-5);
    t.insert("orthogonality".into(), 1e-8);
    t.insert("porism_closure_defect".into(), 1e-7);
    t.insert("porism_rotation_invariance".into(), 1e-8);
    t.insert("reversibility".into(), 1e-9);
    t.insert("rotation_monotonicity".into(), 0.0);
    t.insert("shift_property".into(), 1e-8);
    t.insert("string_circle_closed_form".into(), 1e-9);
    t.insert("string_constancy".into(), 1e-9);
    t.insert("tangency_consistency".into(), 1e-12);
    t
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            a1sq: 4.0,
            a2sq: 1.0,
            lambda_gamma: 0.0,
            n: 5,
            k: 1,
            x0: 0.0,
            resolution: 4096,
            seed: 42,
            out_dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json, Format::Svg],
            perturb: 0.0,
            lambda_caustic: None,
            lambdas: Vec::new(),
            samples: 256,
            tolerances: default_tolerances(),
        }
    }
}

/// Optional command-line overrides, merged over file values and defaults.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub a1sq: Option<f64>,
    pub a2sq: Option<f64>,
    pub lambda_gamma: Option<f64>,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub x0: Option<f64>,
    pub resolution: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,
    pub perturb: Option<f64>,
    pub lambda_caustic: Option<f64>,
    pub lambdas: Option<String>,
    pub samples: Option<usize>,
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError::new(format!("key '{key}': '{v}' is not a number")))
}

fn parse_list(v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64("lambdas", s))
        .collect()
}

impl RunConfig {
    /// Apply one key = value pair (from file or CLI), rejecting unknown keys.
    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key_norm = key.trim().replace('-', "_");
        match key_norm.as_str() {
            "a1sq" => self.a1sq = parse_f64(key, value)?,
            "a2sq" => self.a2sq = parse_f64(key, value)?,
            "lambda_gamma" => self.lambda_gamma = parse_f64(key, value)?,
            "n" => {
                self.n = value
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError::new(format!("key 'n': bad count '{value}'")))?
            }
            "k" => {
                self.k = value
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError::new(format!("key 'k': bad count '{value}'")))?
            }
            "x0" => self.x0 = parse_f64(key, value)?,
            "resolution" => {
                self.resolution = value.trim().parse().map_err(|_| {
                    ConfigError::new(format!("key 'resolution': bad count '{value}'"))
                })?
            }
            "seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError::new(format!("key 'seed': bad seed '{value}'")))?
            }
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "format" => {
                self.formats = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(Format::parse)
                    .collect::<Result<Vec<_>, _>>()?;
            }
            "perturb" => self.perturb = parse_f64(key, value)?,
            "lambda_caustic" => self.lambda_caustic = Some(parse_f64(key, value)?),
            "lambdas" => self.lambdas = parse_list(value)?,
            "samples" => {
                self.samples = value.trim().parse().map_err(|_| {
                    ConfigError::new(format!("key 'samples': bad count '{value}'"))
                })?
            }
            _ => {
                if let Some(name) = key_norm.strip_prefix("tol.") {
                    if !self.tolerances.contains_key(name) {
                        return Err(ConfigError::new(format!("unknown tolerance '{name}'")));
                    }
                    let v = parse_f64(key, value)?;
                    self.tolerances.insert(name.to_string(), v);
                } else {
                    return Err(ConfigError::new(format!("unknown key '{key}'")));
                }
            }
        }
        Ok(())
    }

    /// Parse a flat key = value config file.
    pub fn apply_file(&mut self, path: &std::path::Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(format!("{}:{}: expected key = value", path.display(), lineno + 1))
            })?;
            self.apply(key, value)?;
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(v) = o.a1sq {
            self.a1sq = v;
        }
        if let Some(v) = o.a2sq {
            self.a2sq = v;
        }
        if let Some(v) = o.lambda_gamma {
            self.lambda_gamma = v;
        }
        if let Some(v) = o.n {
            self.n = v;
        }
        if let Some(v) = o.k {
            self.k = v;
        }
        if let Some(v) = o.x0 {
            self.x0 = v;
        }
        if let Some(v) = o.resolution {
            self.resolution = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.out_dir {
            self.out_dir = v.clone();
        }
        if let Some(v) = &o.format {
            self.formats = v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(Format::parse)
                .collect::<Result<Vec<_>, _>>()?;
        }
        if let Some(v) = o.perturb {
            self.perturb = v;
        }
        if let Some(v) = o.lambda_caustic {
            self.lambda_caustic = Some(v);
        }
        if let Some(v) = &o.lambdas {
            self.lambdas = parse_list(v)?;
        }
        if let Some(v) = o.samples {
            self.samples = v;
        }
        Ok(())
    }

    /// Validate against module preconditions.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.a1sq.is_finite() && self.a2sq.is_finite()) || self.a1sq < self.a2sq || self.a2sq <= 0.0 {
            return Err(ConfigError::new(format!(
                "need a1sq >= a2sq > 0, got ({}, {})",
                self.a1sq, self.a2sq
            )));
        }
        if !self.lambda_gamma.is_finite() || self.lambda_gamma <= -self.a2sq {
            return Err(ConfigError::new(format!(
                "lambda_gamma = {} is not an ellipse member",
                self.lambda_gamma
            )));
        }
        if self.n < 3 || self.n.is_multiple_of(2) {
            return Err(ConfigError::new(format!("n must be odd >= 3, got {}", self.n)));
        }
        if self.k == 0 || self.k > (self.n - 1) / 2 || gcd(self.k, self.n) != 1 {
            return Err(ConfigError::new(format!(
                "k must satisfy 1 <= k <= (n-1)/2, gcd(k, n) = 1; got k={}, n={}",
                self.k, self.n
            )));
        }
        if self.resolution < 64 {
            return Err(ConfigError::new(format!(
                "resolution must be >= 64, got {}",
                self.resolution
            )));
        }
        if self.samples < 4 {
            return Err(ConfigError::new(format!(
                "samples must be >= 4, got {}",
                self.samples
            )));
        }
        if self.formats.is_empty() {
            return Err(ConfigError::new("at least one output format required"));
        }
        if !self.perturb.is_finite() || self.perturb < 0.0 || self.perturb >= 0.5 {
            return Err(ConfigError::new(format!(
                "perturb must be in [0, 0.5), got {}",
                self.perturb
            )));
        }
        if let Some(lc) = self.lambda_caustic {
            if !(lc > -self.a2sq && lc < self.lambda_gamma) {
                return Err(ConfigError::new(format!(
                    "lambda_caustic = {lc} must lie in (-a2sq, lambda_gamma)"
                )));
            }
        }
        for l in &self.lambdas {
            if !(*l > -self.a1sq && *l < self.lambda_gamma) {
                return Err(ConfigError::new(format!(
                    "portrait lambda = {l} outside (-a1sq, lambda_gamma)"
                )));
            }
        }
        Ok(())
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
