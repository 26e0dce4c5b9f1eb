//! Run configuration: potential presets, flag resolution, and a lossless
//! key=value text form used by `--config` files.

use crate::error::{QfeyError, Result};
use crate::grid::{Grid, Potential};
use crate::operators::ExpMethod;
use crate::propagator::FormulaId;

/// Bounded potential presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialPreset {
    Zero,
    Cosine { amp: f64, freq: f64 },
    Sech2 { depth: f64, width: f64 },
    GaussianWell { depth: f64, width: f64 },
}

impl PotentialPreset {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |msg: &str| QfeyError::InvalidParameter(format!("potential '{s}': {msg}"));
        if s == "zero" {
            return Ok(PotentialPreset::Zero);
        }
        let (tag, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("expected zero or tag:params"))?;
        let params: Vec<f64> = rest
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("parameters must be numbers"))?;
        if params.len() != 2 || params.iter().any(|p| !p.is_finite()) {
            return Err(bad("expected two finite parameters"));
        }
        match tag {
            "cosine" => Ok(PotentialPreset::Cosine {
                amp: params[0],
                freq: params[1],
            }),
            "sech2" => Ok(PotentialPreset::Sech2 {
                depth: params[0],
                width: params[1],
            }),
            "gaussian-well" => Ok(PotentialPreset::GaussianWell {
                depth: params[0],
                width: params[1],
            }),
            _ => Err(bad("unknown preset tag")),
        }
    }

    pub fn print(&self) -> String {
        match self {
            PotentialPreset::Zero => "zero".to_string(),
            PotentialPreset::Cosine { amp, freq } => format!("cosine:{amp},{freq}"),
            PotentialPreset::Sech2 { depth, width } => format!("sech2:{depth},{width}"),
            PotentialPreset::GaussianWell { depth, width } => {
                format!("gaussian-well:{depth},{width}")
            }
        }
    }

    pub fn sample(&self, grid: Grid) -> Result<Potential> {
        match *self {
            PotentialPreset::Zero => Ok(Potential::zero(grid)),
            PotentialPreset::Cosine { amp, freq } => {
                Potential::sample(grid, |x| amp * (freq * x).cos())
            }
            PotentialPreset::Sech2 { depth, width } => {
                if width == 0.0 {
                    return Err(QfeyError::InvalidParameter("sech2 width must be nonzero".into()));
                }
                Potential::sample(grid, |x| -depth / (x / width).cosh().powi(2))
            }
            PotentialPreset::GaussianWell { depth, width } => {
                if width == 0.0 {
                    return Err(QfeyError::InvalidParameter(
                        "gaussian-well width must be nonzero".into(),
                    ));
                }
                Potential::sample(grid, |x| -depth * (-x * x / (2.0 * width * width)).exp())
            }
        }
    }
}

/// Which tangent family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    HeatGauss,
    Polyharmonic,
}

impl FamilyKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "heat-gauss" => Ok(FamilyKind::HeatGauss),
            "polyharmonic" => Ok(FamilyKind::Polyharmonic),
            _ => Err(QfeyError::InvalidParameter(format!(
                "unknown family '{s}' (expected heat-gauss or polyharmonic)"
            ))),
        }
    }

    pub fn print(&self) -> &'static str {
        match self {
            FamilyKind::HeatGauss => "heat-gauss",
            FamilyKind::Polyharmonic => "polyharmonic",
        }
    }
}

/// Exponential method selector (concrete tolerances are fixed here so a
/// config round-trips through its tag).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpMethodChoice {
    Taylor,
    Euler,
    ScalingSquaring,
}

impl ExpMethodChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "taylor" => Ok(ExpMethodChoice::Taylor),
            "euler" => Ok(ExpMethodChoice::Euler),
            "scaling-squaring" => Ok(ExpMethodChoice::ScalingSquaring),
            _ => Err(QfeyError::InvalidParameter(format!(
                "unknown exp method '{s}'"
            ))),
        }
    }

    pub fn print(&self) -> &'static str {
        match self {
            ExpMethodChoice::Taylor => "taylor",
            ExpMethodChoice::Euler => "euler",
            ExpMethodChoice::ScalingSquaring => "scaling-squaring",
        }
    }

    pub fn to_method(self) -> ExpMethod {
        match self {
            ExpMethodChoice::Taylor => ExpMethod::taylor(1e-13),
            ExpMethodChoice::Euler => ExpMethod::Euler { k: 1 << 16 },
            ExpMethodChoice::ScalingSquaring => ExpMethod::scaling_squaring(1e-13),
        }
    }
}

/// Reference used by convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Oracle,
    Analytic,
}

impl ReferenceKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(ReferenceKind::Oracle),
            "analytic" => Ok(ReferenceKind::Analytic),
            _ => Err(QfeyError::InvalidParameter(format!(
                "unknown reference '{s}' (expected oracle or analytic)"
            ))),
        }
    }

    pub fn print(&self) -> &'static str {
        match self {
            ReferenceKind::Oracle => "oracle",
            ReferenceKind::Analytic => "analytic",
        }
    }
}

/// Fully resolved run configuration shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub family: FamilyKind,
    pub n_order: usize,
    pub potential: PotentialPreset,
    pub grid: (f64, f64, usize),
    pub a: f64,
    pub t: f64,
    pub n: usize,
    pub n_list: Option<Vec<usize>>,
    pub exp_method: ExpMethodChoice,
    pub formula: FormulaId,
    pub k: Option<usize>,
    pub packet: (f64, f64, f64),
    pub reference: ReferenceKind,
    pub t_samples: Option<Vec<f64>>,
    pub three_point: bool,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: FamilyKind::HeatGauss,
            n_order: 2,
            potential: PotentialPreset::Zero,
            grid: (-20.0, 20.0, 256),
            a: 1.0,
            t: 0.5,
            n: 16,
            n_list: None,
            exp_method: ExpMethodChoice::ScalingSquaring,
            formula: FormulaId::F1Product,
            k: None,
            packet: (0.0, 2.0, 1.0),
            reference: ReferenceKind::Oracle,
            t_samples: None,
            three_point: false,
            out: None,
        }
    }
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| QfeyError::InvalidParameter(format!("bad number '{p}'")))
        })
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| QfeyError::InvalidParameter(format!("bad integer '{p}'")))
        })
        .collect()
}

impl RunConfig {
    /// Text form: one `key=value` per line. `parse(print(c)) == c`.
    pub fn print(&self) -> String {
        let mut lines = vec![
            format!("family={}", self.family.print()),
            format!("N={}", self.n_order),
            format!("potential={}", self.potential.print()),
            format!("grid={},{},{}", self.grid.0, self.grid.1, self.grid.2),
            format!("a={}", self.a),
            format!("t={}", self.t),
            format!("n={}", self.n),
            format!("exp_method={}", self.exp_method.print()),
            format!("formula={}", self.formula.name()),
            format!(
                "packet={},{},{}",
                self.packet.0, self.packet.1, self.packet.2
            ),
            format!("reference={}", self.reference.print()),
            format!("three_point={}", self.three_point),
        ];
        if let Some(list) = &self.n_list {
            lines.push(format!(
                "n_list={}",
                list.iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ));
        }
        if let Some(k) = self.k {
            lines.push(format!("k={k}"));
        }
        if let Some(ts) = &self.t_samples {
            lines.push(format!("t_samples={}", join_f64(ts)));
        }
        if let Some(out) = &self.out {
            lines.push(format!("out={out}"));
        }
        lines.join("\n") + "\n"
    }

    /// Parse the key=value text form, starting from defaults. Blank lines
    /// and `#` comments are ignored; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                QfeyError::InvalidParameter(format!(
                    "config line {}: expected key=value, got '{line}'",
                    lineno + 1
                ))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad_num =
            |k: &str, v: &str| QfeyError::InvalidParameter(format!("bad value for {k}: '{v}'"));
        match key {
            "family" => self.family = FamilyKind::parse(value)?,
            "N" => self.n_order = value.parse().map_err(|_| bad_num(key, value))?,
            "potential" => self.potential = PotentialPreset::parse(value)?,
            "grid" => {
                let parts = parse_f64_list(value)?;
                if parts.len() != 3 || parts[2].fract() != 0.0 || parts[2] < 0.0 {
                    return Err(QfeyError::InvalidParameter(format!(
                        "grid expects min,max,m with integer m, got '{value}'"
                    )));
                }
                self.grid = (parts[0], parts[1], parts[2] as usize);
            }
            "a" => self.a = value.parse().map_err(|_| bad_num(key, value))?,
            "t" => self.t = value.parse().map_err(|_| bad_num(key, value))?,
            "n" => self.n = value.parse().map_err(|_| bad_num(key, value))?,
            "n_list" => self.n_list = Some(parse_usize_list(value)?),
            "exp_method" => self.exp_method = ExpMethodChoice::parse(value)?,
            "formula" => self.formula = FormulaId::parse(value)?,
            "k" => self.k = Some(value.parse().map_err(|_| bad_num(key, value))?),
            "packet" => {
                let parts = parse_f64_list(value)?;
                if parts.len() != 3 {
                    return Err(QfeyError::InvalidParameter(format!(
                        "packet expects x0,p0,sigma, got '{value}'"
                    )));
                }
                self.packet = (parts[0], parts[1], parts[2]);
            }
            "reference" => self.reference = ReferenceKind::parse(value)?,
            "t_samples" => self.t_samples = Some(parse_f64_list(value)?),
            "three_point" => {
                self.three_point = value.parse().map_err(|_| bad_num(key, value))?
            }
            "out" => self.out = Some(value.to_string()),
            _ => {
                return Err(QfeyError::InvalidParameter(format!(
                    "unknown config key '{key}'"
                )))
            }
        }
        Ok(())
    }

    pub fn make_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.0, self.grid.1, self.grid.2)
    }
}
