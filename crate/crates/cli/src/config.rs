use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dcl_core::{classical_barrier, ControlParams, ModelParams, Preset, Scheme};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ValueCurve,
    ValueSurface,
    BarrierCurve,
    Verify,
    Simulate,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::ValueCurve,
        Experiment::ValueSurface,
        Experiment::BarrierCurve,
        Experiment::Verify,
        Experiment::Simulate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::ValueCurve => "value-curve",
            Experiment::ValueSurface => "value-surface",
            Experiment::BarrierCurve => "barrier-curve",
            Experiment::Verify => "verify",
            Experiment::Simulate => "simulate",
        }
    }

    fn default_preset(&self) -> Preset {
        match self {
            Experiment::ValueSurface => Preset::Fig2,
            Experiment::BarrierCurve => Preset::Fig3,
            _ => Preset::Fig1Top,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
pub enum SchemeArg {
    #[value(name = "em")]
    #[serde(rename = "em")]
    EulerMaruyama,
    #[value(name = "piecewise")]
    #[serde(rename = "piecewise")]
    PiecewiseNoise,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::EulerMaruyama => Scheme::EulerMaruyama,
            SchemeArg::PiecewiseNoise => Scheme::PiecewiseNoise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    /// Discounted dividends paid under the barrier strategy `b`.
    Dividends,
    /// Laplace transform of the OU first-passage time below `level`.
    FirstPassage,
    /// Discounted exit through `level` before ruin, without dividends.
    TwoSided,
    /// Discounted integral of the OU process.
    LinearOu,
}

/// Settings that can come from flags or from a config file. Every field is
/// optional; unset fields fall back to the preset.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Named parameter set: fig1-top, fig1-bottom, fig2, fig3 or remark.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Discount rate.
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// Dividend rate coefficient.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Initial surplus.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Barrier; defaults to the optimal one.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_max: Option<f64>,
    #[arg(long, global = true)]
    pub grid_count: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_k_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_k_max: Option<f64>,
    #[arg(long, global = true)]
    pub grid_k_count: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub grid_k_spacing: Option<Spacing>,
    #[arg(long, global = true)]
    pub paths: Option<u64>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Simulation horizon; planned from a pilot run when absent.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub functional: Option<Functional>,
    /// Level `a` for the first-passage and two-sided functionals.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub level: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Validation(format!("{key} = {value}: {e}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> CliResult<T> {
    T::from_str(value, false).map_err(|e| CliError::Validation(format!("{key} = {value}: {e}")))
}

impl Overrides {
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "preset" => self.preset = Some(value.to_string()),
            "mu" => self.mu = Some(parse(key, value)?),
            "sigma" => self.sigma = Some(parse(key, value)?),
            "q" => self.q = Some(parse(key, value)?),
            "k" => self.k = Some(parse(key, value)?),
            "x0" => self.x0 = Some(parse(key, value)?),
            "b" => self.b = Some(parse(key, value)?),
            "grid-min" => self.grid_min = Some(parse(key, value)?),
            "grid-max" => self.grid_max = Some(parse(key, value)?),
            "grid-count" => self.grid_count = Some(parse(key, value)?),
            "grid-k-min" => self.grid_k_min = Some(parse(key, value)?),
            "grid-k-max" => self.grid_k_max = Some(parse(key, value)?),
            "grid-k-count" => self.grid_k_count = Some(parse(key, value)?),
            "grid-k-spacing" => self.grid_k_spacing = Some(parse_enum(key, value)?),
            "paths" => self.paths = Some(parse(key, value)?),
            "step" => self.step = Some(parse(key, value)?),
            "seed" => self.seed = Some(parse(key, value)?),
            "scheme" => self.scheme = Some(parse_enum(key, value)?),
            "horizon" => self.horizon = Some(parse(key, value)?),
            "functional" => self.functional = Some(parse_enum(key, value)?),
            "level" => self.level = Some(parse(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Some(parse_enum(key, value)?),
            _ => return Err(CliError::Validation(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(self, other: Overrides) -> Overrides {
        Overrides {
            preset: other.preset.or(self.preset),
            mu: other.mu.or(self.mu),
            sigma: other.sigma.or(self.sigma),
            q: other.q.or(self.q),
            k: other.k.or(self.k),
            x0: other.x0.or(self.x0),
            b: other.b.or(self.b),
            grid_min: other.grid_min.or(self.grid_min),
            grid_max: other.grid_max.or(self.grid_max),
            grid_count: other.grid_count.or(self.grid_count),
            grid_k_min: other.grid_k_min.or(self.grid_k_min),
            grid_k_max: other.grid_k_max.or(self.grid_k_max),
            grid_k_count: other.grid_k_count.or(self.grid_k_count),
            grid_k_spacing: other.grid_k_spacing.or(self.grid_k_spacing),
            paths: other.paths.or(self.paths),
            step: other.step.or(self.step),
            seed: other.seed.or(self.seed),
            scheme: other.scheme.or(self.scheme),
            horizon: other.horizon.or(self.horizon),
            functional: other.functional.or(self.functional),
            level: other.level.or(self.level),
            out: other.out.or(self.out),
            format: other.format.or(self.format),
        }
    }
}

/// Keys outside any section apply to every experiment; keys under
/// `[value-curve]` etc. apply to that experiment only and win over them.
#[derive(Debug, Default)]
pub struct ConfigFile {
    common: Overrides,
    sections: Vec<(Experiment, Overrides)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut file = ConfigFile::default();
        let mut current: Option<Experiment> = None;
        let mut seen = BTreeSet::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let err = |msg: String| CliError::Validation(format!("line {}: {msg}", no + 1));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                current = if name == "common" {
                    None
                } else {
                    let exp = Experiment::ALL
                        .into_iter()
                        .find(|e| e.name() == name)
                        .ok_or_else(|| err(format!("unknown section [{name}]")))?;
                    if !seen.insert(name.to_string()) {
                        return Err(err(format!("duplicate section [{name}]")));
                    }
                    file.sections.push((exp, Overrides::default()));
                    Some(exp)
                };
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let target = match current {
                None => &mut file.common,
                Some(_) => &mut file.sections.last_mut().expect("section pushed").1,
            };
            target
                .set(key.trim(), value.trim())
                .map_err(|e| err(e.to_string()))?;
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn for_experiment(&self, exp: Experiment) -> Overrides {
        let mut out = self.common.clone();
        for (e, o) in &self.sections {
            if *e == exp {
                out = out.merge(o.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    fn validate(&self, what: &str) -> CliResult<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(CliError::Validation(format!("{what} range must be finite")));
        }
        if self.min > self.max {
            return Err(CliError::Validation(format!(
                "{what} range is empty: min {} > max {}",
                self.min, self.max
            )));
        }
        if self.count == 0 {
            return Err(CliError::Validation(format!("{what} count must be >= 2")));
        }
        if self.count == 1 && self.min != self.max {
            return Err(CliError::Validation(format!(
                "{what} count must be >= 2 (1 is allowed only when min == max)"
            )));
        }
        if self.count >= 2 && self.min == self.max {
            return Err(CliError::Validation(format!(
                "{what} range is empty: min == max with count {}",
                self.count
            )));
        }
        Ok(())
    }

    pub fn points(&self, spacing: Spacing) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                let x = match spacing {
                    Spacing::Lin => self.min + (self.max - self.min) * t,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                };
                // land exactly on the endpoints
                if i == 0 {
                    self.min
                } else if i == self.count - 1 {
                    self.max
                } else {
                    x
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KGridSpec {
    #[serde(flatten)]
    pub range: GridSpec,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSpec {
    pub paths: u64,
    pub step: f64,
    pub seed: u64,
    pub scheme: SchemeArg,
    pub horizon: Option<f64>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub preset: Option<String>,
    pub model: ModelParams,
    pub control: ControlParams,
    pub x0: f64,
    /// Explicit barrier; `None` means the optimal barrier.
    pub b: Option<f64>,
    pub grid: Option<GridSpec>,
    pub k_grid: Option<KGridSpec>,
    pub sim: Option<SimSpec>,
    pub functional: Option<Functional>,
    pub level: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn require_positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be > 0, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn resolve(exp: Experiment, o: Overrides) -> CliResult<Self> {
        let preset = match &o.preset {
            Some(name) => Preset::from_name(name)?,
            None => exp.default_preset(),
        };
        let base_m = preset.model();
        let base_c = preset.control();
        let model = ModelParams {
            mu: o.mu.unwrap_or(base_m.mu),
            sigma: o.sigma.unwrap_or(base_m.sigma),
        };
        let control = ControlParams {
            q: o.q.unwrap_or(base_c.q),
            k: o.k.unwrap_or(base_c.k),
        };
        if !model.mu.is_finite() {
            return Err(CliError::Validation(format!(
                "mu must be finite, got {}",
                model.mu
            )));
        }
        require_positive("sigma", model.sigma)?;
        require_positive("q", control.q)?;
        let needs_k = !(exp == Experiment::Simulate && o.functional == Some(Functional::TwoSided));
        if needs_k {
            require_positive("k", control.k)?;
        } else if !(control.k >= 0.0) {
            return Err(CliError::Validation(format!(
                "k must be >= 0, got {}",
                control.k
            )));
        }
        let x0 = o.x0.unwrap_or(preset.x0());
        if !x0.is_finite() {
            return Err(CliError::Validation(format!("x0 must be finite, got {x0}")));
        }
        if let Some(b) = o.b {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(CliError::Validation(format!("b must be >= 0, got {b}")));
            }
        }

        let needs_optimum = matches!(
            exp,
            Experiment::ValueCurve | Experiment::ValueSurface | Experiment::BarrierCurve
        ) || (o.b.is_none()
            && (exp == Experiment::Verify
                || o.functional.unwrap_or(Functional::Dividends) == Functional::Dividends));
        if needs_optimum && !(model.mu > 0.0) {
            return Err(CliError::Validation(format!(
                "the optimal barrier needs mu > 0, got {}",
                model.mu
            )));
        }

        let grid = match exp {
            Experiment::ValueCurve | Experiment::ValueSurface => {
                let c_star = classical_barrier(&model, &control)?;
                Some(GridSpec {
                    min: o.grid_min.unwrap_or(0.0),
                    max: o.grid_max.unwrap_or(c_star),
                    count: o.grid_count.unwrap_or(if exp == Experiment::ValueCurve {
                        401
                    } else {
                        101
                    }),
                })
            }
            Experiment::Verify => {
                let top = 3.0 * classical_barrier(&model, &control)?.max(model.sigma);
                Some(GridSpec {
                    min: o.grid_min.unwrap_or(top / 1000.0),
                    max: o.grid_max.unwrap_or(top),
                    count: o.grid_count.unwrap_or(1000),
                })
            }
            _ => None,
        };
        if let Some(g) = &grid {
            g.validate("grid")?;
            let lowest_ok = match exp {
                Experiment::Verify => g.min > 0.0,
                _ => g.min >= 0.0,
            };
            if !lowest_ok {
                return Err(CliError::Validation(format!(
                    "grid must start {} 0, got {}",
                    if exp == Experiment::Verify {
                        "above"
                    } else {
                        "at or above"
                    },
                    g.min
                )));
            }
        }

        let k_grid = match exp {
            Experiment::ValueSurface | Experiment::BarrierCurve => {
                let (lo, hi) = preset.k_range();
                let default_spacing = if exp == Experiment::BarrierCurve {
                    Spacing::Log
                } else {
                    Spacing::Lin
                };
                let spec = KGridSpec {
                    range: GridSpec {
                        min: o.grid_k_min.unwrap_or(lo),
                        max: o.grid_k_max.unwrap_or(hi),
                        count: o.grid_k_count.unwrap_or(40),
                    },
                    spacing: o.grid_k_spacing.unwrap_or(default_spacing),
                };
                spec.range.validate("K grid")?;
                require_positive("K grid minimum", spec.range.min)?;
                Some(spec)
            }
            _ => None,
        };

        let sim = match exp {
            Experiment::Verify | Experiment::Simulate => {
                let (paths, step) = if exp == Experiment::Verify {
                    (4000, 1e-2)
                } else {
                    (10_000, 1e-3)
                };
                let spec = SimSpec {
                    paths: o.paths.unwrap_or(paths),
                    step: o.step.unwrap_or(step),
                    seed: o.seed.unwrap_or(42),
                    scheme: o.scheme.unwrap_or(SchemeArg::EulerMaruyama),
                    horizon: o.horizon,
                };
                if spec.paths == 0 {
                    return Err(CliError::Validation("paths must be >= 1".into()));
                }
                require_positive("step", spec.step)?;
                if let Some(t) = spec.horizon {
                    if !(t >= spec.step && t.is_finite()) {
                        return Err(CliError::Validation(format!(
                            "horizon must be finite and >= step, got {t}"
                        )));
                    }
                }
                Some(spec)
            }
            _ => None,
        };

        let (functional, level) = if exp == Experiment::Simulate {
            let f = o.functional.unwrap_or(Functional::Dividends);
            let level = match f {
                Functional::FirstPassage | Functional::TwoSided => {
                    Some(o.level.ok_or_else(|| {
                        CliError::Validation(format!("functional {f:?} needs --level"))
                    })?)
                }
                _ => None,
            };
            (Some(f), level)
        } else {
            (None, None)
        };

        let format = o.format.unwrap_or(match exp {
            Experiment::Verify | Experiment::Simulate => Format::Json,
            _ => Format::Csv,
        });
        if format == Format::Csv && matches!(exp, Experiment::Verify | Experiment::Simulate) {
            return Err(CliError::Validation(format!(
                "{} writes json only",
                exp.name()
            )));
        }

        Ok(ExperimentConfig {
            experiment: exp,
            preset: Some(preset.name().to_string()),
            model,
            control,
            x0,
            b: o.b,
            grid,
            k_grid,
            sim,
            functional,
            level,
            out: o.out,
            format,
        })
    }

    /// `(key, value)` pairs echoed at the top of CSV output.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("experiment", self.experiment.name().to_string()),
            ("preset", self.preset.clone().unwrap_or_default()),
            ("mu", self.model.mu.to_string()),
            ("sigma", self.model.sigma.to_string()),
            ("q", self.control.q.to_string()),
            ("k", self.control.k.to_string()),
            ("x0", self.x0.to_string()),
            ("b", self.b.map_or("optimal".into(), |b| b.to_string())),
        ];
        if let Some(g) = &self.grid {
            out.push(("grid-min", g.min.to_string()));
            out.push(("grid-max", g.max.to_string()));
            out.push(("grid-count", g.count.to_string()));
        }
        if let Some(g) = &self.k_grid {
            out.push(("grid-k-min", g.range.min.to_string()));
            out.push(("grid-k-max", g.range.max.to_string()));
            out.push(("grid-k-count", g.range.count.to_string()));
            let spacing = match g.spacing {
                Spacing::Lin => "lin",
                Spacing::Log => "log",
            };
            out.push(("grid-k-spacing", spacing.into()));
        }
        out
    }
}
