//! Experiment configuration: a TOML document with four sections.
//!
//! ```toml
//! [problem]
//! kind = "least_squares"      # least_squares | quadratic | nonconvex | file
//! num_components = 100
//! dim = 200
//! seed = 0
//! spectrum = "linspace:2:4"   # least_squares only
//! scale = 1.0                 # quadratic only
//! spread = 0.5                # quadratic only
//! hidden = 4                  # nonconvex only
//! # path = "data.txt"         # file only
//!
//! [direction]
//! kind = "sgd"                # sgd | momentum | cg | adagrad
//! beta = 0.9
//! epsilon = 1e-8
//! beta_cap = 10.0
//! variant = "pr_plus"         # pr_plus | fletcher_reeves
//! c1 = 10.0
//! c2 = 0.1
//!
//! [linesearch]
//! gamma = 0.1
//! delta = 0.5
//! alpha_max = 10.0
//! alpha0_policy = "constant"  # constant | warm_increase:<p>
//! max_backtracks = 60
//!
//! [run]
//! max_iters = 5000
//! grad_tol = 1e-10
//! fgap_tol = 1e-8
//! seed = 0
//! trace_every = 10
//! x0 = "random"               # random | zeros | ones | minimizer
//! batch_size = 1
//! # out_csv = "trace.csv"
//! # out_svg = "trace.svg"
//! ```
//!
//! Every key is optional and defaults to the value shown. Unknown keys are
//! rejected. Overrides `section.key=value` are applied on top of the file,
//! first from `SLSGD_<SECTION>__<KEY>` environment variables, then from the
//! command line. Values parse as TOML scalars, falling back to bare strings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::directions::{CgVariant, DirectionKind, SgrParams};
use crate::linesearch::{Alpha0Policy, LineSearchParams};
use crate::optimizer::{InitialPoint, RunConfig};
use crate::problems::{
    gen_diagonal_quadratics, gen_interpolating_least_squares, gen_nonconvex_interpolating, FiniteSum, LeastSquares,
    SamplingMode, SingularValueSpec,
};
use crate::{Error, Result};

pub const ENV_PREFIX: &str = "SLSGD_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    LeastSquares,
    Quadratic,
    Nonconvex,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub kind: ProblemKind,
    pub num_components: usize,
    pub dim: usize,
    pub seed: u64,
    pub spectrum: String,
    pub scale: f64,
    pub spread: f64,
    pub hidden: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            kind: ProblemKind::LeastSquares,
            num_components: 100,
            dim: 200,
            seed: 0,
            spectrum: SingularValueSpec::default().to_string(),
            scale: 1.0,
            spread: 0.5,
            hidden: 4,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionName {
    Sgd,
    Momentum,
    Cg,
    Adagrad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CgVariantName {
    PrPlus,
    FletcherReeves,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DirectionSection {
    pub kind: DirectionName,
    pub beta: f64,
    pub epsilon: f64,
    pub beta_cap: f64,
    pub variant: CgVariantName,
    pub c1: f64,
    pub c2: f64,
}

impl Default for DirectionSection {
    fn default() -> Self {
        let sgr = SgrParams::default();
        Self {
            kind: DirectionName::Sgd,
            beta: 0.9,
            epsilon: 1e-8,
            beta_cap: 10.0,
            variant: CgVariantName::PrPlus,
            c1: sgr.c1(),
            c2: sgr.c2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LineSearchSection {
    pub gamma: f64,
    pub delta: f64,
    pub alpha_max: f64,
    pub alpha0_policy: String,
    pub max_backtracks: u32,
}

impl Default for LineSearchSection {
    fn default() -> Self {
        let ls = LineSearchParams::default();
        Self {
            gamma: ls.gamma,
            delta: ls.delta,
            alpha_max: ls.alpha_max,
            alpha0_policy: "constant".into(),
            max_backtracks: ls.max_backtracks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub fgap_tol: f64,
    pub seed: u64,
    pub trace_every: usize,
    pub x0: String,
    pub batch_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_svg: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        let rc = RunConfig::default();
        Self {
            max_iters: rc.max_iters,
            grad_tol: rc.grad_tol,
            fgap_tol: rc.fgap_tol,
            seed: rc.seed,
            trace_every: rc.trace_every,
            x0: "random".into(),
            batch_size: 1,
            out_csv: None,
            out_svg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    pub direction: DirectionSection,
    pub linesearch: LineSearchSection,
    pub run: RunSection,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Sets `section.key` in a raw document.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{assignment}` is not of the form section.key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| config_err(format!("override key `{path}` is not of the form section.key")))?;
    let table = doc
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .ok_or_else(|| config_err(format!("`{section}` is not a section")))?;
    table.insert(key.to_string(), parse_value(raw.trim()));
    Ok(())
}

/// `SLSGD_RUN__MAX_ITERS=10` becomes `run.max_iters=10`.
pub fn env_overrides<I: IntoIterator<Item = (String, String)>>(vars: I) -> Vec<String> {
    let mut out: Vec<String> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            let rest = k.strip_prefix(ENV_PREFIX)?;
            let (section, key) = rest.split_once("__")?;
            Some(format!("{}.{}={v}", section.to_lowercase(), key.to_lowercase()))
        })
        .collect();
    out.sort();
    out
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_document(toml::from_str(text).map_err(config_err)?)
    }

    fn from_document(doc: toml::Table) -> Result<Self> {
        doc.try_into().map_err(config_err)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// Reads `path` (or starts from defaults) and applies overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(config_err)?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_document(doc)
    }

    pub fn direction_kind(&self) -> Result<DirectionKind> {
        let d = &self.direction;
        let kind = match d.kind {
            DirectionName::Sgd => DirectionKind::Sgd,
            DirectionName::Momentum => DirectionKind::Momentum { beta: d.beta },
            DirectionName::Cg => DirectionKind::ConjugateGradient {
                variant: match d.variant {
                    CgVariantName::PrPlus => CgVariant::PolakRibierePlus,
                    CgVariantName::FletcherReeves => CgVariant::FletcherReeves,
                },
                beta_cap: d.beta_cap,
            },
            DirectionName::Adagrad => DirectionKind::AdagradDiag { epsilon: d.epsilon },
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn sgr_params(&self) -> Result<SgrParams> {
        SgrParams::new(self.direction.c1, self.direction.c2)
    }

    pub fn line_search_params(&self) -> Result<LineSearchParams> {
        let l = &self.linesearch;
        let policy = match l.alpha0_policy.split_once(':') {
            None if l.alpha0_policy == "constant" => Alpha0Policy::Constant,
            Some(("warm_increase", p)) => Alpha0Policy::WarmIncrease {
                p: p.parse()
                    .map_err(|_| config_err(format!("warm_increase exponent `{p}` is not an integer")))?,
            },
            _ => {
                return Err(config_err(format!(
                    "alpha0_policy `{}` is not `constant` or `warm_increase:<p>`",
                    l.alpha0_policy
                )))
            }
        };
        let params = LineSearchParams {
            gamma: l.gamma,
            delta: l.delta,
            alpha_max: l.alpha_max,
            alpha0_policy: policy,
            max_backtracks: l.max_backtracks,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let r = &self.run;
        let x0 = match r.x0.as_str() {
            "random" => InitialPoint::Random,
            "zeros" => InitialPoint::Zeros,
            "ones" => InitialPoint::Ones,
            "minimizer" => InitialPoint::Minimizer,
            other => return Err(config_err(format!("x0 `{other}` is not random, zeros, ones or minimizer"))),
        };
        let sampling = match r.batch_size {
            0 => return Err(config_err("batch_size must be >= 1")),
            1 => SamplingMode::SingletonEnumerable,
            b => SamplingMode::WithReplacement { batch_size: b },
        };
        let cfg = RunConfig {
            direction: self.direction_kind()?,
            line_search: self.line_search_params()?,
            sgr: self.sgr_params()?,
            sampling,
            max_iters: r.max_iters,
            grad_tol: r.grad_tol,
            fgap_tol: r.fgap_tol,
            seed: r.seed,
            trace_every: r.trace_every,
            x0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn build_problem(&self) -> Result<Box<dyn FiniteSum>> {
        let p = &self.problem;
        Ok(match p.kind {
            ProblemKind::LeastSquares => {
                let spec: SingularValueSpec = p.spectrum.parse()?;
                Box::new(gen_interpolating_least_squares(p.num_components, p.dim, p.seed, &spec)?)
            }
            ProblemKind::Quadratic => Box::new(gen_diagonal_quadratics(
                p.num_components,
                p.dim,
                p.seed,
                p.scale,
                p.spread,
            )?),
            ProblemKind::Nonconvex => Box::new(gen_nonconvex_interpolating(p.num_components, p.hidden, p.dim, p.seed)?),
            ProblemKind::File => {
                let path = p
                    .path
                    .as_deref()
                    .ok_or_else(|| config_err("problem.kind = \"file\" needs problem.path"))?;
                let file = std::fs::File::open(path).map_err(|e| config_err(format!("cannot open {path}: {e}")))?;
                Box::new(LeastSquares::read_text(std::io::BufReader::new(file))?)
            }
        })
    }
}
