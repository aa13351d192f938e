//! The resolved configuration of one invocation and its flat key=value form.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exact::DiffruleObservable;
use crate::experiments::patterns_for_alpha;
use crate::mc::BurnIn;
use crate::model::Hamiltonian;
use crate::patterns::PatternDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Exact,
    Mc,
    Theorem1,
    Figure1,
    OverlapTail,
    ExpMoment,
    Interpolate,
    SteinCheck,
    Concentration,
    DiffruleCheck,
    Plot,
}

const COMMANDS: [(Command, &str, &str); 11] = [
    (Command::Exact, "exact", "Exact free energy of one disorder realization by enumeration"),
    (Command::Mc, "mc", "Free energy of one realization by parallel tempering and thermodynamic integration"),
    (Command::Theorem1, "theorem1", "Residuals E[F_Hop] - beta sqrt(alpha) - E[F_SK(sqrt 2 beta)] over an alpha grid"),
    (Command::Figure1, "figure1", "Hopfield free energies against beta sqrt(alpha) + P_hat, one panel per (beta, B)"),
    (Command::OverlapTail, "overlap-tail", "Tail of the overlap S^2 with a fitted exponential rate"),
    (Command::ExpMoment, "exp-moment", "E<exp(c S^2)> across system sizes at fixed alpha"),
    (Command::Interpolate, "interpolate", "Free energy along the SK-to-Hopfield interpolation"),
    (Command::SteinCheck, "stein-check", "Gaussian integration-by-parts identities for the SK or Hopfield term"),
    (Command::Concentration, "concentration", "Scaling of the centred free-energy moment with N"),
    (Command::DiffruleCheck, "diffrule-check", "Analytic derivatives against central finite differences"),
    (Command::Plot, "plot", "Render a CSV written by this tool as SVG"),
];

const COMMON: [&str; 10] = ["n", "m", "alpha", "beta", "field", "dist", "seed", "realizations", "workers", "out"];
const MC_KNOBS: [&str; 5] = ["engine", "ladder-nodes", "sweeps", "burn-in", "sweeps-per-exchange"];

impl Command {
    pub fn all() -> impl Iterator<Item = Command> {
        COMMANDS.iter().map(|c| c.0)
    }

    pub fn name(&self) -> &'static str {
        COMMANDS.iter().find(|c| c.0 == *self).map(|c| c.1).expect("listed")
    }

    pub fn about(&self) -> &'static str {
        COMMANDS.iter().find(|c| c.0 == *self).map(|c| c.2).expect("listed")
    }

    /// Keys accepted by this subcommand, as flags and in config files.
    pub fn keys(&self) -> Vec<&'static str> {
        use Command::*;
        let (common, extra): (bool, &[&str]) = match self {
            Exact => (true, &["hamiltonian", "t", "cap", "input"]),
            Mc => (true, &["hamiltonian", "t", "input"]),
            Theorem1 => (true, &["alphas", "cap"]),
            Figure1 => (true, &["alphas", "panels", "sk-realizations", "cap"]),
            OverlapTail => (true, &["r-max", "fit-lo", "fit-hi", "cap"]),
            ExpMoment => (true, &["n-grid", "c", "cap"]),
            Interpolate => (true, &["t-grid", "cap"]),
            SteinCheck => (true, &["variant", "t", "m-grid", "cap"]),
            Concentration => (true, &["n-grid", "d", "cap"]),
            DiffruleCheck => (true, &["t", "site", "observable", "step", "cap"]),
            Plot => (false, &["input", "out"]),
        };
        let mc: &[&str] = match self {
            Mc => &MC_KNOBS[1..],
            Theorem1 | Figure1 | OverlapTail | ExpMoment | Concentration => &MC_KNOBS,
            _ => &[],
        };
        let mut keys: Vec<&str> = if common { COMMON.to_vec() } else { Vec::new() };
        for k in extra.iter().chain(mc) {
            if !keys.contains(k) {
                keys.push(k);
            }
        }
        keys
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        COMMANDS
            .iter()
            .find(|c| c.1 == s)
            .map(|c| c.0)
            .ok_or_else(|| Error::Usage(format!("unknown subcommand '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Hopfield,
    Sk,
    /// SK with couplings scaled by sqrt(2).
    SkSqrt2,
    Interpolated,
    LeaveOneOut,
}

impl ModelKind {
    pub fn hamiltonian(&self, t: f64) -> Hamiltonian {
        match self {
            ModelKind::Hopfield => Hamiltonian::Hopfield,
            ModelKind::Sk => Hamiltonian::SK,
            ModelKind::SkSqrt2 => Hamiltonian::SK_SQRT2,
            ModelKind::Interpolated => Hamiltonian::Interpolated { t },
            ModelKind::LeaveOneOut => Hamiltonian::LeaveOneOut,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteinVariant {
    Sk,
    Hopfield,
}

fn usage(key: &str, value: &str, expected: &str) -> Error {
    Error::Usage(format!("invalid value '{value}' for '{key}': expected {expected}"))
}

fn parse_num<T: FromStr>(key: &str, v: &str, expected: &str) -> Result<T> {
    v.trim().parse().map_err(|_| usage(key, v, expected))
}

fn parse_list<T: FromStr>(key: &str, v: &str, expected: &str) -> Result<Vec<T>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_num(key, s, expected)).collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Everything needed to replay a run. Unset options fall back to the
/// per-subcommand defaults when the run starts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub field: Option<f64>,
    pub dist: Option<PatternDistribution>,
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub engine: Option<EngineKind>,
    pub hamiltonian: Option<ModelKind>,
    pub t: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub n_grid: Option<Vec<usize>>,
    pub t_grid: Option<Vec<f64>>,
    pub m_grid: Option<Vec<usize>>,
    /// (beta, B) pairs.
    pub panels: Option<Vec<(f64, f64)>>,
    pub sk_realizations: Option<usize>,
    pub c: Option<f64>,
    pub r_max: Option<usize>,
    pub fit_lo: Option<usize>,
    pub fit_hi: Option<usize>,
    pub d: Option<f64>,
    pub ladder_nodes: Option<usize>,
    pub sweeps: Option<usize>,
    /// `None` inside means automatic burn-in.
    pub burn_in: Option<Option<usize>>,
    pub sweeps_per_exchange: Option<usize>,
    pub cap: Option<usize>,
    pub site: Option<usize>,
    pub observable: Option<DiffruleObservable>,
    pub step: Option<f64>,
    pub variant: Option<SteinVariant>,
    pub input: Option<PathBuf>,
}

/// Every key in canonical order.
pub const ALL_KEYS: [&str; 35] = [
    "n",
    "m",
    "alpha",
    "beta",
    "field",
    "dist",
    "seed",
    "realizations",
    "workers",
    "out",
    "engine",
    "hamiltonian",
    "t",
    "alphas",
    "n-grid",
    "t-grid",
    "m-grid",
    "panels",
    "sk-realizations",
    "c",
    "r-max",
    "fit-lo",
    "fit-hi",
    "d",
    "ladder-nodes",
    "sweeps",
    "burn-in",
    "sweeps-per-exchange",
    "cap",
    "site",
    "observable",
    "step",
    "variant",
    "input",
    "subcommand",
];

pub fn key_help(key: &str) -> &'static str {
    match key {
        "n" => "Number of spins N",
        "m" => "Number of patterns M",
        "alpha" => "Pattern ratio M/N (needs N; alpha N must be an integer)",
        "beta" => "Inverse temperature",
        "field" => "External field B",
        "dist" => "Pattern distribution: bernoulli, gaussian, heavytail or heavytail:<dof>",
        "seed" => "Master seed",
        "realizations" => "Number of disorder realizations",
        "workers" => "Worker threads (default: SPINGLASS_WORKERS, then the core count)",
        "out" => "Output directory",
        "engine" => "Free-energy engine: exact or mc",
        "hamiltonian" => "hopfield, sk, sk-sqrt2, interpolated or leave-one-out",
        "t" => "Interpolation parameter in [0, 1]",
        "alphas" => "Comma-separated pattern ratios",
        "n-grid" => "Comma-separated system sizes",
        "t-grid" => "Comma-separated interpolation parameters",
        "m-grid" => "Comma-separated pattern counts",
        "panels" => "Comma-separated beta:B pairs, one panel each",
        "sk-realizations" => "SK realizations behind the baseline P_hat",
        "c" => "Exponential-moment coefficient (default a/2)",
        "r-max" => "Largest threshold r of the overlap tail",
        "fit-lo" => "First threshold used by the rate fit",
        "fit-hi" => "Last threshold used by the rate fit",
        "d" => "Moment order, 2 <= d < 5.5",
        "ladder-nodes" => "Number of tempering temperatures (odd)",
        "sweeps" => "Measurement sweeps",
        "burn-in" => "Burn-in sweeps or 'auto'",
        "sweeps-per-exchange" => "Metropolis sweeps between replica exchanges",
        "cap" => "Largest N enumerated exactly",
        "site" => "0-based site of the perturbed pattern entry",
        "observable" => "spin-pair or site-overlap",
        "step" => "Finite-difference step",
        "variant" => "sk or hopfield",
        "input" => "Input CSV (disorder for exact/mc, any dataset for plot)",
        "subcommand" => "Subcommand recorded in config files",
        _ => "",
    }
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            n: None,
            m: None,
            alpha: None,
            beta: None,
            field: None,
            dist: None,
            seed: None,
            realizations: None,
            workers: None,
            out: None,
            engine: None,
            hamiltonian: None,
            t: None,
            alphas: None,
            n_grid: None,
            t_grid: None,
            m_grid: None,
            panels: None,
            sk_realizations: None,
            c: None,
            r_max: None,
            fit_lo: None,
            fit_hi: None,
            d: None,
            ladder_nodes: None,
            sweeps: None,
            burn_in: None,
            sweeps_per_exchange: None,
            cap: None,
            site: None,
            observable: None,
            step: None,
            variant: None,
            input: None,
        }
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        const UINT: &str = "a non-negative integer";
        const REAL: &str = "a number";
        match key {
            "subcommand" => self.command = v.trim().parse()?,
            "n" => self.n = Some(parse_num(key, v, UINT)?),
            "m" => self.m = Some(parse_num(key, v, UINT)?),
            "alpha" => self.alpha = Some(parse_num(key, v, REAL)?),
            "beta" => self.beta = Some(parse_num(key, v, REAL)?),
            "field" => self.field = Some(parse_num(key, v, REAL)?),
            "dist" => self.dist = Some(v.parse()?),
            "seed" => self.seed = Some(parse_num(key, v, UINT)?),
            "realizations" => self.realizations = Some(parse_num(key, v, UINT)?),
            "workers" => self.workers = Some(parse_num(key, v, UINT)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "engine" => {
                self.engine = Some(match v.trim() {
                    "exact" => EngineKind::Exact,
                    "mc" => EngineKind::Mc,
                    _ => return Err(usage(key, v, "exact or mc")),
                })
            }
            "hamiltonian" => {
                self.hamiltonian = Some(match v.trim() {
                    "hopfield" => ModelKind::Hopfield,
                    "sk" => ModelKind::Sk,
                    "sk-sqrt2" => ModelKind::SkSqrt2,
                    "interpolated" => ModelKind::Interpolated,
                    "leave-one-out" => ModelKind::LeaveOneOut,
                    _ => return Err(usage(key, v, "hopfield, sk, sk-sqrt2, interpolated or leave-one-out")),
                })
            }
            "t" => self.t = Some(parse_num(key, v, REAL)?),
            "alphas" => self.alphas = Some(parse_list(key, v, "comma-separated numbers")?),
            "n-grid" => self.n_grid = Some(parse_list(key, v, "comma-separated integers")?),
            "t-grid" => self.t_grid = Some(parse_list(key, v, "comma-separated numbers")?),
            "m-grid" => self.m_grid = Some(parse_list(key, v, "comma-separated integers")?),
            "panels" => {
                let expected = "comma-separated beta:B pairs";
                let pairs = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        let (b, f) = s.split_once(':').ok_or_else(|| usage(key, v, expected))?;
                        Ok((parse_num(key, b, expected)?, parse_num(key, f, expected)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.panels = Some(pairs);
            }
            "sk-realizations" => self.sk_realizations = Some(parse_num(key, v, UINT)?),
            "c" => self.c = Some(parse_num(key, v, REAL)?),
            "r-max" => self.r_max = Some(parse_num(key, v, UINT)?),
            "fit-lo" => self.fit_lo = Some(parse_num(key, v, UINT)?),
            "fit-hi" => self.fit_hi = Some(parse_num(key, v, UINT)?),
            "d" => self.d = Some(parse_num(key, v, REAL)?),
            "ladder-nodes" => self.ladder_nodes = Some(parse_num(key, v, UINT)?),
            "sweeps" => self.sweeps = Some(parse_num(key, v, UINT)?),
            "burn-in" => {
                self.burn_in = Some(match v.trim() {
                    "auto" => None,
                    s => Some(parse_num(key, s, "'auto' or an integer")?),
                })
            }
            "sweeps-per-exchange" => self.sweeps_per_exchange = Some(parse_num(key, v, UINT)?),
            "cap" => self.cap = Some(parse_num(key, v, UINT)?),
            "site" => self.site = Some(parse_num(key, v, UINT)?),
            "observable" => {
                self.observable = Some(match v.trim() {
                    "spin-pair" => DiffruleObservable::SpinPair,
                    "site-overlap" => DiffruleObservable::SiteOverlap,
                    _ => return Err(usage(key, v, "spin-pair or site-overlap")),
                })
            }
            "step" => self.step = Some(parse_num(key, v, REAL)?),
            "variant" => {
                self.variant = Some(match v.trim() {
                    "sk" => SteinVariant::Sk,
                    "hopfield" => SteinVariant::Hopfield,
                    _ => return Err(usage(key, v, "sk or hopfield")),
                })
            }
            "input" => self.input = Some(PathBuf::from(v)),
            _ => return Err(Error::Usage(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Textual value of a key, `None` when unset.
    pub fn get(&self, key: &str) -> Option<String> {
        fn s<T: ToString>(v: &Option<T>) -> Option<String> {
            v.as_ref().map(T::to_string)
        }
        match key {
            "subcommand" => Some(self.command.name().to_string()),
            "n" => s(&self.n),
            "m" => s(&self.m),
            "alpha" => s(&self.alpha),
            "beta" => s(&self.beta),
            "field" => s(&self.field),
            "dist" => s(&self.dist),
            "seed" => s(&self.seed),
            "realizations" => s(&self.realizations),
            "workers" => s(&self.workers),
            "out" => self.out.as_ref().map(|p| p.to_string_lossy().into_owned()),
            "engine" => self.engine.map(|e| match e {
                EngineKind::Exact => "exact".into(),
                EngineKind::Mc => "mc".into(),
            }),
            "hamiltonian" => self.hamiltonian.map(|h| {
                match h {
                    ModelKind::Hopfield => "hopfield",
                    ModelKind::Sk => "sk",
                    ModelKind::SkSqrt2 => "sk-sqrt2",
                    ModelKind::Interpolated => "interpolated",
                    ModelKind::LeaveOneOut => "leave-one-out",
                }
                .into()
            }),
            "t" => s(&self.t),
            "alphas" => self.alphas.as_deref().map(join),
            "n-grid" => self.n_grid.as_deref().map(join),
            "t-grid" => self.t_grid.as_deref().map(join),
            "m-grid" => self.m_grid.as_deref().map(join),
            "panels" => self
                .panels
                .as_ref()
                .map(|p| p.iter().map(|(b, f)| format!("{b}:{f}")).collect::<Vec<_>>().join(",")),
            "sk-realizations" => s(&self.sk_realizations),
            "c" => s(&self.c),
            "r-max" => s(&self.r_max),
            "fit-lo" => s(&self.fit_lo),
            "fit-hi" => s(&self.fit_hi),
            "d" => s(&self.d),
            "ladder-nodes" => s(&self.ladder_nodes),
            "sweeps" => s(&self.sweeps),
            "burn-in" => self.burn_in.map(|b| b.map_or("auto".into(), |v| v.to_string())),
            "sweeps-per-exchange" => s(&self.sweeps_per_exchange),
            "cap" => s(&self.cap),
            "site" => s(&self.site),
            "observable" => self.observable.map(|o| {
                match o {
                    DiffruleObservable::SpinPair => "spin-pair",
                    DiffruleObservable::SiteOverlap => "site-overlap",
                }
                .into()
            }),
            "step" => s(&self.step),
            "variant" => self.variant.map(|v| {
                match v {
                    SteinVariant::Sk => "sk",
                    SteinVariant::Hopfield => "hopfield",
                }
                .into()
            }),
            "input" => self.input.as_ref().map(|p| p.to_string_lossy().into_owned()),
            _ => None,
        }
    }

    /// The set keys in canonical order, subcommand first.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![("subcommand".to_string(), self.command.name().to_string())];
        for key in &ALL_KEYS[..ALL_KEYS.len() - 1] {
            if let Some(v) = self.get(key) {
                out.push((key.to_string(), v));
            }
        }
        out
    }

    /// Config-file text; [`RunConfig::from_config_str`] inverts it exactly.
    pub fn to_config_string(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Apply `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_config_str(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("config line {}: expected key=value, got '{line}'", lineno + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let first = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .find_map(|l| l.strip_prefix("subcommand="))
            .ok_or_else(|| Error::Usage("config has no 'subcommand' line".into()))?;
        let mut cfg = RunConfig::new(first.trim().parse()?);
        cfg.apply_config_str(text)?;
        Ok(cfg)
    }

    /// Reject keys the subcommand does not use and fill M from alpha N.
    pub fn validate(&mut self) -> Result<()> {
        let allowed = self.command.keys();
        for key in &ALL_KEYS[..ALL_KEYS.len() - 1] {
            if self.get(key).is_some() && !allowed.contains(key) {
                return Err(Error::Usage(format!("'{key}' is not an option of '{}'", self.command.name())));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Usage("workers must be at least 1".into()));
        }
        if let Some(alpha) = self.alpha {
            if allowed.contains(&"n-grid") {
                // alpha is applied per grid size at run time
            } else {
                let n = self.n.ok_or_else(|| Error::Usage("--alpha needs --n".into()))?;
                let m = patterns_for_alpha(alpha, n).map_err(|e| match e {
                    Error::Config(msg) => Error::Usage(msg),
                    other => other,
                })?;
                if self.m.is_some_and(|given| given != m) {
                    return Err(Error::Usage(format!("--m {} contradicts alpha N = {m}", self.m.unwrap())));
                }
                self.m = Some(m);
            }
        }
        let needs = |what: &str| Error::Usage(format!("'{}' requires --{what}", self.command.name()));
        use Command::*;
        match self.command {
            Plot => {
                if self.input.is_none() {
                    return Err(needs("input"));
                }
            }
            ExpMoment | Concentration => {
                if self.alpha.is_none() {
                    return Err(needs("alpha"));
                }
            }
            Theorem1 | Figure1 => {
                if self.n.is_none() {
                    return Err(needs("n"));
                }
            }
            Exact | Mc => {
                if self.n.is_none() {
                    return Err(needs("n"));
                }
                let sk_only = matches!(self.hamiltonian, Some(ModelKind::Sk | ModelKind::SkSqrt2));
                if self.m.is_none() && !sk_only && self.input.is_none() {
                    return Err(needs("m or --alpha"));
                }
            }
            SteinCheck if self.variant == Some(SteinVariant::Hopfield) => {
                if self.n.is_none() {
                    return Err(needs("n"));
                }
            }
            SteinCheck | OverlapTail | Interpolate | DiffruleCheck => {
                if self.n.is_none() {
                    return Err(needs("n"));
                }
                if self.m.is_none() {
                    return Err(needs("m or --alpha"));
                }
            }
        }
        Ok(())
    }

    pub fn burn_in(&self) -> BurnIn {
        match self.burn_in {
            Some(Some(s)) => BurnIn::Fixed(s),
            _ => BurnIn::default(),
        }
    }
}
