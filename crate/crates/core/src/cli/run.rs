//! Running a resolved configuration: experiments, CSV and SVG outputs, and
//! the run manifest.

use std::path::{Path, PathBuf};

use super::config::{Command, EngineKind, ModelKind, RunConfig, SteinVariant};
use crate::error::{Error, Result};
use crate::exact::{
    exact_diffrule_check, exact_interpolation_derivative, exact_log_partition, DiffruleObservable, ExactOptions,
    DEFAULT_ENUMERATION_CAP, DEFAULT_PATTERN_STEP, DEFAULT_T_STEP,
};
use crate::experiments::{
    run_concentration, run_exp_moment, run_figure1, run_hopfield_stein_check, run_interpolation_scan,
    run_overlap_tail, run_stein_check, run_theorem1, ConcentrationConfig, Engine, EnsembleConfig, ExpMomentConfig,
    Figure1Config, HopfieldSteinConfig, InterpolationConfig, McSettings, OverlapTailConfig, SteinConfig,
    Theorem1Config,
};
use crate::io::{self, render_svg, PlotSpec, RunManifest, Table};
use crate::mc::{thermo_integration_free_energy, DEFAULT_LADDER_NODES};
use crate::model::{Disorder, Hamiltonian, ModelParams};
use crate::patterns::PatternDistribution;

pub const WORKERS_ENV: &str = "SPINGLASS_WORKERS";

/// Worker count: flag or config value, then `SPINGLASS_WORKERS`, then the
/// number of cores.
pub fn resolve_workers(configured: Option<usize>) -> usize {
    configured
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&w| w > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Fill every unset key the subcommand uses with its default.
pub fn with_defaults(cfg: &RunConfig) -> RunConfig {
    use Command::*;
    let mut c = cfg.clone();
    let cmd = c.command;
    let keys = cmd.keys();
    let uses = |k: &str| keys.contains(&k);
    if cmd == Plot {
        return c;
    }
    c.beta.get_or_insert(1.0);
    c.field.get_or_insert(0.0);
    c.dist.get_or_insert(PatternDistribution::Bernoulli);
    c.seed.get_or_insert(0);
    c.workers = Some(resolve_workers(c.workers));
    c.out.get_or_insert_with(|| PathBuf::from("runs").join(cmd.name()));
    c.realizations.get_or_insert(match cmd {
        Exact | Mc | DiffruleCheck => 1,
        Theorem1 => 200,
        Figure1 => 10,
        OverlapTail | ExpMoment => 100,
        Interpolate => 20,
        SteinCheck if c.variant == Some(SteinVariant::Hopfield) => 200,
        SteinCheck => 2000,
        Concentration => 500,
        Plot => unreachable!(),
    });
    if uses("engine") {
        c.engine.get_or_insert(EngineKind::Exact);
    }
    let mc = cmd == Mc || c.engine == Some(EngineKind::Mc);
    if mc {
        c.ladder_nodes.get_or_insert(DEFAULT_LADDER_NODES);
        c.sweeps.get_or_insert(20_000);
        c.burn_in.get_or_insert(None);
        c.sweeps_per_exchange.get_or_insert(1);
    }
    if uses("cap") && !mc {
        c.cap.get_or_insert(DEFAULT_ENUMERATION_CAP);
    }
    match cmd {
        Exact | Mc => {
            let h = *c.hamiltonian.get_or_insert(ModelKind::Hopfield);
            if h == ModelKind::Interpolated {
                c.t.get_or_insert(0.5);
            }
        }
        Theorem1 => {
            c.alphas.get_or_insert_with(|| vec![4.0, 16.0, 64.0]);
        }
        Figure1 => {
            c.alphas.get_or_insert_with(|| (1..=50).map(f64::from).collect());
            c.panels.get_or_insert_with(|| vec![(2.0, 5.0), (1.0, 0.0)]);
            c.sk_realizations.get_or_insert(100);
        }
        OverlapTail => {
            c.r_max.get_or_insert(10);
            c.fit_lo.get_or_insert(1);
            c.fit_hi.get_or_insert(8);
        }
        ExpMoment => {
            c.n_grid.get_or_insert_with(|| vec![8, 12, 16]);
        }
        Interpolate => {
            c.t_grid.get_or_insert_with(|| (0..=10).map(|k| f64::from(k) / 10.0).collect());
        }
        SteinCheck => {
            let v = *c.variant.get_or_insert(SteinVariant::Sk);
            match v {
                SteinVariant::Sk => {
                    c.t.get_or_insert(0.5);
                }
                SteinVariant::Hopfield => {
                    let n = c.n.unwrap_or(1);
                    c.m_grid.get_or_insert_with(|| vec![n, 4 * n, 16 * n]);
                }
            }
        }
        Concentration => {
            c.n_grid.get_or_insert_with(|| vec![8, 12, 16]);
            c.d.get_or_insert(2.0);
        }
        DiffruleCheck => {
            c.t.get_or_insert(0.5);
            c.site.get_or_insert(0);
        }
        Plot => {}
    }
    c
}

/// Files written by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub manifest: Option<PathBuf>,
    /// Headline numbers, also recorded in the manifest.
    pub results: Vec<(String, String)>,
}

struct Ctx {
    cfg: RunConfig,
    dir: PathBuf,
    outputs: Vec<PathBuf>,
    results: Vec<(String, String)>,
}

impl Ctx {
    fn write(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.dir.join(format!("{name}.csv"));
        io::write_csv(table, &path)?;
        self.outputs.push(path);
        if let Ok(spec) = PlotSpec::for_schema(table.schema) {
            if !table.rows.is_empty() {
                let svg = self.dir.join(format!("{name}.svg"));
                write_text(&svg, &render_svg(table, &spec)?)?;
                self.outputs.push(svg);
            }
        }
        Ok(())
    }

    fn result(&mut self, key: &str, value: impl ToString) {
        self.results.push((key.to_string(), value.to_string()));
    }

    fn params(&self) -> Result<ModelParams> {
        let c = &self.cfg;
        ModelParams::new(
            c.n.expect("validated"),
            c.m.unwrap_or(1),
            c.beta.expect("defaulted"),
            c.field.expect("defaulted"),
            c.dist.expect("defaulted"),
        )
    }

    fn ensemble(&self) -> EnsembleConfig {
        let c = &self.cfg;
        EnsembleConfig::new(c.seed.expect("defaulted"), c.realizations.expect("defaulted"), c.workers.expect("defaulted"))
    }

    fn exact_options(&self) -> ExactOptions {
        ExactOptions {
            cap: self.cfg.cap.unwrap_or(DEFAULT_ENUMERATION_CAP),
            ..ExactOptions::default()
        }
    }

    fn mc_settings(&self) -> McSettings {
        let c = &self.cfg;
        McSettings {
            ladder_nodes: c.ladder_nodes.unwrap_or(DEFAULT_LADDER_NODES),
            measurement_sweeps: c.sweeps.unwrap_or(20_000),
            burn_in: c.burn_in(),
            sweeps_per_exchange: c.sweeps_per_exchange.unwrap_or(1),
            ..McSettings::default()
        }
    }

    fn engine(&self) -> Engine {
        match self.cfg.engine {
            Some(EngineKind::Mc) => Engine::MonteCarlo(self.mc_settings()),
            _ => Engine::Exact(self.exact_options()),
        }
    }

    /// Disorder of realization 0, or the instance in `--input`.
    fn single_disorder(&mut self, p: &ModelParams, which: Hamiltonian) -> Result<Disorder> {
        let d = match &self.cfg.input {
            Some(path) => io::disorder_from_table(&io::read_csv(path)?, p.dist)?,
            None => {
                let ens = self.ensemble();
                match (which.needs_patterns(), which.needs_couplings()) {
                    (true, true) => ens.both(0, p.dist, p.n, p.m)?,
                    (true, false) => ens.patterns(0, p.dist, p.n, p.m)?,
                    _ => ens.couplings(0, p.n)?,
                }
            }
        };
        self.write("disorder", &io::disorder_table(&d)?)?;
        Ok(d)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Run a validated configuration, writing outputs and `manifest.txt` into the
/// output directory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    let cfg = with_defaults(cfg);
    if cfg.command == Command::Plot {
        return plot(&cfg);
    }
    let dir = cfg.out.clone().expect("defaulted");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut manifest = RunManifest::new(cfg.command.name(), cfg.seed.expect("defaulted"), cfg.to_pairs());
    let mut ctx = Ctx {
        cfg,
        dir: dir.clone(),
        outputs: Vec::new(),
        results: Vec::new(),
    };
    log::info!("running {} into {}", ctx.cfg.command.name(), dir.display());
    run_command(&mut ctx)?;
    manifest.record_outputs(&dir, &ctx.outputs)?;
    manifest.results = ctx.results.clone();
    let path = manifest.finish(&dir)?;
    Ok(RunOutcome {
        dir,
        outputs: ctx.outputs,
        manifest: Some(path),
        results: ctx.results,
    })
}

fn run_command(ctx: &mut Ctx) -> Result<()> {
    let c = ctx.cfg.clone();
    match c.command {
        Command::Exact => {
            let p = ctx.params()?;
            let which = c.hamiltonian.expect("defaulted").hamiltonian(c.t.unwrap_or(0.5));
            let d = ctx.single_disorder(&p, which)?;
            let r = exact_log_partition(&d, &p, which, &ctx.exact_options())?;
            ctx.result("log_z", r.log_z);
            ctx.result("free_energy", r.free_energy);
            ctx.write("exact", &io::exact_table(&r)?)
        }
        Command::Mc => {
            let p = ctx.params()?;
            let which = c.hamiltonian.expect("defaulted").hamiltonian(c.t.unwrap_or(0.5));
            let d = ctx.single_disorder(&p, which)?;
            let tempering = ctx.mc_settings().tempering(p.beta)?;
            let ti = thermo_integration_free_energy(&d, &p, which, &tempering, ctx.ensemble().chain_seed(0))?;
            ctx.result("free_energy", ti.estimate.mean);
            ctx.result("free_energy_se", ti.estimate.std_error);
            let (summary, nodes) = io::mc_tables(&ti, &p, which)?;
            ctx.write("mc", &summary)?;
            ctx.write("mc_nodes", &nodes)
        }
        Command::Theorem1 => {
            let table = run_theorem1(&Theorem1Config {
                alphas: c.alphas.clone().expect("defaulted"),
                beta: c.beta.expect("defaulted"),
                field: c.field.expect("defaulted"),
                n: c.n.expect("validated"),
                dist: c.dist.expect("defaulted"),
                engine: ctx.engine(),
                ensemble: ctx.ensemble(),
            })?;
            if let Some(ch) = table.c_hat {
                ctx.result("c_hat", ch);
            }
            ctx.write("theorem1", &io::theorem1_table(&table)?)
        }
        Command::Figure1 => {
            let data = run_figure1(&Figure1Config {
                n: c.n.expect("validated"),
                alphas: c.alphas.clone().expect("defaulted"),
                panels: c.panels.clone().expect("defaulted"),
                dist: c.dist.expect("defaulted"),
                n_sk: c.sk_realizations.expect("defaulted"),
                n_hop_per_alpha: c.realizations.expect("defaulted"),
                engine: ctx.engine(),
                master_seed: c.seed.expect("defaulted"),
                workers: c.workers.expect("defaulted"),
            })?;
            for panel in &data.panels {
                ctx.result(&format!("p_hat[beta={},field={}]", panel.beta, panel.field), panel.p_hat.mean);
            }
            ctx.write("figure1", &io::figure1_table(&data)?)
        }
        Command::OverlapTail => {
            let fit = run_overlap_tail(&OverlapTailConfig {
                params: ctx.params()?,
                r_max: c.r_max.expect("defaulted"),
                fit_range: (c.fit_lo.expect("defaulted"), c.fit_hi.expect("defaulted")),
                engine: ctx.engine(),
                ensemble: ctx.ensemble(),
            })?;
            ctx.result("rate", fit.rate);
            ctx.result("rate_se", fit.rate_se);
            ctx.result("theoretical_rate", fit.theoretical_rate());
            ctx.write("overlap_tail", &io::tail_table(&fit)?)
        }
        Command::ExpMoment => {
            let alpha = c.alpha.expect("validated");
            let beta = c.beta.expect("defaulted");
            let rate = 0.5 - beta / alpha.sqrt();
            let report = run_exp_moment(&ExpMomentConfig {
                n_grid: c.n_grid.clone().expect("defaulted"),
                alpha,
                beta,
                field: c.field.expect("defaulted"),
                dist: c.dist.expect("defaulted"),
                c: c.c.unwrap_or(rate / 2.0),
                engine: ctx.engine(),
                ensemble: ctx.ensemble(),
            })?;
            ctx.result("max_over_min", report.max_over_min());
            ctx.write("exp_moment", &io::exp_moment_table(&report, alpha, beta)?)
        }
        Command::Interpolate => {
            let scan = run_interpolation_scan(&InterpolationConfig {
                params: ctx.params()?,
                t_grid: c.t_grid.clone().expect("defaulted"),
                engine: Engine::Exact(ctx.exact_options()),
                ensemble: ctx.ensemble(),
            })?;
            ctx.result("endpoint_gap_sk", scan.endpoint_gap_sk);
            ctx.result("endpoint_gap_hop", scan.endpoint_gap_hop);
            ctx.result("total_change", scan.total_change.mean);
            ctx.write("interpolate", &io::interpolation_table(&scan)?)
        }
        Command::SteinCheck => match c.variant.expect("defaulted") {
            SteinVariant::Sk => {
                let check = run_stein_check(&SteinConfig {
                    params: ctx.params()?,
                    t: c.t.expect("defaulted"),
                    coupling_dist: PatternDistribution::Gaussian,
                    engine: Engine::Exact(ctx.exact_options()),
                    ensemble: ctx.ensemble(),
                })?;
                ctx.result("difference", check.difference.mean);
                ctx.result("combined_se", check.combined_std_error());
                ctx.write("stein", &io::stein_table(&[check])?)
            }
            SteinVariant::Hopfield => {
                let report = run_hopfield_stein_check(&HopfieldSteinConfig {
                    n: c.n.expect("validated"),
                    beta: c.beta.expect("defaulted"),
                    field: c.field.expect("defaulted"),
                    m_grid: c.m_grid.clone().expect("defaulted"),
                    dist: c.dist.expect("defaulted"),
                    engine: Engine::Exact(ctx.exact_options()),
                    ensemble: ctx.ensemble(),
                })?;
                ctx.write("hopfield_stein", &io::hopfield_stein_table(&report)?)
            }
        },
        Command::Concentration => {
            let fit = run_concentration(&ConcentrationConfig {
                n_grid: c.n_grid.clone().expect("defaulted"),
                alpha: c.alpha.expect("validated"),
                beta: c.beta.expect("defaulted"),
                field: c.field.expect("defaulted"),
                dist: c.dist.expect("defaulted"),
                d: c.d.expect("defaulted"),
                engine: ctx.engine(),
                ensemble: ctx.ensemble(),
            })?;
            if let Some(f) = &fit.fit {
                ctx.result("slope", f.slope);
                ctx.result("slope_se", f.slope_se);
            }
            ctx.result("predicted_slope", fit.predicted_slope());
            ctx.write("concentration", &io::concentration_table(&fit)?)
        }
        Command::DiffruleCheck => {
            let p = ctx.params()?;
            let t = c.t.expect("defaulted");
            let site = c.site.expect("defaulted");
            let opts = ctx.exact_options();
            let which = if t == 1.0 { Hamiltonian::Hopfield } else { Hamiltonian::Interpolated { t } };
            let d = ctx.single_disorder(&p, which)?;
            let mut rows = Vec::new();
            if t > 0.0 && t < 1.0 {
                let check = exact_interpolation_derivative(&d, &p, t, c.step.unwrap_or(DEFAULT_T_STEP), &opts)?;
                rows.push(("interpolation".to_string(), t, site, check));
            }
            let observables = match c.observable {
                Some(o) => vec![o],
                None => vec![DiffruleObservable::SpinPair, DiffruleObservable::SiteOverlap],
            };
            for o in observables {
                let check = exact_diffrule_check(&d, &p, t, site, o, c.step.unwrap_or(DEFAULT_PATTERN_STEP), &opts)?;
                let kind = match o {
                    DiffruleObservable::SpinPair => "pattern:spin-pair",
                    DiffruleObservable::SiteOverlap => "pattern:site-overlap",
                };
                rows.push((kind.to_string(), t, site, check));
            }
            let worst = rows.iter().map(|r| r.3.discrepancy()).fold(0.0, f64::max);
            ctx.result("max_discrepancy", worst);
            ctx.write("diffrule", &io::diffrule_table(&rows)?)
        }
        Command::Plot => unreachable!("handled before"),
    }
}

fn plot(cfg: &RunConfig) -> Result<RunOutcome> {
    let input = cfg.input.clone().expect("validated");
    let table = io::read_csv(&input)?;
    let svg = render_svg(&table, &PlotSpec::for_schema(table.schema)?)?;
    let name = input.with_extension("svg");
    let path = match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            dir.join(name.file_name().expect("csv path has a file name"))
        }
        None => name,
    };
    write_text(&path, &svg)?;
    Ok(RunOutcome {
        dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        outputs: vec![path],
        manifest: None,
        results: Vec::new(),
    })
}
