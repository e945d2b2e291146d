//! Command-line front end: one verb per analysis, configuration from a flat
//! `key = value` file, CSV (and optionally SVG) written to an output
//! directory, and a one-line `key=value` summary on stdout.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::analytic::{analytic_bvp, ClosedFormKind};
use crate::bvp::{find_smooth_solution, shoot, BvpSolution, DEFAULT_MULTISTART};
use crate::chain::{
    detect_self_contact, relax_to_equilibrium, run_sweep, Bulge, ChainState, SimConfig, SweepSchedule,
};
use crate::config::Config;
use crate::critical::{
    bifurcation_sweep, critical_ratio_interval, find_critical_roots, limiting_geometry, nonexistence_for,
    BoundaryData, IntervalEnd, LimitingGeometry,
};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::loads::{LoadPair, LoadSpec};
use crate::ode::{integrate_ivp, invariant_monitor, StringState, DEFAULT_TOL};
use crate::plot::line_plot;

/// Default gravity for bead-chain runs. Loads of this size press touching
/// strands together hard enough to bring them inside the default contact
/// threshold.
pub const DEFAULT_CHAIN_GRAVITY: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    /// Critical slopes of a load combination.
    Roots,
    /// Critical slopes over a grid of load ratios.
    Bifurcation,
    /// Integrate the intrinsic equilibrium equations from the left support.
    Ivp,
    /// Shoot for a smooth equilibrium between the supports.
    Bvp,
    /// Closed-form equilibrium for a single classical load.
    Oracle,
    /// Relax a bead chain under fixed loads.
    Simulate,
    /// Quasi-static bead-chain sweep of a load ratio, up and back down.
    Sweep,
    /// Critical ratio interval and its limiting kinked shapes.
    Limits,
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
        f.write_str(&name)
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "flexstring", version, about = "Equilibria and critical-slope analysis of flexible strings")]
pub struct Command {
    #[arg(value_enum)]
    pub verb: Verb,
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
    /// Overrides `seed` from the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub verbose: bool,
}

/// Summary of a finished command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub fields: Vec<(String, String)>,
    pub files: Vec<PathBuf>,
}

impl Report {
    fn new(verb: Verb) -> Self {
        Report { fields: vec![("verb".into(), verb.to_string())], files: Vec::new() }
    }

    fn field(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Space-separated `key=value` pairs.
    pub fn summary(&self) -> String {
        self.fields.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}

/// Process exit status for an error: 2 for bad input, 1 for a run that
/// failed.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::Config { .. } => 2,
        Error::Infeasible(_) | Error::Singular(_) | Error::Io(_) => 1,
    }
}

/// Executes `cmd`, writing outputs under `cmd.out`.
pub fn run(cmd: &Command) -> Result<Report> {
    let mut cfg = match &cmd.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(seed) = cmd.seed {
        cfg.set("seed", seed.to_string());
    }
    fs::create_dir_all(&cmd.out)?;
    let ctx = Context { cfg: &cfg, out: &cmd.out, svg: cmd.svg, verbose: cmd.verbose };
    let mut report = Report::new(cmd.verb);
    match cmd.verb {
        Verb::Roots => roots(&ctx, &mut report)?,
        Verb::Bifurcation => bifurcation(&ctx, &mut report)?,
        Verb::Ivp => ivp(&ctx, &mut report)?,
        Verb::Bvp => bvp(&ctx, &mut report)?,
        Verb::Oracle => oracle(&ctx, &mut report)?,
        Verb::Simulate => simulate(&ctx, &mut report)?,
        Verb::Sweep => sweep(&ctx, &mut report)?,
        Verb::Limits => limits(&ctx, &mut report)?,
    }
    Ok(report)
}

struct Context<'a> {
    cfg: &'a Config,
    out: &'a Path,
    svg: bool,
    verbose: bool,
}

impl Context<'_> {
    fn write(&self, report: &mut Report, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.out.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        report.files.push(path);
        Ok(())
    }

    fn write_svg(&self, report: &mut Report, name: &str, svg: impl FnOnce() -> String) -> Result<()> {
        if self.svg {
            let text = svg();
            self.write(report, name, |w| Ok(w.write_all(text.as_bytes())?))?;
        }
        Ok(())
    }

    fn log(&self, msg: impl FnOnce() -> String) {
        if self.verbose {
            eprintln!("{}", msg());
        }
    }

    fn loads(&self) -> Result<LoadSpec> {
        let c = self.cfg;
        let spec = LoadSpec::new(c.get_or("g", 0.0)?, c.get_or("p", 0.0)?, c.get_or("w", 0.0)?, c.get_or("h", 0.0)?);
        spec.validate()?;
        Ok(spec)
    }

    fn boundary(&self) -> Result<BoundaryData> {
        BoundaryData::new(self.cfg.require("length")?, self.cfg.require("x0")?, self.cfg.get_or("y0", 0.0)?)
    }

    fn pair(&self) -> Result<LoadPair> {
        let raw = self.cfg.require::<String>("pair")?;
        raw.parse().map_err(|e: Error| self.cfg.error_at("pair", e.to_string()))
    }

    fn sim_config(&self) -> Result<SimConfig> {
        let c = self.cfg;
        let d = SimConfig::default();
        let sim = SimConfig {
            k: c.get_or("k", d.k)?,
            mass: c.get_or("mass", d.mass)?,
            gamma: c.get_or("gamma", d.gamma)?,
            v_eq: c.get_or("v_eq", d.v_eq)?,
            t_max: c.get_or("t_max", d.t_max)?,
            d_max: c.get_or("d_max", d.d_max)?,
            dt_min: c.get_or("dt_min", d.dt_min)?,
            dt_max: c.get_or("dt_max", d.dt_max)?,
            contact_threshold: c.get_or("contact_threshold", d.contact_threshold)?,
            jitter: c.get_or("jitter", d.jitter)?,
            seed: c.get_or("seed", d.seed)?,
            ..d
        };
        sim.validate()?;
        Ok(sim)
    }

    /// Bead count and span; the span defaults to a quarter slack,
    /// `L/x0 = 1.25`.
    fn chain_geometry(&self) -> Result<(usize, f64)> {
        let n: usize = self.cfg.get_or("n_beads", 100)?;
        if n < 3 {
            return Err(self.cfg.error_at("n_beads", format!("n_beads must be at least 3, got {n}")));
        }
        let span = self.cfg.get_or("span", (n - 1) as f64 / 1.25)?;
        Ok((n, span))
    }
}

fn roots(ctx: &Context, report: &mut Report) -> Result<()> {
    let spec = ctx.loads()?;
    let cs = find_critical_roots(&spec);
    ctx.write(report, "roots.csv", |w| {
        writeln!(w, "index,alpha,multiplicity")?;
        for (i, r) in cs.roots().iter().enumerate() {
            writeln!(w, "{},{:?},{}", i, r.alpha, r.multiplicity.as_str())?;
        }
        Ok(())
    })?;
    report.field("count", cs.len());
    report.field("double_root", cs.has_double_root());
    if ctx.cfg.contains("length") || ctx.cfg.contains("x0") {
        let boundary = ctx.boundary()?;
        match nonexistence_for(&spec, &boundary)? {
            Some(v) => {
                report.field("relevant_roots", true);
                report.field("nonexistent", v.nonexistent);
                report.field("threshold", format!("{:?}", v.threshold));
            }
            None => report.field("relevant_roots", false),
        }
    }
    ctx.write_svg(report, "roots.svg", || {
        let n = 721;
        let curve: Vec<Point2> = (0..n)
            .map(|i| {
                let a = -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / (n - 1) as f64;
                Point2::new(a, spec.evaluate(a).f_n)
            })
            .collect();
        let mut series = vec![("f_n".to_string(), curve)];
        series.extend(cs.roots().iter().map(|r| (format!("{:?}", r.alpha), vec![Point2::new(r.alpha, 0.0)])));
        line_plot("normal load against slope", &series, false)
    })
}

fn ratio_grid(ctx: &Context) -> Result<Vec<f64>> {
    let lo: f64 = ctx.cfg.get_or("ratio_min", 0.0)?;
    let hi: f64 = ctx.cfg.require("ratio_max")?;
    let step: f64 = ctx.cfg.require("ratio_step")?;
    if !(step > 0.0) {
        return Err(ctx.cfg.error_at("ratio_step", "ratio_step must be positive"));
    }
    if !(hi >= lo) {
        return Err(ctx.cfg.error_at("ratio_max", "ratio_max must not be below ratio_min"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}

fn bifurcation(ctx: &Context, report: &mut Report) -> Result<()> {
    let pair = ctx.pair()?;
    let ratios = ratio_grid(ctx)?;
    let table = bifurcation_sweep(pair, &ratios)?;
    ctx.write(report, "bifurcation.csv", |w| table.write_csv(w))?;
    let saddles: Vec<String> = table.saddle_nodes().iter().map(|r| format!("{r:?}")).collect();
    report.field("pair", pair.name());
    report.field("rows", table.rows.len());
    report.field("saddle_nodes", format!("[{}]", saddles.join(",")));
    ctx.write_svg(report, "bifurcation.svg", || {
        let series: Vec<(String, Vec<Point2>)> = table
            .rows
            .iter()
            .flat_map(|row| {
                row.roots
                    .roots()
                    .iter()
                    .map(move |r| (String::new(), vec![Point2::new(row.ratio, r.alpha)]))
            })
            .collect();
        line_plot(&format!("critical slopes, {}", pair.name()), &series, false)
    })
}

fn ivp(ctx: &Context, report: &mut Report) -> Result<()> {
    let spec = ctx.loads()?;
    let alpha0: f64 = ctx.cfg.require("alpha0")?;
    let t0: f64 = ctx.cfg.require("t0")?;
    let s_max: f64 = ctx.cfg.require("s_max")?;
    let tol: f64 = ctx.cfg.get_or("tol", DEFAULT_TOL)?;
    let traj = integrate_ivp(&spec, StringState::at_origin(alpha0, t0), s_max, tol)?;
    ctx.write(report, "trajectory.csv", |w| traj.write_csv(w))?;
    let end = traj.last();
    report.field("termination", traj.termination.as_str());
    report.field("samples", traj.states.len());
    report.field("s_end", format!("{:?}", end.s));
    report.field("x_end", format!("{:?}", end.x));
    report.field("y_end", format!("{:?}", end.y));
    if let Some(m) = invariant_monitor(&spec) {
        report.field("monitor_drift", format!("{:e}", m.max_drift(&traj)));
    }
    ctx.write_svg(report, "trajectory.svg", || {
        line_plot("string shape", &[("shape".into(), traj.points())], true)
    })
}

fn bvp(ctx: &Context, report: &mut Report) -> Result<()> {
    let spec = ctx.loads()?;
    let boundary = ctx.boundary()?;
    let guess = (ctx.cfg.get::<f64>("alpha_guess")?, ctx.cfg.get::<f64>("tension_guess")?);
    let sol: BvpSolution = match guess {
        (Some(a), Some(t)) => shoot(&spec, &boundary, (a, t))?,
        (None, None) => {
            let m: usize = ctx.cfg.get_or("multistart", DEFAULT_MULTISTART)?;
            ctx.log(|| format!("multistart with {m} slopes per stripe"));
            find_smooth_solution(&spec, &boundary, m)?
        }
        _ => {
            return Err(Error::InvalidInput(
                "alpha_guess and tension_guess must be given together".into(),
            ))
        }
    };
    ctx.write(report, "bvp.csv", |w| sol.write_csv(w))?;
    ctx.write(report, "bvp_status.json", |w| Ok(writeln!(w, "{}", sol.status_record())?))?;
    // `status` answers whether a smooth equilibrium exists; the solver's own
    // classification is kept alongside.
    report.field("status", if sol.is_smooth() { "Smooth" } else { "NotFound" });
    report.field("classification", sol.status.as_str());
    report.field("residual", format!("{:e}", sol.residual));
    report.field("iterations", sol.iterations);
    if let Some(v) = nonexistence_for(&spec, &boundary)? {
        report.field("nonexistent", v.nonexistent);
    }
    if let Some(traj) = &sol.trajectory {
        let traj = traj.clone();
        ctx.write_svg(report, "bvp.svg", move || {
            line_plot(sol.status.as_str(), &[("shape".into(), traj.points())], true)
        })?;
    }
    Ok(())
}

fn oracle(ctx: &Context, report: &mut Report) -> Result<()> {
    let raw: String = ctx.cfg.require("kind")?;
    let kind: ClosedFormKind = raw.parse().map_err(|e: Error| ctx.cfg.error_at("kind", e.to_string()))?;
    let intensity: f64 = ctx.cfg.get_or("intensity", 1.0)?;
    let boundary = ctx.boundary()?;
    let sol = analytic_bvp(kind, intensity, &boundary)?;
    let traj = sol.to_trajectory(1000);
    ctx.write(report, "oracle.csv", |w| traj.write_csv(w))?;
    report.field("kind", kind.name());
    report.field("shape_parameter", format!("{:?}", sol.shape_parameter));
    report.field("midspan_offset", format!("{:?}", sol.midspan_offset()));
    ctx.write_svg(report, "oracle.svg", || {
        line_plot(kind.name(), &[("shape".into(), traj.points())], true)
    })
}

fn chain_loads(ctx: &Context) -> Result<(LoadSpec, f64)> {
    if ctx.cfg.contains("pair") {
        let pair = ctx.pair()?;
        let g: f64 = ctx.cfg.get_or("gravity", DEFAULT_CHAIN_GRAVITY)?;
        let ratio: f64 = ctx.cfg.get_or("ratio", 0.0)?;
        let spec = pair.with_gravity(g, ratio);
        spec.validate()?;
        Ok((spec, ratio))
    } else {
        let spec = ctx.loads()?;
        if spec.active_count() == 0 {
            return Err(Error::InvalidInput("simulate needs a load: set g, p, w, h or pair".into()));
        }
        Ok((spec, 0.0))
    }
}

fn simulate(ctx: &Context, report: &mut Report) -> Result<()> {
    let sim = ctx.sim_config()?;
    let (n, span) = ctx.chain_geometry()?;
    let (spec, ratio) = chain_loads(ctx)?;
    // Start on the side the net load pushes towards.
    let bulge = if spec.g > 0.0 { Bulge::Down } else { Bulge::Up };
    let mut state = ChainState::arc(n, span, bulge, sim.dt_max)?;
    state.jitter(sim.jitter, sim.seed);
    let outcome = relax_to_equilibrium(&mut state, &spec, &sim)?;
    let contacts = detect_self_contact(&state, sim.contact_threshold);
    let converged = outcome.status == crate::chain::RelaxStatus::Converged;
    ctx.write(report, "snapshot.csv", |w| {
        writeln!(w, "ratio,bead_index,x,y,vx,vy,converged")?;
        crate::chain::write_state_rows(w, ratio, &state, converged)
    })?;
    report.field("status", outcome.status.as_str());
    report.field("time", format!("{:?}", outcome.elapsed));
    report.field("steps", outcome.steps);
    report.field("contacts", contacts.len());
    ctx.write_svg(report, "snapshot.svg", || {
        crate::chain::filmstrip_svg(&[(format!("{}", outcome.status.as_str()), &state, !contacts.is_empty())])
    })
}

fn sweep(ctx: &Context, report: &mut Report) -> Result<()> {
    let sim = ctx.sim_config()?;
    let (n, span) = ctx.chain_geometry()?;
    let pair = ctx.pair()?;
    let g: f64 = ctx.cfg.get_or("gravity", DEFAULT_CHAIN_GRAVITY)?;
    let schedule = SweepSchedule::up_down(pair, g, ctx.cfg.require("ratio_max")?, ctx.cfg.require("ratio_step")?)?;
    ctx.log(|| format!("sweeping {} over {} ratios", pair.name(), schedule.ratios.len()));
    let result = run_sweep(&schedule, n, span, &sim)?;
    ctx.write(report, "sweep.csv", |w| result.write_csv(w))?;
    let converged = result.snapshots.iter().filter(|s| s.converged()).count();
    let touching = result.snapshots.iter().filter(|s| !s.contacts.is_empty()).count();
    report.field("pair", pair.name());
    report.field("snapshots", result.snapshots.len());
    report.field("converged", converged);
    report.field("with_contact", touching);
    ctx.write_svg(report, "sweep.svg", || result.to_svg())
}

fn limits(ctx: &Context, report: &mut Report) -> Result<()> {
    let pair = ctx.pair()?;
    let boundary = ctx.boundary()?;
    let (lo, hi) = critical_ratio_interval(pair, &boundary)?;
    let ends = match ctx.cfg.get::<String>("end")? {
        Some(raw) => vec![raw.parse::<IntervalEnd>().map_err(|e| ctx.cfg.error_at("end", e.to_string()))?],
        None => vec![IntervalEnd::Lower, IntervalEnd::Upper],
    };
    let mut shapes = Vec::new();
    for end in ends {
        shapes.push((end, limiting_geometry(pair, &boundary, end)?));
    }
    ctx.write(report, "limits.csv", |w| {
        writeln!(w, "end,vertex,x,y")?;
        for (end, shape) in &shapes {
            if let LimitingGeometry::Polyline(pts) = shape {
                for (i, p) in pts.iter().enumerate() {
                    writeln!(w, "{},{},{:?},{:?}", end_name(*end), i, p.x, p.y)?;
                }
            }
        }
        Ok(())
    })?;
    report.field("pair", pair.name());
    report.field("ratio_lo", format!("{lo:?}"));
    report.field("ratio_hi", format!("{hi:?}"));
    for (end, shape) in &shapes {
        let kind = match shape {
            LimitingGeometry::Polyline(_) => "polyline",
            LimitingGeometry::NotConstructible => "not-constructible",
        };
        report.field(end_name(*end), kind);
    }
    ctx.write_svg(report, "limits.svg", || {
        let series: Vec<(String, Vec<Point2>)> = shapes
            .iter()
            .filter_map(|(end, s)| match s {
                LimitingGeometry::Polyline(p) => Some((end_name(*end).to_string(), p.clone())),
                LimitingGeometry::NotConstructible => None,
            })
            .collect();
        line_plot(&format!("limiting shapes, {}", pair.name()), &series, true)
    })
}

fn end_name(end: IntervalEnd) -> &'static str {
    match end {
        IntervalEnd::Lower => "lower",
        IntervalEnd::Upper => "upper",
    }
}
