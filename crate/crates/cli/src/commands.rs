use std::cell::RefCell;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context as _, Result};
use serde::Serialize;
use speclag::advisor::{contour_table, e_rel, fit_method1, fit_method2, recommend_gtr};
use speclag::evolve::MomentRecord;
use speclag::io::{read_field, write_real};
use speclag::kernel::ghat_maxwell;
use speclag::oracle::{q_direct_field, q_direct_field_isotropic, OracleRule, SphereRule};
use speclag::validate::{self, Criterion, Scale};
use speclag::{
    collision_operator, conserve_project, moments, CollisionParams, CollisionRhs,
    ConservationBasis, RealField, RunOptions, Scenario,
};

use crate::config::{Format, Method, RunConfig};
use crate::output::{self, Derived, Manifest};
use crate::{Setup, Status};

/// Largest grid the quadrature oracle accepts.
const ORACLE_MAX_N: usize = 24;

pub struct Context {
    pub jobs: usize,
    pub deterministic: bool,
}

pub fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(out)
}

fn resolve(setup: &Setup) -> Result<RunConfig> {
    let mut config = match &setup.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(name) = &setup.scenario {
        config.scenario = Scenario::by_name(name)?;
    }
    if let Some(n) = setup.n {
        config.grid.n = n;
    }
    if let Some(l) = setup.half_width {
        config.grid.l = l;
    }
    if let Some(g) = setup.g_tr {
        config.collision.g_tr = g;
    }
    config.validate()?;
    Ok(config)
}

fn warnings(config: &RunConfig) -> Vec<String> {
    let w: Vec<String> = config.nyquist_warning().into_iter().collect();
    for line in &w {
        eprintln!("{line}");
    }
    w
}

/// Initial field from a file when given, else the configured scenario.
fn initial_field(config: &RunConfig, input: Option<&Path>) -> Result<(RealField, Option<f64>)> {
    match input {
        Some(path) => {
            let file = read_field(path).with_context(|| format!("reading {}", path.display()))?;
            let t = file.t;
            Ok((file.into_real()?, Some(t)))
        }
        None => Ok((config.scenario.sample(config.grid()?)?, None)),
    }
}

struct Writer<'a> {
    dir: &'a Path,
    config: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path, config: &'a RunConfig) -> Result<Self> {
        output::create_dir(dir)?;
        Ok(Self {
            dir,
            config,
            written: vec![],
        })
    }

    fn wants(&self, f: Format) -> bool {
        self.config.outputs.formats.contains(&f)
    }

    /// Field file and, if enabled, CSV slices.
    fn field(&mut self, stem: &str, f: &RealField, t: f64) -> Result<()> {
        if self.wants(Format::Bspf) {
            let path = self.dir.join(format!("{stem}.bspf"));
            write_real(&path, f, t).with_context(|| format!("writing {}", path.display()))?;
            self.written.push(path);
        }
        if self.wants(Format::Csv) && self.config.outputs.slices {
            self.written
                .extend(output::write_slices(self.dir, stem, f)?);
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        output::write_json(&path, value)?;
        self.written.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        output::write_text(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    fn manifest(
        mut self,
        ctx: &Context,
        command: &str,
        input: Option<&Path>,
        grid: &speclag::VelocityGrid,
        start: Instant,
        warnings: Vec<String>,
    ) -> Result<()> {
        let path = self.dir.join("manifest.json");
        self.written.push(path.clone());
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config: self.config,
            input: input.map(|p| p.display().to_string()),
            derived: Derived::of(grid),
            jobs: ctx.jobs,
            deterministic: ctx.deterministic,
            wall_time_s: start.elapsed().as_secs_f64(),
            outputs: output::display_paths(&self.written),
            warnings,
        };
        output::write_json(&path, &manifest)
    }
}

pub fn init(
    _ctx: &Context,
    setup: &Setup,
    out: Option<&Path>,
    print_config: bool,
) -> Result<Status> {
    let config = resolve(setup)?;
    if print_config {
        print!("{}", config.to_toml());
        return Ok(Status::Ok);
    }
    let out = out.ok_or_else(|| anyhow!("--out is required"))?;
    let f = config.scenario.sample(config.grid()?)?;
    write_real(out, &f, config.t0()).with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "wrote {} ({} on N = {}, t = {})",
        out.display(),
        config.scenario.name(),
        config.grid.n,
        config.t0()
    );
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct CollideDiagnostics {
    imag_residue: f64,
    imag_flagged: bool,
    q_max: f64,
    collision_time_s: f64,
    /// Mass, momentum and energy of Q before projection.
    moments_before: [f64; 5],
    moments_after: Option<[f64; 5]>,
}

pub fn collide(ctx: &Context, setup: &Setup, input: Option<&Path>, out: &Path) -> Result<Status> {
    let start = Instant::now();
    let mut config = resolve(setup)?;
    let (f, t) = initial_field(&config, input)?;
    config.grid.l = f.grid().half_width();
    config.grid.n = f.grid().n();
    let warnings = warnings(&config);
    let params = config.collision_params()?;
    let t = t.unwrap_or_else(|| config.t0());

    let timer = Instant::now();
    let c = collision_operator(&f, &params)?;
    let collision_time_s = timer.elapsed().as_secs_f64();
    let projected = if config.collision.projection {
        let basis = ConservationBasis::new(*f.grid())?;
        Some(conserve_project(&c.q, &basis)?)
    } else {
        None
    };

    let mut w = Writer::new(out, &config)?;
    w.field("q", &c.q, t)?;
    if let Some(p) = &projected {
        w.field("q_projected", p, t)?;
    }
    let diag = CollideDiagnostics {
        imag_residue: c.imag_residue,
        imag_flagged: c.flagged(),
        q_max: c.q.max_abs(),
        collision_time_s,
        moments_before: moments(&c.q).as_array(),
        moments_after: projected.as_ref().map(|p| moments(p).as_array()),
    };
    w.json("diagnostics.json", &diag)?;
    w.manifest(ctx, "collide", input, f.grid(), start, warnings)?;
    println!("{}", serde_json::to_string_pretty(&diag)?);
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct OracleDiagnostics {
    q_max: f64,
    quadrature_error: f64,
    radial_nodes: usize,
    sphere_orders: (usize, usize),
    isotropic: bool,
}

pub fn oracle(
    ctx: &Context,
    setup: &Setup,
    out: &Path,
    isotropic: bool,
    radial_nodes: usize,
    polar: usize,
    azimuth: usize,
) -> Result<Status> {
    let start = Instant::now();
    let config = resolve(setup)?;
    let grid = config.grid()?;
    if grid.n() > ORACLE_MAX_N {
        bail!(
            "the quadrature oracle is limited to N <= {ORACLE_MAX_N}, got {}",
            grid.n()
        );
    }
    let warnings = warnings(&config);
    let params = config.collision_params()?;
    let rule = OracleRule::new(radial_nodes, SphereRule::product(polar, azimuth)?)?;
    let pdf = config.scenario.pdf()?;
    let (q, err) = if isotropic {
        q_direct_field_isotropic(&*pdf, grid, &params, &rule)?
    } else {
        q_direct_field(&*pdf, grid, &params, &rule)?
    };
    let mut w = Writer::new(out, &config)?;
    w.field("q", &q, config.t0())?;
    let diag = OracleDiagnostics {
        q_max: q.max_abs(),
        quadrature_error: err,
        radial_nodes,
        sphere_orders: rule.sphere.orders(),
        isotropic,
    };
    w.json("diagnostics.json", &diag)?;
    w.manifest(ctx, "oracle", None, &grid, start, warnings)?;
    println!("{}", serde_json::to_string_pretty(&diag)?);
    Ok(Status::Ok)
}

pub fn kernel_probe(
    g_tr: f64,
    b_tilde: f64,
    zeta: [f64; 3],
    direction: [f64; 3],
    xi_max: f64,
    points: usize,
    out: Option<&Path>,
) -> Result<Status> {
    let params = CollisionParams::new(0.0, b_tilde, g_tr)?;
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        bail!("direction must be nonzero");
    }
    if !(xi_max > 0.0) || points < 2 {
        bail!("need xi_max > 0 and at least 2 points");
    }
    let mut csv = String::from("xi_norm,value\n");
    for i in 0..points {
        let s = xi_max * i as f64 / (points - 1) as f64;
        let xi = direction.map(|d| s * d / norm);
        csv.push_str(&format!("{s},{:e}\n", ghat_maxwell(xi, zeta, &params)?));
    }
    match out {
        Some(path) => output::write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct SweepPoint {
    v: f64,
    e_rel: f64,
}

#[derive(Serialize)]
struct Advice {
    scenario: &'static str,
    method: Method,
    k: f64,
    c: f64,
    tol: f64,
    v_target: f64,
    g_tr: f64,
    sweep: Vec<SweepPoint>,
}

pub fn advise(ctx: &Context, setup: &Setup, out: Option<&Path>) -> Result<Status> {
    let start = Instant::now();
    let config = resolve(setup)?;
    let grid = config.grid()?;
    let f = config.scenario.sample(grid)?;
    let a = config.advisor;
    let (lambda, b) = (config.collision.lambda, config.collision.b_tilde);
    let bound = match a.method {
        Method::Energy => fit_method1(&f)?,
        Method::Reference => fit_method2(&f, a.v_ref, a.g_ref, lambda, b)?,
    };
    let g_tr = recommend_gtr(a.v_target, a.tol, &bound, lambda, b)?;
    let n = (a.v_target / 0.1).ceil() as usize;
    let sweep = (1..=n)
        .map(|i| {
            let v = (i as f64 * 0.1).min(a.v_target);
            Ok(SweepPoint {
                v,
                e_rel: e_rel(g_tr, v, &bound, lambda, b, 1e-8)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let advice = Advice {
        scenario: config.scenario.name(),
        method: a.method,
        k: bound.k,
        c: bound.c,
        tol: a.tol,
        v_target: a.v_target,
        g_tr,
        sweep,
    };
    if let Some(dir) = out {
        let mut w = Writer::new(dir, &config)?;
        w.json("advice.json", &advice)?;
        let speeds: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
        let cutoffs: Vec<f64> = (1..=40).map(|i| 0.5 * i as f64).collect();
        let table = contour_table(&speeds, &cutoffs, &bound, lambda, b)?;
        w.text("contour.csv", &table.to_csv())?;
        w.manifest(ctx, "advise", None, &grid, start, vec![])?;
    }
    println!("{}", serde_json::to_string_pretty(&advice)?);
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct EvolveSummary {
    steps: usize,
    t_final: f64,
    negativity_events: usize,
    most_negative: Option<f64>,
    max_relative_mass_drift: f64,
}

pub fn evolve(ctx: &Context, setup: &Setup, input: Option<&Path>, out: &Path) -> Result<Status> {
    let start = Instant::now();
    let mut config = resolve(setup)?;
    let (f0, t_file) = initial_field(&config, input)?;
    config.grid.l = f0.grid().half_width();
    config.grid.n = f0.grid().n();
    let t0 = config
        .integrator
        .t0
        .or(t_file)
        .unwrap_or_else(|| config.scenario.start_time());
    let t_final = config
        .integrator
        .t_final
        .ok_or_else(|| anyhow!("integrator.t_final is required for evolve"))?;
    if t_final < t0 {
        bail!("t_final = {t_final} precedes t0 = {t0}");
    }
    let warnings = warnings(&config);
    let grid = *f0.grid();
    let basis = if config.collision.projection {
        Some(ConservationBasis::new(grid)?)
    } else {
        None
    };
    let rhs = CollisionRhs::new(
        config.collision_params()?,
        basis,
        config.scenario.plasma().copied(),
    );
    let options = RunOptions {
        dt: config.integrator.dt,
        t_final,
        integrator: config.integrator.kind,
        output_times: vec![],
        negativity_abort: config.integrator.negativity_abort,
    };

    let fields = out.join("fields");
    let mut w = Writer::new(out, &config)?;
    output::create_dir(&fields)?;
    let mut fw = Writer::new(&fields, &config)?;
    fw.field("f_000000", &f0, t0)?;
    let cadence = config.outputs.cadence;
    let pending = RefCell::new((fw, None::<anyhow::Error>));
    let result = speclag::run_evolution(f0, t0, &rhs, &options, |state| {
        let mut p = pending.borrow_mut();
        if p.1.is_some() || cadence == 0 || state.step_index % cadence != 0 {
            return;
        }
        if let Err(e) =
            p.0.field(&format!("f_{:06}", state.step_index), &state.f, state.t)
        {
            p.1 = Some(e);
        }
    })?;
    let (mut fw, err) = pending.into_inner();
    if let Some(e) = err {
        return Err(e);
    }
    let last = result.state.step_index;
    if cadence == 0 || last % cadence != 0 {
        fw.field(&format!("f_{last:06}"), &result.state.f, result.state.t)?;
    }
    w.written.extend(fw.written);

    let mut csv = format!("{}\n", MomentRecord::CSV_HEADER);
    for m in &result.moments {
        csv.push_str(&m.csv_row());
        csv.push('\n');
    }
    w.text("moments.csv", &csv)?;
    let m0 = result.moments[0].mass;
    let summary = EvolveSummary {
        steps: last,
        t_final: result.state.t,
        negativity_events: result.negativity.len(),
        most_negative: result.negativity.iter().map(|e| e.min).reduce(f64::min),
        max_relative_mass_drift: result
            .moments
            .iter()
            .map(|m| ((m.mass - m0) / m0).abs())
            .fold(0.0, f64::max),
    };
    w.json("summary.json", &summary)?;
    w.manifest(ctx, "evolve", input, &grid, start, warnings)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(Status::Ok)
}

pub fn validate(criteria: &[String], full: bool, json: Option<&Path>) -> Result<Status> {
    let selected = if criteria.is_empty() {
        Criterion::ALL.to_vec()
    } else {
        criteria
            .iter()
            .map(|s| Criterion::parse(s))
            .collect::<speclag::Result<Vec<_>>>()?
    };
    let scale = if full { Scale::Full } else { Scale::Smoke };
    let mut reports = vec![];
    for c in selected {
        let report = validate::run(c, scale)?;
        println!("{}", report.line());
        for check in &report.checks {
            println!("    {check}");
        }
        reports.push(report);
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} passed, {failed} failed", reports.len() - failed);
    if let Some(path) = json {
        output::write_json(path, &reports)?;
    }
    Ok(if failed == 0 {
        Status::Ok
    } else {
        Status::ValidationFailed
    })
}
