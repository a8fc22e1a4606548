//! The `drapegeom` command line.
//!
//! Exit status: 0 on success, 1 when inputs are readable but invalid (or a
//! check fails), 2 when a file cannot be read, parsed or written.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use drapegeom_core::curvature::{self, CurvatureField, FieldValues, VertexStatus};
use drapegeom_core::grad::{self, FdReport, Objective};
use drapegeom_core::losses::{self, Body, Recipe, Scene, Term};
use drapegeom_core::metrics::{self, PrecisionKind};
use drapegeom_core::refine::{self, RefineResult};
use drapegeom_core::TriMesh;
use serde_json::{json, Value};

use crate::config::{Config, RecipeName};
use crate::error::{Error, Result};
use crate::io::{self, ScalarField};
use crate::report::{self, number, Report};
use crate::scenespec::{Generated, SceneSpec};

#[derive(Debug, Parser)]
#[command(name = "drapegeom", version, about = "Curvature, loss and refinement tools for draped garment meshes")]
pub struct Cli {
    /// TOML config, or JSON config or report.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-vertex curvature field, written as PLY properties or CSV columns.
    Curvature {
        mesh: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        /// Neighborhood size for `eigen` and `rq`.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Loss terms and total of a recipe.
    Loss {
        pred: PathBuf,
        gt: PathBuf,
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(long, value_enum)]
        recipe: RecipeName,
        /// Loss weights as a `[weights]` table or bare weight keys.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Evaluation metrics and precision curves.
    Metrics {
        pred: PathBuf,
        gt: PathBuf,
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// CSV with columns `kind,threshold,fraction`.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Central-difference check of analytic gradients on random scenes.
    Gradcheck {
        #[arg(long, value_enum)]
        term: GradTarget,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest acceptable error.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Moves the initial mesh's vertices to minimize a recipe against a target.
    Refine {
        init: PathBuf,
        target: PathBuf,
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(long, value_enum)]
        recipe: Option<RecipeName>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// CSV of per-step loss values.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Pushes garment vertices out of a body while staying near the start.
    Resolve {
        garment: PathBuf,
        body: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Synthetic mesh from a TOML scene description. Drape scenes write
    /// `<stem>_body` and `<stem>_cloth` next to `--out`.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Gaussian,
    Mean,
    Umc,
    Eigen,
    Rq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GradTarget {
    Vert,
    Pen,
    Norm,
    Bend,
    Mc,
    /// All three Rayleigh scales.
    Rq,
    Rq8,
    Rq16,
    Rq32,
    #[value(name = "recipe-p")]
    RecipeP,
    #[value(name = "recipe-mc")]
    RecipeMc,
    #[value(name = "recipe-rq")]
    RecipeRq,
    #[value(name = "recipe-mcrq")]
    RecipeMcrq,
    /// Every term and every recipe.
    All,
}

impl GradTarget {
    pub fn objectives(self) -> Vec<Objective> {
        let rq = curvature::RQ_SCALES.iter().map(|k| Objective::Term(Term::Rq(*k)));
        match self {
            GradTarget::Vert => vec![Objective::Term(Term::Vert)],
            GradTarget::Pen => vec![Objective::Term(Term::Pen)],
            GradTarget::Norm => vec![Objective::Term(Term::Norm)],
            GradTarget::Bend => vec![Objective::Term(Term::Bend)],
            GradTarget::Mc => vec![Objective::Term(Term::Mc)],
            GradTarget::Rq => rq.collect(),
            GradTarget::Rq8 => vec![Objective::Term(Term::Rq(8))],
            GradTarget::Rq16 => vec![Objective::Term(Term::Rq(16))],
            GradTarget::Rq32 => vec![Objective::Term(Term::Rq(32))],
            GradTarget::RecipeP => vec![Objective::Recipe(Recipe::P)],
            GradTarget::RecipeMc => vec![Objective::Recipe(Recipe::McTot)],
            GradTarget::RecipeRq => vec![Objective::Recipe(Recipe::RqTot)],
            GradTarget::RecipeMcrq => vec![Objective::Recipe(Recipe::McRqTot)],
            GradTarget::All => [Term::Vert, Term::Pen, Term::Norm, Term::Bend, Term::Mc]
                .into_iter()
                .map(Objective::Term)
                .chain(rq)
                .chain(Recipe::ALL.into_iter().map(Objective::Recipe))
                .collect(),
        }
    }
}

pub fn objective_name(o: &Objective) -> String {
    match o {
        Objective::Term(t) => t.name(),
        Objective::Recipe(r) => format!("recipe-{}", r.name()),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let json_path = cli.command.json_path().map(Path::to_path_buf);
    let command = cli.command.name();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            if let Some(path) = json_path {
                let body = json!({
                    "tool": crate::TOOL_NAME,
                    "version": crate::VERSION,
                    "command": command,
                    "error": { "message": e.to_string(), "exit_code": code },
                });
                let text = serde_json::to_string_pretty(&body).expect("error report serializes") + "\n";
                if let Err(w) = io::write_file(&path, text.as_bytes()) {
                    eprintln!("error: {w}");
                }
            }
            code
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        2
    } else {
        1
    }
}

impl Command {
    fn json_path(&self) -> Option<&Path> {
        match self {
            Command::Curvature { json, .. }
            | Command::Loss { json, .. }
            | Command::Metrics { json, .. }
            | Command::Gradcheck { json, .. }
            | Command::Refine { json, .. }
            | Command::Resolve { json, .. }
            | Command::Gen { json, .. } => json.as_deref(),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Curvature { .. } => "curvature",
            Command::Loss { .. } => "loss",
            Command::Metrics { .. } => "metrics",
            Command::Gradcheck { .. } => "gradcheck",
            Command::Refine { .. } => "refine",
            Command::Resolve { .. } => "resolve",
            Command::Gen { .. } => "gen",
        }
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn load(path: &Path, report: &mut Report, key: &str) -> Result<TriMesh> {
    let loaded = io::load_mesh(path)?;
    warn_all(&loaded.warnings);
    report.warnings.extend(loaded.warnings);
    report.input(key, path);
    Ok(loaded.mesh)
}

fn load_body(path: Option<&Path>, config: &Config, report: &mut Report) -> Result<Option<Body>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let mesh = load(p, report, "body")?;
            Ok(Some(Body::new(mesh, config.weights.body_offset_fraction)?))
        }
    }
}

fn save(path: &Path, mesh: &TriMesh, fields: &[ScalarField], options: io::SaveOptions, report: &mut Report) -> Result<()> {
    let warnings = io::save_mesh(path, mesh, fields, options)?;
    warn_all(&warnings);
    report.warnings.extend(warnings);
    Ok(())
}

fn finish(report: &Report, json: Option<&Path>) -> Result<()> {
    if let Some(p) = json {
        report.write(p)?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let threads = crate::thread_cap()?;
    match &cli.command {
        Command::Curvature { mesh, metric, k, out, json } => {
            if let Some(k) = k {
                config.curvature.k = *k;
            }
            config.validate()?;
            let mut report = Report::new("curvature", &config, threads);
            let m = load(mesh, &mut report, "mesh")?;
            curvature_command(&m, *metric, &config, out, &mut report)?;
            finish(&report, json.as_deref())?;
            Ok(0)
        }
        Command::Loss { pred, gt, body, recipe, weights, json } => {
            if let Some(w) = weights {
                config.weights = Config::load_weights(w)?;
            }
            config.validate()?;
            let mut report = Report::new("loss", &config, threads);
            let p = load(pred, &mut report, "pred")?;
            let g = load(gt, &mut report, "gt")?;
            let b = load_body(body.as_deref(), &config, &mut report)?;
            let r = losses::compose(&Scene::new(&p, &g, b.as_ref()), &config.weights(), recipe.recipe())?;
            println!("{} total {:e}", recipe.recipe().name(), r.total);
            for e in &r.terms {
                println!("  {:<5} weight {:<8} value {:e}", e.term.name(), e.weight, e.value);
            }
            report.counters = r.counters;
            report.result("loss", report::loss_json(&r));
            finish(&report, json.as_deref())?;
            Ok(0)
        }
        Command::Metrics { pred, gt, body, json, curve } => {
            config.validate()?;
            let mut report = Report::new("metrics", &config, threads);
            let p = load(pred, &mut report, "pred")?;
            let g = load(gt, &mut report, "gt")?;
            let b = load_body(body.as_deref(), &config, &mut report)?;
            metrics_command(&p, &g, b.as_ref(), &config, curve.as_deref(), &mut report)?;
            finish(&report, json.as_deref())?;
            Ok(0)
        }
        Command::Gradcheck { term, trials, h, seed, tol, json } => {
            let g = &mut config.gradcheck;
            if let Some(t) = trials {
                g.trials = *t;
            }
            if let Some(h) = h {
                g.h_cm = *h;
            }
            if let Some(s) = seed {
                g.seed = *s;
            }
            if let Some(t) = tol {
                g.tolerance = *t;
            }
            config.validate()?;
            let mut report = Report::new("gradcheck", &config, threads);
            let passed = gradcheck_command(*term, &config, threads, &mut report)?;
            finish(&report, json.as_deref())?;
            Ok(if passed { 0 } else { 1 })
        }
        Command::Refine { init, target, body, recipe, steps, out, trace, json } => {
            if let Some(r) = recipe {
                config.refine.recipe = *r;
            }
            if let Some(s) = steps {
                config.refine.optimizer.steps = *s;
            }
            config.validate()?;
            let mut report = Report::new("refine", &config, threads);
            let i = load(init, &mut report, "init")?;
            let t = load(target, &mut report, "target")?;
            let b = load_body(body.as_deref(), &config, &mut report)?;
            let result = refine::refine(&i, &t, b.as_ref(), &config.refine_config())?;
            refine_outputs(&i, Some(&t), &result, out, trace.as_deref(), &mut report)?;
            finish(&report, json.as_deref())?;
            aborted(&result)
        }
        Command::Resolve { garment, body, steps, out, trace, json } => {
            if let Some(s) = steps {
                config.resolve.optimizer.steps = *s;
            }
            config.validate()?;
            let mut report = Report::new("resolve", &config, threads);
            let g = load(garment, &mut report, "garment")?;
            let b = load(body, &mut report, "body")?;
            let standard = Body::new(b.clone(), config.weights.body_offset_fraction)?;
            let before = metrics::penetration_count(&g, &standard);
            let result = refine::resolve_penetration(&g, &b, &config.resolve_config())?;
            let after = metrics::penetration_count(&result.final_mesh, &standard);
            println!("penetrating vertices: {} -> {}", before.count, after.count);
            report.result(
                "penetrations",
                json!({
                    "before": before.count,
                    "after": after.count,
                    "max_depth_before_cm": number(before.max_depth()),
                    "max_depth_after_cm": number(after.max_depth()),
                }),
            );
            refine_outputs(&g, None, &result, out, trace.as_deref(), &mut report)?;
            finish(&report, json.as_deref())?;
            aborted(&result)
        }
        Command::Gen { spec, out, json } => {
            config.validate()?;
            let mut report = Report::new("gen", &config, threads);
            let s = SceneSpec::load(spec)?;
            report.input("spec", spec);
            report.result("spec", serde_json::to_value(&s).expect("spec serializes"));
            let mut files = Vec::new();
            match s.generate()? {
                Generated::Single(m) => {
                    save(out, &m, &[], io::SaveOptions::default(), &mut report)?;
                    files.push(json!({ "path": out.display().to_string(), "vertices": m.vertex_count(), "faces": m.face_count() }));
                }
                Generated::Drape { body, cloth } => {
                    for (part, m) in [("body", &body), ("cloth", &cloth)] {
                        let p = sibling(out, part);
                        save(&p, m, &[], io::SaveOptions::default(), &mut report)?;
                        files.push(json!({ "path": p.display().to_string(), "vertices": m.vertex_count(), "faces": m.face_count() }));
                    }
                }
            }
            for f in &files {
                println!("wrote {} ({} vertices, {} faces)", f["path"].as_str().unwrap_or(""), f["vertices"], f["faces"]);
            }
            report.result("files", Value::Array(files));
            finish(&report, json.as_deref())?;
            Ok(0)
        }
    }
}

/// `dir/stem.ext` to `dir/stem_part.ext`.
pub fn sibling(path: &Path, part: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{part}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{part}"),
    };
    path.with_file_name(name)
}

fn aborted(result: &RefineResult) -> Result<i32> {
    match &result.aborted {
        Some(e) => Err(Error::Geometry(e.clone())),
        None => Ok(0),
    }
}

fn status_name(s: VertexStatus) -> &'static str {
    match s {
        VertexStatus::Ok => "ok",
        VertexStatus::Boundary => "boundary",
        VertexStatus::ZeroArea => "zero_area",
        VertexStatus::Isolated => "isolated",
        VertexStatus::Degenerate => "degenerate",
    }
}

/// Value columns of a field with invalid vertices set to NaN, and the index
/// of the column that drives the color ramp.
pub fn field_columns(field: &CurvatureField) -> (Vec<ScalarField>, usize) {
    let masked = |v: usize, x: f64| if field.is_valid(v) { x } else { f64::NAN };
    let n = field.len();
    let column = |name: &str, f: &dyn Fn(usize) -> f64| ScalarField::new(name, (0..n).map(|v| masked(v, f(v))).collect());
    match &field.values {
        FieldValues::Scalar(s) => (vec![column("value", &|v| s[v])], 0),
        FieldValues::Vector(s) => (
            vec![
                column("value_x", &|v| s[v].x),
                column("value_y", &|v| s[v].y),
                column("value_z", &|v| s[v].z),
                column("value_norm", &|v| s[v].norm()),
            ],
            3,
        ),
        FieldValues::Pair(s) => (vec![column("value_min", &|v| s[v][0]), column("value_max", &|v| s[v][1])], 0),
        FieldValues::Triple(s) => (
            vec![
                column("value_min", &|v| s[v][0]),
                column("value_mid", &|v| s[v][1]),
                column("value_max", &|v| s[v][2]),
            ],
            0,
        ),
    }
}

fn curvature_command(mesh: &TriMesh, metric: Metric, config: &Config, out: &Path, report: &mut Report) -> Result<()> {
    let k = config.curvature.k;
    let field = match metric {
        Metric::Gaussian => curvature::gaussian_curvature(mesh),
        Metric::Mean => curvature::mean_curvature_normal(mesh),
        Metric::Umc => curvature::uniform_laplacian_curvature(mesh),
        Metric::Eigen => curvature::eigen_curvature(mesh, k)?,
        Metric::Rq => curvature::rayleigh_curvature(mesh, k)?,
    };
    let (columns, color_by) = field_columns(&field);
    let ext = out.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("csv") => io::write_file(out, io::csv::format(mesh, &columns)?.as_bytes())?,
        Some("ply") => save(out, mesh, &columns, io::SaveOptions { color_by: Some(color_by), ..Default::default() }, report)?,
        _ => {
            return Err(Error::UnsupportedFeature {
                path: out.into(),
                message: "curvature output must be .ply or .csv".into(),
            })
        }
    }
    let mut statuses = serde_json::Map::new();
    for s in [VertexStatus::Ok, VertexStatus::Boundary, VertexStatus::ZeroArea, VertexStatus::Isolated, VertexStatus::Degenerate] {
        statuses.insert(status_name(s).into(), json!(field.status.iter().filter(|x| **x == s).count()));
    }
    let mean = field.mean_magnitude();
    println!(
        "{} valid vertices of {}, mean magnitude {}",
        field.valid_count(),
        field.len(),
        mean.map_or("n/a".to_string(), |m| format!("{m:e}"))
    );
    report.counters.clamp_events = field.clamp_events;
    report.counters.degenerate = field.len() - field.valid_count();
    report.result("metric", json!(format!("{metric:?}").to_lowercase()));
    report.result("k", json!(field.k));
    report.result("vertex_status", Value::Object(statuses));
    report.result("mean_magnitude", mean.map_or(Value::Null, number));
    report.result("columns", json!(columns.iter().map(|c| c.name.clone()).collect::<Vec<_>>()));
    Ok(())
}

fn metrics_command(
    pred: &TriMesh,
    gt: &TriMesh,
    body: Option<&Body>,
    config: &Config,
    curve: Option<&Path>,
    report: &mut Report,
) -> Result<()> {
    let m = &config.metrics;
    let eval = metrics::evaluate(pred, gt, body, &m.distance_thresholds_cm)?;
    let angle = metrics::precision_curve(pred, gt, &m.angle_thresholds_deg, PrecisionKind::Angle)?;
    let skipped = metrics::face_angles(pred, gt)?.iter().filter(|a| a.is_none()).count();
    report.counters.skipped_faces = skipped;
    println!("e_dist {:.6} cm, e_norm {:.6} deg", eval.e_dist, eval.e_norm);
    let points = |c: &metrics::PrecisionCurve| c.points.iter().map(|(t, f)| json!([number(*t), number(*f)])).collect::<Vec<_>>();
    report.result("e_dist_cm", number(eval.e_dist));
    report.result("e_norm_deg", number(eval.e_norm));
    report.result("normalized_l2_pct", eval.normalized_l2_pct.map_or(Value::Null, number));
    report.result("penetration_count", json!(eval.penetration_count));
    report.result("precision_distance_cm", json!(points(&eval.precision_curve)));
    report.result("precision_angle_deg", json!(points(&angle)));
    if let Some(path) = curve {
        let mut text = String::from("kind,threshold,fraction\n");
        for (kind, c) in [("distance_cm", &eval.precision_curve), ("angle_deg", &angle)] {
            for (t, f) in &c.points {
                let _ = writeln!(text, "{kind},{t:?},{f:?}");
            }
        }
        io::write_file(path, text.as_bytes())?;
    }
    Ok(())
}

/// Runs the objectives on up to `threads` workers; results keep the
/// objectives' order.
fn gradcheck_command(target: GradTarget, config: &Config, threads: usize, report: &mut Report) -> Result<bool> {
    let objectives = target.objectives();
    let weights = config.weights();
    let fd = config.gradcheck.fd_config();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<drapegeom_core::Result<FdReport>>>> = Mutex::new(vec![None; objectives.len()]);
    std::thread::scope(|s| {
        for _ in 0..threads.min(objectives.len()).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(o) = objectives.get(i) else { break };
                let r = grad::finite_difference_check(*o, &weights, &fd);
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    let tol = config.gradcheck.tolerance;
    let mut passed = true;
    let mut entries = serde_json::Map::new();
    for (o, r) in objectives.iter().zip(results.into_inner().expect("no worker panicked")) {
        let r = r.expect("every objective ran")?;
        let ok = r.max_error <= tol && r.value_mismatches == 0;
        passed &= ok;
        let name = objective_name(o);
        println!(
            "{} {name}: max error {:.3e} over {} samples ({} scenes resampled)",
            if ok { "PASS" } else { "FAIL" },
            r.max_error,
            r.samples,
            r.resamples
        );
        let worst = r.worst.map(|w| {
            json!({ "vertex": w.vertex, "axis": w.axis, "analytic": number(w.analytic), "numeric": number(w.numeric) })
        });
        entries.insert(
            name,
            json!({
                "passed": ok,
                "max_error": number(r.max_error),
                "samples": r.samples,
                "resamples": r.resamples,
                "value_mismatches": r.value_mismatches,
                "worst": worst,
            }),
        );
    }
    report.result("objectives", Value::Object(entries));
    report.result("passed", json!(passed));
    Ok(passed)
}

fn refine_outputs(
    start: &TriMesh,
    target: Option<&TriMesh>,
    result: &RefineResult,
    out: &Path,
    trace: Option<&Path>,
    report: &mut Report,
) -> Result<()> {
    save(out, &result.final_mesh, &[], io::SaveOptions::default(), report)?;
    if let Some(path) = trace {
        io::write_file(path, trace_csv(result).as_bytes())?;
    }
    let moved = start
        .positions()
        .iter()
        .zip(result.final_mesh.positions())
        .map(|(a, b)| (*b - *a).norm())
        .fold(0.0, f64::max);
    if let Some(r) = &result.final_report {
        report.counters = r.counters;
        report.result("final_loss", report::loss_json(r));
    }
    if let Some(first) = result.trace.first() {
        report.result("initial_loss", report::loss_json(&first.report));
    }
    if let Some(t) = target {
        report.result("final_e_dist_cm", number(metrics::e_dist(&result.final_mesh, t)?));
    }
    report.result("steps_taken", json!(result.steps_taken));
    report.result("max_displacement_cm", number(moved));
    report.result("line_search_failures", json!(result.line_search_failures));
    report.result("clamp_events", json!(result.clamp_events));
    report.result("degenerate_events", json!(result.degenerate_events));
    report.result("aborted", result.aborted.as_ref().map_or(Value::Null, |e| json!(e.to_string())));
    println!(
        "{} steps, final total {}",
        result.steps_taken,
        result.final_report.as_ref().map_or("n/a".to_string(), |r| format!("{:e}", r.total))
    );
    Ok(())
}

/// One row per trace entry: `step,epoch,total`, one column per term, then
/// the penetration count (empty without a body).
pub fn trace_csv(result: &RefineResult) -> String {
    let terms: Vec<Term> = result.trace.first().map(|e| e.report.terms.iter().map(|t| t.term).collect()).unwrap_or_default();
    let mut text = String::from("step,epoch,total");
    for t in &terms {
        let _ = write!(text, ",{}", t.name());
    }
    text.push_str(",penetrations\n");
    for e in &result.trace {
        let _ = write!(text, "{},{},{:?}", e.step, e.epoch, e.report.total);
        for t in &terms {
            let _ = write!(text, ",{:?}", e.report.value(*t).unwrap_or(f64::NAN));
        }
        match e.penetrations {
            Some(p) => {
                let _ = writeln!(text, ",{p}");
            }
            None => text.push_str(",\n"),
        }
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("a/scene.ply"), "body"), PathBuf::from("a/scene_body.ply"));
        assert_eq!(sibling(Path::new("scene"), "cloth"), PathBuf::from("scene_cloth"));
    }

    #[test]
    fn all_covers_every_term_and_recipe() {
        let names: Vec<String> = GradTarget::All.objectives().iter().map(objective_name).collect();
        assert_eq!(
            names,
            ["vert", "pen", "norm", "bend", "mc", "rq8", "rq16", "rq32", "recipe-p", "recipe-mc", "recipe-rq", "recipe-mcrq"]
        );
    }

    #[test]
    fn invalid_vertices_are_nan() {
        let m = drapegeom_core::scene::plane_grid(3, 3, 1.0).unwrap();
        let (cols, color) = field_columns(&curvature::mean_curvature_normal(&m));
        assert_eq!(color, 3);
        assert!(cols[0].values[0].is_nan());
        assert_eq!(cols[3].values[4], 0.0);
    }
}
