//! `shrinker`: integrate geodesics, build the theorem families, render and
//! verify.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use shrinker_core::export::{curve_from_csv, curve_to_csv, render_svg, surface_of_revolution, thin_profile, CurveSidecar, FamilyManifest, SvgStyle};
use shrinker_core::shooting::{build_family, find_angenent_torus, Near, SearchSettings};
use shrinker_core::verify::{gauss_bonnet_closed, run_suite, Suite};
use shrinker_core::{integrate, AmbientConfig, Direction, InitialData, IntegratorSettings, ProfileCurve};

#[derive(Parser, Debug)]
#[command(name = "shrinker", version, about = "Rotationally symmetric self-shrinkers by geodesic shooting")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Dimension of the sphere factor (n >= 2).
    #[arg(long, global = true)]
    n: Option<u32>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Grid step of the type scans.
    #[arg(long, global = true)]
    seed_grid_resolution: Option<f64>,
    #[arg(long, global = true, env = "SHRINKER_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one geodesic and write CSV plus a JSON sidecar.
    Integrate(IntegrateArgs),
    /// Build a theorem family or Angenent's torus.
    Find(FindArgs),
    /// Render a curve CSV as SVG and, for n = 2, as an OBJ surface.
    Render(RenderArgs),
    /// Run a verification suite and write its reports.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    /// Start perpendicular to the x-axis at (X, 0).
    #[arg(long, value_name = "X", conflicts_with_all = ["x0", "r0", "alpha0"])]
    axis_start: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    backward: bool,
    #[arg(long)]
    max_arclength: Option<f64>,
    #[arg(long)]
    x_escape: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    stop_after_vertical_tangents: Option<usize>,
    #[arg(long)]
    stop_after_r_axis_crossings: Option<usize>,
    /// Base name of the output files.
    #[arg(long, default_value = "curve")]
    name: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NearArg {
    Plane,
    Cylinder,
    Torus,
}

impl From<NearArg> for Near {
    fn from(v: NearArg) -> Near {
        match v {
            NearArg::Plane => Near::Plane,
            NearArg::Cylinder => Near::Cylinder,
            NearArg::Torus => Near::AngenentTorus,
        }
    }
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["near", "angenent_torus"])))]
struct FindArgs {
    #[arg(long, requires = "count")]
    near: Option<NearArg>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    angenent_torus: bool,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Curve CSV with header s,x,r,alpha.
    input: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    obj: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    azimuthal_samples: usize,
    /// Arclength spacing of the profile rings in the OBJ.
    #[arg(long, default_value_t = 0.02)]
    ring_spacing: f64,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    All,
    GaussBonnet,
    Legendre,
    QuarterSpheres,
    Residuals,
}

impl From<SuiteArg> for Suite {
    fn from(v: SuiteArg) -> Suite {
        match v {
            SuiteArg::All => Suite::All,
            SuiteArg::GaussBonnet => Suite::GaussBonnet,
            SuiteArg::Legendre => Suite::Legendre,
            SuiteArg::QuarterSpheres => Suite::QuarterSpheres,
            SuiteArg::Residuals => Suite::Residuals,
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<shrinker_core::Error> for Failure {
    fn from(e: shrinker_core::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

struct Context {
    config: AmbientConfig,
    settings: IntegratorSettings,
    search: SearchSettings,
    out_dir: PathBuf,
}

impl Context {
    fn new(g: &Global) -> Result<Self, Failure> {
        let n = g.n.ok_or_else(|| Failure::Usage("--n is required".into()))?;
        let config = AmbientConfig::new(n).map_err(|e| Failure::Usage(e.to_string()))?;
        let mut settings = IntegratorSettings::default();
        if let Some(v) = g.rel_tol {
            settings.rel_tol = v;
        }
        if let Some(v) = g.abs_tol {
            settings.abs_tol = v;
        }
        settings.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        let mut search = SearchSettings::default();
        if let Some(v) = g.seed_grid_resolution {
            search.grid_resolution = v;
        }
        search.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(Self { config, settings, search, out_dir: g.out_dir.clone() })
    }
}

fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn write_curve(dir: &Path, name: &str, curve: &ProfileCurve) -> Result<(), Failure> {
    write_atomic(&dir.join(format!("{name}.csv")), curve_to_csv(&curve.samples).as_bytes())?;
    write_json(&dir.join(format!("{name}.json")), &CurveSidecar::new(curve)?)?;
    Ok(())
}

fn cmd_integrate(ctx: &Context, a: &IntegrateArgs) -> Outcome {
    let init = match (a.axis_start, a.r0) {
        (Some(x0), _) => InitialData::AxisStart { x0 },
        (None, Some(r0)) => InitialData::Interior { x0: a.x0.unwrap_or(0.0), r0, alpha0: a.alpha0.unwrap_or(0.0) },
        (None, None) => return Err(Failure::Usage("give --axis-start X or --r0 R [--x0 X] [--alpha0 A]".into())),
    };
    init.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut st = ctx.settings;
    if let Some(v) = a.max_arclength {
        st.max_arclength = v;
    }
    if let Some(v) = a.x_escape {
        st.x_escape = v;
    }
    if let Some(v) = a.max_step {
        st.max_step = v;
    }
    st.stop_after_vertical_tangents = a.stop_after_vertical_tangents;
    st.stop_after_r_axis_crossings = a.stop_after_r_axis_crossings;
    st.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let dir = if a.backward { Direction::Backward } else { Direction::Forward };
    let curve = integrate(&ctx.config, &st, init, dir)?;
    write_curve(&ctx.out_dir, &a.name, &curve)?;
    println!("{} samples, termination {:?}, written to {}", curve.samples.len(), curve.termination, ctx.out_dir.join(format!("{}.csv", a.name)).display());
    Ok(true)
}

#[derive(Serialize)]
struct TorusManifest {
    n: u32,
    r_ang: f64,
    closure_defect: f64,
    turning: f64,
    gauss_bonnet: f64,
    curve_file: String,
}

fn cmd_find(ctx: &Context, a: &FindArgs) -> Outcome {
    if a.angenent_torus {
        let dir = ctx.out_dir.join("angenent-torus");
        let (r_ang, lp) = find_angenent_torus(&ctx.config, &ctx.settings)?;
        let gb = gauss_bonnet_closed(&ctx.config, &lp.curve)?;
        write_curve(&dir, "torus", &lp.curve)?;
        let m = TorusManifest { n: ctx.config.n, r_ang, closure_defect: lp.defect, turning: lp.turning, gauss_bonnet: gb, curve_file: "torus.csv".into() };
        write_json(&dir.join("manifest.json"), &m)?;
        println!("r_Ang = {r_ang:.15}, closure defect {:.2e}", lp.defect);
        return Ok(true);
    }
    let near: Near = a.near.expect("clap group").into();
    let count = a.count.expect("clap requires");
    if count == 0 {
        return Err(Failure::Usage("--count must be at least 1".into()));
    }
    let label = match near {
        Near::Plane => "plane",
        Near::Cylinder => "cylinder",
        Near::AngenentTorus => "torus",
    };
    let dir = ctx.out_dir.join(format!("near-{label}"));
    let fam = build_family(&ctx.config, &ctx.settings, &ctx.search, near, count)?;
    for e in &fam.entries {
        write_curve(&dir, &format!("k{}", e.k), &e.curve)?;
    }
    let manifest = FamilyManifest::new(&ctx.config, &fam, count, |k| format!("k{k}.csv"));
    write_json(&dir.join("manifest.json"), &manifest)?;
    for e in &manifest.entries {
        println!("k = {}: t = {:.13}, {:?}, {} segments", e.k, e.t_k, e.topology, e.segment_count);
    }
    for d in &manifest.diagnostics {
        eprintln!("warning: {d}");
    }
    Ok(manifest.complete())
}

fn cmd_render(ctx: &Context, a: &RenderArgs) -> Outcome {
    if a.svg.is_none() && a.obj.is_none() {
        return Err(Failure::Usage("nothing to render: give --svg and/or --obj".into()));
    }
    if a.obj.is_some() && ctx.config.n != 2 {
        return Err(Failure::Usage(format!("--obj needs n = 2, got n = {}", ctx.config.n)));
    }
    let text = fs::read_to_string(&a.input)?;
    let samples = curve_from_csv(&text)?;
    if let Some(path) = &a.svg {
        let mut style = SvgStyle::default();
        if let Some(w) = a.width {
            style.width = w;
        }
        if let Some(h) = a.height {
            style.height = h;
        }
        write_atomic(path, render_svg(&ctx.config, &samples, &style).as_bytes())?;
    }
    if let Some(path) = &a.obj {
        let mesh =
            surface_of_revolution(&ctx.config, &thin_profile(&samples, a.ring_spacing), a.azimuthal_samples).map_err(|e| Failure::Usage(e.to_string()))?;
        write_atomic(path, mesh.to_obj().as_bytes())?;
        println!("{} vertices, {} triangles, Euler characteristic {}", mesh.vertices.len(), mesh.faces.len(), mesh.euler_characteristic());
    }
    Ok(true)
}

fn cmd_verify(ctx: &Context, a: &VerifyArgs) -> Outcome {
    let suite: Suite = a.suite.into();
    let reports = run_suite(&ctx.config, &ctx.settings, suite)?;
    let label = serde_json::to_value(suite).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    write_json(&ctx.out_dir.join(format!("verify-{label}.json")), &reports)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    println!("{} checks, {} failed", reports.len(), failed.len());
    for f in &failed {
        println!("FAILED {f}");
    }
    Ok(failed.is_empty())
}

fn run(cli: &Cli) -> Outcome {
    let ctx = Context::new(&cli.global)?;
    match &cli.command {
        Command::Integrate(a) => cmd_integrate(&ctx, a),
        Command::Find(a) => cmd_find(&ctx, a),
        Command::Render(a) => cmd_render(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            println!("{}", serde_json::json!({ "error": msg }));
            ExitCode::from(1)
        }
    }
}
