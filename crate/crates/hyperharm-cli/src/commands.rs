use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hyperharm::circle::{kernel_mass, poisson_extend, split_tangential_h2, CircleField};
use hyperharm::error::Error;
use hyperharm::fuchsian::phi::{fundamental_grid, relative_defect, InvariantQd, ProjectionConfig};
use hyperharm::fuchsian::{
    cocycle_space_dims, phi_map, psi_map, roundtrip, theta_qd, Cocycle, CohomologyBasis, GroupPresentation,
    PhiConfig, PsiConfig, Seed,
};
use hyperharm::harmonic::{MonomialField, XiReg};
use hyperharm::io::{fmt_f64, load_group, parse_grid, QdSpec};
use hyperharm::moebius::{MoebiusMap, Point, CLASSIFY_TOL};
use hyperharm::qdiff::{beta, harmonic_residual, invariant_bounds, QuadDiff, RationalQd, VectorField};
use hyperharm::verify;
use hyperharm::C64;

#[derive(Parser)]
#[command(name = "hyperharm", version, about = "Harmonic vector fields and Fuchsian cohomology")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify Möbius maps from a JSON file or a group's generators.
    Classify(ClassifyArgs),
    /// Sample a harmonic field for a quadratic differential on a grid.
    Construct(FieldArgs),
    /// Harmonic residuals of the constructed field; fails above --tol.
    CheckHarmonic(FieldArgs),
    /// β of the constructed field against the input differential.
    Beta(FieldArgs),
    /// Evaluate the Poisson-kernel extension of a circle field on a ring.
    PoissonExtend(PoissonArgs),
    /// Kernel mass at radius 1 − eps with its closed form.
    KernelMass(KernelArgs),
    /// Split a circle field into tangential and H² parts.
    SplitCircle(SplitArgs),
    /// Dimensions of Z¹, B¹, H¹.
    CohomologyDims(GroupArg),
    /// Truncated theta series and its invariance defect.
    Theta(ThetaArgs),
    /// Cocycle of a theta differential.
    Phi(PhiArgs),
    /// Quadratic differential of a cocycle.
    Psi(PsiArgs),
    /// Φ(Ψ(c)) against c.
    Roundtrip(RoundtripArgs),
    /// Run the verification suite.
    VerifyAll(VerifyArgs),
}

#[derive(Args)]
struct GroupArg {
    /// `octagon` or a group JSON file.
    #[arg(long, default_value = "octagon")]
    group: String,
}

#[derive(Args)]
struct ClassifyArgs {
    /// JSON file with one map or an array of maps.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long, default_value_t = CLASSIFY_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FieldArgs {
    /// monomial:n, shifted:n:re:im, rational:(z+i)^-4 or theta:L
    #[arg(long)]
    qd: String,
    /// x0:x1:nx,y0:y1:ny in the half-plane.
    #[arg(long, allow_hyphen_values = true, default_value = "-1.5:1.5:7,0.5:3:7")]
    grid: String,
    /// Pass threshold for check-harmonic and beta; tail tolerance for construct.
    #[arg(long)]
    tol: Option<f64>,
    /// Finite-difference step for harmonic residuals.
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[arg(long, default_value = "octagon")]
    group: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PoissonArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    radius: f64,
    /// Ring samples; defaults to the input's sample count.
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThetaArgs {
    #[arg(long, default_value = "1")]
    seed: String,
    #[arg(long = "L", default_value_t = 6)]
    l: u32,
    #[arg(long, default_value = "octagon")]
    group: String,
    /// Disk grid for coefficient samples.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhiArgs {
    #[arg(long, default_value = "1")]
    seed: String,
    #[arg(long = "L", default_value_t = 6)]
    l: u32,
    #[arg(long, default_value = "octagon")]
    group: String,
    /// Boundary samples.
    #[arg(long = "N", default_value_t = 2048)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PsiArgs {
    /// Cocycle JSON.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "octagon")]
    group: String,
    #[arg(long = "L", default_value_t = 5)]
    l: u32,
    #[arg(long = "N", default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 0.999)]
    radius: f64,
    /// Disk grid for coefficient samples.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RoundtripArgs {
    /// Cocycle JSON; defaults to Φ of the theta series.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value = "1")]
    seed: String,
    #[arg(long = "L", default_value_t = 6)]
    l: u32,
    #[arg(long, default_value = "octagon")]
    group: String,
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Fail {
    Config(String),
    Check(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::InvalidSampleCount(_) | Error::TruncationTooLarge(_) => {
                Fail::Config(e.to_string())
            }
            e => Fail::Lib(e),
        }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::Config(e.to_string())
    }
}

impl From<csv::Error> for Fail {
    fn from(e: csv::Error) -> Self {
        Fail::Config(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Fail>;

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let r = match cli.cmd {
        Cmd::Classify(a) => classify(a),
        Cmd::Construct(a) => construct(a),
        Cmd::CheckHarmonic(a) => check_harmonic(a),
        Cmd::Beta(a) => beta_cmd(a),
        Cmd::PoissonExtend(a) => poisson(a),
        Cmd::KernelMass(a) => kernel(a),
        Cmd::SplitCircle(a) => split(a),
        Cmd::CohomologyDims(a) => dims(a),
        Cmd::Theta(a) => theta(a),
        Cmd::Phi(a) => phi(a),
        Cmd::Psi(a) => psi(a),
        Cmd::Roundtrip(a) => round(a),
        Cmd::VerifyAll(a) => verify_all(a),
    };
    match r {
        Ok(()) => 0,
        Err(Fail::Config(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Fail::Check(m)) => {
            eprintln!("check failed: {m}");
            1
        }
        Err(Fail::Lib(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Write to stdout; a closed pipe is not an error.
fn stdout(text: &str) -> Res<()> {
    let mut h = std::io::stdout().lock();
    match h.write_all(text.as_bytes()).and_then(|_| h.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Res<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout(&format!("{text}\n"))?,
    }
    Ok(())
}

fn emit_json(out: &Option<PathBuf>, v: &Value) -> Res<()> {
    emit(out, &serde_json::to_string_pretty(v)?)
}

fn write_csv(out: &Option<PathBuf>, header: &[&str], rows: &[Vec<f64>]) -> Res<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|&v| fmt_f64(v)))?;
    }
    let bytes = w.into_inner().map_err(|e| Fail::Config(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| Fail::Config(e.to_string()))?;
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout(&text)?,
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> Res<T> {
    let text = fs::read_to_string(p).map_err(|e| Fail::Config(format!("{}: {e}", p.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn positive(name: &str, v: f64) -> Res<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Fail::Config(format!("{name} must be positive, got {v}")))
    }
}

fn c2(z: C64) -> Value {
    json!([z.re, z.im])
}

fn classify(a: ClassifyArgs) -> Res<()> {
    let maps: Vec<MoebiusMap> = match (&a.input, &a.group) {
        (Some(p), _) => {
            let v: Value = read_json(p)?;
            let list = if v.is_array() { v } else { Value::Array(vec![v]) };
            serde_json::from_value(list)?
        }
        (None, Some(g)) => {
            let g = load_group(g)?;
            g.generators.clone()
        }
        (None, None) => return Err(Fail::Config("classify needs --in or --group".into())),
    };
    let tol = positive("tol", a.tol)?;
    let mut rows = Vec::new();
    for m in &maps {
        let fixed: Vec<Value> = match m.fixed_points() {
            Ok(pts) => pts
                .into_iter()
                .map(|p| match p {
                    Point::Finite(z) => c2(z),
                    Point::Infinity => json!("inf"),
                })
                .collect(),
            Err(_) => Vec::new(),
        };
        rows.push(json!({
            "class": m.classify(tol),
            "trace_sq": m.trace_sq(),
            "fixed_points": fixed,
        }));
    }
    emit_json(&a.out, &Value::Array(rows))
}

enum Built {
    Explicit(MonomialField),
    Rational(Box<XiReg<RationalQd>>),
    Theta(Box<XiReg<InvariantQd>>),
}

impl Built {
    fn field(&self) -> &dyn VectorField {
        match self {
            Built::Explicit(m) => m,
            Built::Rational(x) => x.as_ref(),
            Built::Theta(x) => x.as_ref(),
        }
    }

    fn coeff(&self, z: C64) -> C64 {
        match self {
            Built::Explicit(m) => (z - m.shift).powu(m.n),
            Built::Rational(x) => x.q.coeff(z),
            Built::Theta(x) => x.q.coeff(z),
        }
    }
}

fn build(a: &FieldArgs, tail_tol: f64) -> Res<Built> {
    let spec: QdSpec = a.qd.parse()?;
    Ok(match spec {
        QdSpec::Monomial(n) => Built::Explicit(MonomialField::new(n)),
        QdSpec::Shifted(n, s) => Built::Explicit(MonomialField::shifted(n, s)),
        QdSpec::Rational => Built::Rational(Box::new(XiReg::new(RationalQd, Some(RationalQd::bounds()), tail_tol)?)),
        QdSpec::Theta(l) => {
            let g = load_group(&a.group)?;
            let q = theta_qd(Seed::constant(1.0), &g, l)?;
            let inv = InvariantQd::fit(&q, &g, &ProjectionConfig::default())?;
            let bounds = invariant_bounds(&inv, &fundamental_grid(24, 48));
            Built::Theta(Box::new(XiReg::new(inv, Some(bounds), tail_tol)?))
        }
    })
}

fn half_plane_grid(s: &str) -> Res<Vec<C64>> {
    let g = parse_grid(s)?;
    if g.iter().any(|z| !(z.im > 0.0)) {
        return Err(Fail::Config(format!("grid {s:?} leaves the half-plane")));
    }
    Ok(g)
}

fn disk_grid(s: &str) -> Res<Vec<C64>> {
    let g = parse_grid(s)?;
    if g.iter().any(|z| !(z.norm() < 1.0)) {
        return Err(Fail::Config(format!("grid {s:?} leaves the disk")));
    }
    Ok(g)
}

fn construct(a: FieldArgs) -> Res<()> {
    let tail = positive("tol", a.tol.unwrap_or(1e-9))?;
    let grid = half_plane_grid(&a.grid)?;
    let built = build(&a, tail)?;
    let f = built.field();
    let rows = hyperharm::par::map(&grid, |&z| -> Res<Vec<f64>> {
        let xi = f.eval(z)?;
        let (r1, r2) = harmonic_residual(f, z, Some(a.h))?;
        let b = beta(f, z, None)?;
        Ok(vec![z.re, z.im, xi.re, xi.im, r1, r2, b.re, b.im])
    });
    let rows = rows.into_iter().collect::<Res<Vec<_>>>()?;
    write_csv(&a.out, &["x", "y", "re_xi", "im_xi", "r1", "r2", "re_f", "im_f"], &rows)
}

fn check_harmonic(a: FieldArgs) -> Res<()> {
    let tol = positive("tol", a.tol.unwrap_or(1e-5))?;
    let grid = half_plane_grid(&a.grid)?;
    let built = build(&a, 1e-9)?;
    let f = built.field();
    let rows = hyperharm::par::map(&grid, |&z| -> Res<Vec<f64>> {
        let (r1, r2) = harmonic_residual(f, z, Some(a.h))?;
        Ok(vec![z.re, z.im, r1, r2])
    });
    let rows = rows.into_iter().collect::<Res<Vec<_>>>()?;
    let worst = rows.iter().map(|r| r[2].abs().max(r[3].abs())).fold(0.0, f64::max);
    if a.out.is_some() {
        write_csv(&a.out, &["x", "y", "r1", "r2"], &rows)?;
    }
    println!("max_residual {}", fmt_f64(worst));
    if worst < tol {
        Ok(())
    } else {
        Err(Fail::Check(format!("max residual {worst:e} >= {tol:e}")))
    }
}

fn beta_cmd(a: FieldArgs) -> Res<()> {
    let tol = positive("tol", a.tol.unwrap_or(1e-5))?;
    let grid = half_plane_grid(&a.grid)?;
    let built = build(&a, 1e-9)?;
    let f = built.field();
    let rows = hyperharm::par::map(&grid, |&z| -> Res<Vec<f64>> {
        let b = beta(f, z, None)?;
        let q = built.coeff(z);
        Ok(vec![z.re, z.im, b.re, b.im, q.re, q.im, (b - q).norm()])
    });
    let rows = rows.into_iter().collect::<Res<Vec<_>>>()?;
    let worst = rows.iter().map(|r| r[6]).fold(0.0, f64::max);
    if a.out.is_some() {
        write_csv(&a.out, &["x", "y", "re_beta", "im_beta", "re_q", "im_q", "abs_err"], &rows)?;
    }
    println!("max_error {}", fmt_f64(worst));
    if worst < tol {
        Ok(())
    } else {
        Err(Fail::Check(format!("max beta error {worst:e} >= {tol:e}")))
    }
}

fn poisson(a: PoissonArgs) -> Res<()> {
    let x: CircleField = read_json(&a.input)?;
    if !(a.radius > 0.0 && a.radius < 1.0) {
        return Err(Fail::Config(format!("radius {} outside (0, 1)", a.radius)));
    }
    let n = a.n.unwrap_or(x.n());
    hyperharm::circle::check_n(n)?;
    let f = poisson_extend(&x)?;
    let rows = hyperharm::par::map_range(n, |k| {
        let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let z = C64::from_polar(a.radius, t);
        let v = f.value(z);
        vec![t, z.re, z.im, v.re, v.im]
    });
    write_csv(&a.out, &["theta", "x", "y", "re", "im"], &rows)
}

fn kernel(a: KernelArgs) -> Res<()> {
    let tol = positive("tol", a.tol)?;
    let m = kernel_mass(a.eps)?;
    println!("eps {}", fmt_f64(a.eps));
    println!("samples {}", m.samples);
    println!("numeric {} {}", fmt_f64(m.contour.re), fmt_f64(m.contour.im));
    println!("closed_form {} {}", fmt_f64(m.closed_form.re), fmt_f64(m.closed_form.im));
    println!("haar {} {}", fmt_f64(m.haar.re), fmt_f64(m.haar.im));
    let d = (m.contour - m.closed_form).norm();
    println!("difference {}", fmt_f64(d));
    if d < tol {
        Ok(())
    } else {
        Err(Fail::Check(format!("numeric and closed form differ by {d:e}")))
    }
}

fn split(a: SplitArgs) -> Res<()> {
    let x: CircleField = read_json(&a.input)?;
    let s = split_tangential_h2(&x);
    let err = s.tangential_part.add(&s.h2_part).l2_dist(&x);
    emit_json(
        &a.out,
        &json!({
            "tangential": s.tangential_part,
            "h2": s.h2_part,
            "reconstruction_error": err,
        }),
    )
}

fn dims(a: GroupArg) -> Res<()> {
    let g = load_group(&a.group)?;
    let (z, b, h) = cocycle_space_dims(&g);
    println!("{z} {b} {h}");
    Ok(())
}

fn theta(a: ThetaArgs) -> Res<()> {
    let seed: Seed = a.seed.parse()?;
    let g = load_group(&a.group)?;
    let q = theta_qd(seed, &g, a.l)?;
    let (abs, rel) = relative_defect(&q, &g);
    let summary = json!({
        "L": a.l,
        "elements": q.elements.len(),
        "value_at_0": c2(q.coeff(C64::new(0.0, 0.0))),
        "absolute_defect": abs,
        "relative_defect": rel,
    });
    match &a.grid {
        Some(s) => {
            let grid = disk_grid(s)?;
            let rows = hyperharm::par::map(&grid, |&w| {
                let v = q.coeff(w);
                vec![w.re, w.im, v.re, v.im]
            });
            eprintln!("{summary}");
            write_csv(&a.out, &["x", "y", "re_f", "im_f"], &rows)
        }
        None => emit_json(&a.out, &summary),
    }
}

fn theta_cocycle(seed: &str, l: u32, g: &GroupPresentation, n: usize) -> Res<hyperharm::fuchsian::PhiResult> {
    let seed: Seed = seed.parse()?;
    let q = theta_qd(seed, g, l)?;
    hyperharm::circle::check_n(n)?;
    let cfg = PhiConfig { boundary_samples: n, ..Default::default() };
    Ok(phi_map(&q, g, &cfg)?)
}

fn phi(a: PhiArgs) -> Res<()> {
    let g = load_group(&a.group)?;
    let r = theta_cocycle(&a.seed, a.l, &g, a.n)?;
    let basis = CohomologyBasis::new(&g.to_disk());
    let coords: Vec<f64> = basis.h1_coords(&r.cocycle).iter().cloned().collect();
    let mut v = serde_json::to_value(&r)?;
    v["h1_coords"] = json!(coords);
    v["b1_complement_norm"] = json!(basis.b1_complement_norm(&r.cocycle));
    emit_json(&a.out, &v)
}

fn psi(a: PsiArgs) -> Res<()> {
    let c: Cocycle = read_json(&a.input)?;
    let g = load_group(&a.group)?;
    if c.values.len() != g.generators.len() {
        return Err(Fail::Config(format!("cocycle has {} values for {} generators", c.values.len(), g.generators.len())));
    }
    if !(a.radius > 0.0 && a.radius < 1.0) {
        return Err(Fail::Config(format!("radius {} outside (0, 1)", a.radius)));
    }
    hyperharm::circle::check_n(a.n)?;
    let cfg = PsiConfig { l: a.l, radius: a.radius, samples: a.n, ..Default::default() };
    let r = psi_map(&c, &g.to_disk(), &cfg)?;
    let (abs, rel) = relative_defect(&r.qd, &g);
    let summary = json!({
        "boundary_normal_defect": r.boundary_normal_defect,
        "absolute_defect": abs,
        "relative_defect": rel,
        "value_at_0": c2(r.qd.coeff(C64::new(0.0, 0.0))),
    });
    match &a.grid {
        Some(s) => {
            let grid = disk_grid(s)?;
            let rows = hyperharm::par::map(&grid, |&w| {
                let v = r.qd.coeff(w);
                vec![w.re, w.im, v.re, v.im]
            });
            eprintln!("{summary}");
            write_csv(&a.out, &["x", "y", "re_f", "im_f"], &rows)
        }
        None => emit_json(&a.out, &summary),
    }
}

fn round(a: RoundtripArgs) -> Res<()> {
    let tol = positive("tol", a.tol)?;
    let g = load_group(&a.group)?;
    let c = match &a.input {
        Some(p) => read_json::<Cocycle>(p)?,
        None => theta_cocycle(&a.seed, a.l, &g, 2048)?.cocycle,
    };
    let rt = roundtrip(&c, &g, &PsiConfig::default(), &PhiConfig::default())?;
    emit_json(&a.out, &serde_json::to_value(&rt)?)?;
    if rt.relative_error <= tol {
        Ok(())
    } else {
        Err(Fail::Check(format!("round-trip error {:e} > {tol:e}", rt.relative_error)))
    }
}

fn verify_all(a: VerifyArgs) -> Res<()> {
    let criteria = verify::run_all(a.fast);
    for c in &criteria {
        eprintln!("{} {}", if c.pass() { "PASS" } else { "FAIL" }, c.name);
    }
    let report = verify::report(&criteria);
    emit_json(&a.out, &serde_json::to_value(&report)?)?;
    if report.all_pass {
        Ok(())
    } else {
        let n = report.checks.iter().filter(|c| !c.pass).count();
        Err(Fail::Check(format!("{n} of {} checks failed", report.checks.len())))
    }
}
