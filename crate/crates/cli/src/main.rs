//! Command-line front end: build constructions, verify curvature, scan
//! telescope windows, evaluate pointwise, and export samples.
//!
//! Exit codes: 0 success, 1 certificate failure, 2 parameter or parse error.
//! The environment variable WARPFORGE_THREADS caps verification workers.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use warpforge_core::constructions::constants::SearchPolicy;
use warpforge_core::constructions::multi::{build_multi_telescope, MultiStage};
use warpforge_core::constructions::telescope::build_telescope;
use warpforge_core::constructions::TripleWarpSpec;
use warpforge_core::curvature::oracle::{default_step, ricci_fd_triple};
use warpforge_core::curvature::FiberDescriptor;
use warpforge_core::doc::{
    certificate_to_json, csv_samples, log_radii, SpecDocument, SpecPayload, TelescopeDocument,
};
use warpforge_core::num::Wide;
use warpforge_core::verify::window::{cone_window_scan, cone_window_scan_multi, ScanMode};
use warpforge_core::verify::{verify_nonneg_ricci, VerifyInterval, VerifyPolicy};

#[derive(Parser)]
#[command(
    name = "warpforge",
    about = "warped-product metrics with certified nonnegative Ricci curvature"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Model1,
    Model2,
    Block,
    Connector,
    Telescope,
    MultiTelescope,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    A,
    B,
    Fiber,
}

#[derive(Subcommand)]
enum Command {
    /// Build a construction; writes document, construction log and
    /// certificates; exit 0 iff all certificates pass
    Build {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 10.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1)]
        stages: usize,
        /// comma-separated fiber dimensions for multi-telescope (each fiber
        /// normalized to Ric >= dim-1)
        #[arg(long)]
        fibers: Option<String>,
        #[arg(long, default_value_t = 4.0)]
        rho_exponent: f64,
        #[arg(long, default_value_t = 64)]
        budget: u32,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Verify a profile document; writes the certificate; exit 0 iff pass
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        emit_csv: Option<PathBuf>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Window reports for a telescope document, one per stage
    Scan {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::A)]
        mode: Mode,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Pointwise profile and Ricci values at the given radii
    Eval {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "r")]
        radii: Vec<f64>,
        /// add finite-difference oracle columns and deltas
        #[arg(long, default_value_t = false)]
        oracle: bool,
    },
    /// CSV sample table over a log-uniform radius range
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
    },
}

fn policy_from(budget: u32, depth: Option<u32>, grid: Option<usize>) -> SearchPolicy {
    let mut verify = VerifyPolicy::default();
    if let Some(d) = depth {
        verify.max_depth = d;
    }
    if let Some(g) = grid {
        verify.per_decade = g;
    }
    SearchPolicy { budget, verify }
}

fn load_spec(path: &Path) -> Result<SpecDocument, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path:?}: {e}"))?;
    SpecDocument::from_json(&text).map_err(|e| e.to_string())
}

fn write(path: &Path, content: &str) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| e.to_string())?;
    }
    std::fs::write(path, content).map_err(|e| format!("cannot write {path:?}: {e}"))
}

#[allow(clippy::too_many_arguments)]
fn run_build(
    target: Target,
    m: u32,
    n: u32,
    epsilon: f64,
    l: f64,
    lambda: f64,
    delta: Option<f64>,
    stages: usize,
    fibers: Option<String>,
    rho_exponent: f64,
    policy: &SearchPolicy,
    out: &Path,
) -> Result<bool, String> {
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    let write_spec = |spec: &TripleWarpSpec,
                      log: &str,
                      cert: &warpforge_core::verify::CurvatureCertificate|
     -> Result<bool, String> {
        write(&out.join("document.json"), &SpecDocument::triple(spec).to_json())?;
        write(&out.join("construction.log"), log)?;
        write(&out.join("certificate.json"), &certificate_to_json(cert))?;
        println!(
            "certificate: {} (margin {})",
            if cert.passed() { "pass" } else { "FAIL" },
            cert.margin
        );
        Ok(cert.passed())
    };
    match target {
        Target::Model1 => {
            let b = warpforge_core::constructions::model1::build_model_i(
                m,
                n,
                epsilon,
                delta.map(Wide::from_f64),
                None,
                policy,
            )
            .map_err(|e| e.to_string())?;
            write_spec(&b.spec, &b.log.render(), &b.certificate)
        }
        Target::Model2 => {
            let b = warpforge_core::constructions::model2::build_model_ii(
                m,
                n,
                epsilon,
                Wide::from_f64(lambda),
                None,
                policy,
            )
            .map_err(|e| e.to_string())?;
            write_spec(&b.spec, &b.log.render(), &b.certificate)
        }
        Target::Block => {
            let b = warpforge_core::constructions::block::build_block(m, n, epsilon, l, policy)
                .map_err(|e| e.to_string())?;
            write_spec(&b.spec, &b.log.render(), &b.certificate)
        }
        Target::Connector => {
            let b = warpforge_core::constructions::connector::build_connector(
                m, n, epsilon, l, policy,
            )
            .map_err(|e| e.to_string())?;
            write_spec(&b.spec, &b.log.render(), &b.certificate)
        }
        Target::Telescope => {
            let t = build_telescope(m, n, stages, rho_exponent, policy)
                .map_err(|e| e.to_string())?;
            let doc = TelescopeDocument::new(m, n, rho_exponent, &t.stages);
            write(&out.join("telescope.json"), &doc.to_json())?;
            write(&out.join("construction.log"), &t.log.render())?;
            let mut all = true;
            for st in &t.stages {
                let ok = st.certificate.passed() && st.certificate_smoothed.passed();
                all &= ok;
                println!(
                    "stage {}: certificate {} / smoothed {}",
                    st.index,
                    if st.certificate.passed() { "pass" } else { "FAIL" },
                    if st.certificate_smoothed.passed() { "pass" } else { "FAIL" }
                );
                write(
                    &out.join(format!("certificate-stage{}.json", st.index)),
                    &certificate_to_json(&st.certificate),
                )?;
            }
            Ok(all)
        }
        Target::MultiTelescope => {
            let dims: Vec<u32> = fibers
                .ok_or("multi-telescope needs --fibers")?
                .split(',')
                .map(|s| s.trim().parse::<u32>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let fibs: Vec<FiberDescriptor> =
                dims.iter().map(|&d| FiberDescriptor::sphere(d)).collect();
            let t = build_multi_telescope(&fibs, stages, rho_exponent, policy)
                .map_err(|e| e.to_string())?;
            let mut all = true;
            for st in &t.stages {
                let ok = st.certificate.passed() && st.certificate_smoothed.passed();
                all &= ok;
                println!(
                    "stage {} (fiber {}): certificate {}",
                    st.index,
                    st.active_fiber,
                    if ok { "pass" } else { "FAIL" }
                );
            }
            let json = serde_json::to_string_pretty(&t.stages).map_err(|e| e.to_string())?;
            write(&out.join("multi-telescope.json"), &json)?;
            write(&out.join("construction.log"), &t.log.render())?;
            Ok(all)
        }
    }
}

fn run_verify(
    input: &Path,
    out: Option<&Path>,
    emit_csv: Option<&Path>,
    depth: Option<u32>,
    grid: Option<usize>,
) -> Result<bool, String> {
    let doc = load_spec(input)?;
    let mut policy = VerifyPolicy::default();
    if let Some(d) = depth {
        policy.max_depth = d;
    }
    if let Some(g) = grid {
        policy.per_decade = g;
    }
    let cert = match &doc.spec {
        SpecPayload::Triple(spec) => {
            verify_nonneg_ricci(spec, VerifyInterval { lo: spec.origin, hi: None }, &policy)
                .map_err(|e| e.to_string())?
        }
        SpecPayload::Multi(spec) => warpforge_core::verify::verify_nonneg_ricci_multi(
            spec,
            VerifyInterval { lo: spec.origin, hi: None },
            &policy,
        )
        .map_err(|e| e.to_string())?,
    };
    let json = certificate_to_json(&cert);
    if let Some(path) = out {
        write(path, &json)?;
    }
    println!(
        "certificate: {} (margin {}, {} subintervals, depth {})",
        if cert.passed() { "pass" } else { "FAIL" },
        cert.margin,
        cert.subintervals.len(),
        cert.refinement_depth
    );
    if let Some(csv_path) = emit_csv {
        if let SpecPayload::Triple(spec) = &doc.spec {
            let lo = spec.origin.max(Wide::from_f64(1e-3));
            let hi = spec
                .phi
                .breakpoints()
                .last()
                .copied()
                .unwrap_or(Wide::from_f64(1e3));
            let radii = log_radii(lo * Wide::from_f64(1.001), hi, 200);
            let csv = csv_samples(spec, &radii).map_err(|e| e.to_string())?;
            write(csv_path, &csv)?;
        }
    }
    Ok(cert.passed())
}

fn run_scan(input: &Path, mode: Mode, out: &Path, svg: Option<&Path>) -> Result<bool, String> {
    let text = std::fs::read_to_string(input).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    if let Ok(doc) = TelescopeDocument::from_json(&text) {
        let scan_mode = match mode {
            Mode::A => ScanMode::AScale,
            Mode::B => ScanMode::BScale,
            Mode::Fiber => {
                return Err("fiber mode needs a multi-telescope document".into());
            }
        };
        let reports = cone_window_scan(&doc.stages, scan_mode).map_err(|e| e.to_string())?;
        println!("stage  psi  (cone model)");
        for r in &reports {
            println!("{:>5}  {}  {:?}", r.stage, r.psi, r.cone_model);
        }
        let json = serde_json::to_string_pretty(&reports).map_err(|e| e.to_string())?;
        write(&out.join(format!("scan-{}.json", mode_name(mode))), &json)?;
        if let Some(svg_path) = svg {
            let svg_text = render_scan_svg(&doc, &reports);
            write(svg_path, &svg_text)?;
        }
        return Ok(true);
    }
    if let Ok(stages) = serde_json::from_str::<Vec<MultiStage>>(&text) {
        if !matches!(mode, Mode::Fiber) {
            return Err("multi-telescope documents scan in fiber mode".into());
        }
        let reports = cone_window_scan_multi(&stages).map_err(|e| e.to_string())?;
        for r in &reports {
            println!("stage {}: psi {} cone {:?}", r.stage, r.psi, r.cone_model);
        }
        let json = serde_json::to_string_pretty(&reports).map_err(|e| e.to_string())?;
        write(&out.join("scan-fiber.json"), &json)?;
        return Ok(true);
    }
    Err("input is not a telescope document".into())
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::A => "a",
        Mode::B => "b",
        Mode::Fiber => "fiber",
    }
}

/// Log-log plot of stage 1's rescaled profiles against the cone line over
/// the scan window.
fn render_scan_svg(
    doc: &TelescopeDocument,
    reports: &[warpforge_core::verify::window::ConeWindowReport],
) -> String {
    let (w, h) = (640.0, 420.0);
    let mut paths = String::new();
    if let (Some(stage), Some(report)) = (doc.stages.first(), reports.first()) {
        let (w_lo, w_hi) = report.window;
        let inv = report.scale.recip();
        let colors = ["#1f77b4", "#d62728", "#2ca02c"];
        let profs = [&stage.spec.phi, &stage.spec.psi, &stage.spec.rho];
        for (pi, prof) in profs.iter().enumerate() {
            let mut d = String::new();
            for i in 0..=200 {
                let t = i as f64 / 200.0;
                let rw = w_lo * (w_hi / w_lo).powf(t);
                let r_abs = Wide::from_f64(rw) * inv;
                let Ok(jet) = prof.eval(r_abs) else { continue };
                let v = (jet[0] * report.scale).log10_f64();
                let x = 40.0 + (w - 60.0) * t;
                let vlo = -18.0;
                let vhi = 1.0;
                let y = h - 30.0 - (h - 60.0) * ((v - vlo) / (vhi - vlo)).clamp(0.0, 1.0);
                d.push_str(&format!("{}{x:.1},{y:.1} ", if i == 0 { "M" } else { "L" }));
            }
            paths.push_str(&format!(
                "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                colors[pi % colors.len()]
            ));
        }
        let mut d = String::new();
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let rw = w_lo * (w_hi / w_lo).powf(t);
            let v = ((1.0 - stage.epsilon) * rw).log10();
            let x = 40.0 + (w - 60.0) * t;
            let y = h - 30.0 - (h - 60.0) * ((v + 18.0) / 19.0).clamp(0.0, 1.0);
            d.push_str(&format!("{}{x:.1},{y:.1} ", if i == 0 { "M" } else { "L" }));
        }
        paths.push_str(&format!(
            "<path d=\"{d}\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n"
        ));
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"20\" y=\"20\" font-size=\"13\">rescaled warp profiles over the scan window (log-log)</text>\n\
         {paths}</svg>\n"
    )
}

fn run_eval(input: &Path, radii: &[f64], oracle: bool) -> Result<bool, String> {
    let doc = load_spec(input)?;
    let SpecPayload::Triple(spec) = &doc.spec else {
        return Err("eval supports triple-fiber documents".into());
    };
    if oracle {
        println!("r,phi,psi,rho,ric00,ric11,ric22,ric33,fd00,fd11,fd22,fd33,maxdelta");
    } else {
        println!("r,phi,psi,rho,ric00,ric11,ric22,ric33");
    }
    for &r in radii {
        let rw = Wide::from_f64(r);
        let jp = spec.phi.eval(rw).map_err(|e| e.to_string())?;
        let jq = spec.psi.eval(rw).map_err(|e| e.to_string())?;
        let jw = spec.rho.eval(rw).map_err(|e| e.to_string())?;
        let ric = warpforge_core::curvature::ricci_multi_jets(&spec.fibers(), &[jp, jq, jw]);
        let mut line = format!(
            "{r},{},{},{},{},{},{},{}",
            jp[0], jq[0], jw[0], ric[0], ric[1], ric[2], ric[3]
        );
        if oracle {
            let phi = |x: f64| spec.phi.eval_f64(x).map(|j| j[0]).unwrap_or(f64::NAN);
            let psi = |x: f64| spec.psi.eval_f64(x).map(|j| j[0]).unwrap_or(f64::NAN);
            let rho = |x: f64| spec.rho.eval_f64(x).map(|j| j[0]).unwrap_or(f64::NAN);
            let o = ricci_fd_triple(spec.m, spec.n, &phi, &psi, &rho, r, default_step(r));
            let ov = o.eval.components();
            let mut maxdelta = 0.0f64;
            for (a, b) in ric.iter().zip(&ov) {
                let denom = a.abs().to_f64().max(1.0);
                let d = (a.to_f64() - b).abs() / denom;
                // NaN oracle columns (profiles below f64 range) poison the delta
                maxdelta = if d.is_nan() || maxdelta.is_nan() { f64::NAN } else { maxdelta.max(d) };
            }
            line.push_str(&format!(",{},{},{},{},{maxdelta:e}", ov[0], ov[1], ov[2], ov[3]));
        }
        println!("{line}");
    }
    Ok(true)
}

fn run_export(
    input: &Path,
    csv: &Path,
    samples: usize,
    r_min: Option<f64>,
    r_max: Option<f64>,
) -> Result<bool, String> {
    let doc = load_spec(input)?;
    let SpecPayload::Triple(spec) = &doc.spec else {
        return Err("export supports triple-fiber documents".into());
    };
    let lo = r_min
        .map(Wide::from_f64)
        .unwrap_or_else(|| spec.origin.max(Wide::from_f64(1e-3)) * Wide::from_f64(1.001));
    let hi = r_max.map(Wide::from_f64).unwrap_or_else(|| {
        spec.phi.breakpoints().last().copied().unwrap_or(Wide::from_f64(1e3))
    });
    let radii = log_radii(lo, hi, samples.max(2));
    let table = csv_samples(spec, &radii).map_err(|e| e.to_string())?;
    write(csv, &table)?;
    println!("wrote {} rows to {csv:?}", samples.max(2));
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Build {
            target,
            m,
            n,
            epsilon,
            l,
            lambda,
            delta,
            stages,
            fibers,
            rho_exponent,
            budget,
            depth,
            grid,
            out,
        } => {
            let policy = policy_from(budget, depth, grid);
            run_build(
                target, m, n, epsilon, l, lambda, delta, stages, fibers, rho_exponent, &policy,
                &out,
            )
        }
        Command::Verify { input, out, emit_csv, depth, grid } => {
            run_verify(&input, out.as_deref(), emit_csv.as_deref(), depth, grid)
        }
        Command::Scan { input, mode, out, svg } => run_scan(&input, mode, &out, svg.as_deref()),
        Command::Eval { input, radii, oracle } => run_eval(&input, &radii, oracle),
        Command::Export { input, csv, samples, r_min, r_max } => {
            run_export(&input, &csv, samples, r_min, r_max)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
