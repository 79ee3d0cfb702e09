use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use skorokhod::completion::{cauchy_limit, pointwise_check, CauchySequence, PointClass};
use skorokhod::doc;
use skorokhod::metric::{rho_bounds, rho_plus_bounds, rho_step_exact, DistanceCertificate};
use skorokhod::svg;
use skorokhod::turbo::{
    embed, is_equivalent, triangle_family, triangle_limit, Equivalence, Turbofunction,
};
use skorokhod::{CadlagFunction, Homeomorphism};

const EXIT_NOT_EQUIVALENT: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_UNKNOWN: u8 = 5;

#[derive(Parser)]
#[command(
    name = "skorokhod",
    about = "Distances, visualizations, and limits of piecewise-linear càdlàg functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified bounds on the distance between two functions
    Rho {
        file_f: PathBuf,
        file_g: PathBuf,
        /// Width tolerance for the certificate
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Require the exact step-function solver
        #[arg(long)]
        exact: bool,
    },
    /// Certified bounds on the semi-distance between two turbofunctions
    RhoPlus {
        file_x: PathBuf,
        file_y: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Sample the visualization of a turbofunction to CSV and/or SVG
    Visualize {
        file_x: PathBuf,
        /// Output SVG path
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Output CSV path
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// End-to-end demo on the triangular family
    DemoTriangle {
        /// Comma-separated strictly increasing sharpness values, each > 2
        #[arg(long, default_value = "4,8,16,32,64")]
        theta_list: String,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Output directory (default: $SKOROKHOD_OUTDIR or the working directory)
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Decide whether two turbofunctions are equivalent
    Equiv { file_x: PathBuf, file_y: PathBuf },
}

enum CmdError {
    Parse(String),
    Precondition(String),
    Io(String),
}

impl CmdError {
    fn exit(&self) -> u8 {
        match self {
            CmdError::Parse(_) => EXIT_PARSE,
            CmdError::Precondition(_) => EXIT_PRECONDITION,
            CmdError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CmdError::Parse(m) | CmdError::Precondition(m) | CmdError::Io(m) => m,
        }
    }
}

fn load_doc(path: &Path) -> Result<doc::FunctionDocument, CmdError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CmdError::Io(format!("cannot read {}: {e}", path.display())))?;
    doc::parse(&text).map_err(|e| CmdError::Parse(format!("{}: {e}", path.display())))
}

fn load_function(path: &Path) -> Result<CadlagFunction, CmdError> {
    let d = load_doc(path)?;
    d.as_function()
        .map(Clone::clone)
        .map_err(|e| CmdError::Parse(format!("{}: {e}", path.display())))
}

fn load_turbo(path: &Path) -> Result<Turbofunction, CmdError> {
    let d = load_doc(path)?;
    d.as_turbo()
        .map_err(|e| CmdError::Parse(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CmdError> {
    fs::write(path, content)
        .map_err(|e| CmdError::Io(format!("cannot write {}: {e}", path.display())))
}

fn print_certificate(cert: &DistanceCertificate) {
    println!("lower {:.12e}", cert.lower);
    println!("upper {:.12e}", cert.upper);
    println!("exact {}", cert.exact);
    print_witness(&cert.witness);
}

fn print_witness(w: &Homeomorphism) {
    print!("witness");
    for &(t, v) in w.nodes() {
        print!(" ({t:.9},{v:.9})");
    }
    println!();
}

fn cmd_rho(file_f: &Path, file_g: &Path, tol: f64, exact: bool) -> Result<u8, CmdError> {
    let f = load_function(file_f)?;
    let g = load_function(file_g)?;
    if !(tol > 0.0) {
        return Err(CmdError::Precondition(format!("--tol must be positive, got {tol}")));
    }
    let cert = if exact {
        if !f.is_step() || !g.is_step() {
            return Err(CmdError::Precondition(
                "--exact requires step functions on both sides".into(),
            ));
        }
        rho_step_exact(&f, &g)
    } else {
        rho_bounds(&f, &g, tol)
    }
    .map_err(|e| CmdError::Precondition(e.to_string()))?;
    print_certificate(&cert);
    Ok(0)
}

fn cmd_rho_plus(file_x: &Path, file_y: &Path, tol: f64) -> Result<u8, CmdError> {
    let x = load_turbo(file_x)?;
    let y = load_turbo(file_y)?;
    let cert =
        rho_plus_bounds(&x, &y, tol).map_err(|e| CmdError::Precondition(e.to_string()))?;
    print_certificate(&cert);
    Ok(0)
}

fn visualization_csv(x: &Turbofunction) -> String {
    let viz = x.visualize();
    let mut samples: Vec<f64> = (0..=1024).map(|k| k as f64 / 1024.0).collect();
    samples.extend(viz.node_times());
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples.dedup();
    let mut out = String::from("s,value\n");
    for s in samples {
        out.push_str(&format!("{s:.12e},{:.12e}\n", viz.evaluate(s).unwrap()));
    }
    out
}

fn cmd_visualize(
    file_x: &Path,
    svg_out: Option<&Path>,
    csv_out: Option<&Path>,
) -> Result<u8, CmdError> {
    let x = load_turbo(file_x)?;
    let name = file_x
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "function".into());
    if let Some(path) = csv_out {
        write_file(path, &visualization_csv(&x))?;
    }
    if let Some(path) = svg_out {
        write_file(path, &svg::render_turbo(&x, &name))?;
    }
    if svg_out.is_none() && csv_out.is_none() {
        print!("{}", visualization_csv(&x));
    }
    Ok(0)
}

fn parse_theta_list(text: &str) -> Result<Vec<f64>, CmdError> {
    let thetas: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse()).collect();
    let thetas =
        thetas.map_err(|e| CmdError::Parse(format!("invalid --theta-list '{text}': {e}")))?;
    if thetas.is_empty() {
        return Err(CmdError::Precondition("--theta-list must not be empty".into()));
    }
    for &t in &thetas {
        if !(t > 2.0) {
            return Err(CmdError::Precondition(format!(
                "sharpness values must be > 2, got {t}"
            )));
        }
    }
    if thetas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CmdError::Precondition(
            "--theta-list must be strictly increasing".into(),
        ));
    }
    Ok(thetas)
}

fn cmd_demo_triangle(theta_list: &str, tol: f64, outdir: &Path) -> Result<u8, CmdError> {
    let thetas = parse_theta_list(theta_list)?;
    if !(tol > 0.0) {
        return Err(CmdError::Precondition(format!("--tol must be positive, got {tol}")));
    }
    fs::create_dir_all(outdir)
        .map_err(|e| CmdError::Io(format!("cannot create {}: {e}", outdir.display())))?;
    let fam: Vec<CadlagFunction> = thetas
        .iter()
        .map(|&t| triangle_family(t).expect("sharpness already validated"))
        .collect();
    let limit = triangle_limit();
    let mut all_ok = true;

    // pairwise upper bounds against the analytic 1/θ₁ − 1/θ₂ gap
    let mut csv = String::from("theta_1,theta_2,upper_bound,analytic_bound,ok\n");
    if thetas.len() > 1 {
        for i in 0..thetas.len() {
            for j in i + 1..thetas.len() {
                let cert = rho_bounds(&fam[i], &fam[j], tol)
                    .map_err(|e| CmdError::Precondition(e.to_string()))?;
                let analytic = 1.0 / thetas[i] - 1.0 / thetas[j];
                let ok = cert.upper <= analytic + tol;
                all_ok &= ok;
                csv.push_str(&format!(
                    "{},{},{:.12e},{:.12e},{}\n",
                    thetas[i], thetas[j], cert.upper, analytic, ok
                ));
            }
        }
    }
    write_file(&outdir.join("pairwise_bounds.csv"), &csv)?;
    print!("{csv}");

    // constructed limit and its distance to the flat limit
    let items: Vec<Turbofunction> = fam.iter().cloned().map(embed).collect();
    let seq = CauchySequence::new(items, tol)
        .map_err(|e| CmdError::Precondition(e.to_string()))?;
    let report = cauchy_limit(&seq, (10.0 * tol).min(1e-2))
        .map_err(|e| CmdError::Precondition(e.to_string()))?;
    println!(
        "limit: residual {:.6e}, levels {}, continuous {}",
        report.residual, report.levels_used, report.continuous
    );
    let to_flat = rho_plus_bounds(&report.limit, &limit, tol)
        .map_err(|e| CmdError::Precondition(e.to_string()))?;
    let last_theta = *thetas.last().unwrap();
    let flat_bound = 1.0 / last_theta + report.residual;
    let flat_ok = to_flat.upper <= flat_bound + tol;
    all_ok &= flat_ok;
    println!(
        "distance to flat limit: upper {:.6e} (bound {:.6e}, ok {})",
        to_flat.upper, flat_bound, flat_ok
    );

    // per-sharpness distance to the flat limit, the 1/θ inequality
    for (k, &theta) in thetas.iter().enumerate() {
        let cert = rho_plus_bounds(&embed(fam[k].clone()), &limit, tol)
            .map_err(|e| CmdError::Precondition(e.to_string()))?;
        let ok = cert.upper <= 1.0 / theta + tol;
        all_ok &= ok;
        println!(
            "theta {theta}: upper {:.6e} (bound {:.6e}, ok {ok})",
            cert.upper,
            1.0 / theta
        );
    }

    // pointwise convergence table
    let grid = [0.1, 0.25, 0.4, 0.5, 0.75, 1.0];
    let reports = pointwise_check(&seq, &limit, &grid, tol)
        .map_err(|e| CmdError::Precondition(e.to_string()))?;
    let mut table = String::from("s,class,final_deviation,converged\n");
    for r in &reports {
        let class = match r.class {
            PointClass::EndpointOne => "endpoint-1",
            PointClass::Good => "good",
            PointClass::Exceptional => "exceptional",
        };
        table.push_str(&format!(
            "{},{class},{:.12e},{}\n",
            r.s,
            r.deviations.last().copied().unwrap_or(0.0),
            r.converged
        ));
    }
    write_file(&outdir.join("pointwise.csv"), &table)?;
    print!("{table}");

    // artwork
    let overlay: Vec<(String, CadlagFunction)> = thetas
        .iter()
        .zip(&fam)
        .map(|(&t, f)| (format!("theta = {t}"), f.clone()))
        .collect();
    write_file(
        &outdir.join("family.svg"),
        &svg::render_overlay(&overlay, "triangular family"),
    )?;
    write_file(&outdir.join("limit.svg"), &svg::render_turbo(&limit, "flat limit"))?;

    println!("all bounds hold: {all_ok}");
    Ok(if all_ok { 0 } else { EXIT_UNKNOWN })
}

fn cmd_equiv(file_x: &Path, file_y: &Path) -> Result<u8, CmdError> {
    let x = load_turbo(file_x)?;
    let y = load_turbo(file_y)?;
    match is_equivalent(&x, &y) {
        Equivalence::Equivalent => {
            println!("equivalent");
            Ok(0)
        }
        Equivalence::NotEquivalent => {
            let cert = rho_plus_bounds(&x, &y, 1e-4)
                .map_err(|e| CmdError::Precondition(e.to_string()))?;
            println!("not-equivalent");
            println!("lower {:.12e}", cert.lower);
            Ok(EXIT_NOT_EQUIVALENT)
        }
        Equivalence::Unknown => {
            println!("unknown");
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn default_outdir(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os("SKOROKHOD_OUTDIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rho { file_f, file_g, tol, exact } => cmd_rho(&file_f, &file_g, tol, exact),
        Command::RhoPlus { file_x, file_y, tol } => cmd_rho_plus(&file_x, &file_y, tol),
        Command::Visualize { file_x, svg, csv } => {
            cmd_visualize(&file_x, svg.as_deref(), csv.as_deref())
        }
        Command::DemoTriangle { theta_list, tol, outdir } => {
            cmd_demo_triangle(&theta_list, tol, &default_outdir(outdir))
        }
        Command::Equiv { file_x, file_y } => cmd_equiv(&file_x, &file_y),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit())
        }
    }
}
