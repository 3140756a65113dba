use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use magstat::harness::{
    brauer_from_section, field_csv, find_benchmark, material_from_section, run_study, setup_from_config,
    study_csv, study_overrides, study_table, ConfigFile, SolverChoice,
};
use magstat::materials::{certify_bounds, SampleSpec};
use magstat::mesh::{generate_unit_square, parse_mesh, serialize_mesh};
use magstat::solver::{newton_solve, zarantonello_solve, NewtonConfig};
use magstat::{Error, Mesh};

#[derive(Parser)]
#[command(name = "magstat", version, about = "Nonlinear 2D magnetostatics by energy minimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem described by a config file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Mesh file replacing the generator keys of the config.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Solver telemetry (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Per-quadrature-point b and h (CSV).
        #[arg(long)]
        field_dump: Option<PathBuf>,
    },
    /// Refinement study of a built-in benchmark.
    Study {
        #[arg(long)]
        benchmark: String,
        /// Polynomial degree k; the space uses degree k + 1.
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        levels: usize,
        /// Config with a [newton] section and optionally `error_mode`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        csv: PathBuf,
        /// Directory receiving one JSON report per solve.
        #[arg(long)]
        telemetry: Option<PathBuf>,
    },
    /// Print sampled and certified convexity bounds of a material law.
    MaterialCheck {
        /// brauer | linear | magnet | anisotropic
        #[arg(long)]
        material: String,
        /// Comma-separated `key=value` list, e.g. `k1=3.8,k2=2.17`.
        #[arg(long)]
        params: Option<String>,
    },
    /// Mesh utilities.
    Mesh {
        #[command(subcommand)]
        action: MeshCommand,
    },
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Structured unit-square mesh with n x n cells.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// One uniform red refinement.
    Refine {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit codes: 0 success, 1 usage, 2 solver failure, 3 I/O.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Solver(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Solver(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) => Failure::Io(msg),
            Error::CgNoConvergence { .. }
            | Error::LineSearch { .. }
            | Error::NoConvergence { .. }
            | Error::InsufficientData(_) => Failure::Solver(msg),
            _ => Failure::Usage(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn load_mesh(path: &Path) -> CliResult<Mesh<f64>> {
    Ok(parse_mesh(&read(path)?)?)
}

fn solve(config: &Path, mesh: Option<&Path>, out: &Path, field_dump: Option<&Path>) -> CliResult<()> {
    let text = read(config)?;
    let mesh = mesh.map(load_mesh).transpose()?;
    let setup = setup_from_config(&text, mesh)?;
    let problem = &setup.problem;
    let (coeffs, report) = match setup.solver {
        SolverChoice::Newton => newton_solve(problem, None, &setup.newton)?,
        SolverChoice::Zarantonello { tau } => {
            let tau = match tau {
                Some(t) => t,
                None => {
                    let b = problem.bounds().ok_or_else(|| {
                        Failure::Usage("zarantonello without 'tau' needs laws with certified bounds".into())
                    })?;
                    b.gamma / (b.lipschitz * b.lipschitz)
                }
            };
            zarantonello_solve(problem, tau, None, &setup.newton)?
        }
    };
    let space = problem.space();
    let doc = json!({
        "problem": {
            "elements": space.num_elements(),
            "vertices": space.mesh().num_vertices(),
            "degree": space.degree() - 1,
            "space_degree": space.degree(),
            "free_dofs": problem.n_free(),
            "quadrature_degree": problem.rule().degree(),
            "mapped": setup.map.is_some(),
        },
        "report": serde_json::to_value(&report).expect("report serializes"),
    });
    write(out, &serde_json::to_string_pretty(&doc).expect("json serializes"))?;
    if let Some(path) = field_dump {
        write(path, &field_csv(&problem.fields_at_quadrature(&coeffs)?))?;
    }
    println!(
        "{} iterations, converged = {}, energy = {:.12e}, |r| = {:.3e}",
        report.iterations(),
        report.converged,
        report.final_energy,
        report.final_residual_norm
    );
    report.require_converged()?;
    Ok(())
}

fn study(
    name: &str,
    degree: usize,
    levels: usize,
    config: Option<&Path>,
    csv: &Path,
    telemetry: Option<&Path>,
) -> CliResult<()> {
    let mut bench = find_benchmark(name)?;
    let mut cfg = NewtonConfig::default();
    if let Some(path) = config {
        let o = study_overrides(&read(path)?)?;
        cfg = o.newton;
        if let Some(mode) = o.error_mode {
            bench = bench.with_error_mode(mode)?;
        }
    }
    let result = run_study(&bench, degree, levels, &cfg)?;
    write(csv, &study_csv(&result.rows))?;
    if let Some(dir) = telemetry {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
        for (i, r) in result.reports.iter().enumerate() {
            write(&dir.join(format!("{}_k{}_solve{:02}.json", bench.name, degree, i)), &r.to_json())?;
        }
    }
    print!("{}", study_table(&result.rows));
    match result.failure {
        Some(msg) => Err(Failure::Solver(format!("study stopped early: {msg}"))),
        None => Ok(()),
    }
}

fn material_check(name: &str, params: Option<&str>) -> CliResult<()> {
    let mut text = format!("[material.check]\ntype = {name}\n");
    for kv in params.unwrap_or("").split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("expected key=value in --params, got '{kv}'")))?;
        text.push_str(&format!("{} = {}\n", k.trim(), v.trim()));
    }
    let mut cfg = ConfigFile::parse(&text)?;
    let law = material_from_section(&mut cfg, "material.check")?;
    cfg.ensure_all_used()?;
    let brauer = if name == "brauer" {
        Some(brauer_from_section(&mut ConfigFile::parse(&text)?, "material.check")?)
    } else {
        None
    };
    let s_max = brauer.as_ref().map_or(5.0, |b| 2.0 * b.s_star);
    let spec = SampleSpec::Radial { s_max, radii: 801, angles: 24, x: [0.0, 0.0] };
    let rep = certify_bounds(law.as_ref(), &spec)?;
    println!("material       {name}");
    if let Some(a) = rep.analytic {
        println!("gamma          {:.10e}", a.gamma);
        println!("L              {:.10e}", a.lipschitz);
        if let Some(h) = a.hess_lipschitz {
            println!("L''            {h:.10e}");
        }
    }
    println!("gamma_sampled  {:.10e}", rep.gamma_hat);
    println!("L_sampled      {:.10e}", rep.lipschitz_hat);
    println!("L''_sampled    {:.10e}", rep.hess_lipschitz_hat);
    if let Some(b) = brauer {
        let r = b.c2_residuals();
        println!("s_star         {:.10}", b.s_star);
        println!("c2_residuals   {:.3e} {:.3e} {:.3e}", r[0], r[1], r[2]);
    }
    Ok(())
}

fn mesh_command(action: &MeshCommand) -> CliResult<()> {
    match action {
        MeshCommand::Gen { n, out } => {
            let mesh = generate_unit_square::<f64>(*n)?;
            write(out, &serialize_mesh(&mesh))?;
            println!("{} vertices, {} triangles", mesh.num_vertices(), mesh.num_triangles());
        }
        MeshCommand::Refine { input, out } => {
            let mesh = load_mesh(input)?.refine_uniform();
            write(out, &serialize_mesh(&mesh))?;
            println!("{} vertices, {} triangles", mesh.num_vertices(), mesh.num_triangles());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Solve { config, mesh, out, field_dump } => {
            solve(config, mesh.as_deref(), out, field_dump.as_deref())
        }
        Command::Study { benchmark, degree, levels, config, csv, telemetry } => {
            study(benchmark, *degree, *levels, config.as_deref(), csv, telemetry.as_deref())
        }
        Command::MaterialCheck { material, params } => material_check(material, params.as_deref()),
        Command::Mesh { action } => mesh_command(action),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
