//! Command-line front end: solve problem files, re-check certificates,
//! query boundary degrees, and render maps.
//!
//! Exit codes: 0 when the requested certificate is granted (or the query
//! succeeded), 1 when the run finished but the certificate was refused,
//! 2 on errors (unreadable files, solver failures, bad arguments).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Vector2;

use bijmap::certify::{
    certify_boundary_bijection, certify_boundary_lines, certify_monotone_boundary, check_necessary,
    Certificate,
};
use bijmap::degree::{boundary_degree, preimage_count};
use bijmap::mapping::Map2;
use bijmap::pipeline::{
    load_map_images, load_mesh, parse_problem, render_svg, run, Coloring, Mode,
};

#[derive(Parser)]
#[command(
    name = "bijmap",
    version,
    about = "Certified bijective mappings of triangle meshes onto polygons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Feasibility,
    Free,
    FixedUniform,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Feasibility => Mode::Feasibility,
            ModeArg::Free => Mode::Free,
            ModeArg::FixedUniform => Mode::FixedUniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    /// Non-degenerate and orientation preserving (necessary only).
    Necessary,
    /// Boundary maps bijectively onto the polygon boundary.
    Bijection,
    /// Boundary edges lie on their assigned hull lines, corners pinned.
    Lines,
    /// Line conditions plus strictly monotone boundary advance.
    Monotone,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum ColorArg {
    #[default]
    None,
    GradientNorm,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file; write the map, report, and SVG renderings.
    Solve {
        /// Problem file (see the crate docs for the format).
        problem: PathBuf,
        /// Output directory for artifacts (created if missing).
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Override the problem's mode.
        #[arg(long)]
        mode: Option<ModeArg>,
        /// Override the condition-number bound K.
        #[arg(long = "K")]
        k: Option<f64>,
        /// Override the RNG seed recorded for degree queries.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the relative certification tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Re-run a certifier on an emitted map.
    Certify {
        /// Problem file naming the mesh, polygon, and assignment.
        problem: PathBuf,
        /// Map OBJ as written by solve.
        #[arg(long)]
        map: PathBuf,
        /// Which condition to check.
        #[arg(long, value_enum, default_value_t = ConditionArg::Monotone)]
        condition: ConditionArg,
        /// Override the relative certification tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Boundary degree and pre-image count of target points under a map.
    Degree {
        /// Source mesh (OFF or OBJ).
        #[arg(long)]
        mesh: PathBuf,
        /// Map OBJ as written by solve.
        #[arg(long)]
        map: PathBuf,
        /// Query point as "x,y"; may be repeated.
        #[arg(long = "query", required = true)]
        queries: Vec<String>,
        /// Seed for the generic-direction sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render a map (or a planar mesh itself) to SVG.
    Render {
        /// Source mesh (OFF or OBJ).
        #[arg(long)]
        mesh: PathBuf,
        /// Map OBJ; when omitted, the mesh's own planar coordinates are drawn.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        /// Face coloring.
        #[arg(long, value_enum, default_value_t)]
        color: ColorArg,
        /// Problem file providing the target polygon outline.
        #[arg(long)]
        problem: Option<PathBuf>,
    },
}

fn parse_query(s: &str) -> Result<Vector2<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("query '{s}' must be 'x,y'"));
    }
    let x: f64 = parts[0].parse().map_err(|_| format!("bad x in query '{s}'"))?;
    let y: f64 = parts[1].parse().map_err(|_| format!("bad y in query '{s}'"))?;
    Ok(Vector2::new(x, y))
}

fn certificate_exit(cert: &Certificate) -> ExitCode {
    print!("{cert}");
    if cert.certified() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn main_inner() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { problem, out_dir, mode, k, seed, tolerance } => {
            let mut problem = parse_problem(&problem)?;
            if let Some(mode) = mode {
                problem.mode = mode.into();
            }
            if let Some(k) = k {
                problem.params.cond_bound = k;
            }
            if let Some(seed) = seed {
                problem.seed = seed;
            }
            if let Some(tol) = tolerance {
                problem.tolerances.eps_con_rel = tol;
            }
            std::fs::create_dir_all(&out_dir)?;
            let report = run(&problem, &out_dir)?;
            print!("{}", report.to_text());
            Ok(if report.granted { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Certify { problem, map, condition, tolerance } => {
            let mut problem = parse_problem(&problem)?;
            if let Some(tol) = tolerance {
                problem.tolerances.eps_con_rel = tol;
            }
            let images = load_map_images(&map, problem.mesh.vertex_count())?;
            let map = Map2::new(&problem.mesh, images)?;
            let tol = &problem.tolerances;
            let cert = match condition {
                ConditionArg::Necessary => check_necessary(&map, tol)?,
                ConditionArg::Bijection => certify_boundary_bijection(&map, &problem.polygon, tol)?,
                ConditionArg::Lines => {
                    certify_boundary_lines(&map, &problem.polygon, &problem.assignment, tol)?
                }
                ConditionArg::Monotone => {
                    certify_monotone_boundary(&map, &problem.polygon, &problem.assignment, tol)?
                }
            };
            Ok(certificate_exit(&cert))
        }
        Command::Degree { mesh, map, queries, seed } => {
            let loaded = load_mesh(&mesh)?;
            for note in &loaded.notes {
                eprintln!("note: {note}");
            }
            let images = load_map_images(&map, loaded.mesh.vertex_count())?;
            let map = Map2::new(&loaded.mesh, images)?;
            for q in &queries {
                let q = parse_query(q).map_err(|e| anyhow::anyhow!(e))?;
                let deg = boundary_degree(&map, q, seed)?;
                let pre = preimage_count(&map, q);
                println!(
                    "query ({}, {}): boundary-degree={} preimages={}",
                    q.x, q.y, deg, pre.count
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { mesh, map, out, color, problem } => {
            let loaded = load_mesh(&mesh)?;
            let images = match map {
                Some(map_path) => load_map_images(&map_path, loaded.mesh.vertex_count())?,
                None => {
                    anyhow::ensure!(
                        loaded.mesh.ambient_dim() == 2,
                        "mesh is not planar; a --map file is required"
                    );
                    (0..loaded.mesh.vertex_count())
                        .map(|v| {
                            let p = loaded.mesh.vertex(v);
                            Vector2::new(p[0], p[1])
                        })
                        .collect()
                }
            };
            let map = Map2::new(&loaded.mesh, images)?;
            let polygon = match &problem {
                Some(p) => Some(parse_problem(p)?.polygon),
                None => None,
            };
            let coloring = match color {
                ColorArg::None => Coloring::None,
                ColorArg::GradientNorm => Coloring::GradientNorm,
            };
            let svg = render_svg(&map, polygon.as_ref(), coloring)?;
            std::fs::write(&out, svg)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
