//! End-to-end pipeline: problem files in, certified maps and reports out.
//!
//! [`run`] executes the solve the problem asks for, certifies the result,
//! and writes four artifacts next to each other in the output directory:
//! the mapped mesh as OBJ, two SVG renderings (plain and gradient-norm
//! colored), and a structured text report. A failed phase still produces a
//! report naming the stage that failed.

pub mod formats;
pub mod svg;

pub use formats::{
    load_map_images, load_mesh, map_to_obj, mesh_to_off, parse_problem, LoadError, LoadedMesh,
    Mode, Problem, ProblemError,
};
pub use svg::{render_svg, Coloring};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::certify::{
    assignment_feasibility, certify_boundary_bijection, certify_boundary_lines,
    certify_monotone_boundary, check_necessary, uniform_boundary_positions, Certificate, Condition,
    Feasibility,
};
use crate::coneopt::{
    feasibility_phase, fixed_boundary_variant, solve_free_boundary, worst_condition_number,
    OptError, OuterIteration, Phase, SolveTrace,
};
use crate::mapping::{dirichlet_energy, gradient_norms, Map2};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Where the run ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stage {
    Complete,
    Failed { stage: String, error: String },
}

/// One solve phase as recorded in the report.
#[derive(Clone, Debug)]
pub struct PhaseSummary {
    pub name: &'static str,
    pub iterations: Vec<OuterIteration>,
    pub strictly_feasible: bool,
    pub warning: Option<String>,
}

impl From<&SolveTrace> for PhaseSummary {
    fn from(trace: &SolveTrace) -> Self {
        PhaseSummary {
            name: match trace.phase {
                Phase::Feasibility => "feasibility",
                Phase::Energy => "energy",
            },
            iterations: trace.iterations.clone(),
            strictly_feasible: trace.strictly_feasible,
            warning: trace.warning.clone(),
        }
    }
}

/// Everything a run produced. `to_text` serializes it; the verdicts are
/// reproducible by re-running the certifiers on the emitted OBJ.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub problem: PathBuf,
    pub mesh_path: PathBuf,
    pub vertex_count: usize,
    pub face_count: usize,
    pub boundary_len: usize,
    pub load_notes: Vec<String>,
    pub polygon_edges: usize,
    pub mode: Mode,
    pub cond_bound: f64,
    pub stage: Stage,
    pub phases: Vec<PhaseSummary>,
    pub dirichlet: Option<f64>,
    pub worst_condition: Option<f64>,
    /// (min, max, mean) of the per-face gradient norms.
    pub gradient_stats: Option<(f64, f64, f64)>,
    pub certificates: Vec<Certificate>,
    /// The condition this mode is expected to certify.
    pub requested: Condition,
    /// Whether the requested certificate was granted.
    pub granted: bool,
    /// Paths written, in order: map OBJ, plain SVG, gradient SVG, report.
    pub artifacts: Vec<PathBuf>,
    /// (label, seconds) pairs.
    pub timings: Vec<(&'static str, f64)>,
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "bijmap run report");
        let _ = writeln!(w, "problem: {}", self.problem.display());
        let _ = writeln!(
            w,
            "mesh: {} (vertices={} faces={} boundary-edges={})",
            self.mesh_path.display(),
            self.vertex_count,
            self.face_count,
            self.boundary_len
        );
        for note in &self.load_notes {
            let _ = writeln!(w, "note: {note}");
        }
        let _ = writeln!(w, "polygon: edges={}", self.polygon_edges);
        let _ = writeln!(w, "mode: {}", self.mode);
        let _ = writeln!(w, "condition-bound: {}", self.cond_bound);
        match &self.stage {
            Stage::Complete => {
                let _ = writeln!(w, "stage: complete");
            }
            Stage::Failed { stage, error } => {
                let _ = writeln!(w, "stage: failed during {stage}: {error}");
            }
        }
        for ph in &self.phases {
            let _ = writeln!(
                w,
                "phase {}: {} outer iteration(s){}",
                ph.name,
                ph.iterations.len(),
                if ph.name == "feasibility" && ph.strictly_feasible {
                    ", strictly feasible"
                } else {
                    ""
                }
            );
            for (i, it) in ph.iterations.iter().enumerate() {
                let _ = writeln!(
                    w,
                    "  iter {}: value={:.9e} max-residual={:.3e}",
                    i + 1,
                    it.value,
                    it.max_residual
                );
            }
            if let Some(warning) = &ph.warning {
                let _ = writeln!(w, "  warning: {warning}");
            }
        }
        if let Some(e) = self.dirichlet {
            let _ = writeln!(w, "dirichlet-energy: {e:.12e}");
        }
        if let Some(k) = self.worst_condition {
            let _ = writeln!(w, "worst-condition-number: {k:.9}");
        }
        if let Some((lo, hi, mean)) = self.gradient_stats {
            let _ = writeln!(w, "gradient-norms: min={lo:.6e} max={hi:.6e} mean={mean:.6e}");
        }
        for cert in &self.certificates {
            let _ = write!(w, "certificate {cert}");
        }
        let _ = writeln!(
            w,
            "requested: {} -> {}",
            self.requested,
            if self.granted { "granted" } else { "not granted" }
        );
        for artifact in &self.artifacts {
            let _ = writeln!(w, "artifact: {}", artifact.display());
        }
        for (label, secs) in &self.timings {
            let _ = writeln!(w, "timing {label}: {secs:.3}s");
        }
        out
    }
}

/// The certificate each mode is required to earn for a zero exit.
pub fn requested_condition(mode: Mode) -> Condition {
    match mode {
        // Free and feasibility runs certify via the boundary line conditions.
        Mode::Feasibility | Mode::Free => Condition::BoundaryLines,
        // A uniform fixed boundary parameterizes the polygon bijectively.
        Mode::FixedUniform => Condition::BoundaryBijection,
    }
}

fn stage_of(err: &OptError) -> &'static str {
    match err {
        OptError::SolveFailed { phase: Phase::Feasibility, .. } => "feasibility",
        OptError::SolveFailed { phase: Phase::Energy, .. } => "energy",
        OptError::Certify(_) => "feasibility",
        _ => "setup",
    }
}

fn write_artifact(path: &Path, contents: &str) -> Result<(), PipelineError> {
    std::fs::write(path, contents)
        .map_err(|source| PipelineError::Write { path: path.display().to_string(), source })
}

/// Final vertex images plus per-phase traces on success; the failing stage's
/// name and error message otherwise.
pub type SolveOutcome = Result<(Vec<nalgebra::Vector2<f64>>, Vec<PhaseSummary>), (String, String)>;

/// Runs the solve a problem requests, with no artifact output.
pub fn solve_problem(problem: &Problem) -> SolveOutcome {
    let mut phases = Vec::new();
    let images = match problem.mode {
        Mode::Feasibility => {
            feasibility_phase(&problem.mesh, &problem.polygon, &problem.assignment, &problem.params)
                .map(|trace| {
                    phases.push(PhaseSummary::from(&trace));
                    trace.final_images
                })
                .map_err(|e| (stage_of(&e).to_string(), e.to_string()))?
        }
        Mode::Free => solve_free_boundary(
            &problem.mesh,
            &problem.polygon,
            &problem.assignment,
            &problem.params,
        )
        .map(|solve| {
            let images = solve.final_images().to_vec();
            phases.push(PhaseSummary::from(&solve.feasibility));
            if let Some(energy) = &solve.energy {
                phases.push(PhaseSummary::from(energy));
            }
            images
        })
        .map_err(|e| (stage_of(&e).to_string(), e.to_string()))?,
        Mode::FixedUniform => {
            match assignment_feasibility(&problem.mesh, &problem.polygon, &problem.assignment) {
                Ok(Feasibility::Feasible(runs)) => {
                    let placement = uniform_boundary_positions(&problem.polygon, &runs);
                    fixed_boundary_variant(&problem.mesh, &placement, &problem.params)
                        .map(|solve| {
                            let images = solve.final_images().to_vec();
                            phases.push(PhaseSummary::from(&solve.feasibility));
                            if let Some(energy) = &solve.energy {
                                phases.push(PhaseSummary::from(energy));
                            }
                            images
                        })
                        .map_err(|e| (stage_of(&e).to_string(), e.to_string()))?
                }
                Ok(Feasibility::Infeasible(reason)) => {
                    return Err(("feasibility".to_string(), reason.to_string()))
                }
                Err(e) => return Err(("setup".to_string(), e.to_string())),
            }
        }
    };
    Ok((images, phases))
}

/// Executes a problem end to end and writes all artifacts into `out_dir`
/// (which must exist). Solve and certification failures are reported in the
/// returned [`RunReport`], not as errors; only unwritable artifacts error.
pub fn run(problem: &Problem, out_dir: &Path) -> Result<RunReport, PipelineError> {
    let stem = problem
        .path
        .file_stem()
        .map_or_else(|| "problem".to_string(), |s| s.to_string_lossy().into_owned());
    let boundary_len: usize = problem.mesh.boundary().loops().iter().map(Vec::len).sum();
    let mut report = RunReport {
        problem: problem.path.clone(),
        mesh_path: problem.mesh_path.clone(),
        vertex_count: problem.mesh.vertex_count(),
        face_count: problem.mesh.top_faces().len(),
        boundary_len,
        load_notes: problem.load_notes.clone(),
        polygon_edges: problem.polygon.edge_count(),
        mode: problem.mode,
        cond_bound: problem.params.cond_bound,
        stage: Stage::Complete,
        phases: Vec::new(),
        dirichlet: None,
        worst_condition: None,
        gradient_stats: None,
        certificates: Vec::new(),
        requested: requested_condition(problem.mode),
        granted: false,
        artifacts: Vec::new(),
        timings: Vec::new(),
    };

    let t_solve = Instant::now();
    let solved = solve_problem(problem);
    report.timings.push(("solve", t_solve.elapsed().as_secs_f64()));

    let report_path = out_dir.join(format!("{stem}.report.txt"));
    let images = match solved {
        Ok((images, phases)) => {
            report.phases = phases;
            images
        }
        Err((stage, error)) => {
            report.stage = Stage::Failed { stage, error };
            report.artifacts.push(report_path.clone());
            write_artifact(&report_path, &report.to_text())?;
            return Ok(report);
        }
    };

    // Certify and measure. Failures here are recorded, not propagated.
    let t_certify = Instant::now();
    let outcome: Result<(), String> = (|| {
        let map = Map2::new(&problem.mesh, images).map_err(|e| e.to_string())?;
        let tol = &problem.tolerances;
        report.certificates.push(check_necessary(&map, tol).map_err(|e| e.to_string())?);
        report.certificates.push(
            certify_boundary_bijection(&map, &problem.polygon, tol).map_err(|e| e.to_string())?,
        );
        report.certificates.push(
            certify_boundary_lines(&map, &problem.polygon, &problem.assignment, tol)
                .map_err(|e| e.to_string())?,
        );
        report.certificates.push(
            certify_monotone_boundary(&map, &problem.polygon, &problem.assignment, tol)
                .map_err(|e| e.to_string())?,
        );
        report.dirichlet = Some(dirichlet_energy(&map).map_err(|e| e.to_string())?);
        report.worst_condition = Some(worst_condition_number(&map).map_err(|e| e.to_string())?);
        let norms = gradient_norms(&map).map_err(|e| e.to_string())?;
        let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        report.gradient_stats = Some((lo, hi, mean));
        report.timings.push(("certify", t_certify.elapsed().as_secs_f64()));

        let t_render = Instant::now();
        let obj_path = out_dir.join(format!("{stem}.map.obj"));
        write_artifact(&obj_path, &map_to_obj(&map)).map_err(|e| e.to_string())?;
        report.artifacts.push(obj_path);
        let plain_path = out_dir.join(format!("{stem}.map.svg"));
        let plain =
            render_svg(&map, Some(&problem.polygon), Coloring::None).map_err(|e| e.to_string())?;
        write_artifact(&plain_path, &plain).map_err(|e| e.to_string())?;
        report.artifacts.push(plain_path);
        let grad_path = out_dir.join(format!("{stem}.gradient.svg"));
        let grad = render_svg(&map, Some(&problem.polygon), Coloring::GradientNorm)
            .map_err(|e| e.to_string())?;
        write_artifact(&grad_path, &grad).map_err(|e| e.to_string())?;
        report.artifacts.push(grad_path);
        report.timings.push(("render", t_render.elapsed().as_secs_f64()));
        Ok(())
    })();
    if let Err(error) = outcome {
        report.stage = Stage::Failed { stage: "certify".to_string(), error };
    }

    report.granted =
        report.certificates.iter().any(|c| c.condition == report.requested && c.certified());
    report.artifacts.push(report_path.clone());
    write_artifact(&report_path, &report.to_text())?;
    Ok(report)
}
