//! Distortion-bounded planar mapping by sequential conic programming.
//!
//! The key observation is that a quasiconformal bound on one face is a
//! rotated second-order cone: writing the affine factor `A = B + C` with
//! similarity part `B = [[a, -b], [b, a]]` and anti-similarity part
//! `C = [[c, e], [e, -c]]`, the constraint
//!
//! ```text
//! |(c, e)|_2 <= mu (r a + s b),     mu = (K - 1)/(K + 1)
//! ```
//!
//! for any unit rotation `(r, s)` forces `det A > 0` and a condition number
//! of at most `K` (the sqrt(2) factors from the Frobenius norms cancel on
//! both sides). The constraint is linear in the vertex images once `(r, s)`
//! is fixed, so the solve alternates: fix per-face rotations, solve one cone
//! program, re-fit the rotations to the similarity parts of the solution,
//! repeat.
//!
//! Two phases share this loop. The feasibility phase minimizes a slack `t`
//! added to every cone, starting from identity rotations; `t < 0` proves a
//! strictly distortion-bounded map exists for the boundary conditions. The
//! energy phase then minimizes the Dirichlet energy through an epigraph
//! variable (`sqrt(energy) <= s` is itself a cone), keeping the cones with a
//! small safety margin so the bound survives solver tolerance.

pub mod program;

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::certify::{
    assignment_feasibility, BoundaryAssignment, CertifyError, Feasibility, Polytope2,
    VertexConstraint,
};
use crate::mapping::{
    bc_decompose, dirichlet_energy, face_affine_map, face_gradients, FaceGradients, Map2, MapError,
};
use crate::mesh::{SimplicialMesh, VertexId};
use program::{ConeProgram, LinExpr, ProgramError, SolveStatus, VarId};

#[derive(Debug, Error)]
pub enum OptError {
    #[error("condition-number bound must be finite and > 1, got {0}")]
    CondBoundOutOfRange(f64),
    #[error("constraint override names vertex {0}, which does not exist")]
    UnknownVertex(VertexId),
    #[error("boundary vertex {0} has no placement")]
    MissingPlacement(VertexId),
    #[error("placement names vertex {0}, which is not a boundary vertex")]
    NotABoundaryVertex(VertexId),
    #[error("placement of vertex {0} is not finite")]
    NonFinitePlacement(VertexId),
    #[error("boundary vertices {0} and {1} are placed at the same point")]
    CoincidentPlacement(VertexId, VertexId),
    #[error("{phase:?} solve returned {status}")]
    SolveFailed { phase: Phase, status: String },
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

/// Parameters of the distortion-bounded solves.
#[derive(Clone, Copy, Debug)]
pub struct BdParams {
    /// Condition-number bound `K` enforced on every face.
    pub cond_bound: f64,
    /// Safety margin subtracted from the cone bounds during the energy
    /// phase, relative to the target diameter.
    pub eps_margin_rel: f64,
    /// Outer (rotation-refit) iteration budget per phase.
    pub max_outer: usize,
    /// Relative energy decrease below which the energy phase stops.
    pub tol_energy: f64,
}

impl Default for BdParams {
    fn default() -> Self {
        BdParams { cond_bound: 15.0, eps_margin_rel: 1e-9, max_outer: 10, tol_energy: 1e-6 }
    }
}

/// `mu = (K - 1)/(K + 1)`, the cone aperture for condition bound `K`.
pub fn mu_from_k(k: f64) -> Result<f64, OptError> {
    if !k.is_finite() || k <= 1.0 {
        return Err(OptError::CondBoundOutOfRange(k));
    }
    Ok((k - 1.0) / (k + 1.0))
}

/// The rotation nearest to `a` in the Frobenius norm: the normalized
/// similarity part. `None` when the similarity part vanishes (every rotation
/// is equally close).
pub fn closest_rotation(a: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    let (ra, rb) = bc_decompose(a).similarity();
    let n = ra.hypot(rb);
    if n <= 0.0 || !n.is_finite() {
        return None;
    }
    Some(Matrix2::new(ra / n, -rb / n, rb / n, ra / n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Feasibility,
    Energy,
}

/// One outer iteration: the phase objective value (slack `t`, or Dirichlet
/// energy) and the largest constraint violation of the returned iterate.
#[derive(Clone, Copy, Debug)]
pub struct OuterIteration {
    pub value: f64,
    pub max_residual: f64,
}

/// Record of one phase of the alternating solve.
#[derive(Clone, Debug)]
pub struct SolveTrace {
    pub phase: Phase,
    pub iterations: Vec<OuterIteration>,
    /// Vertex images of the iterate the phase settled on.
    pub final_images: Vec<Vector2<f64>>,
    /// Feasibility phase: the best slack went strictly negative. Energy
    /// phase: inherited from the start (the cones keep holding by
    /// construction).
    pub strictly_feasible: bool,
    /// Set when the phase stopped for a reason worth surfacing (iteration
    /// budget, an energy increase after a rotation refit).
    pub warning: Option<String>,
}

/// Both phases of a solve: energy is `None` when feasibility never reached a
/// strictly negative slack.
#[derive(Clone, Debug)]
pub struct BdSolve {
    pub feasibility: SolveTrace,
    pub energy: Option<SolveTrace>,
}

impl BdSolve {
    /// Images of the best map produced: the energy minimizer when the energy
    /// phase ran, the feasibility iterate otherwise.
    pub fn final_images(&self) -> &[Vector2<f64>] {
        match &self.energy {
            Some(trace) => &trace.final_images,
            None => &self.feasibility.final_images,
        }
    }
}

/// Largest per-face condition number of a map (infinite if any face is
/// singular or orientation-reversing with equal singular values).
pub fn worst_condition_number(map: &Map2<'_>) -> Result<f64, MapError> {
    let mut worst = 1.0f64;
    for f in 0..map.mesh().top_faces().len() {
        let a = face_affine_map(map, f)?.linear;
        worst = worst.max(bc_decompose(&a).condition_number());
    }
    Ok(worst)
}

// -------------------------------------------------------------------------
// Shared assembly

struct FaceCoeffs {
    /// Similarity part `(a, b)` of the face's affine factor, as affine
    /// expressions in the vertex-image variables.
    a: LinExpr,
    b: LinExpr,
    /// Anti-similarity part `(c, e)`.
    c: LinExpr,
    e: LinExpr,
    /// The four entries of `A`, row-major.
    entries: [LinExpr; 4],
    area: f64,
}

fn x_var(v: VertexId) -> VarId {
    2 * v
}

fn y_var(v: VertexId) -> VarId {
    2 * v + 1
}

fn face_coeffs(fg: &FaceGradients) -> FaceCoeffs {
    let mut a = LinExpr::default();
    let mut b = LinExpr::default();
    let mut c = LinExpr::default();
    let mut e = LinExpr::default();
    let mut entries: [LinExpr; 4] = Default::default();
    for (k, &v) in fg.verts.iter().enumerate() {
        let (gx, gy) = (fg.grads[k][0], fg.grads[k][1]);
        let (xv, yv) = (x_var(v), y_var(v));
        // A = sum_k u_k (grad_k)^T, so A00 = sum gx x, A01 = sum gy x,
        // A10 = sum gx y, A11 = sum gy y.
        entries[0].terms.push((xv, gx));
        entries[1].terms.push((xv, gy));
        entries[2].terms.push((yv, gx));
        entries[3].terms.push((yv, gy));
        a.terms.push((xv, gx / 2.0));
        a.terms.push((yv, gy / 2.0));
        b.terms.push((xv, -gy / 2.0));
        b.terms.push((yv, gx / 2.0));
        c.terms.push((xv, gx / 2.0));
        c.terms.push((yv, -gy / 2.0));
        e.terms.push((xv, gy / 2.0));
        e.terms.push((yv, gx / 2.0));
    }
    FaceCoeffs { a, b, c, e, entries, area: fg.area }
}

fn all_gradients(mesh: &SimplicialMesh) -> Result<Vec<FaceGradients>, MapError> {
    (0..mesh.top_faces().len()).map(|f| face_gradients(mesh, f)).collect()
}

/// A program over the vertex-image variables with the boundary conditions as
/// equalities. Variable ids are `2 v` and `2 v + 1`.
fn base_program(
    mesh: &SimplicialMesh,
    constraints: &BTreeMap<VertexId, VertexConstraint>,
    lines: &dyn Fn(usize) -> (Vector2<f64>, Vector2<f64>), // poly edge -> (point, unit dir)
) -> ConeProgram {
    let mut p = ConeProgram::new();
    for v in 0..mesh.vertex_count() {
        let xv = p.add_var();
        let yv = p.add_var();
        debug_assert_eq!((xv, yv), (x_var(v), y_var(v)));
    }
    for (&v, constraint) in constraints {
        match constraint {
            VertexConstraint::Pinned { point } => {
                p.add_equality(LinExpr::var(x_var(v)).shift(-point.x));
                p.add_equality(LinExpr::var(y_var(v)).shift(-point.y));
            }
            VertexConstraint::OnLine { poly_edge } => {
                let (point, dir) = lines(*poly_edge);
                let normal = Vector2::new(-dir.y, dir.x);
                p.add_equality(
                    LinExpr::default()
                        .term(x_var(v), normal.x)
                        .term(y_var(v), normal.y)
                        .shift(-normal.dot(&point)),
                );
            }
        }
    }
    p
}

/// Adds one distortion cone per face: `|(c, e)| <= mu (r a + s b) - margin
/// (+ slack)`.
fn add_distortion_cones(
    p: &mut ConeProgram,
    coeffs: &[FaceCoeffs],
    rotations: &[(f64, f64)],
    mu: f64,
    margin: f64,
    slack: Option<VarId>,
) {
    for (fc, &(r, s)) in coeffs.iter().zip(rotations) {
        let mut bound = LinExpr::default().shift(-margin);
        for &(v, coeff) in &fc.a.terms {
            bound.terms.push((v, mu * r * coeff));
        }
        for &(v, coeff) in &fc.b.terms {
            bound.terms.push((v, mu * s * coeff));
        }
        if let Some(t) = slack {
            bound.terms.push((t, 1.0));
        }
        p.add_soc(vec![fc.c.clone(), fc.e.clone()], bound);
    }
}

fn extract_images(x: &[f64], vertex_count: usize) -> Vec<Vector2<f64>> {
    (0..vertex_count).map(|v| Vector2::new(x[x_var(v)], x[y_var(v)])).collect()
}

/// Refits the per-face rotations to the similarity parts of the images,
/// keeping the previous rotation where the similarity part vanishes.
fn refit_rotations(
    grads: &[FaceGradients],
    images: &[Vector2<f64>],
    prev: &[(f64, f64)],
) -> Vec<(f64, f64)> {
    grads
        .iter()
        .zip(prev)
        .map(|(fg, &old)| {
            let mut a = Matrix2::zeros();
            for (k, &v) in fg.verts.iter().enumerate() {
                a.column_mut(0).axpy(fg.grads[k][0], &images[v], 1.0);
                a.column_mut(1).axpy(fg.grads[k][1], &images[v], 1.0);
            }
            match closest_rotation(&a) {
                Some(r) => (r[(0, 0)], r[(1, 0)]),
                None => old,
            }
        })
        .collect()
}

fn run_status(phase: Phase, status: SolveStatus) -> Result<(), OptError> {
    match status {
        SolveStatus::Optimal | SolveStatus::Inaccurate => Ok(()),
        other => Err(OptError::SolveFailed { phase, status: format!("{other:?}") }),
    }
}

fn feasibility_loop(
    mesh: &SimplicialMesh,
    constraints: &BTreeMap<VertexId, VertexConstraint>,
    lines: &dyn Fn(usize) -> (Vector2<f64>, Vector2<f64>),
    mu: f64,
    params: &BdParams,
) -> Result<SolveTrace, OptError> {
    let grads = all_gradients(mesh)?;
    let coeffs: Vec<FaceCoeffs> = grads.iter().map(face_coeffs).collect();
    let mut rotations = vec![(1.0, 0.0); grads.len()];
    let mut iterations = Vec::new();
    let mut best: Option<(f64, Vec<Vector2<f64>>)> = None;
    for _ in 0..params.max_outer {
        let mut p = base_program(mesh, constraints, lines);
        let t = p.add_var();
        p.set_objective_term(t, 1.0);
        add_distortion_cones(&mut p, &coeffs, &rotations, mu, 0.0, Some(t));
        let sol = p.solve()?;
        run_status(Phase::Feasibility, sol.status)?;
        let images = extract_images(&sol.x, mesh.vertex_count());
        let slack = sol.x[t];
        iterations.push(OuterIteration { value: slack, max_residual: p.max_violation(&sol.x) });
        if best.as_ref().is_none_or(|(b, _)| slack < *b) {
            best = Some((slack, images.clone()));
        }
        if slack < 0.0 {
            break;
        }
        rotations = refit_rotations(&grads, &images, &rotations);
    }
    let (slack, final_images) = best.expect("max_outer >= 1");
    let strictly_feasible = slack < 0.0;
    let warning = (!strictly_feasible)
        .then(|| format!("no strictly feasible map found; best slack {slack:.3e}"));
    Ok(SolveTrace {
        phase: Phase::Feasibility,
        iterations,
        final_images,
        strictly_feasible,
        warning,
    })
}

fn energy_loop(
    mesh: &SimplicialMesh,
    constraints: &BTreeMap<VertexId, VertexConstraint>,
    lines: &dyn Fn(usize) -> (Vector2<f64>, Vector2<f64>),
    mu: f64,
    margin: f64,
    start_images: Vec<Vector2<f64>>,
    params: &BdParams,
) -> Result<SolveTrace, OptError> {
    let grads = all_gradients(mesh)?;
    let coeffs: Vec<FaceCoeffs> = grads.iter().map(face_coeffs).collect();
    let mut rotations = refit_rotations(&grads, &start_images, &vec![(1.0, 0.0); grads.len()]);
    let start_map = Map2::new(mesh, start_images.clone())?;
    let mut energy_prev = dirichlet_energy(&start_map)?;
    let mut current = start_images;
    let mut iterations = Vec::new();
    let mut warning = None;
    for iter in 0..params.max_outer {
        let mut p = base_program(mesh, constraints, lines);
        let s = p.add_var();
        p.set_objective_term(s, 1.0);
        add_distortion_cones(&mut p, &coeffs, &rotations, mu, margin, None);
        let sqrt_energy: Vec<LinExpr> = coeffs
            .iter()
            .flat_map(|fc| {
                fc.entries.iter().map(|entry| {
                    let mut scaled = entry.clone();
                    for term in &mut scaled.terms {
                        term.1 *= fc.area.sqrt();
                    }
                    scaled
                })
            })
            .collect();
        p.add_soc(sqrt_energy, LinExpr::var(s));
        let sol = p.solve()?;
        run_status(Phase::Energy, sol.status)?;
        let images = extract_images(&sol.x, mesh.vertex_count());
        let energy = sol.x[s] * sol.x[s];
        iterations.push(OuterIteration { value: energy, max_residual: p.max_violation(&sol.x) });
        if energy > energy_prev * (1.0 + 1e-12) + f64::MIN_POSITIVE {
            warning = Some(format!(
                "energy increased after rotation refit ({energy_prev:.6e} -> {energy:.6e}); keeping the previous iterate"
            ));
            break;
        }
        current = images;
        let decreased = energy_prev - energy;
        energy_prev = energy;
        if decreased <= params.tol_energy * energy_prev.max(f64::MIN_POSITIVE) {
            break;
        }
        rotations = refit_rotations(&grads, &current, &rotations);
        if iter + 1 == params.max_outer {
            warning = Some("energy phase stopped at the iteration budget".to_string());
        }
    }
    Ok(SolveTrace {
        phase: Phase::Energy,
        iterations,
        final_images: current,
        strictly_feasible: true,
        warning,
    })
}

// -------------------------------------------------------------------------
// Public drivers

fn polygon_constraints(
    mesh: &SimplicialMesh,
    polygon: &Polytope2,
    assignment: &BoundaryAssignment,
    overrides: &BTreeMap<VertexId, VertexConstraint>,
) -> Result<BTreeMap<VertexId, VertexConstraint>, OptError> {
    let runs = match assignment_feasibility(mesh, polygon, assignment)? {
        Feasibility::Feasible(runs) => runs,
        Feasibility::Infeasible(reason) => return Err(CertifyError::Infeasible(reason).into()),
    };
    let mut constraints = runs.vertex_constraints(polygon);
    for (&v, c) in overrides {
        if v >= mesh.vertex_count() {
            return Err(OptError::UnknownVertex(v));
        }
        constraints.insert(v, c.clone());
    }
    Ok(constraints)
}

/// Searches for a strictly distortion-bounded map sending the boundary to
/// its assigned polygon edges. Strict feasibility holds iff the final slack
/// is negative; a non-negative slack is reported in the trace, not an error.
pub fn feasibility_phase(
    mesh: &SimplicialMesh,
    polygon: &Polytope2,
    assignment: &BoundaryAssignment,
    params: &BdParams,
) -> Result<SolveTrace, OptError> {
    feasibility_phase_with_constraints(mesh, polygon, assignment, &BTreeMap::new(), params)
}

/// [`feasibility_phase`] with per-vertex constraint overrides (landmark
/// pins, forced lines) layered over the assignment's own constraints.
pub fn feasibility_phase_with_constraints(
    mesh: &SimplicialMesh,
    polygon: &Polytope2,
    assignment: &BoundaryAssignment,
    overrides: &BTreeMap<VertexId, VertexConstraint>,
    params: &BdParams,
) -> Result<SolveTrace, OptError> {
    let mu = mu_from_k(params.cond_bound)?;
    let constraints = polygon_constraints(mesh, polygon, assignment, overrides)?;
    let lines = |e: usize| (polygon.edge(e).0, polygon.edge_dir(e));
    feasibility_loop(mesh, &constraints, &lines, mu, params)
}

/// Minimizes the Dirichlet energy over distortion-bounded maps meeting the
/// boundary conditions, starting from (and never worsening) `start`.
pub fn energy_phase(
    start: &Map2<'_>,
    polygon: &Polytope2,
    assignment: &BoundaryAssignment,
    params: &BdParams,
) -> Result<SolveTrace, OptError> {
    energy_phase_with_constraints(start, polygon, assignment, &BTreeMap::new(), params)
}

/// [`energy_phase`] with per-vertex constraint overrides.
pub fn energy_phase_with_constraints(
    start: &Map2<'_>,
    polygon: &Polytope2,
    assignment: &BoundaryAssignment,
    overrides: &BTreeMap<VertexId, VertexConstraint>,
    params: &BdParams,
) -> Result<SolveTrace, OptError> {
    let mesh = start.mesh();
    let mu = mu_from_k(params.cond_bound)?;
    let constraints = polygon_constraints(mesh, polygon, assignment, overrides)?;
    let lines = |e: usize| (polygon.edge(e).0, polygon.edge_dir(e));
    let margin = params.eps_margin_rel * polygon.diameter();
    energy_loop(mesh, &constraints, &lines, mu, margin, start.images().to_vec(), params)
}

/// The full free-boundary solve: feasibility, then energy minimization from
/// the feasibility iterate (skipped when no strictly feasible map was
/// found).
pub fn solve_free_boundary(
    mesh: &SimplicialMesh,
    polygon: &Polytope2,
    assignment: &BoundaryAssignment,
    params: &BdParams,
) -> Result<BdSolve, OptError> {
    let feasibility = feasibility_phase(mesh, polygon, assignment, params)?;
    if !feasibility.strictly_feasible {
        return Ok(BdSolve { feasibility, energy: None });
    }
    let start = Map2::new(mesh, feasibility.final_images.clone())?;
    let energy = energy_phase(&start, polygon, assignment, params)?;
    Ok(BdSolve { feasibility, energy: Some(energy) })
}

/// The fixed-boundary solve: every boundary vertex pinned at the given
/// position, interior free, same two phases. Validates that the placement
/// covers exactly the boundary vertices, is finite, and has no coincident
/// points.
pub fn fixed_boundary_variant(
    mesh: &SimplicialMesh,
    placement: &BTreeMap<VertexId, Vector2<f64>>,
    params: &BdParams,
) -> Result<BdSolve, OptError> {
    if mesh.dim() != 2 {
        return Err(CertifyError::NotASurface(mesh.dim()).into());
    }
    let mu = mu_from_k(params.cond_bound)?;
    let loop_edges = mesh.boundary().single_loop().map_err(CertifyError::from)?;
    let boundary: std::collections::BTreeSet<VertexId> =
        loop_edges.iter().map(|&(tail, _)| tail).collect();
    for &v in &boundary {
        if !placement.contains_key(&v) {
            return Err(OptError::MissingPlacement(v));
        }
    }
    for (&v, point) in placement {
        if !boundary.contains(&v) {
            return Err(OptError::NotABoundaryVertex(v));
        }
        if !point.x.is_finite() || !point.y.is_finite() {
            return Err(OptError::NonFinitePlacement(v));
        }
    }
    let entries: Vec<(&VertexId, &Vector2<f64>)> = placement.iter().collect();
    let mut diameter = 0.0f64;
    for (i, (&vi, pi)) in entries.iter().enumerate() {
        for (&vj, pj) in entries[i + 1..].iter() {
            let d = (*pi - *pj).norm();
            if d == 0.0 {
                return Err(OptError::CoincidentPlacement(vi, vj));
            }
            diameter = diameter.max(d);
        }
    }

    let constraints: BTreeMap<VertexId, VertexConstraint> =
        placement.iter().map(|(&v, &point)| (v, VertexConstraint::Pinned { point })).collect();
    let lines = |_: usize| -> (Vector2<f64>, Vector2<f64>) {
        unreachable!("fixed placements pin every boundary vertex")
    };
    let feasibility = feasibility_loop(mesh, &constraints, &lines, mu, params)?;
    if !feasibility.strictly_feasible {
        return Ok(BdSolve { feasibility, energy: None });
    }
    let margin = params.eps_margin_rel * diameter;
    let energy = energy_loop(
        mesh,
        &constraints,
        &lines,
        mu,
        margin,
        feasibility.final_images.clone(),
        params,
    )?;
    Ok(BdSolve { feasibility, energy: Some(energy) })
}
