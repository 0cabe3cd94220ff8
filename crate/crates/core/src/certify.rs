//! Target polygons, boundary assignments, and runnable certificates of
//! injectivity for surface maps.
//!
//! Three increasingly constructive sufficient conditions are implemented,
//! each on top of the necessary condition (no degenerate faces, a single
//! positive orientation sign):
//!
//! * boundary bijection — the boundary map is a homeomorphism onto the
//!   polygon boundary; certifies global bijectivity onto the target.
//! * boundary lines — every boundary edge lands on the affine hull of its
//!   assigned polygon edge and every derived corner pin is met; certifies
//!   interior injectivity and exact coverage of the target, but deliberately
//!   not boundary injectivity (the boundary may slide along the hull lines
//!   into the interior).
//! * monotone boundary — boundary lines plus strictly positive advance of
//!   every boundary edge along its polygon edge direction; restores the full
//!   boundary-bijection conclusion while keeping linear constraints only.
//!
//! Certificates carry structured evidence for every violated check and the
//! absolute tolerance they were judged against, so a refutation is always
//! reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::Vector2;
use thiserror::Error;

use crate::mapping::{orientation_report, Map2, MapError, OrientationClass};
use crate::mesh::{MeshError, SimplicialMesh, VertexId};

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("a polygon needs at least 3 vertices after merging, got {0}")]
    TooFewVertices(usize),
    #[error("polygon vertices are not in counterclockwise order (signed area {0:.3e})")]
    NotCounterclockwise(f64),
    #[error("polygon edges {0} and {1} are adjacent and collinear; merge collinear chains first")]
    CollinearAdjacentEdges(usize, usize),
    #[error("polygon is not simple: edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
}

/// A simple, counterclockwise polygon in the plane: the target domain.
///
/// Consecutive collinear edges are rejected by [`Polytope2::new`] and merged
/// by [`Polytope2::merged`], so each corner is a genuine direction change and
/// the affine hulls of adjacent edges always meet in exactly one point.
#[derive(Clone, Debug)]
pub struct Polytope2 {
    vertices: Vec<Vector2<f64>>,
    /// Cumulative arc length; `cum[i]` is the parameter of vertex `i`,
    /// `cum[E]` the perimeter.
    cum: Vec<f64>,
    diameter: f64,
}

fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

impl Polytope2 {
    pub fn new(vertices: Vec<Vector2<f64>>) -> Result<Self, PolytopeError> {
        let e = vertices.len();
        if e < 3 {
            return Err(PolytopeError::TooFewVertices(e));
        }
        let diameter = vertices
            .iter()
            .flat_map(|a| vertices.iter().map(move |b| (a - b).norm()))
            .fold(0.0f64, f64::max);
        // Collinearity of adjacent edges (this also catches zero-length
        // edges and 180-degree spikes).
        for i in 0..e {
            let prev = vertices[(i + e - 1) % e];
            let cur = vertices[i];
            let next = vertices[(i + 1) % e];
            if cross(cur - prev, next - cur).abs() <= 1e-12 * diameter * diameter {
                return Err(PolytopeError::CollinearAdjacentEdges((i + e - 1) % e, i));
            }
        }
        // Simplicity: no two non-adjacent edges may touch. Checked before
        // orientation, where a self-intersecting loop has no meaningful sign.
        for i in 0..e {
            for j in i + 1..e {
                if j == i + 1 || (i == 0 && j == e - 1) {
                    continue;
                }
                let (a1, a2) = (vertices[i], vertices[(i + 1) % e]);
                let (b1, b2) = (vertices[j], vertices[(j + 1) % e]);
                if segments_touch(a1, a2, b1, b2) {
                    return Err(PolytopeError::SelfIntersecting(i, j));
                }
            }
        }
        let signed_area2: f64 = (0..e).map(|i| cross(vertices[i], vertices[(i + 1) % e])).sum();
        if signed_area2 <= 0.0 {
            return Err(PolytopeError::NotCounterclockwise(signed_area2 / 2.0));
        }
        let mut cum = Vec::with_capacity(e + 1);
        cum.push(0.0);
        for i in 0..e {
            let len = (vertices[(i + 1) % e] - vertices[i]).norm();
            cum.push(cum[i] + len);
        }
        Ok(Polytope2 { vertices, cum, diameter })
    }

    /// Like [`Polytope2::new`], but first merges chains of consecutive
    /// collinear edges (and drops duplicate consecutive points).
    pub fn merged(vertices: Vec<Vector2<f64>>) -> Result<Self, PolytopeError> {
        let scale = vertices
            .iter()
            .flat_map(|a| vertices.iter().map(move |b| (a - b).norm()))
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut kept = vertices;
        loop {
            let e = kept.len();
            if e < 3 {
                return Err(PolytopeError::TooFewVertices(e));
            }
            let mut removed = false;
            let mut next_kept = Vec::with_capacity(e);
            for i in 0..e {
                let prev = kept[(i + e - 1) % e];
                let cur = kept[i];
                let next = kept[(i + 1) % e];
                let duplicate = (cur - prev).norm() <= 1e-12 * scale;
                let straight = cross(cur - prev, next - cur).abs() <= 1e-12 * scale * scale
                    && (cur - prev).dot(&(next - cur)) >= 0.0;
                if (duplicate || straight) && !removed {
                    removed = true; // drop `cur`, restart the scan
                } else {
                    next_kept.push(cur);
                }
            }
            kept = next_kept;
            if !removed {
                break;
            }
        }
        Self::new(kept)
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.vertices
    }

    /// Corner `i` sits between edges `i-1` and `i`.
    pub fn corner(&self, i: usize) -> Vector2<f64> {
        self.vertices[i]
    }

    /// Edge `i` runs from vertex `i` to vertex `i+1`.
    pub fn edge(&self, i: usize) -> (Vector2<f64>, Vector2<f64>) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }

    pub fn edge_len(&self, i: usize) -> f64 {
        self.cum[i + 1] - self.cum[i]
    }

    /// Unit direction of edge `i` (the induced counterclockwise orientation).
    pub fn edge_dir(&self, i: usize) -> Vector2<f64> {
        let (a, b) = self.edge(i);
        (b - a) / self.edge_len(i)
    }

    pub fn perimeter(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Distance from `p` to the affine hull (full line) of edge `i`.
    pub fn line_residual(&self, i: usize, p: Vector2<f64>) -> f64 {
        cross(self.edge_dir(i), p - self.vertices[i]).abs()
    }

    /// Distance from `p` to the segment of edge `i`.
    pub fn edge_distance(&self, i: usize, p: Vector2<f64>) -> f64 {
        let (a, b) = self.edge(i);
        let t = ((p - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
        (a + t * (b - a) - p).norm()
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Vector2<f64>) -> f64 {
        (0..self.edge_count()).map(|i| self.edge_distance(i, p)).fold(f64::INFINITY, f64::min)
    }

    /// Arc-length parameter in `[0, perimeter)` of the boundary point nearest
    /// to `p`.
    pub fn arclength_param(&self, p: Vector2<f64>) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..self.edge_count() {
            let (a, b) = self.edge(i);
            let t = ((p - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
            let d = (a + t * (b - a) - p).norm();
            if d < best.0 {
                best = (d, self.cum[i] + t * self.edge_len(i));
            }
        }
        let param = best.1;
        if param >= self.perimeter() {
            param - self.perimeter()
        } else {
            param
        }
    }

    /// Even-odd containment test (points on the boundary are ambiguous at
    /// floating-point precision; callers sample away from it).
    pub fn contains(&self, p: Vector2<f64>) -> bool {
        let mut inside = false;
        for i in 0..self.edge_count() {
            let (a, b) = self.edge(i);
            if (a.y > p.y) != (b.y > p.y) {
                let x_int = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x_int > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Whether two closed segments share any point.
fn segments_touch(a1: Vector2<f64>, a2: Vector2<f64>, b1: Vector2<f64>, b2: Vector2<f64>) -> bool {
    let orient = |p: Vector2<f64>, q: Vector2<f64>, r: Vector2<f64>| cross(q - p, r - p);
    let on_segment = |p: Vector2<f64>, q: Vector2<f64>, r: Vector2<f64>| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(b1, b2, a1))
        || (d2 == 0.0 && on_segment(b1, b2, a2))
        || (d3 == 0.0 && on_segment(a1, a2, b1))
        || (d4 == 0.0 && on_segment(a1, a2, b2))
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("certification requires a surface mesh (dimension 2), got {0}")]
    NotASurface(usize),
    #[error("mesh edge ({0}, {1}) in the assignment is not a boundary edge")]
    NotABoundaryEdge(VertexId, VertexId),
    #[error("boundary edge ({0}, {1}) has no assigned polygon edge")]
    UnassignedBoundaryEdge(VertexId, VertexId),
    #[error("assigned polygon edge {got} out of range (polygon has {count} edges)")]
    PolygonEdgeOutOfRange { got: usize, count: usize },
    #[error("assignment is not topologically feasible: {0}")]
    Infeasible(InfeasibleReason),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Constraint induced on one boundary vertex by a feasible edge assignment.
#[derive(Clone, Debug, PartialEq)]
pub enum VertexConstraint {
    /// Both incident boundary edges map to the same polygon edge: the vertex
    /// may slide anywhere on that edge's affine hull.
    OnLine { poly_edge: usize },
    /// The incident boundary edges map to consecutive polygon edges: the
    /// vertex is pinned to their shared corner (taken verbatim from the
    /// polygon, no intersection round-off).
    Pinned { point: Vector2<f64> },
}

/// A total assignment of boundary edges to polygon edges.
#[derive(Clone, Debug)]
pub struct BoundaryAssignment {
    edge_to_poly: BTreeMap<(VertexId, VertexId), usize>,
}

impl BoundaryAssignment {
    /// Validates totality and index range. Requires a surface mesh with a
    /// single boundary loop.
    pub fn new(
        mesh: &SimplicialMesh,
        polygon: &Polytope2,
        raw: &BTreeMap<(VertexId, VertexId), usize>,
    ) -> Result<Self, CertifyError> {
        if mesh.dim() != 2 {
            return Err(CertifyError::NotASurface(mesh.dim()));
        }
        let loop_edges = mesh.boundary().single_loop()?;
        let canon = |a: VertexId, b: VertexId| (a.min(b), a.max(b));
        let boundary_keys: BTreeSet<(VertexId, VertexId)> =
            loop_edges.iter().map(|&(a, b)| canon(a, b)).collect();
        for (&(a, b), &e) in raw {
            if !boundary_keys.contains(&canon(a, b)) {
                return Err(CertifyError::NotABoundaryEdge(a, b));
            }
            if e >= polygon.edge_count() {
                return Err(CertifyError::PolygonEdgeOutOfRange {
                    got: e,
                    count: polygon.edge_count(),
                });
            }
        }
        let mut edge_to_poly = BTreeMap::new();
        for &key in &boundary_keys {
            let &e = raw.get(&key).ok_or(CertifyError::UnassignedBoundaryEdge(key.0, key.1))?;
            edge_to_poly.insert(key, e);
        }
        Ok(BoundaryAssignment { edge_to_poly })
    }

    /// Polygon edge assigned to a boundary edge (any vertex order).
    pub fn poly_edge(&self, a: VertexId, b: VertexId) -> Option<usize> {
        self.edge_to_poly.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&(VertexId, VertexId), usize)> {
        self.edge_to_poly.iter().map(|(k, &e)| (k, e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfeasibleReason {
    /// Walking the boundary loop, the assigned polygon-edge index jumped by
    /// more than one, leaving the edges in between uncovered.
    SkippedEdge { edge: (VertexId, VertexId), from: usize, to: usize },
    /// The assigned indices wind around the polygon `winding` times instead
    /// of exactly once.
    Winding(i64),
}

impl fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfeasibleReason::SkippedEdge { edge, from, to } => write!(
                f,
                "assignment jumps from polygon edge {from} to {to} at mesh edge ({}, {}), leaving edges uncovered",
                edge.0, edge.1
            ),
            InfeasibleReason::Winding(w) => {
                write!(f, "assignment winds {w} times around the polygon, expected exactly 1")
            }
        }
    }
}

/// One maximal chain of boundary edges assigned to a single polygon edge, in
/// loop order.
#[derive(Clone, Debug)]
pub struct Run {
    pub poly_edge: usize,
    /// Directed mesh edges `(tail, head)` in induced boundary orientation.
    pub edges: Vec<(VertexId, VertexId)>,
}

impl Run {
    /// The chain of vertices from the run's starting corner to its ending
    /// corner, inclusive.
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self.edges.iter().map(|&(t, _)| t).collect();
        v.push(self.edges.last().expect("runs are non-empty").1);
        v
    }
}

/// The boundary loop cut into one run per polygon edge; `runs[k]` covers
/// polygon edge `k`.
#[derive(Clone, Debug)]
pub struct RunDecomposition {
    pub runs: Vec<Run>,
}

impl RunDecomposition {
    /// The constraint each boundary vertex inherits: run endpoints are pinned
    /// to the polygon corners, all other run vertices slide on the run's
    /// hull line.
    pub fn vertex_constraints(&self, polygon: &Polytope2) -> BTreeMap<VertexId, VertexConstraint> {
        let mut constraints = BTreeMap::new();
        for run in &self.runs {
            let verts = run.vertices();
            constraints.insert(
                verts[0],
                VertexConstraint::Pinned { point: polygon.corner(run.poly_edge) },
            );
            // The final vertex is the next run's pinned corner.
            for &v in &verts[1..verts.len() - 1] {
                constraints.insert(v, VertexConstraint::OnLine { poly_edge: run.poly_edge });
            }
        }
        constraints
    }
}

/// Verdict of the topological feasibility check.
#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible(RunDecomposition),
    Infeasible(InfeasibleReason),
}

/// Checks that the assignment admits an orientation-preserving boundary
/// homeomorphism: walking the loop, polygon-edge indices must advance by 0
/// or 1 (mod E) per step and wind around the polygon exactly once. On
/// success, returns the decomposition into per-edge runs.
pub fn assignment_feasibility(
    mesh: &SimplicialMesh,
    polygon: &Polytope2,
    assignment: &BoundaryAssignment,
) -> Result<Feasibility, CertifyError> {
    if mesh.dim() != 2 {
        return Err(CertifyError::NotASurface(mesh.dim()));
    }
    let loop_edges = mesh.boundary().single_loop()?;
    let e = polygon.edge_count();
    let n = loop_edges.len();
    let idx: Vec<usize> = loop_edges
        .iter()
        .map(|&(a, b)| assignment.poly_edge(a, b).ok_or(CertifyError::UnassignedBoundaryEdge(a, b)))
        .collect::<Result<_, _>>()?;

    let mut total_steps = 0usize;
    for k in 0..n {
        let step = (idx[(k + 1) % n] + e - idx[k]) % e;
        if step > 1 {
            return Ok(Feasibility::Infeasible(InfeasibleReason::SkippedEdge {
                edge: loop_edges[(k + 1) % n],
                from: idx[k],
                to: idx[(k + 1) % n],
            }));
        }
        total_steps += step;
    }
    debug_assert_eq!(total_steps % e, 0);
    let winding = (total_steps / e) as i64;
    if winding != 1 {
        return Ok(Feasibility::Infeasible(InfeasibleReason::Winding(winding)));
    }

    // Rotate the loop to the unique edge where the index wraps to 0, then
    // split at index increments.
    let start = (0..n)
        .find(|&k| idx[(k + n - 1) % n] == e - 1 && idx[k] == 0)
        .expect("winding 1 passes 0 exactly once");
    let mut runs: Vec<Run> = Vec::with_capacity(e);
    for k in 0..n {
        let pos = (start + k) % n;
        if runs.last().map(|r: &Run| r.poly_edge) == Some(idx[pos]) {
            runs.last_mut().unwrap().edges.push(loop_edges[pos]);
        } else {
            runs.push(Run { poly_edge: idx[pos], edges: vec![loop_edges[pos]] });
        }
    }
    debug_assert_eq!(runs.len(), e);
    debug_assert!(runs.iter().enumerate().all(|(k, r)| r.poly_edge == k));
    Ok(Feasibility::Feasible(RunDecomposition { runs }))
}

/// The per-polygon-edge uniform boundary placement: the vertices of run `k`
/// are spaced evenly along polygon edge `k`, corners exactly at corners.
pub fn uniform_boundary_positions(
    polygon: &Polytope2,
    runs: &RunDecomposition,
) -> BTreeMap<VertexId, Vector2<f64>> {
    let mut positions = BTreeMap::new();
    for run in &runs.runs {
        let (a, b) = polygon.edge(run.poly_edge);
        let verts = run.vertices();
        let m = run.edges.len() as f64;
        for (j, &v) in verts.iter().enumerate() {
            positions.insert(v, a + (j as f64 / m) * (b - a));
        }
    }
    positions
}

/// Which sufficient condition a certificate speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Necessary condition only: non-degenerate, orientation preserving.
    Necessary,
    /// Boundary map is a bijection onto the polygon boundary.
    BoundaryBijection,
    /// Boundary edges on assigned hull lines, corner pins met.
    BoundaryLines,
    /// Boundary lines plus strict monotonicity along each polygon edge.
    MonotoneBoundary,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Necessary => "necessary orientation condition",
            Condition::BoundaryBijection => "boundary bijection condition",
            Condition::BoundaryLines => "boundary line conditions",
            Condition::MonotoneBoundary => "monotone boundary conditions",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Refuted,
}

/// One violated check, with the numbers that witnessed it.
#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    DegenerateFace {
        face: usize,
        det: f64,
    },
    FlippedFace {
        face: usize,
        det: f64,
    },
    MultipleBoundaryLoops {
        count: usize,
    },
    VertexOffBoundary {
        vertex: VertexId,
        dist: f64,
    },
    /// Consecutive boundary images do not lie on a common polygon edge, so
    /// the segment between them leaves the polygon boundary.
    SegmentOffBoundary {
        from: VertexId,
        to: VertexId,
    },
    NonIncreasingParam {
        from: VertexId,
        to: VertexId,
        advance: f64,
    },
    WindingMismatch {
        winding: i64,
    },
    LineResidual {
        vertex: VertexId,
        poly_edge: usize,
        dist: f64,
    },
    PinResidual {
        vertex: VertexId,
        dist: f64,
    },
    NonMonotoneEdge {
        from: VertexId,
        to: VertexId,
        poly_edge: usize,
        advance: f64,
    },
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Evidence::DegenerateFace { face, det } => {
                write!(f, "face {face} degenerates (det {det:.3e})")
            }
            Evidence::FlippedFace { face, det } => {
                write!(f, "face {face} reverses orientation (det {det:.3e})")
            }
            Evidence::MultipleBoundaryLoops { count } => {
                write!(f, "mesh boundary has {count} loops, the polygon boundary has 1")
            }
            Evidence::VertexOffBoundary { vertex, dist } => {
                write!(f, "boundary vertex {vertex} maps {dist:.3e} away from the polygon boundary")
            }
            Evidence::SegmentOffBoundary { from, to } => write!(
                f,
                "images of boundary vertices {from} and {to} share no polygon edge; the boundary image cuts a corner"
            ),
            Evidence::NonIncreasingParam { from, to, advance } => write!(
                f,
                "boundary parameter does not strictly increase from vertex {from} to {to} (advance {advance:.3e})"
            ),
            Evidence::WindingMismatch { winding } => {
                write!(f, "boundary image winds {winding} times around the polygon, expected 1")
            }
            Evidence::LineResidual { vertex, poly_edge, dist } => write!(
                f,
                "vertex {vertex} lies {dist:.3e} off the hull line of polygon edge {poly_edge}"
            ),
            Evidence::PinResidual { vertex, dist } => {
                write!(f, "vertex {vertex} misses its corner pin by {dist:.3e}")
            }
            Evidence::NonMonotoneEdge { from, to, poly_edge, advance } => write!(
                f,
                "boundary edge ({from}, {to}) advances {advance:.3e} along polygon edge {poly_edge}; strict forward motion required"
            ),
        }
    }
}

/// Outcome of a certifier: the condition checked, the verdict, all evidence
/// for a refutation, and the absolute tolerance the checks used.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub condition: Condition,
    pub verdict: Verdict,
    pub evidence: Vec<Evidence>,
    pub tolerance: f64,
}

impl Certificate {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    fn from_evidence(condition: Condition, evidence: Vec<Evidence>, tolerance: f64) -> Self {
        let verdict = if evidence.is_empty() { Verdict::Certified } else { Verdict::Refuted };
        Certificate { condition, verdict, evidence, tolerance }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} (tolerance {:.3e})",
            self.condition,
            match self.verdict {
                Verdict::Certified => "certified",
                Verdict::Refuted => "refuted",
            },
            self.tolerance
        )?;
        for ev in &self.evidence {
            writeln!(f, "  - {ev}")?;
        }
        Ok(())
    }
}

/// Tolerances for all certifiers. Relative values are scaled by the polygon
/// diameter (constraint residuals) or the polygon edge length (monotonicity).
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Degenerate-face threshold: `|det A| <= eps_det * |A|_F^2`.
    pub eps_det: f64,
    /// Constraint residual threshold, x polygon diameter.
    pub eps_con_rel: f64,
    /// Strict-monotonicity threshold, x polygon edge length.
    pub eps_mono_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps_det: crate::mapping::EPS_DET, eps_con_rel: 1e-8, eps_mono_rel: 1e-9 }
    }
}

impl Tolerances {
    pub fn eps_con(&self, polygon: &Polytope2) -> f64 {
        self.eps_con_rel * polygon.diameter()
    }
}

fn necessary_evidence(map: &Map2<'_>, tol: &Tolerances) -> Result<Vec<Evidence>, CertifyError> {
    let report = orientation_report(map, tol.eps_det)?;
    let mut evidence = Vec::new();
    for &face in &report.degenerate_faces {
        evidence.push(Evidence::DegenerateFace { face, det: report.dets[face] });
    }
    if report.classification != OrientationClass::Preserving {
        for &face in &report.flipped_faces {
            evidence.push(Evidence::FlippedFace { face, det: report.dets[face] });
        }
    }
    Ok(evidence)
}

/// The necessary condition: every face non-degenerate, all orientations
/// positive.
pub fn check_necessary(map: &Map2<'_>, tol: &Tolerances) -> Result<Certificate, CertifyError> {
    let evidence = necessary_evidence(map, tol)?;
    Ok(Certificate::from_evidence(Condition::Necessary, evidence, tol.eps_det))
}

/// Certifies that the map is a bijection onto the polygon by checking the
/// necessary condition plus a boundary homeomorphism: all boundary vertex
/// images on the polygon boundary, consecutive images on a common polygon
/// edge, arc-length parameters strictly cyclically increasing, and total
/// advance exactly one perimeter.
pub fn certify_boundary_bijection(
    map: &Map2<'_>,
    polygon: &Polytope2,
    tol: &Tolerances,
) -> Result<Certificate, CertifyError> {
    let mesh = map.mesh();
    if mesh.dim() != 2 {
        return Err(CertifyError::NotASurface(mesh.dim()));
    }
    let eps_con = tol.eps_con(polygon);
    let mut evidence = necessary_evidence(map, tol)?;

    let loops = mesh.boundary().loops();
    if loops.len() != 1 {
        evidence.push(Evidence::MultipleBoundaryLoops { count: loops.len() });
        return Ok(Certificate::from_evidence(Condition::BoundaryBijection, evidence, eps_con));
    }
    let verts: Vec<VertexId> = loops[0].iter().map(|&(tail, _)| tail).collect();
    let n = verts.len();

    let mut all_on_boundary = true;
    for &v in &verts {
        let dist = polygon.boundary_distance(map.image(v));
        if dist > eps_con {
            evidence.push(Evidence::VertexOffBoundary { vertex: v, dist });
            all_on_boundary = false;
        }
    }
    if !all_on_boundary {
        return Ok(Certificate::from_evidence(Condition::BoundaryBijection, evidence, eps_con));
    }

    // Consecutive images must lie on a common polygon edge; otherwise the
    // boundary image leaves the polygon boundary between them.
    let mut segments_ok = true;
    for k in 0..n {
        let (a, b) = (verts[k], verts[(k + 1) % n]);
        let (ua, ub) = (map.image(a), map.image(b));
        let common = (0..polygon.edge_count()).any(|i| {
            polygon.edge_distance(i, ua) <= eps_con && polygon.edge_distance(i, ub) <= eps_con
        });
        if !common {
            evidence.push(Evidence::SegmentOffBoundary { from: a, to: b });
            segments_ok = false;
        }
    }
    if !segments_ok {
        return Ok(Certificate::from_evidence(Condition::BoundaryBijection, evidence, eps_con));
    }

    // With all segments on the boundary, every true parameter step is below
    // half the perimeter (no polygon edge is longer than that), so steps can
    // be safely renormalized to (-P/2, P/2].
    let perimeter = polygon.perimeter();
    let params: Vec<f64> = verts.iter().map(|&v| polygon.arclength_param(map.image(v))).collect();
    let mut total = 0.0;
    for k in 0..n {
        let raw = (params[(k + 1) % n] - params[k]).rem_euclid(perimeter);
        let advance = if raw > perimeter / 2.0 { raw - perimeter } else { raw };
        if advance <= eps_con {
            evidence.push(Evidence::NonIncreasingParam {
                from: verts[k],
                to: verts[(k + 1) % n],
                advance,
            });
        }
        total += advance;
    }
    let winding = (total / perimeter).round() as i64;
    if winding != 1 {
        evidence.push(Evidence::WindingMismatch { winding });
    }
    Ok(Certificate::from_evidence(Condition::BoundaryBijection, evidence, eps_con))
}

/// Certifies the linear boundary conditions: necessary condition, every
/// boundary edge's endpoint images on the affine hull of its assigned
/// polygon edge, and every derived corner pin met. Certifies interior
/// injectivity and exact coverage of the polygon — deliberately not
/// injectivity of the boundary map itself.
pub fn certify_boundary_lines(
    map: &Map2<'_>,
    polygon: &Polytope2,
    assignment: &BoundaryAssignment,
    tol: &Tolerances,
) -> Result<Certificate, CertifyError> {
    let runs = match assignment_feasibility(map.mesh(), polygon, assignment)? {
        Feasibility::Feasible(runs) => runs,
        Feasibility::Infeasible(reason) => return Err(CertifyError::Infeasible(reason)),
    };
    let eps_con = tol.eps_con(polygon);
    let mut evidence = necessary_evidence(map, tol)?;

    let mut checked: BTreeSet<(VertexId, usize)> = BTreeSet::new();
    for (&(a, b), e) in assignment.edges() {
        for v in [a, b] {
            if checked.insert((v, e)) {
                let dist = polygon.line_residual(e, map.image(v));
                if dist > eps_con {
                    evidence.push(Evidence::LineResidual { vertex: v, poly_edge: e, dist });
                }
            }
        }
    }
    for (&v, constraint) in &runs.vertex_constraints(polygon) {
        if let VertexConstraint::Pinned { point } = constraint {
            let dist = (map.image(v) - point).norm();
            if dist > eps_con {
                evidence.push(Evidence::PinResidual { vertex: v, dist });
            }
        }
    }
    Ok(Certificate::from_evidence(Condition::BoundaryLines, evidence, eps_con))
}

/// Certifies the monotone-boundary conditions: boundary lines plus strictly
/// positive advance of every boundary edge along its polygon edge's
/// direction (the one-dimensional strict monotonicity, applied per run).
/// Restores the full bijection conclusion.
pub fn certify_monotone_boundary(
    map: &Map2<'_>,
    polygon: &Polytope2,
    assignment: &BoundaryAssignment,
    tol: &Tolerances,
) -> Result<Certificate, CertifyError> {
    let lines = certify_boundary_lines(map, polygon, assignment, tol)?;
    let mut evidence = lines.evidence;
    let loop_edges = map.mesh().boundary().single_loop()?;
    for &(tail, head) in loop_edges {
        let e = assignment.poly_edge(tail, head).expect("assignment is total");
        let advance = (map.image(head) - map.image(tail)).dot(&polygon.edge_dir(e));
        if advance <= tol.eps_mono_rel * polygon.edge_len(e) {
            evidence.push(Evidence::NonMonotoneEdge {
                from: tail,
                to: head,
                poly_edge: e,
                advance,
            });
        }
    }
    Ok(Certificate::from_evidence(Condition::MonotoneBoundary, evidence, lines.tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshgen::{corner_assignment, grid_square, l_polygon, square_polygon, DiskMesh};
    use approx::assert_relative_eq;

    fn square_setup() -> (DiskMesh, Polytope2, BoundaryAssignment) {
        let disk = grid_square(3);
        let polygon = square_polygon(1.0);
        let raw = corner_assignment(&disk.mesh, &polygon, &disk.corners);
        let assignment = BoundaryAssignment::new(&disk.mesh, &polygon, &raw).unwrap();
        (disk, polygon, assignment)
    }

    #[test]
    fn polygon_validation() {
        // Clockwise square: rejected.
        let cw = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(1.0, 0.0),
        ];
        assert!(matches!(Polytope2::new(cw), Err(PolytopeError::NotCounterclockwise(_))));

        // Midpoint on an edge: collinear adjacent edges.
        let collinear = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(0.5, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
        ];
        assert!(matches!(
            Polytope2::new(collinear.clone()),
            Err(PolytopeError::CollinearAdjacentEdges(0, 1))
        ));
        // ... which merging repairs.
        let merged = Polytope2::merged(collinear).unwrap();
        assert_eq!(merged.edge_count(), 4);

        // Bowtie: not simple.
        let bowtie = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(0.0, 1.0),
        ];
        assert!(matches!(Polytope2::new(bowtie), Err(PolytopeError::SelfIntersecting(..))));
    }

    #[test]
    fn polygon_geometry_queries() {
        let poly = l_polygon();
        assert_eq!(poly.edge_count(), 6);
        assert_relative_eq!(poly.perimeter(), 2.0 * (1.5 + 1.3), epsilon = 1e-12);
        assert!(poly.contains(Vector2::new(0.2, 0.2)));
        assert!(poly.contains(Vector2::new(0.3, 1.0)));
        assert!(!poly.contains(Vector2::new(1.0, 1.0))); // in the notch
        assert!(!poly.contains(Vector2::new(2.0, 0.3)));
        // Parameter of a corner approached from both sides.
        let c2 = poly.corner(2);
        assert_relative_eq!(poly.arclength_param(c2), 1.5 + 0.6, epsilon = 1e-12);
        // Hull-line residual measures distance to the full line.
        assert_relative_eq!(poly.line_residual(2, Vector2::new(0.2, 0.6)), 0.0, epsilon = 1e-12);
        assert_relative_eq!(poly.edge_distance(2, Vector2::new(0.2, 0.6)), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn runs_derive_expected_vertex_constraints() {
        let (disk, polygon, assignment) = square_setup();
        let Feasibility::Feasible(runs) =
            assignment_feasibility(&disk.mesh, &polygon, &assignment).unwrap()
        else {
            panic!("feasible")
        };
        let constraints = runs.vertex_constraints(&polygon);
        assert_eq!(constraints.len(), 12);
        let mut pinned = 0;
        let mut online = 0;
        for (&v, pin) in &constraints {
            match pin {
                VertexConstraint::Pinned { point } => {
                    pinned += 1;
                    // Generated grid corners pin to matching polygon corners.
                    let k = disk.corners.iter().position(|&c| c == v).expect("pin at a corner");
                    assert_relative_eq!(*point, polygon.corner(k), epsilon = 1e-12);
                }
                VertexConstraint::OnLine { .. } => online += 1,
            }
        }
        assert_eq!(pinned, 4);
        assert_eq!(online, 8);
    }

    #[test]
    fn feasibility_of_the_reference_assignment() {
        let (disk, polygon, assignment) = square_setup();
        match assignment_feasibility(&disk.mesh, &polygon, &assignment).unwrap() {
            Feasibility::Feasible(runs) => {
                assert_eq!(runs.runs.len(), 4);
                for (k, run) in runs.runs.iter().enumerate() {
                    assert_eq!(run.poly_edge, k);
                    assert_eq!(run.edges.len(), 3);
                    assert_eq!(run.vertices().len(), 4);
                }
            }
            Feasibility::Infeasible(reason) => panic!("expected feasible, got {reason}"),
        }
    }

    #[test]
    fn infeasible_assignments_are_diagnosed() {
        let disk = grid_square(3);
        let polygon = square_polygon(1.0);

        // Skip polygon edge 2 entirely: sides 0,1,3,3 pattern.
        let mut raw = corner_assignment(&disk.mesh, &polygon, &disk.corners);
        for (_, e) in raw.iter_mut() {
            if *e == 2 {
                *e = 3;
            }
        }
        let assignment = BoundaryAssignment::new(&disk.mesh, &polygon, &raw).unwrap();
        match assignment_feasibility(&disk.mesh, &polygon, &assignment).unwrap() {
            Feasibility::Infeasible(InfeasibleReason::SkippedEdge { from: 1, to: 3, .. }) => {}
            other => panic!("expected skipped-edge infeasibility, got {other:?}"),
        }

        // Wind twice: 12 boundary edges as 0,0,1,1,2,2,3,3,0,1,2,3.
        let loop_edges = disk.mesh.boundary().single_loop().unwrap().to_vec();
        let pattern = [0, 0, 1, 1, 2, 2, 3, 3, 0, 1, 2, 3];
        let raw: BTreeMap<(usize, usize), usize> =
            loop_edges.iter().zip(pattern).map(|(&(a, b), e)| ((a.min(b), a.max(b)), e)).collect();
        let assignment = BoundaryAssignment::new(&disk.mesh, &polygon, &raw).unwrap();
        match assignment_feasibility(&disk.mesh, &polygon, &assignment).unwrap() {
            Feasibility::Infeasible(InfeasibleReason::Winding(2)) => {}
            other => panic!("expected winding-2 infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn uniform_positions_put_corners_on_corners() {
        let (disk, polygon, assignment) = square_setup();
        let Feasibility::Feasible(runs) =
            assignment_feasibility(&disk.mesh, &polygon, &assignment).unwrap()
        else {
            panic!("feasible")
        };
        let positions = uniform_boundary_positions(&polygon, &runs);
        assert_eq!(positions.len(), 12);
        for (k, &corner) in disk.corners.iter().enumerate() {
            assert_relative_eq!(positions[&corner], polygon.corner(k), epsilon = 1e-12);
        }
        // A mid-side vertex sits a third of the way along its side.
        let run0 = &runs.runs[0];
        let v = run0.vertices()[1];
        assert_relative_eq!(positions[&v], Vector2::new(1.0 / 3.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn necessary_condition_certificates() {
        let (mesh, fold_images) = crate::meshgen::fan_fold();
        let tol = Tolerances::default();
        let identity = Map2::identity(&mesh).unwrap();
        assert!(check_necessary(&identity, &tol).unwrap().certified());

        let folded = Map2::from_flat(&mesh, &fold_images).unwrap();
        let cert = check_necessary(&folded, &tol).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
        assert!(cert.evidence.iter().any(|e| matches!(e, Evidence::FlippedFace { .. })));

        // Global reflection: refuted under the orientation-preserving branch.
        let reflected: Vec<Vector2<f64>> =
            mesh.coords().chunks_exact(2).map(|c| Vector2::new(c[0], -c[1])).collect();
        let reflected = Map2::new(&mesh, reflected).unwrap();
        let cert = check_necessary(&reflected, &tol).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
        assert_eq!(cert.evidence.len(), mesh.top_faces().len());
    }

    #[test]
    fn boundary_bijection_on_identity_grid() {
        let (disk, polygon, _) = square_setup();
        let tol = Tolerances::default();
        let map = Map2::identity(&disk.mesh).unwrap();
        let cert = certify_boundary_bijection(&map, &polygon, &tol).unwrap();
        assert!(cert.certified(), "{cert}");
    }

    #[test]
    fn boundary_bijection_refutations() {
        let (disk, polygon, _) = square_setup();
        let tol = Tolerances::default();
        let map = Map2::identity(&disk.mesh).unwrap();

        // Duplicate boundary images: two adjacent boundary vertices collide.
        let mut images = map.images().to_vec();
        images[1] = images[2]; // vertices 1,2 on the bottom side
        let broken = Map2::new(&disk.mesh, images).unwrap();
        let cert = certify_boundary_bijection(&broken, &polygon, &tol).unwrap();
        assert!(cert.evidence.iter().any(|e| matches!(e, Evidence::NonIncreasingParam { .. })));

        // Swap two adjacent boundary images: order reverses locally.
        let mut images = map.images().to_vec();
        images.swap(1, 2);
        let swapped = Map2::new(&disk.mesh, images).unwrap();
        let cert = certify_boundary_bijection(&swapped, &polygon, &tol).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
        assert!(cert.evidence.iter().any(|e| matches!(e, Evidence::NonIncreasingParam { .. })));

        // Pull a boundary vertex into the interior.
        let mut images = map.images().to_vec();
        images[1] += Vector2::new(0.0, 0.3);
        let pulled = Map2::new(&disk.mesh, images).unwrap();
        let cert = certify_boundary_bijection(&pulled, &polygon, &tol).unwrap();
        assert!(cert
            .evidence
            .iter()
            .any(|e| matches!(e, Evidence::VertexOffBoundary { vertex: 1, .. })));

        // Wrap the boundary twice around the square: winding 2.
        let disk2 = grid_square(2);
        let loop_verts: Vec<VertexId> =
            disk2.mesh.boundary().single_loop().unwrap().iter().map(|&(t, _)| t).collect();
        let mut images = vec![Vector2::new(0.5, 0.5); disk2.mesh.vertex_count()];
        let square = [
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
        ];
        for (k, &v) in loop_verts.iter().enumerate() {
            images[v] = square[k % 4]; // 8 vertices, one corner per step: two laps
        }
        let wrapped = Map2::new(&disk2.mesh, images).unwrap();
        let cert = certify_boundary_bijection(&wrapped, &polygon, &tol).unwrap();
        assert!(
            cert.evidence.iter().any(|e| matches!(e, Evidence::WindingMismatch { winding: 2 })),
            "{cert}"
        );
    }

    #[test]
    fn boundary_lines_certify_identity_and_catch_violations() {
        let (disk, polygon, assignment) = square_setup();
        let tol = Tolerances::default();
        let map = Map2::identity(&disk.mesh).unwrap();
        let cert = certify_boundary_lines(&map, &polygon, &assignment, &tol).unwrap();
        assert!(cert.certified(), "{cert}");

        // Perturb a mid-side boundary vertex off its hull line by 1e-3.
        let mut images = map.images().to_vec();
        images[1] += Vector2::new(0.0, 1e-3);
        let off = Map2::new(&disk.mesh, images).unwrap();
        let cert = certify_boundary_lines(&off, &polygon, &assignment, &tol).unwrap();
        assert!(
            cert.evidence.iter().any(|e| matches!(e, Evidence::LineResidual { vertex: 1, .. })),
            "{cert}"
        );

        // Slide a corner along one of its edges: pin violated, lines hold
        // for one of the two incident edges only.
        let mut images = map.images().to_vec();
        images[0] += Vector2::new(0.1, 0.0);
        let slid = Map2::new(&disk.mesh, images).unwrap();
        let cert = certify_boundary_lines(&slid, &polygon, &assignment, &tol).unwrap();
        assert!(
            cert.evidence.iter().any(|e| matches!(e, Evidence::PinResidual { vertex: 0, .. })),
            "{cert}"
        );
    }

    #[test]
    fn infeasible_assignment_is_a_precondition_error() {
        let disk = grid_square(3);
        let polygon = square_polygon(1.0);
        let mut raw = corner_assignment(&disk.mesh, &polygon, &disk.corners);
        for (_, e) in raw.iter_mut() {
            if *e == 2 {
                *e = 3;
            }
        }
        let assignment = BoundaryAssignment::new(&disk.mesh, &polygon, &raw).unwrap();
        let map = Map2::identity(&disk.mesh).unwrap();
        let err = certify_boundary_lines(&map, &polygon, &assignment, &Tolerances::default())
            .unwrap_err();
        assert!(matches!(err, CertifyError::Infeasible(_)), "{err}");
    }

    #[test]
    fn monotone_boundary_certifies_identity_and_catches_stalls() {
        let (disk, polygon, assignment) = square_setup();
        let tol = Tolerances::default();
        let map = Map2::identity(&disk.mesh).unwrap();
        let cert = certify_monotone_boundary(&map, &polygon, &assignment, &tol).unwrap();
        assert!(cert.certified(), "{cert}");

        // Swap two adjacent boundary images along the bottom side: the run
        // stays on its line but reverses direction over two edges.
        let mut images = map.images().to_vec();
        images.swap(1, 2);
        let swapped = Map2::new(&disk.mesh, images).unwrap();
        let cert = certify_monotone_boundary(&swapped, &polygon, &assignment, &tol).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
        assert!(cert.evidence.iter().any(|e| matches!(e, Evidence::NonMonotoneEdge { .. })));

        // A single boundary edge mapped with reversed direction.
        let mut images = map.images().to_vec();
        images[1] = Vector2::new(-0.2, 0.0); // behind the start corner
        let reversed = Map2::new(&disk.mesh, images).unwrap();
        let cert = certify_monotone_boundary(&reversed, &polygon, &assignment, &tol).unwrap();
        assert!(
            cert.evidence
                .iter()
                .any(|e| matches!(e, Evidence::NonMonotoneEdge { from: 0, to: 1, .. })),
            "{cert}"
        );
    }

    #[test]
    fn monotone_implies_bijection_on_examples() {
        // Maps certified by the monotone-boundary condition must also pass
        // the weaker boundary-bijection condition.
        let (disk, polygon, assignment) = square_setup();
        let tol = Tolerances::default();
        let map = Map2::identity(&disk.mesh).unwrap();
        let mono = certify_monotone_boundary(&map, &polygon, &assignment, &tol).unwrap();
        let bij = certify_boundary_bijection(&map, &polygon, &tol).unwrap();
        assert!(mono.certified() && bij.certified());
    }
}
