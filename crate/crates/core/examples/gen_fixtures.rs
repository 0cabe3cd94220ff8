//! Regenerates the committed `fixtures/` directory: the meshes and problem
//! files the integration tests solve, plus the engineered "dip" map whose
//! boundary detours through the polygon's interior along a hull line (so the
//! line conditions certify it while boundary bijectivity and monotonicity
//! refute it).
//!
//! Run from the workspace root: `cargo run -p bijmap --example gen_fixtures`

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector2;

use bijmap::certify::{
    assignment_feasibility, certify_boundary_bijection, certify_boundary_lines,
    certify_monotone_boundary, check_necessary, BoundaryAssignment, Feasibility, Polytope2,
    Tolerances, VertexConstraint,
};
use bijmap::coneopt::{feasibility_phase_with_constraints, BdParams};
use bijmap::mapping::Map2;
use bijmap::meshgen::{corner_assignment, graded_grid, l_polygon, l_shape, square_polygon};
use bijmap::pipeline::{map_to_obj, mesh_to_off};

fn problem_text(
    mesh_file: &str,
    mode: &str,
    polygon: &Polytope2,
    assignment: &BTreeMap<(usize, usize), usize>,
) -> String {
    let mut text = format!("mesh {mesh_file}\nmode {mode}\nk 15\npolygon\n");
    for c in polygon.vertices() {
        let _ = writeln!(text, "  {} {}", c.x, c.y);
    }
    text.push_str("end\n");
    for (&(a, b), &e) in assignment {
        let _ = writeln!(text, "assign {a} {b} {e}");
    }
    text
}

fn main() {
    let out = Path::new("fixtures");
    std::fs::create_dir_all(out).expect("create fixtures dir");

    // Graded grid disk onto the unit square: uniform boundary spacing is not
    // energy-optimal here, so the free-vs-fixed energy comparison is strict.
    let grid = graded_grid(8);
    let square = square_polygon(1.0);
    let grid_assign = corner_assignment(&grid.mesh, &square, &grid.corners);
    std::fs::write(out.join("grid_disk.off"), mesh_to_off(&grid.mesh)).unwrap();
    std::fs::write(
        out.join("grid_disk.problem"),
        problem_text("grid_disk.off", "free", &square, &grid_assign),
    )
    .unwrap();
    println!(
        "grid_disk: {} vertices, {} faces",
        grid.mesh.vertex_count(),
        grid.mesh.top_faces().len()
    );

    // L-shaped domain onto a differently proportioned L polygon.
    let ell = l_shape(6);
    let target = l_polygon();
    let ell_assign = corner_assignment(&ell.mesh, &target, &ell.corners);
    std::fs::write(out.join("l_shape.off"), mesh_to_off(&ell.mesh)).unwrap();
    std::fs::write(
        out.join("l_shape.problem"),
        problem_text("l_shape.off", "free", &target, &ell_assign),
    )
    .unwrap();
    println!("l_shape: {} vertices, {} faces", ell.mesh.vertex_count(), ell.mesh.top_faces().len());

    // The dip map: same L-shape problem, but one boundary vertex of the
    // third polygon edge's run is pinned at (0.5, 0.6) - on that edge's hull
    // line, yet strictly inside the polygon. A positively oriented map with
    // this boundary exists; it satisfies the line conditions while its
    // boundary is neither injective nor monotone.
    std::fs::write(
        out.join("dip.problem"),
        problem_text("l_shape.off", "free", &target, &ell_assign),
    )
    .unwrap();

    let assignment = BoundaryAssignment::new(&ell.mesh, &target, &ell_assign).unwrap();
    let runs = match assignment_feasibility(&ell.mesh, &target, &assignment).unwrap() {
        Feasibility::Feasible(runs) => runs,
        Feasibility::Infeasible(reason) => panic!("corner assignment infeasible: {reason}"),
    };
    let run = &runs.runs[2];
    let verts = run.vertices();
    assert!(verts.len() > 3, "run 2 needs interior vertices");
    let dip_vertex = verts[verts.len() / 2];
    let dip_point = Vector2::new(0.5, 0.6);
    let overrides: BTreeMap<_, _> =
        [(dip_vertex, VertexConstraint::Pinned { point: dip_point })].into();

    let mut chosen = None;
    for k in [40.0, 100.0, 400.0] {
        let params = BdParams { cond_bound: k, ..BdParams::default() };
        let trace = feasibility_phase_with_constraints(
            &ell.mesh,
            &target,
            &assignment,
            &overrides,
            &params,
        )
        .expect("dip feasibility solve");
        if trace.strictly_feasible {
            chosen = Some((k, trace));
            break;
        }
    }
    let (k, trace) = chosen.expect("no condition bound admitted the dip");
    println!("dip: strictly feasible at K={k}, {} outer iteration(s)", trace.iterations.len());

    let map = Map2::new(&ell.mesh, trace.final_images).unwrap();
    let tol = Tolerances::default();
    assert!(check_necessary(&map, &tol).unwrap().certified(), "dip must be positively oriented");
    assert!(
        certify_boundary_lines(&map, &target, &assignment, &tol).unwrap().certified(),
        "dip must satisfy the line conditions"
    );
    assert!(
        !certify_boundary_bijection(&map, &target, &tol).unwrap().certified(),
        "dip boundary must not be a bijection"
    );
    assert!(
        !certify_monotone_boundary(&map, &target, &assignment, &tol).unwrap().certified(),
        "dip boundary must not be monotone"
    );
    std::fs::write(out.join("dip_map.obj"), map_to_obj(&map)).unwrap();
    println!("dip: vertex {dip_vertex} pinned at ({}, {})", dip_point.x, dip_point.y);
}
