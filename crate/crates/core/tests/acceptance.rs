//! Acceptance gate: one test per shipped guarantee. Each prints a single
//! `ACCEPTANCE <n>: PASS|FAIL - <summary>` line (FAIL also panics with the
//! offending numbers). Tolerances and budgets are pinned in the constants
//! below; loosening them is an API break, not a test fix.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bijmap::certify::{
    certify_boundary_bijection, certify_boundary_lines, certify_monotone_boundary, check_necessary,
    Tolerances,
};
use bijmap::degree::{
    boundary_degree, counting_bound_check, cycle_degree, degree_additivity_check,
    face_boundary_degree, DegreeError, DegreeQuery,
};
use bijmap::mapping::{bc_decompose, orientation_report, Map2, OrientationClass, EPS_DET};
use bijmap::mesh::{Chain, SimplicialMesh};
use bijmap::meshgen::{corner_assignment, double_wrap_fan, fan_fold, grid_square, square_polygon};
use bijmap::pipeline::{load_map_images, parse_problem, run, Mode, Problem, RunReport, Stage};

/// Prints the criterion's verdict exactly once: PASS on normal completion,
/// FAIL when the test unwinds first.
struct Criterion {
    n: usize,
    summary: &'static str,
    passed: bool,
}

impl Criterion {
    fn new(n: usize, summary: &'static str) -> Self {
        Criterion { n, summary, passed: false }
    }
    fn pass(mut self) {
        self.passed = true;
        println!("ACCEPTANCE {}: PASS - {}", self.n, self.summary);
    }
}

impl Drop for Criterion {
    fn drop(&mut self) {
        if !self.passed {
            println!("ACCEPTANCE {}: FAIL - {}", self.n, self.summary);
        }
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Parses a fixture problem (optionally overriding the mode), runs the
/// pipeline into a fresh directory, and loads the emitted map back.
fn solve_fixture(
    problem_name: &str,
    mode: Option<Mode>,
) -> (Problem, RunReport, Vec<Vector2<f64>>, tempfile::TempDir) {
    let mut problem = parse_problem(&fixture(problem_name)).expect("fixture parses");
    if let Some(mode) = mode {
        problem.mode = mode;
    }
    let dir = tempfile::tempdir().unwrap();
    let report = run(&problem, dir.path()).expect("pipeline run");
    let stem = problem_name.trim_end_matches(".problem");
    let obj = dir.path().join(format!("{stem}.map.obj"));
    let images = load_map_images(&obj, problem.mesh.vertex_count()).expect("emitted map loads");
    (problem, report, images, dir)
}

fn point_segment_distance(q: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    let ab = b - a;
    let t = if ab.norm_squared() > 0.0 {
        ((q - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (q - (a + t * ab)).norm()
}

/// Distance from `q` to the image of the mesh boundary.
fn boundary_image_distance(map: &Map2<'_>, q: Vector2<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for lp in map.mesh().boundary().loops() {
        for &(a, b) in lp {
            best = best.min(point_segment_distance(q, map.image(a), map.image(b)));
        }
    }
    best
}

// -------------------------------------------------------------------------

/// The squared-norm difference of the similarity and anti-similarity parts
/// of a 2x2 matrix equals twice its determinant.
#[test]
fn acceptance_01_similarity_split_determinant_identity() {
    let c = Criterion::new(1, "similarity-split determinant identity on 1e4 random matrices");
    let mut rng = ChaCha8Rng::seed_from_u64(0x01);
    let started = Instant::now();
    for i in 0..10_000 {
        let a = Matrix2::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        );
        let bc = bc_decompose(&a);
        let lhs = bc.b_norm().powi(2) - bc.c_norm().powi(2);
        let rhs = 2.0 * a.determinant();
        let tol = 1e-10 * rhs.abs().max(1.0);
        assert!((lhs - rhs).abs() <= tol, "matrix {i}: |B|^2 - |C|^2 = {lhs} but 2 det A = {rhs}");
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "took {elapsed:.3}s, budget 1s");
    c.pass();
}

/// Signed-crossing degrees are integers matching an angle-sum winding
/// oracle, and are additive over cycle addition. 1e3 random cycle pairs.
#[test]
fn acceptance_02_degree_integrality_and_additivity() {
    let c =
        Criterion::new(2, "degree integrality (angle oracle) and additivity on 1e3 cycle pairs");
    let disk = grid_square(3);
    let mesh = &disk.mesh;
    let nf = mesh.top_faces().len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x02);
    let started = Instant::now();

    // Angle-sum winding number: an independent, direction-free oracle.
    let winding_oracle = |map: &Map2<'_>, cycle: &Chain, q: Vector2<f64>| -> Option<i64> {
        let mut total = 0.0;
        for (key, coeff) in cycle.terms() {
            let a = map.image(key.vertices()[0]) - q;
            let b = map.image(key.vertices()[1]) - q;
            if a.norm() < 1e-12 || b.norm() < 1e-12 {
                return None; // q on a cycle vertex: winding undefined
            }
            total += coeff as f64 * (a.x * b.y - a.y * b.x).atan2(a.dot(&b));
        }
        let winding = total / std::f64::consts::TAU;
        ((winding - winding.round()).abs() < 1e-6).then_some(winding.round() as i64)
    };
    let face_sum_boundary = |faces: &[usize]| -> Chain {
        let mut acc: Option<Chain> = None;
        for &f in faces {
            let face = Chain::from_oriented_simplex(mesh.top_face(f)).unwrap();
            acc = Some(match acc {
                None => face,
                Some(prev) => prev.try_add(&face).unwrap(),
            });
        }
        acc.expect("nonempty face set").boundary().unwrap()
    };

    let mut checked = 0;
    while checked < 1000 {
        let images: Vec<Vector2<f64>> = (0..mesh.vertex_count())
            .map(|_| Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let map = Map2::new(mesh, images).unwrap();
        let pick = |rng: &mut ChaCha8Rng| -> Vec<usize> {
            let mut s: Vec<usize> = (0..nf).filter(|_| rng.random_range(0..2) == 1).collect();
            if s.is_empty() {
                s.push(rng.random_range(0..nf));
            }
            s
        };
        let c1 = face_sum_boundary(&pick(&mut rng));
        let c2 = face_sum_boundary(&pick(&mut rng));
        let q = Vector2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let seed = rng.random_range(0..u64::MAX / 2);

        let d1 = match cycle_degree(&DegreeQuery { map: &map, cycle: &c1, q, seed }) {
            Ok(d) => d,
            Err(_) => continue, // q not generic for this cycle; resample
        };
        let Some(oracle) = winding_oracle(&map, &c1, q) else { continue };
        assert_eq!(d1, oracle, "crossing degree disagrees with the angle oracle");
        match degree_additivity_check(&map, &c1, &c2, q, seed) {
            Ok(ok) => assert!(ok, "additivity failed at q = {q:?}"),
            Err(_) => continue,
        }
        checked += 1;
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.3}s, budget 10s");
    c.pass();
}

/// The degree along one triangle's boundary is the barycentric membership
/// indicator (signed by the image orientation). 1e3 exact comparisons.
#[test]
fn acceptance_03_triangle_boundary_dichotomy() {
    let c = Criterion::new(3, "single-triangle degree equals barycentric indicator, 1e3 pairs");
    let mesh =
        SimplicialMesh::new(2, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![vec![0, 1, 2]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x03);
    let mut checked = 0;
    while checked < 1000 {
        let images: Vec<Vector2<f64>> = (0..3)
            .map(|_| Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let m = Matrix2::from_columns(&[images[1] - images[0], images[2] - images[0]]);
        let det = m.determinant();
        if det.abs() < 1e-3 {
            continue; // nearly degenerate image: resample
        }
        let q = Vector2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let lambda = m.try_inverse().unwrap() * (q - images[0]);
        let bary = [1.0 - lambda.x - lambda.y, lambda.x, lambda.y];
        if bary.iter().any(|b| b.abs() < 1e-9) {
            continue; // too close to an edge for an exact dichotomy
        }
        let expected = if bary.iter().all(|&b| b > 0.0) {
            if det > 0.0 {
                1
            } else {
                -1
            }
        } else {
            0
        };
        let map = Map2::new(&mesh, images).unwrap();
        let got = match face_boundary_degree(&map, 0, q, rng.random_range(0..u64::MAX / 2)) {
            Ok(d) => d,
            Err(_) => continue,
        };
        assert_eq!(got, expected, "q = {q:?}, bary = {bary:?}, det = {det}");
        checked += 1;
    }
    c.pass();
}

/// On orientation-preserving maps the pre-image count never exceeds the
/// boundary degree, with equality away from the edge images. Five maps:
/// four certified solves and a double-wrap fan.
#[test]
fn acceptance_04_counting_bound_oracle_equivalence() {
    let c = Criterion::new(
        4,
        "pre-image counting bound vs boundary degree on 5 maps, 1e3 queries each",
    );
    let (_, _, grid_free, _t1) = solve_fixture("grid_disk.problem", None);
    let (grid_problem, ..) = solve_fixture("grid_disk.problem", None);
    let (_, _, grid_fixed, _t2) = solve_fixture("grid_disk.problem", Some(Mode::FixedUniform));
    let (l_problem, _, l_free, _t3) = solve_fixture("l_shape.problem", None);
    let dip_problem = parse_problem(&fixture("dip.problem")).unwrap();
    let dip_images =
        load_map_images(&fixture("dip_map.obj"), dip_problem.mesh.vertex_count()).unwrap();
    let (wrap_mesh, wrap_flat) = double_wrap_fan(12);

    let maps: Vec<(&str, Map2<'_>)> = vec![
        ("grid free", Map2::new(&grid_problem.mesh, grid_free).unwrap()),
        ("grid fixed", Map2::new(&grid_problem.mesh, grid_fixed).unwrap()),
        ("l-shape free", Map2::new(&l_problem.mesh, l_free).unwrap()),
        ("dip", Map2::new(&dip_problem.mesh, dip_images).unwrap()),
        ("double wrap", Map2::from_flat(&wrap_mesh, &wrap_flat).unwrap()),
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(0x04);
    for (name, map) in &maps {
        let report = orientation_report(map, EPS_DET).unwrap();
        assert_eq!(
            report.classification,
            OrientationClass::Preserving,
            "{name} must be orientation-preserving"
        );
        let (mut lo, mut hi) = (Vector2::repeat(f64::INFINITY), Vector2::repeat(f64::NEG_INFINITY));
        for u in map.images() {
            lo = lo.inf(u);
            hi = hi.sup(u);
        }
        let span = hi - lo;
        let mut accepted = 0;
        let mut equalities = 0;
        while accepted < 1000 {
            let q = Vector2::new(
                lo.x - 0.15 * span.x + rng.random_range(0.0..1.3) * span.x,
                lo.y - 0.15 * span.y + rng.random_range(0.0..1.3) * span.y,
            );
            match counting_bound_check(map, q, rng.random_range(0..u64::MAX / 2)) {
                Ok(report) => {
                    accepted += 1;
                    assert!(
                        report.inequality_holds,
                        "{name}: {} pre-images > degree {} at {q:?}",
                        report.count, report.degree
                    );
                    if report.equality_expected {
                        equalities += 1;
                        assert_eq!(
                            report.equality_holds,
                            Some(true),
                            "{name}: expected equality at {q:?}, got {} pre-images vs degree {}",
                            report.count,
                            report.degree
                        );
                    }
                }
                Err(DegreeError::OnCycleImage { .. }) => continue,
                Err(_) => continue,
            }
        }
        assert!(equalities >= 500, "{name}: only {equalities} equality queries");
    }
    c.pass();
}

/// Boundary degree of line-certified solves: 1 inside the polygon, 0
/// outside, sampling away from the boundary image. 500+ samples per map.
#[test]
fn acceptance_05_certified_outputs_have_degree_dichotomy() {
    let c = Criterion::new(
        5,
        "line-certified outputs: boundary degree 1 inside / 0 outside, 500+ samples",
    );
    let runs = [
        ("grid_disk.problem", None),
        ("grid_disk.problem", Some(Mode::FixedUniform)),
        ("l_shape.problem", None),
        ("l_shape.problem", Some(Mode::FixedUniform)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x05);
    for (name, mode) in runs {
        let (problem, report, images, _dir) = solve_fixture(name, mode);
        assert!(
            report
                .certificates
                .iter()
                .any(|cert| cert.condition == bijmap::certify::Condition::BoundaryLines
                    && cert.certified()),
            "{name} ({:?}) must be line-certified",
            mode
        );
        let map = Map2::new(&problem.mesh, images).unwrap();
        let polygon = &problem.polygon;
        let margin = 1e-6 * polygon.diameter();
        let (mut lo, mut hi) = (Vector2::repeat(f64::INFINITY), Vector2::repeat(f64::NEG_INFINITY));
        for v in polygon.vertices() {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let span = hi - lo;
        let (mut inside_checked, mut outside_checked, mut accepted) = (0usize, 0usize, 0usize);
        while accepted < 500 {
            let q = Vector2::new(
                lo.x - 0.3 * span.x + rng.random_range(0.0..1.6) * span.x,
                lo.y - 0.3 * span.y + rng.random_range(0.0..1.6) * span.y,
            );
            if boundary_image_distance(&map, q) <= margin {
                continue;
            }
            let Ok(deg) = boundary_degree(&map, q, rng.random_range(0..u64::MAX / 2)) else {
                continue;
            };
            if polygon.contains(q) {
                assert_eq!(deg, 1, "{name}: inside point {q:?} has degree {deg}");
                inside_checked += 1;
            } else {
                assert_eq!(deg, 0, "{name}: outside point {q:?} has degree {deg}");
                outside_checked += 1;
            }
            accepted += 1;
        }
        assert!(inside_checked >= 100 && outside_checked >= 100, "one-sided sampling");
    }
    c.pass();
}

/// A fold earns no certificate and is refuted by the necessary check; a
/// double wrap has boundary degree 2 where it wraps.
#[test]
fn acceptance_06_fold_refuted_and_wrap_has_degree_two() {
    let c = Criterion::new(6, "fold refuted by every certifier; double wrap yields degree 2");
    let (fold_mesh, fold_flat) = fan_fold();
    let fold = Map2::from_flat(&fold_mesh, &fold_flat).unwrap();
    let tol = Tolerances::default();
    let square = square_polygon(1.0);
    let raw = corner_assignment(&fold_mesh, &square, &[0, 1, 2, 3]);
    let assignment = bijmap::certify::BoundaryAssignment::new(&fold_mesh, &square, &raw).unwrap();

    let necessary = check_necessary(&fold, &tol).unwrap();
    assert!(!necessary.certified(), "fold passed the necessary check");
    assert!(
        necessary
            .evidence
            .iter()
            .any(|e| matches!(e, bijmap::certify::Evidence::FlippedFace { .. })),
        "no flipped-face evidence: {:?}",
        necessary.evidence
    );
    assert!(!certify_boundary_bijection(&fold, &square, &tol).unwrap().certified());
    assert!(!certify_boundary_lines(&fold, &square, &assignment, &tol).unwrap().certified());
    assert!(!certify_monotone_boundary(&fold, &square, &assignment, &tol).unwrap().certified());

    let (wrap_mesh, wrap_flat) = double_wrap_fan(12);
    let wrap = Map2::from_flat(&wrap_mesh, &wrap_flat).unwrap();
    // Documented query: strictly inside the wrapped disk of radius 0.8,
    // away from all vertex images.
    let q = Vector2::new(0.15, 0.1);
    assert_eq!(boundary_degree(&wrap, q, 0x06).unwrap(), 2);
    c.pass();
}

/// The committed dip map: line conditions certify it, boundary bijection
/// and monotonicity refute it.
#[test]
fn acceptance_07_dip_map_separates_certificates() {
    let c = Criterion::new(7, "dip map: line-certified, bijection- and monotonicity-refuted");
    let problem = parse_problem(&fixture("dip.problem")).unwrap();
    let images = load_map_images(&fixture("dip_map.obj"), problem.mesh.vertex_count()).unwrap();
    let map = Map2::new(&problem.mesh, images).unwrap();
    let tol = &problem.tolerances;

    assert!(check_necessary(&map, tol).unwrap().certified(), "dip must be positively oriented");
    assert!(
        certify_boundary_lines(&map, &problem.polygon, &problem.assignment, tol)
            .unwrap()
            .certified(),
        "line conditions must certify the dip"
    );
    let bij = certify_boundary_bijection(&map, &problem.polygon, tol).unwrap();
    assert!(!bij.certified(), "boundary bijection must refute the dip");
    let mono = certify_monotone_boundary(&map, &problem.polygon, &problem.assignment, tol).unwrap();
    assert!(!mono.certified(), "monotone boundary must refute the dip");
    c.pass();
}

/// End-to-end free-boundary solves of both fixtures: strict feasibility
/// within 3 outer iterations, energy settled within 5, residuals within
/// 1e-8 of the polygon diameter, positive determinants, condition numbers
/// within the bound, under 60 seconds each.
#[test]
fn acceptance_08_pipeline_end_to_end_on_fixtures() {
    let c =
        Criterion::new(8, "end-to-end solves: budgets, residuals, orientation, condition bound");
    for name in ["grid_disk.problem", "l_shape.problem"] {
        let started = Instant::now();
        let (problem, report, images, _dir) = solve_fixture(name, None);
        let elapsed = started.elapsed().as_secs_f64();
        assert!(elapsed < 60.0, "{name}: took {elapsed:.1}s, budget 60s");

        assert_eq!(problem.params.cond_bound, 15.0, "fixtures pin K = 15");
        assert_eq!(report.stage, Stage::Complete, "{name}: {:?}", report.stage);
        let feasibility = &report.phases[0];
        assert_eq!(feasibility.name, "feasibility");
        assert!(feasibility.strictly_feasible, "{name}: no strict feasibility");
        assert!(
            feasibility.iterations.len() <= 3,
            "{name}: {} feasibility iterations",
            feasibility.iterations.len()
        );
        assert!(feasibility.iterations.last().unwrap().value < 0.0);
        let energy = &report.phases[1];
        assert_eq!(energy.name, "energy");
        assert!(
            energy.iterations.len() <= 5,
            "{name}: {} energy iterations",
            energy.iterations.len()
        );
        assert!(energy.warning.is_none(), "{name}: {:?}", energy.warning);

        let lines_cert = report
            .certificates
            .iter()
            .find(|cert| cert.condition == bijmap::certify::Condition::BoundaryLines)
            .expect("lines certificate present");
        assert!(lines_cert.certified(), "{name}: line conditions refuted");
        assert!(
            lines_cert.tolerance <= 1e-8 * problem.polygon.diameter() * (1.0 + 1e-9),
            "{name}: residual tolerance {} too loose",
            lines_cert.tolerance
        );

        let map = Map2::new(&problem.mesh, images).unwrap();
        let orient = orientation_report(&map, EPS_DET).unwrap();
        assert_eq!(orient.classification, OrientationClass::Preserving);
        assert!(orient.dets.iter().all(|&d| d > 0.0), "{name}: non-positive determinant");
        let worst = bijmap::coneopt::worst_condition_number(&map).unwrap();
        assert!(
            worst <= problem.params.cond_bound * (1.0 + 1e-6),
            "{name}: condition {worst} exceeds bound"
        );
    }
    c.pass();
}

/// Freeing the boundary never loses to the uniform fixed boundary.
#[test]
fn acceptance_09_free_energy_beats_fixed_uniform() {
    let c = Criterion::new(9, "free-boundary energy <= fixed-uniform energy on both fixtures");
    for name in ["grid_disk.problem", "l_shape.problem"] {
        let (_, free_report, _, _d1) = solve_fixture(name, None);
        let (_, fixed_report, _, _d2) = solve_fixture(name, Some(Mode::FixedUniform));
        let e_free = free_report.dirichlet.expect("free energy");
        let e_fixed = fixed_report.dirichlet.expect("fixed energy");
        assert!(e_free <= e_fixed + 1e-9, "{name}: free energy {e_free} exceeds fixed {e_fixed}");
    }
    c.pass();
}

/// Monotone certificates imply bijection certificates, and perturbations
/// flip verdicts: a nudged boundary vertex loses the line and bijection
/// certificates; a displaced interior vertex loses the necessary check.
#[test]
fn acceptance_10_monotone_implies_bijection_and_perturbations_refute() {
    let c = Criterion::new(10, "monotone => bijection on solves; perturbations flip verdicts");
    let runs = [
        ("grid_disk.problem", None),
        ("grid_disk.problem", Some(Mode::FixedUniform)),
        ("l_shape.problem", None),
    ];
    let mut monotone_seen = 0;
    for (name, mode) in runs {
        let (problem, _, images, _dir) = solve_fixture(name, mode);
        let map = Map2::new(&problem.mesh, images).unwrap();
        let tol = &problem.tolerances;
        let mono =
            certify_monotone_boundary(&map, &problem.polygon, &problem.assignment, tol).unwrap();
        if mono.certified() {
            monotone_seen += 1;
            let bij = certify_boundary_bijection(&map, &problem.polygon, tol).unwrap();
            assert!(bij.certified(), "{name}: monotone-certified but bijection-refuted");
        }
    }
    assert!(monotone_seen >= 3, "only {monotone_seen} monotone-certified solves");

    // Perturbations, on the L-shape free solve.
    let (problem, _, images, _dir) = solve_fixture("l_shape.problem", None);
    let tol = &problem.tolerances;
    let polygon = &problem.polygon;

    // (a) Nudge one non-corner boundary vertex diagonally off its line.
    let loop_edges = problem.mesh.boundary().single_loop().unwrap().to_vec();
    let corners: Vec<Vector2<f64>> = polygon.vertices().to_vec();
    let off_corner = loop_edges
        .iter()
        .map(|&(tail, _)| tail)
        .find(|&v| corners.iter().all(|c| (images[v] - c).norm() > 0.05 * polygon.diameter()))
        .expect("a non-corner boundary vertex");
    let mut nudged = images.clone();
    let delta = 1e-4 * polygon.diameter();
    nudged[off_corner] += Vector2::new(delta, delta);
    let nudged_map = Map2::new(&problem.mesh, nudged).unwrap();
    assert!(
        !certify_boundary_lines(&nudged_map, polygon, &problem.assignment, tol)
            .unwrap()
            .certified(),
        "nudged boundary vertex still line-certified"
    );
    assert!(
        !certify_boundary_bijection(&nudged_map, polygon, tol).unwrap().certified(),
        "nudged boundary vertex still bijection-certified"
    );

    // (b) Displace an interior vertex far enough to flip faces.
    let on_boundary: std::collections::BTreeSet<usize> =
        loop_edges.iter().map(|&(tail, _)| tail).collect();
    let interior = (0..problem.mesh.vertex_count())
        .find(|v| !on_boundary.contains(v))
        .expect("an interior vertex");
    let mut folded = images.clone();
    folded[interior] += Vector2::new(polygon.diameter(), 0.0);
    let folded_map = Map2::new(&problem.mesh, folded).unwrap();
    assert!(
        !check_necessary(&folded_map, tol).unwrap().certified(),
        "folded interior vertex still passes the necessary check"
    );
    assert!(
        !certify_monotone_boundary(&folded_map, polygon, &problem.assignment, tol)
            .unwrap()
            .certified(),
        "folded interior vertex still monotone-certified"
    );
    c.pass();
}
