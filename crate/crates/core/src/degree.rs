//! Integer degrees of simplicial maps restricted to cycles, and the
//! pre-image counting bound they support.
//!
//! For a `(d-1)`-cycle `c = sum a_i tau_i` and a point `q` off the image of
//! `c`, the degree of the map around `q` counts signed transversal hits of a
//! generic ray from `q`: a face `tau` with image vertices `u_1..u_d` is hit
//! by direction `p` exactly when `M y = p` has a strictly positive solution,
//! where `M = [u_1 - q, ..., u_d - q]`, and it contributes `a_i sign(det M)`.
//! For `d = 2` this is the classical winding number of the image polygon
//! computed by signed ray crossings; the same code runs unchanged for `d = 1`
//! and `d = 3`.
//!
//! Genericity of the direction is enforced by rejection: any hit decided by a
//! margin below tolerance voids the whole attempt and a fresh direction is
//! drawn from a seeded generator. A result is accepted only when two
//! independent directions agree, so every returned degree is a stable integer.
//!
//! Orientation convention: sources are taken with their stored face
//! orientation, which for planar meshes the loaders and generators normalise
//! to counterclockwise. The counting bound ties the number of pre-images of
//! `q` to the boundary degree for maps that are non-degenerate and
//! orientation preserving in that convention.

use nalgebra::{SMatrix, SVector, Vector2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mapping::{Map2, SimplicialMap};
use crate::mesh::{Chain, ChainError, FaceKey};

#[derive(Debug, Error)]
pub enum DegreeError {
    #[error("expected a {expected}-chain for a map into R^{target}, got a {got}-chain")]
    WrongCycleDimension { got: usize, expected: usize, target: usize },
    #[error("chain is not a cycle (its boundary is non-zero)")]
    NotACycle,
    #[error("chain references face {0:?} which is not a face of the mesh")]
    ForeignFace(Vec<usize>),
    #[error("query point lies on the image of face {face:?} (distance {dist:.3e} <= tolerance {tol:.3e}); the degree is undefined there")]
    OnCycleImage { face: Vec<usize>, dist: f64, tol: f64 },
    #[error("no generic direction found after {0} attempts")]
    NoGenericDirection(usize),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Relative tolerance for "q lies on the image of the cycle", scaled by the
/// image bounding-box diameter.
pub const EPS_GEO_REL: f64 = 1e-9;

/// Relative margin below which a ray hit is considered ambiguous and the
/// direction is redrawn.
const EPS_HIT_REL: f64 = 1e-9;

/// Attempt budget for finding two agreeing generic directions.
const MAX_DIRECTION_TRIES: usize = 64;

/// A degree evaluation: the map, a `(d-1)`-cycle in its mesh, the query
/// point, and the seed for the generic-direction generator.
#[derive(Clone, Debug)]
pub struct DegreeQuery<'q, 'm, const D: usize> {
    pub map: &'q SimplicialMap<'m, D>,
    pub cycle: &'q Chain,
    pub q: SVector<f64, D>,
    pub seed: u64,
}

/// Distance from `q` to the convex hull of `pts` (a point, segment, or
/// triangle — the image of a `(d-1)`-simplex under the map).
fn point_simplex_distance<const D: usize>(q: &SVector<f64, D>, pts: &[SVector<f64, D>]) -> f64 {
    match pts {
        [a] => (a - q).norm(),
        [a, b] => point_segment_distance(q, a, b),
        [a, b, c] => point_triangle_distance(q, a, b, c),
        _ => unreachable!("simplex faces have at most 3 vertices"),
    }
}

fn point_segment_distance<const D: usize>(
    q: &SVector<f64, D>,
    a: &SVector<f64, D>,
    b: &SVector<f64, D>,
) -> f64 {
    let ab = b - a;
    let denom = ab.norm_squared();
    let t = if denom == 0.0 { 0.0 } else { ((q - a).dot(&ab) / denom).clamp(0.0, 1.0) };
    (a + ab * t - q).norm()
}

/// Closest-distance to a triangle by Voronoi-region classification.
fn point_triangle_distance<const D: usize>(
    q: &SVector<f64, D>,
    a: &SVector<f64, D>,
    b: &SVector<f64, D>,
    c: &SVector<f64, D>,
) -> f64 {
    let ab = b - a;
    let ac = c - a;
    let ap = q - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = q - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return (ap - ab * t).norm();
    }
    let cp = q - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return (ap - ac * t).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (bp - (c - b) * t).norm();
    }
    // Interior region: distance to the plane of the triangle.
    let denom = ab.norm_squared() * ac.norm_squared() - ab.dot(&ac) * ab.dot(&ac);
    if denom == 0.0 {
        // Degenerate triangle: fall back to the closest edge.
        return point_segment_distance(q, a, b)
            .min(point_segment_distance(q, b, c))
            .min(point_segment_distance(q, a, c));
    }
    let s = (ac.norm_squared() * d1 - ab.dot(&ac) * d2) / denom;
    let t = (ab.norm_squared() * d2 - ab.dot(&ac) * d1) / denom;
    (ap - ab * s - ac * t).norm()
}

fn random_unit_vector<const D: usize>(rng: &mut ChaCha8Rng) -> SVector<f64, D> {
    loop {
        let v = SVector::<f64, D>::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if (0.1..=1.0).contains(&n) {
            return v / n;
        }
    }
}

/// Solves `M y = p` by Gaussian elimination with full pivoting, returning the
/// determinant and the solution. `None` when `M` is singular to working
/// precision (pivot below `1e-14` of the matrix scale).
fn solve_full_pivot<const D: usize>(
    m: &SMatrix<f64, D, D>,
    p: &SVector<f64, D>,
) -> (f64, Option<SVector<f64, D>>) {
    let mut a = *m;
    let mut b = *p;
    let mut col_of = [0usize; D];
    for (j, slot) in col_of.iter_mut().enumerate() {
        *slot = j;
    }
    let scale = a.amax().max(1e-300);
    let mut det = 1.0;
    for k in 0..D {
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for i in k..D {
            for j in k..D {
                if a[(i, j)].abs() > best {
                    best = a[(i, j)].abs();
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= 1e-14 * scale {
            return (0.0, None);
        }
        if pi != k {
            a.swap_rows(pi, k);
            b.swap_rows(pi, k);
            det = -det;
        }
        if pj != k {
            a.swap_columns(pj, k);
            col_of.swap(pj, k);
            det = -det;
        }
        det *= a[(k, k)];
        for i in k + 1..D {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..D {
                a[(i, j)] -= f * a[(k, j)];
            }
            b[i] -= f * b[k];
        }
    }
    let mut z = SVector::<f64, D>::zeros();
    for k in (0..D).rev() {
        let mut s = b[k];
        for j in k + 1..D {
            s -= a[(k, j)] * z[j];
        }
        z[k] = s / a[(k, k)];
    }
    let mut y = SVector::<f64, D>::zeros();
    for j in 0..D {
        y[col_of[j]] = z[j];
    }
    (det, Some(y))
}

/// Signed hit count of the ray `q + t p`, or `None` if any face decision is
/// below the genericity margin.
fn signed_hits<const D: usize>(query: &DegreeQuery<'_, '_, D>, p: &SVector<f64, D>) -> Option<i64> {
    let mut total = 0i64;
    for (key, coeff) in query.cycle.terms() {
        let mut m = SMatrix::<f64, D, D>::zeros();
        for (col, &w) in key.vertices().iter().enumerate() {
            m.set_column(col, &(query.map.image(w) - query.q));
        }
        let (det, solution) = solve_full_pivot(&m, p);
        match solution {
            Some(y) => {
                let max = y.amax();
                if y.iter().any(|&yi| yi.abs() <= EPS_HIT_REL * max) {
                    return None; // grazing hit: direction not generic enough
                }
                if y.iter().all(|&yi| yi > 0.0) {
                    total += coeff * if det > 0.0 { 1 } else { -1 };
                }
            }
            None => {
                // Singular face image (it spans a proper subspace). A hit
                // would need p inside that subspace; measure the residual of
                // projecting p onto the column span.
                let mut residual = *p;
                let mut basis: Vec<SVector<f64, D>> = Vec::new();
                for col in m.column_iter() {
                    let mut v = col.into_owned();
                    for b in &basis {
                        v -= b * b.dot(&v);
                    }
                    if v.norm() > 1e-12 {
                        basis.push(v.normalize());
                    }
                }
                for b in &basis {
                    residual -= b * b.dot(&residual);
                }
                if residual.norm() <= 1e-9 {
                    return None; // p (nearly) inside the degenerate span
                }
                // Otherwise the ray cleanly misses this face: no contribution.
            }
        }
    }
    Some(total)
}

/// The degree of the map restricted to a cycle around `q`.
///
/// Always an exact integer; two independently drawn generic directions must
/// agree before a value is returned.
pub fn cycle_degree<const D: usize>(query: &DegreeQuery<'_, '_, D>) -> Result<i64, DegreeError> {
    let mesh = query.map.mesh();
    if query.cycle.dim() + 1 != D {
        return Err(DegreeError::WrongCycleDimension {
            got: query.cycle.dim(),
            expected: D - 1,
            target: D,
        });
    }
    for key in query.cycle.support() {
        if !mesh.contains_face(key) {
            return Err(DegreeError::ForeignFace(key.vertices().to_vec()));
        }
    }
    if !query.cycle.is_cycle()? {
        return Err(DegreeError::NotACycle);
    }
    let tol = EPS_GEO_REL * query.map.image_bbox_diameter();
    for key in query.cycle.support() {
        let pts: Vec<SVector<f64, D>> =
            key.vertices().iter().map(|&w| query.map.image(w)).collect();
        let dist = point_simplex_distance(&query.q, &pts);
        if dist <= tol {
            return Err(DegreeError::OnCycleImage { face: key.vertices().to_vec(), dist, tol });
        }
    }

    let mut previous: Option<i64> = None;
    for attempt in 0..MAX_DIRECTION_TRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(
            query.seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let p = random_unit_vector::<D>(&mut rng);
        match signed_hits(query, &p) {
            Some(total) if previous == Some(total) => return Ok(total),
            Some(total) => previous = Some(total),
            None => previous = None,
        }
    }
    Err(DegreeError::NoGenericDirection(MAX_DIRECTION_TRIES))
}

/// Degree of the map around `q` along the mesh's boundary cycle.
pub fn boundary_degree<const D: usize>(
    map: &SimplicialMap<'_, D>,
    q: SVector<f64, D>,
    seed: u64,
) -> Result<i64, DegreeError> {
    let cycle = map.mesh().boundary_cycle();
    cycle_degree(&DegreeQuery { map, cycle: &cycle, q, seed })
}

/// Whether `deg(c1 + c2) = deg(c1) + deg(c2)` holds at `q`.
pub fn degree_additivity_check<const D: usize>(
    map: &SimplicialMap<'_, D>,
    c1: &Chain,
    c2: &Chain,
    q: SVector<f64, D>,
    seed: u64,
) -> Result<bool, DegreeError> {
    let sum = c1.try_add(c2)?;
    let d1 = cycle_degree(&DegreeQuery { map, cycle: c1, q, seed })?;
    let d2 = cycle_degree(&DegreeQuery { map, cycle: c2, q, seed })?;
    let ds = cycle_degree(&DegreeQuery { map, cycle: &sum, q, seed })?;
    Ok(ds == d1 + d2)
}

/// Degree of the map restricted to the boundary of one top face: 1 exactly
/// when `q` lies in the interior of that face's image, else 0 (for faces
/// whose image is positively oriented).
pub fn face_boundary_degree<const D: usize>(
    map: &SimplicialMap<'_, D>,
    face: usize,
    q: SVector<f64, D>,
    seed: u64,
) -> Result<i64, DegreeError> {
    let cycle = Chain::from_oriented_simplex(map.mesh().top_face(face))?.boundary()?;
    cycle_degree(&DegreeQuery { map, cycle: &cycle, q, seed })
}

/// One pre-image of `q`: the face it lies in, its barycentric coordinates
/// there (in stored vertex order), and the source point they define.
#[derive(Clone, Debug)]
pub struct PreimageWitness {
    pub face: usize,
    pub barycentric: [f64; 3],
    pub source_point: Vec<f64>,
}

/// The pre-images of a point under a surface map.
#[derive(Clone, Debug)]
pub struct PreimageCount {
    pub q: Vector2<f64>,
    pub count: usize,
    pub witnesses: Vec<PreimageWitness>,
}

/// Barycentric slack for accepting a pre-image on a face: solutions with all
/// coordinates `>= -EPS_BARY` count, so points on shared edges are found from
/// every side and then merged.
const EPS_BARY: f64 = 1e-9;

/// Counts distinct source points mapping to `q` by solving the affine system
/// on every face and merging solutions that coincide in the source (a point
/// on a shared edge counts once, attributed to the smallest face id). Faces
/// with a degenerate image are skipped: they contribute no isolated
/// pre-images.
pub fn preimage_count(map: &Map2<'_>, q: Vector2<f64>) -> PreimageCount {
    let mesh = map.mesh();
    let mut witnesses: Vec<PreimageWitness> = Vec::new();
    let merge_tol = 1e-9 * mesh.bbox_diameter();
    for (face, verts) in mesh.top_faces().iter().enumerate() {
        let u: Vec<Vector2<f64>> = verts.iter().map(|&v| map.image(v)).collect();
        let m = nalgebra::Matrix2::from_columns(&[u[1] - u[0], u[2] - u[0]]);
        if m.determinant().abs() <= 1e-12 * m.norm_squared() {
            continue;
        }
        let Some(lambda) = m.full_piv_lu().solve(&(q - u[0])) else { continue };
        let bary = [1.0 - lambda.x - lambda.y, lambda.x, lambda.y];
        if bary.iter().any(|&b| b < -EPS_BARY) {
            continue;
        }
        let n = mesh.ambient_dim();
        let mut source_point = vec![0.0; n];
        for (k, &v) in verts.iter().enumerate() {
            for (axis, x) in mesh.vertex(v).iter().enumerate() {
                source_point[axis] += bary[k] * x;
            }
        }
        let duplicate = witnesses.iter().any(|w| {
            w.source_point
                .iter()
                .zip(&source_point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                <= merge_tol
        });
        if !duplicate {
            witnesses.push(PreimageWitness { face, barycentric: bary, source_point });
        }
    }
    PreimageCount { q, count: witnesses.len(), witnesses }
}

/// Outcome of checking the pre-image counting bound at one query point.
#[derive(Clone, Debug)]
pub struct CountingBoundReport {
    pub count: usize,
    pub degree: i64,
    /// `count <= degree`.
    pub inequality_holds: bool,
    /// `q` stays clear of the images of all (d-1)-faces, where the bound
    /// sharpens to an equality.
    pub equality_expected: bool,
    /// `count == degree`, evaluated when the equality is expected.
    pub equality_holds: Option<bool>,
}

/// Checks `#preimages(q) <= deg` along the boundary cycle, and the equality
/// away from the images of all edges.
///
/// The bound is a theorem for non-degenerate orientation-preserving maps
/// (see [`crate::mapping::orientation_report`]); for other maps the report
/// simply records what happened.
pub fn counting_bound_check(
    map: &Map2<'_>,
    q: Vector2<f64>,
    seed: u64,
) -> Result<CountingBoundReport, DegreeError> {
    let mesh = map.mesh();
    let tol = EPS_GEO_REL * map.image_bbox_diameter();
    for (key, _) in mesh.boundary().oriented_faces() {
        let pts: Vec<Vector2<f64>> = key.vertices().iter().map(|&w| map.image(w)).collect();
        let dist = point_simplex_distance(&q, &pts);
        if dist <= tol {
            return Err(DegreeError::OnCycleImage { face: key.vertices().to_vec(), dist, tol });
        }
    }
    let degree = boundary_degree(map, q, seed)?;
    let count = preimage_count(map, q).count;
    let equality_expected = mesh.faces(1).all(|key: &FaceKey| {
        let pts: Vec<Vector2<f64>> = key.vertices().iter().map(|&w| map.image(w)).collect();
        point_simplex_distance(&q, &pts) > tol
    });
    Ok(CountingBoundReport {
        count,
        degree,
        inequality_holds: (count as i64) <= degree,
        equality_expected,
        equality_holds: equality_expected.then_some(count as i64 == degree),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::SimplicialMesh;
    use proptest::prelude::*;

    fn two_triangles() -> SimplicialMesh {
        SimplicialMesh::new(
            2,
            2,
            vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap()
    }

    /// Independent winding-number oracle: sum of signed angles subtended by
    /// each directed edge of the image cycle, divided by 2 pi.
    fn winding_oracle(map: &Map2<'_>, cycle: &Chain, q: Vector2<f64>) -> i64 {
        let mut total = 0.0;
        for (key, coeff) in cycle.terms() {
            let a = map.image(key.vertices()[0]) - q;
            let b = map.image(key.vertices()[1]) - q;
            let angle = (a.x * b.y - a.y * b.x).atan2(a.dot(&b));
            total += coeff as f64 * angle;
        }
        let winding = total / std::f64::consts::TAU;
        let rounded = winding.round();
        assert!(
            (winding - rounded).abs() < 1e-6,
            "oracle winding {winding} is not near an integer"
        );
        rounded as i64
    }

    /// Independent point-in-triangle oracle via barycentric sign checks.
    fn in_triangle_oracle(
        a: Vector2<f64>,
        b: Vector2<f64>,
        c: Vector2<f64>,
        q: Vector2<f64>,
    ) -> bool {
        let s1 = (b - a).perp(&(q - a));
        let s2 = (c - b).perp(&(q - b));
        let s3 = (a - c).perp(&(q - c));
        (s1 > 0.0 && s2 > 0.0 && s3 > 0.0) || (s1 < 0.0 && s2 < 0.0 && s3 < 0.0)
    }

    #[test]
    fn unit_square_boundary_winding() {
        let mesh = two_triangles();
        let map = Map2::identity(&mesh).unwrap();
        let cycle = mesh.boundary_cycle();
        let at = |x, y| {
            cycle_degree(&DegreeQuery { map: &map, cycle: &cycle, q: Vector2::new(x, y), seed: 7 })
                .unwrap()
        };
        assert_eq!(at(0.5, 0.5), 1);
        assert_eq!(at(5.0, 5.0), 0);
        assert_eq!(at(-0.3, 0.5), 0);
    }

    #[test]
    fn doubled_cycle_doubles_the_degree() {
        let mesh = two_triangles();
        let map = Map2::identity(&mesh).unwrap();
        let cycle = mesh.boundary_cycle().try_scale(2).unwrap();
        let q = Vector2::new(0.5, 0.5);
        let deg = cycle_degree(&DegreeQuery { map: &map, cycle: &cycle, q, seed: 11 }).unwrap();
        assert_eq!(deg, 2);
        assert_eq!(deg, winding_oracle(&map, &cycle, q));
    }

    #[test]
    fn degree_on_a_line_counts_endpoint_sides() {
        let mesh = SimplicialMesh::new(
            1,
            1,
            vec![0.0, 1.0, 2.5, 4.0],
            vec![vec![0, 1], vec![1, 2], vec![2, 3]],
        )
        .unwrap();
        let map = Map1::identity(&mesh).unwrap();
        let cycle = mesh.boundary_cycle();
        let at = |x: f64| {
            cycle_degree(&DegreeQuery {
                map: &map,
                cycle: &cycle,
                q: nalgebra::Vector1::new(x),
                seed: 3,
            })
            .unwrap()
        };
        assert_eq!(at(2.0), 1);
        assert_eq!(at(-1.0), 0);
        assert_eq!(at(9.0), 0);
    }

    use crate::mapping::Map1;
    use crate::mapping::Map3;

    #[test]
    fn degree_in_three_dimensions() {
        let mesh = SimplicialMesh::new(
            3,
            3,
            vec![
                0.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, //
                0.0, 0.0, 1.0, //
                0.3, 0.3, -1.0,
            ],
            vec![vec![0, 1, 2, 3], vec![1, 0, 2, 4]],
        )
        .unwrap();
        let map = Map3::identity(&mesh).unwrap();
        let cycle = mesh.boundary_cycle();
        let at = |x: f64, y: f64, z: f64| {
            cycle_degree(&DegreeQuery {
                map: &map,
                cycle: &cycle,
                q: nalgebra::Vector3::new(x, y, z),
                seed: 5,
            })
            .unwrap()
        };
        // The first tetrahedron is positively oriented ((1,0,0),(0,1,0),(0,0,1)
        // seen from vertex 0 at the origin); points inside either tet are
        // covered once, points outside not at all.
        assert_eq!(at(0.2, 0.2, 0.2), 1);
        assert_eq!(at(0.25, 0.25, -0.2), 1);
        assert_eq!(at(2.0, 2.0, 2.0), 0);
        assert_eq!(at(-0.5, 0.1, 0.1), 0);
    }

    #[test]
    fn query_validation_errors() {
        let mesh = two_triangles();
        let map = Map2::identity(&mesh).unwrap();
        let cycle = mesh.boundary_cycle();
        // On the boundary image.
        let err = cycle_degree(&DegreeQuery {
            map: &map,
            cycle: &cycle,
            q: Vector2::new(0.5, 0.0),
            seed: 1,
        })
        .unwrap_err();
        assert!(matches!(err, DegreeError::OnCycleImage { .. }), "{err}");
        // Not a cycle.
        let arc = Chain::from_oriented_simplex(&[0, 1]).unwrap();
        let err = cycle_degree(&DegreeQuery {
            map: &map,
            cycle: &arc,
            q: Vector2::new(0.5, 0.5),
            seed: 1,
        })
        .unwrap_err();
        assert!(matches!(err, DegreeError::NotACycle), "{err}");
        // Wrong dimension.
        let solid = mesh.fundamental_chain();
        let err = cycle_degree(&DegreeQuery {
            map: &map,
            cycle: &solid,
            q: Vector2::new(0.5, 0.5),
            seed: 1,
        })
        .unwrap_err();
        assert!(matches!(err, DegreeError::WrongCycleDimension { .. }), "{err}");
    }

    #[test]
    fn face_boundary_degree_dichotomy() {
        let mesh = two_triangles();
        let map = Map2::identity(&mesh).unwrap();
        // Centroid of face 0.
        let q = Vector2::new(2.0 / 3.0, 1.0 / 3.0);
        assert_eq!(face_boundary_degree(&map, 0, q, 2).unwrap(), 1);
        assert_eq!(face_boundary_degree(&map, 1, q, 2).unwrap(), 0);
        assert_eq!(face_boundary_degree(&map, 0, Vector2::new(4.0, 4.0), 2).unwrap(), 0);
    }

    #[test]
    fn additivity_of_adjacent_face_boundaries() {
        let mesh = two_triangles();
        let map = Map2::identity(&mesh).unwrap();
        let b1 = Chain::from_oriented_simplex(&[0, 1, 2]).unwrap().boundary().unwrap();
        let b2 = Chain::from_oriented_simplex(&[0, 2, 3]).unwrap().boundary().unwrap();
        let q = Vector2::new(2.0 / 3.0, 1.0 / 3.0); // inside face 0 only
        assert!(degree_additivity_check(&map, &b1, &b2, q, 13).unwrap());
        let d1 = cycle_degree(&DegreeQuery { map: &map, cycle: &b1, q, seed: 13 }).unwrap();
        let d2 = cycle_degree(&DegreeQuery { map: &map, cycle: &b2, q, seed: 13 }).unwrap();
        assert_eq!((d1, d2), (1, 0));
        // Empty chain and a chain cancelling itself.
        let empty = Chain::zero(1);
        assert!(degree_additivity_check(&map, &b1, &empty, q, 13).unwrap());
        let neg = b1.try_neg().unwrap();
        assert!(degree_additivity_check(&map, &b1, &neg, q, 13).unwrap());
    }

    #[test]
    fn preimage_count_on_identity_and_fold() {
        let mesh = two_triangles();
        let map = Map2::identity(&mesh).unwrap();
        assert_eq!(preimage_count(&map, Vector2::new(0.25, 0.1)).count, 1);
        assert_eq!(preimage_count(&map, Vector2::new(3.0, 0.5)).count, 0);
        // A point on the shared diagonal is found from both faces but counts
        // once.
        let pc = preimage_count(&map, Vector2::new(0.5, 0.5));
        assert_eq!(pc.count, 1);
        assert_eq!(pc.witnesses[0].face, 0);

        // Fold vertex 3 across the diagonal onto (1,0): the images of the
        // two faces coincide, so interior points of the image are covered
        // twice.
        let folded = Map2::from_flat(&mesh, &[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let pc = preimage_count(&folded, Vector2::new(0.8, 0.5));
        assert_eq!(pc.count, 2);
        // Witnesses reproduce q through the vertex images.
        for w in &pc.witnesses {
            let verts = mesh.top_face(w.face);
            let mut img = Vector2::zeros();
            for (k, &v) in verts.iter().enumerate() {
                img += w.barycentric[k] * folded.image(v);
            }
            assert!((img - pc.q).norm() <= 1e-9);
        }
    }

    #[test]
    fn counting_bound_on_identity_map() {
        let mesh = two_triangles();
        let map = Map2::identity(&mesh).unwrap();
        let report = counting_bound_check(&map, Vector2::new(0.21, 0.11), 17).unwrap();
        assert_eq!(report.count, 1);
        assert_eq!(report.degree, 1);
        assert!(report.inequality_holds);
        assert!(report.equality_expected);
        assert_eq!(report.equality_holds, Some(true));
        let outside = counting_bound_check(&map, Vector2::new(2.0, 2.0), 17).unwrap();
        assert_eq!((outside.count, outside.degree), (0, 0));
    }

    #[test]
    fn counting_bound_needs_orientation_preservation() {
        // The fold is mixed-orientation; the bound legitimately fails there,
        // which is exactly why the hypothesis is part of the theorem.
        let mesh = two_triangles();
        let folded = Map2::from_flat(&mesh, &[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let report = counting_bound_check(&folded, Vector2::new(0.8, 0.5), 23).unwrap();
        assert_eq!(report.count, 2);
        assert_eq!(report.degree, 0);
        assert!(!report.inequality_holds);
    }

    #[test]
    fn lemma_style_dichotomy_matches_barycentric_oracle() {
        let mesh = two_triangles();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 200 {
            let flat: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
            let map = Map2::from_flat(&mesh, &flat).unwrap();
            let q = Vector2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            for face in 0..2 {
                let verts = mesh.top_face(face);
                let (a, b, c) = (map.image(verts[0]), map.image(verts[1]), map.image(verts[2]));
                let inside = in_triangle_oracle(a, b, c, q);
                let sign = (b - a).perp(&(c - a)).signum() as i64;
                match face_boundary_degree(&map, face, q, 1000 + checked as u64) {
                    Ok(deg) => {
                        // Positively oriented image: 1 inside / 0 outside.
                        // Negatively oriented: -1 inside.
                        let expected = if inside { sign } else { 0 };
                        assert_eq!(deg, expected, "face {face} q {q:?}");
                        checked += 1;
                    }
                    Err(DegreeError::OnCycleImage { .. }) => {} // q on an edge: skip
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }

    proptest! {
        /// Ray-crossing degree agrees with the angle-summation oracle on
        /// random maps of the square.
        #[test]
        fn winding_agrees_with_angle_oracle(
            flat in proptest::collection::vec(-3.0f64..3.0, 8),
            qx in -4.0f64..4.0,
            qy in -4.0f64..4.0,
        ) {
            let mesh = two_triangles();
            let map = Map2::from_flat(&mesh, &flat).unwrap();
            let cycle = mesh.boundary_cycle();
            let q = Vector2::new(qx, qy);
            match cycle_degree(&DegreeQuery { map: &map, cycle: &cycle, q, seed: 41 }) {
                Ok(deg) => prop_assert_eq!(deg, winding_oracle(&map, &cycle, q)),
                Err(DegreeError::OnCycleImage { .. }) => {} // legitimately rejected
                Err(e) => return Err(TestCaseError::fail(format!("unexpected: {e}"))),
            }
        }

        /// Additivity over random pairs of face-boundary cycles.
        #[test]
        fn additivity_on_random_configurations(
            flat in proptest::collection::vec(-3.0f64..3.0, 8),
            k1 in -2i64..=2,
            k2 in -2i64..=2,
            qx in -4.0f64..4.0,
            qy in -4.0f64..4.0,
        ) {
            let mesh = two_triangles();
            let map = Map2::from_flat(&mesh, &flat).unwrap();
            let c1 = Chain::from_oriented_simplex(&[0, 1, 2]).unwrap()
                .boundary().unwrap().try_scale(k1).unwrap();
            let c2 = mesh.boundary_cycle().try_scale(k2).unwrap();
            let q = Vector2::new(qx, qy);
            match degree_additivity_check(&map, &c1, &c2, q, 57) {
                Ok(holds) => prop_assert!(holds),
                Err(DegreeError::OnCycleImage { .. }) => {}
                Err(e) => return Err(TestCaseError::fail(format!("unexpected: {e}"))),
            }
        }
    }
}
