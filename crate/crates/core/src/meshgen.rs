//! Deterministic example meshes, maps, and target polygons.
//!
//! These generators back the test suites and the committed fixtures: disk
//! grids (uniform and graded), an L-shaped domain, a fan that folds over
//! itself, and a fan whose boundary wraps twice around a point. Each mesh
//! generator also reports which boundary vertices play the role of polygon
//! corners, in boundary-loop order, so assignments can be derived
//! mechanically.

use std::collections::BTreeMap;

use nalgebra::Vector2;

use crate::certify::Polytope2;
use crate::mesh::{SimplicialMesh, VertexId};

/// A generated disk-topology mesh together with the boundary vertices meant
/// to land on polygon corners, listed in boundary-loop (counterclockwise)
/// order starting at the loop's first corner.
pub struct DiskMesh {
    pub mesh: SimplicialMesh,
    pub corners: Vec<VertexId>,
}

/// Regular grid of `n x n` cells on the unit square, split into
/// counterclockwise triangles. Corners: (0,0), (1,0), (1,1), (0,1).
pub fn grid_square(n: usize) -> DiskMesh {
    grid_square_spaced(n, |t| t)
}

/// Grid on the unit square with vertices placed at `s(i/n)` along both axes.
/// With a non-affine `s`, the uniform parameterization of the square is no
/// longer the energy minimizer, which keeps free- vs fixed-boundary energy
/// comparisons strict.
pub fn grid_square_spaced(n: usize, s: impl Fn(f64) -> f64) -> DiskMesh {
    assert!(n >= 1);
    let mut coords = Vec::with_capacity(2 * (n + 1) * (n + 1));
    for iy in 0..=n {
        for ix in 0..=n {
            coords.push(s(ix as f64 / n as f64));
            coords.push(s(iy as f64 / n as f64));
        }
    }
    let at = |ix: usize, iy: usize| iy * (n + 1) + ix;
    let mut faces = Vec::with_capacity(2 * n * n);
    for iy in 0..n {
        for ix in 0..n {
            let (v00, v10) = (at(ix, iy), at(ix + 1, iy));
            let (v01, v11) = (at(ix, iy + 1), at(ix + 1, iy + 1));
            faces.push(vec![v00, v10, v11]);
            faces.push(vec![v00, v11, v01]);
        }
    }
    let mesh = SimplicialMesh::new(2, 2, coords, faces).expect("grid is a valid disk");
    let corners = vec![at(0, 0), at(n, 0), at(n, n), at(0, n)];
    DiskMesh { mesh, corners }
}

/// Grid with spacing graded as `t^1.5` along both axes.
pub fn graded_grid(n: usize) -> DiskMesh {
    grid_square_spaced(n, |t| t.powf(1.5))
}

/// L-shaped domain: the square `[0, 2m] x [0, 2m]` in grid units with the
/// top-right `m x m` block removed, `2m x 2m` cells of side `1/m` scaled to
/// `[0,2] x [0,2]`. Six corners in loop order:
/// (0,0), (2,0), (2,1), (1,1), (1,2), (0,2).
pub fn l_shape(m: usize) -> DiskMesh {
    assert!(m >= 1);
    let n = 2 * m;
    let h = 1.0 / m as f64;
    // Keep only vertices used by kept cells; build an id remap.
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut coords = Vec::new();
    let mut id_of = |ix: usize, iy: usize, coords: &mut Vec<f64>| -> usize {
        *ids.entry((ix, iy)).or_insert_with(|| {
            coords.push(ix as f64 * h);
            coords.push(iy as f64 * h);
            coords.len() / 2 - 1
        })
    };
    let mut faces = Vec::new();
    for iy in 0..n {
        for ix in 0..n {
            if ix >= m && iy >= m {
                continue; // removed block
            }
            let v00 = id_of(ix, iy, &mut coords);
            let v10 = id_of(ix + 1, iy, &mut coords);
            let v11 = id_of(ix + 1, iy + 1, &mut coords);
            let v01 = id_of(ix, iy + 1, &mut coords);
            faces.push(vec![v00, v10, v11]);
            faces.push(vec![v00, v11, v01]);
        }
    }
    let mesh = SimplicialMesh::new(2, 2, coords, faces).expect("L-shape is a valid disk");
    let corner_grid = [(0, 0), (n, 0), (n, m), (m, m), (m, n), (0, n)];
    let corners = corner_grid.iter().map(|k| ids[k]).collect();
    DiskMesh { mesh, corners }
}

/// The unit-square grid lifted onto the graph of
/// `z = 0.25 sin(pi x) sin(pi y)`: a genuinely curved surface in space with
/// the same connectivity and corners as [`grid_square`].
pub fn lifted_grid(n: usize) -> DiskMesh {
    let flat = grid_square(n);
    let mut coords = Vec::with_capacity(3 * flat.mesh.vertex_count());
    for v in 0..flat.mesh.vertex_count() {
        let p = flat.mesh.vertex(v);
        coords.extend_from_slice(&[
            p[0],
            p[1],
            0.25 * (std::f64::consts::PI * p[0]).sin() * (std::f64::consts::PI * p[1]).sin(),
        ]);
    }
    let faces = flat.mesh.top_faces().to_vec();
    let mesh = SimplicialMesh::new(2, 3, coords, faces).expect("lifted grid is a valid disk");
    DiskMesh { mesh, corners: flat.corners }
}

/// A four-triangle fan over the unit square with a centre vertex, plus vertex
/// images that fold the centre across the top edge to (0.5, 1.5). The top
/// triangle flips orientation (the side triangles collapse toward slivers but
/// keep their sign): the classic fold that necessary-condition checks must
/// refute. Points of the square just below the top edge gain a second
/// pre-image.
pub fn fan_fold() -> (SimplicialMesh, Vec<f64>) {
    let coords = vec![
        0.0, 0.0, // 0
        1.0, 0.0, // 1
        1.0, 1.0, // 2
        0.0, 1.0, // 3
        0.5, 0.5, // 4 centre
    ];
    let faces = vec![vec![0, 1, 4], vec![1, 2, 4], vec![2, 3, 4], vec![3, 0, 4]];
    let mesh = SimplicialMesh::new(2, 2, coords.clone(), faces).expect("fan is a valid disk");
    let mut images = coords;
    images[8] = 0.5;
    images[9] = 1.5; // centre pushed above the top edge
    (mesh, images)
}

/// A `k`-triangle fan over the unit disk whose vertex images double every
/// polar angle: an orientation-preserving, non-degenerate map whose boundary
/// winds twice around the origin. Interior points away from the spoke images
/// have exactly two pre-images. Requires `k >= 5` so the doubled wedges stay
/// convex; the image radius is 0.8.
pub fn double_wrap_fan(k: usize) -> (SimplicialMesh, Vec<f64>) {
    assert!(k >= 5);
    let mut coords = vec![0.0, 0.0];
    let mut images = vec![0.0, 0.0];
    for i in 0..k {
        let theta = std::f64::consts::TAU * i as f64 / k as f64;
        coords.extend_from_slice(&[theta.cos(), theta.sin()]);
        images.extend_from_slice(&[0.8 * (2.0 * theta).cos(), 0.8 * (2.0 * theta).sin()]);
    }
    let mut faces = Vec::with_capacity(k);
    for i in 0..k {
        faces.push(vec![0, 1 + i, 1 + (i + 1) % k]);
    }
    let mesh = SimplicialMesh::new(2, 2, coords, faces).expect("fan is a valid disk");
    (mesh, images)
}

/// Unit square target polygon, counterclockwise from the origin.
pub fn square_polygon(side: f64) -> Polytope2 {
    Polytope2::new(vec![
        Vector2::new(0.0, 0.0),
        Vector2::new(side, 0.0),
        Vector2::new(side, side),
        Vector2::new(0.0, side),
    ])
    .expect("square polygon is valid")
}

/// A non-convex L target with leg proportions different from [`l_shape`]'s
/// source, counterclockwise: (0,0), (1.5,0), (1.5,0.6), (0.7,0.6), (0.7,1.3),
/// (0,1.3).
pub fn l_polygon() -> Polytope2 {
    Polytope2::new(vec![
        Vector2::new(0.0, 0.0),
        Vector2::new(1.5, 0.0),
        Vector2::new(1.5, 0.6),
        Vector2::new(0.7, 0.6),
        Vector2::new(0.7, 1.3),
        Vector2::new(0.0, 1.3),
    ])
    .expect("L polygon is valid")
}

/// Assigns each boundary edge to a polygon edge by walking the boundary loop
/// from `corners[0]`: edges between `corners[k]` and `corners[k+1]` go to
/// polygon edge `k`. The corner list must appear on the loop in cyclic order
/// and match the polygon's edge count.
pub fn corner_assignment(
    mesh: &SimplicialMesh,
    polygon: &Polytope2,
    corners: &[VertexId],
) -> BTreeMap<(VertexId, VertexId), usize> {
    assert_eq!(corners.len(), polygon.edge_count(), "one corner per polygon edge");
    let loop_edges = mesh.boundary().single_loop().expect("disk topology");
    let start = loop_edges
        .iter()
        .position(|&(tail, _)| tail == corners[0])
        .expect("corners[0] on the boundary loop");
    let mut assignment = BTreeMap::new();
    let mut side = 0usize;
    for k in 0..loop_edges.len() {
        let (tail, head) = loop_edges[(start + k) % loop_edges.len()];
        if k > 0 && corners.contains(&tail) {
            side += 1;
            assert_eq!(tail, corners[side], "corners out of loop order");
        }
        assignment.insert((tail.min(head), tail.max(head)), side);
    }
    assert_eq!(side + 1, corners.len(), "every corner visited");
    assignment
}
