//! Simplicial maps and their per-face affine structure.
//!
//! A simplicial map is determined by one image point per vertex; on each top
//! face it is the unique affine interpolant `x -> A_j x + delta_j` of the
//! corner images, with `x` expressed in a per-face source frame. For planar
//! sources the frame is the global one (so the identity map has `A_j = I`);
//! for surfaces in space it is an orthonormal tangent frame with origin at
//! the face's first vertex and first axis along its first edge, oriented so
//! that the stored vertex order is counterclockwise.
//!
//! The 2x2 linear part splits as `A = B + C` with `B = (A - A^T + tr(A) I)/2`
//! a similarity ("rotation-like") part and `C = (A + A^T - tr(A) I)/2` an
//! anti-similarity part; the split carries the determinant and the singular
//! values of `A` in closed form and drives both the distortion bound in
//! [`crate::coneopt`] and the orientation classification here.

use nalgebra::{Matrix2, Matrix3, SVector, Vector2};
use thiserror::Error;

use crate::mesh::{SimplicialMesh, VertexId};

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map into R^{map_dim} needs a {map_dim}-dimensional mesh, got dimension {mesh_dim}")]
    DimensionMismatch { mesh_dim: usize, map_dim: usize },
    #[error("got {got} vertex images for a mesh with {expected} vertices")]
    WrongImageCount { got: usize, expected: usize },
    #[error("image of vertex {0} is not finite")]
    NonFiniteImage(VertexId),
    #[error("source face {0} is degenerate (affinely dependent vertices)")]
    DegenerateSourceFace(usize),
    #[error("operation requires a surface mesh (dimension 2), got dimension {0}")]
    NotASurface(usize),
}

/// Piecewise-affine map of a `D`-dimensional mesh into `R^D`, given by its
/// vertex images.
#[derive(Clone, Debug)]
pub struct SimplicialMap<'m, const D: usize> {
    mesh: &'m SimplicialMesh,
    images: Vec<SVector<f64, D>>,
}

pub type Map1<'m> = SimplicialMap<'m, 1>;
pub type Map2<'m> = SimplicialMap<'m, 2>;
pub type Map3<'m> = SimplicialMap<'m, 3>;

impl<'m, const D: usize> SimplicialMap<'m, D> {
    pub fn new(mesh: &'m SimplicialMesh, images: Vec<SVector<f64, D>>) -> Result<Self, MapError> {
        if mesh.dim() != D {
            return Err(MapError::DimensionMismatch { mesh_dim: mesh.dim(), map_dim: D });
        }
        if images.len() != mesh.vertex_count() {
            return Err(MapError::WrongImageCount {
                got: images.len(),
                expected: mesh.vertex_count(),
            });
        }
        if let Some(v) = images.iter().position(|u| !u.iter().all(|x| x.is_finite())) {
            return Err(MapError::NonFiniteImage(v));
        }
        Ok(SimplicialMap { mesh, images })
    }

    /// Images from a flat coordinate slice, `D` numbers per vertex.
    pub fn from_flat(mesh: &'m SimplicialMesh, flat: &[f64]) -> Result<Self, MapError> {
        if flat.len() != mesh.vertex_count() * D {
            return Err(MapError::WrongImageCount {
                got: flat.len() / D.max(1),
                expected: mesh.vertex_count(),
            });
        }
        let images = flat.chunks_exact(D).map(SVector::from_column_slice).collect();
        Self::new(mesh, images)
    }

    /// The identity-images map of a mesh embedded in `R^D` itself.
    pub fn identity(mesh: &'m SimplicialMesh) -> Result<Self, MapError> {
        if mesh.ambient_dim() != D {
            return Err(MapError::DimensionMismatch { mesh_dim: mesh.ambient_dim(), map_dim: D });
        }
        Self::from_flat(mesh, mesh.coords())
    }

    pub fn mesh(&self) -> &'m SimplicialMesh {
        self.mesh
    }

    pub fn images(&self) -> &[SVector<f64, D>] {
        &self.images
    }

    pub fn image(&self, v: VertexId) -> SVector<f64, D> {
        self.images[v]
    }

    /// Diagonal of the bounding box of the images.
    pub fn image_bbox_diameter(&self) -> f64 {
        let mut span2 = 0.0;
        for axis in 0..D {
            let lo = self.images.iter().fold(f64::INFINITY, |a, u| a.min(u[axis]));
            let hi = self.images.iter().fold(f64::NEG_INFINITY, |a, u| a.max(u[axis]));
            span2 += (hi - lo) * (hi - lo);
        }
        span2.sqrt()
    }
}

/// Orthonormal 2D coordinate frame on a source face of a surface mesh.
///
/// Coordinates are taken relative to `origin` along `axes[0]`, `axes[1]`, in
/// the mesh's ambient space. For planar meshes this is the global frame, so
/// frame coordinates coincide with the ambient ones.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceFrame {
    pub origin: Vec<f64>,
    pub axes: [Vec<f64>; 2],
}

impl FaceFrame {
    fn global_2d() -> Self {
        FaceFrame { origin: vec![0.0, 0.0], axes: [vec![1.0, 0.0], vec![0.0, 1.0]] }
    }

    pub fn project(&self, p: &[f64]) -> Vector2<f64> {
        let dot = |axis: &[f64]| -> f64 {
            axis.iter().zip(p).zip(&self.origin).map(|((a, x), o)| a * (x - o)).sum()
        };
        Vector2::new(dot(&self.axes[0]), dot(&self.axes[1]))
    }
}

/// Shape coefficients of one triangular face: everything about the source
/// geometry that the affine factor depends on.
///
/// Writing `u_k` for the corner images, the affine interpolant in frame
/// coordinates is `x -> A x + delta` with columns `A[.,c] = sum_k
/// grads[k][c] u_k` and `delta = sum_k offset[k] u_k`. The `grads` rows are
/// the gradients of the three linear shape functions.
#[derive(Clone, Debug)]
pub struct FaceGradients {
    pub face: usize,
    pub verts: [VertexId; 3],
    pub grads: [[f64; 2]; 3],
    pub offset: [f64; 3],
    /// Source area of the face (positive).
    pub area: f64,
    pub frame: FaceFrame,
}

/// Relative tolerance deciding that a source triangle is degenerate:
/// `2 area <= eps * diameter^2`.
pub const EPS_SOURCE_DEGENERATE: f64 = 1e-12;

/// Computes the per-face shape coefficients of a surface-mesh face.
pub fn face_gradients(mesh: &SimplicialMesh, face: usize) -> Result<FaceGradients, MapError> {
    if mesh.dim() != 2 {
        return Err(MapError::NotASurface(mesh.dim()));
    }
    let verts = mesh.top_face(face);
    let verts: [VertexId; 3] = [verts[0], verts[1], verts[2]];
    let n = mesh.ambient_dim();

    let frame = if n == 2 {
        FaceFrame::global_2d()
    } else {
        // Orthonormal tangent frame: origin at the first vertex, first axis
        // along the first edge, second axis completing it inside the face's
        // plane (so the stored vertex order reads counterclockwise).
        let p0 = mesh.vertex(verts[0]);
        let e1_raw: Vec<f64> = mesh.vertex(verts[1]).iter().zip(p0).map(|(a, b)| a - b).collect();
        let len1 = e1_raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len1 == 0.0 {
            return Err(MapError::DegenerateSourceFace(face));
        }
        let e1: Vec<f64> = e1_raw.iter().map(|x| x / len1).collect();
        let d2: Vec<f64> = mesh.vertex(verts[2]).iter().zip(p0).map(|(a, b)| a - b).collect();
        let along: f64 = d2.iter().zip(&e1).map(|(a, b)| a * b).sum();
        let e2_raw: Vec<f64> = d2.iter().zip(&e1).map(|(a, b)| a - along * b).collect();
        let len2 = e2_raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len2 == 0.0 {
            return Err(MapError::DegenerateSourceFace(face));
        }
        let e2: Vec<f64> = e2_raw.iter().map(|x| x / len2).collect();
        FaceFrame { origin: p0.to_vec(), axes: [e1, e2] }
    };

    let p: Vec<Vector2<f64>> = verts.iter().map(|&v| frame.project(mesh.vertex(v))).collect();
    let diam2 = (0..3).map(|k| (p[k] - p[(k + 1) % 3]).norm_squared()).fold(0.0f64, f64::max);
    #[rustfmt::skip]
    let s = Matrix3::new(
        p[0].x, p[1].x, p[2].x,
        p[0].y, p[1].y, p[2].y,
        1.0,    1.0,    1.0,
    );
    let det = s.determinant(); // twice the signed area in frame coordinates
    if det.abs() <= EPS_SOURCE_DEGENERATE * diam2 {
        return Err(MapError::DegenerateSourceFace(face));
    }
    let t = s.try_inverse().ok_or(MapError::DegenerateSourceFace(face))?;
    Ok(FaceGradients {
        face,
        verts,
        grads: [[t[(0, 0)], t[(0, 1)]], [t[(1, 0)], t[(1, 1)]], [t[(2, 0)], t[(2, 1)]]],
        offset: [t[(0, 2)], t[(1, 2)], t[(2, 2)]],
        area: det.abs() / 2.0,
        frame,
    })
}

/// The affine factor of a simplicial map on one face: `x -> A x + delta` in
/// the face's source frame.
#[derive(Clone, Debug)]
pub struct AffineFaceMap {
    pub face: usize,
    pub linear: Matrix2<f64>,
    pub translation: Vector2<f64>,
    pub frame: FaceFrame,
}

impl AffineFaceMap {
    /// Evaluates the factor at an ambient source point.
    pub fn apply(&self, source: &[f64]) -> Vector2<f64> {
        self.linear * self.frame.project(source) + self.translation
    }
}

/// Solves the three-corner interpolation problem on one face of a surface
/// map.
pub fn face_affine_map(map: &Map2<'_>, face: usize) -> Result<AffineFaceMap, MapError> {
    let fg = face_gradients(map.mesh(), face)?;
    Ok(assemble_affine(&fg, map))
}

fn assemble_affine(fg: &FaceGradients, map: &Map2<'_>) -> AffineFaceMap {
    let mut linear = Matrix2::zeros();
    let mut translation = Vector2::zeros();
    for (k, &v) in fg.verts.iter().enumerate() {
        let u = map.image(v);
        linear.column_mut(0).axpy(fg.grads[k][0], &u, 1.0);
        linear.column_mut(1).axpy(fg.grads[k][1], &u, 1.0);
        translation.axpy(fg.offset[k], &u, 1.0);
    }
    AffineFaceMap { face: fg.face, linear, translation, frame: fg.frame.clone() }
}

/// All per-face affine factors, in face order.
pub fn affine_maps(map: &Map2<'_>) -> Result<Vec<AffineFaceMap>, MapError> {
    (0..map.mesh().top_faces().len()).map(|f| face_affine_map(map, f)).collect()
}

/// The similarity / anti-similarity split of a 2x2 matrix.
///
/// `B = (A - A^T + tr(A) I)/2` commutes with rotations (it has the form
/// `[[a, -b], [b, a]]`) and `C = (A + A^T - tr(A) I)/2` anti-commutes (form
/// `[[c, e], [e, -c]]`); `A = B + C`, and the Frobenius norms satisfy
/// `|B|^2 - |C|^2 = 2 det A`, which encodes both the determinant and the
/// singular values of `A`.
#[derive(Clone, Copy, Debug)]
pub struct BcDecomposition {
    pub b: Matrix2<f64>,
    pub c: Matrix2<f64>,
}

impl BcDecomposition {
    pub fn of(a: &Matrix2<f64>) -> Self {
        let tr = a.trace();
        let at = a.transpose();
        let ident = Matrix2::identity();
        BcDecomposition { b: (a - at + tr * ident) / 2.0, c: (a + at - tr * ident) / 2.0 }
    }

    /// The similarity parameters: `B = [[a, -b], [b, a]]`.
    pub fn similarity(&self) -> (f64, f64) {
        (self.b[(0, 0)], self.b[(1, 0)])
    }

    /// The anti-similarity parameters: `C = [[c, e], [e, -c]]`.
    pub fn anti_similarity(&self) -> (f64, f64) {
        (self.c[(0, 0)], self.c[(0, 1)])
    }

    pub fn b_norm(&self) -> f64 {
        self.b.norm()
    }

    pub fn c_norm(&self) -> f64 {
        self.c.norm()
    }

    /// Singular values of `A = B + C`: `(sigma_max, sigma_min)` with
    /// `sigma_max = (|B| + |C|)/sqrt(2)` and `sigma_min = ||B| - |C||/sqrt(2)`.
    pub fn singular_values(&self) -> (f64, f64) {
        let (nb, nc) = (self.b_norm(), self.c_norm());
        let s = std::f64::consts::SQRT_2;
        ((nb + nc) / s, (nb - nc).abs() / s)
    }

    /// Ratio of largest to smallest singular value (infinite if singular).
    pub fn condition_number(&self) -> f64 {
        let (smax, smin) = self.singular_values();
        if smin == 0.0 {
            f64::INFINITY
        } else {
            smax / smin
        }
    }
}

pub fn bc_decompose(a: &Matrix2<f64>) -> BcDecomposition {
    BcDecomposition::of(a)
}

/// Relative tolerance under which a face determinant counts as degenerate:
/// `|det A| <= eps * |A|_F^2` (scale-free in the image).
pub const EPS_DET: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrientationClass {
    /// All faces non-degenerate with positive determinant.
    Preserving,
    /// All faces non-degenerate with negative determinant.
    Reversing,
    /// Non-degenerate faces of both signs.
    Mixed,
    /// At least one face with `|det A| <= eps_det * |A|_F^2`.
    Degenerate,
}

/// Per-face determinants and the verdict of the necessary injectivity
/// condition (no degenerate faces, a single orientation sign).
#[derive(Clone, Debug)]
pub struct OrientationReport {
    pub dets: Vec<f64>,
    pub degenerate_faces: Vec<usize>,
    pub flipped_faces: Vec<usize>,
    pub classification: OrientationClass,
}

pub fn orientation_report(map: &Map2<'_>, eps_det: f64) -> Result<OrientationReport, MapError> {
    let mut dets = Vec::with_capacity(map.mesh().top_faces().len());
    let mut degenerate = Vec::new();
    let mut pos = 0usize;
    let mut neg = 0usize;
    for f in 0..map.mesh().top_faces().len() {
        let a = face_affine_map(map, f)?.linear;
        let det = a.determinant();
        dets.push(det);
        if det.abs() <= eps_det * a.norm_squared() {
            degenerate.push(f);
        } else if det > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    let flipped: Vec<usize> = dets
        .iter()
        .enumerate()
        .filter(|&(f, &d)| d < 0.0 && !degenerate.contains(&f))
        .map(|(f, _)| f)
        .collect();
    let classification = if !degenerate.is_empty() {
        OrientationClass::Degenerate
    } else if pos > 0 && neg > 0 {
        OrientationClass::Mixed
    } else if neg > 0 {
        OrientationClass::Reversing
    } else {
        OrientationClass::Preserving
    };
    Ok(OrientationReport {
        dets,
        degenerate_faces: degenerate,
        flipped_faces: flipped,
        classification,
    })
}

/// Dirichlet energy `sum_j |A_j|_F^2 area(f_j)`, areas measured in the
/// source. Summation is in face order, so the result is deterministic.
pub fn dirichlet_energy(map: &Map2<'_>) -> Result<f64, MapError> {
    let mut total = 0.0;
    for f in 0..map.mesh().top_faces().len() {
        let fg = face_gradients(map.mesh(), f)?;
        let a = assemble_affine(&fg, map).linear;
        total += a.norm_squared() * fg.area;
    }
    Ok(total)
}

/// Per-face gradient magnitudes `|A_j|_F`, in face order.
pub fn gradient_norms(map: &Map2<'_>) -> Result<Vec<f64>, MapError> {
    (0..map.mesh().top_faces().len()).map(|f| Ok(face_affine_map(map, f)?.linear.norm())).collect()
}
