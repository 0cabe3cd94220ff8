//! Simplicial meshes with boundary and the integer chain algebra on top of
//! them.
//!
//! A mesh here is always a compact, connected, orientable `d`-manifold with
//! non-empty boundary, given by its top-dimensional simplices with a
//! consistent orientation. Lower-dimensional faces are identified by their
//! sorted vertex tuple ([`FaceKey`]); an oriented face is a key together with
//! the parity of the permutation that sorts it. Chains are finite formal
//! integer combinations of faces of one dimension, and the boundary operator
//! acts on them with the usual alternating signs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub type VertexId = usize;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh dimension must be 1, 2, or 3 (got {0})")]
    BadDimension(usize),
    #[error("ambient dimension {ambient} is smaller than mesh dimension {dim}")]
    AmbientTooSmall { dim: usize, ambient: usize },
    #[error("coordinate array has length {len}, not a multiple of ambient dimension {ambient}")]
    RaggedCoords { len: usize, ambient: usize },
    #[error("top face {face} has {got} vertices, expected {expected}")]
    BadFaceSize { face: usize, got: usize, expected: usize },
    #[error("top face {face} references vertex {vertex}, but only {count} vertices exist")]
    VertexOutOfRange { face: usize, vertex: VertexId, count: usize },
    #[error("top face {face} repeats vertex {vertex}")]
    RepeatedVertex { face: usize, vertex: VertexId },
    #[error("top faces {0} and {1} have the same vertex set")]
    DuplicateTopFace(usize, usize),
    #[error("vertex {0} is not referenced by any top face")]
    UnreferencedVertex(VertexId),
    #[error("face {key:?} is shared by {count} top faces; a manifold allows at most 2")]
    NonManifoldRidge { key: Vec<VertexId>, count: usize },
    #[error("mesh is not connected (no path between top faces {0} and {1})")]
    Disconnected(usize, usize),
    #[error("top faces {0} and {1} induce the same orientation on their shared face")]
    InconsistentOrientation(usize, usize),
    #[error("mesh has no boundary; only meshes with non-empty boundary are supported")]
    EmptyBoundary,
    #[error("boundary vertex {0} lies on more than two boundary edges")]
    NonManifoldBoundaryVertex(VertexId),
    #[error("mesh has {0} boundary loops, operation requires exactly one")]
    MultipleBoundaryLoops(usize),
    #[error("chain references {dim}-face {key:?} which is not a face of the mesh")]
    UnknownFace { dim: usize, key: Vec<VertexId> },
    #[error(transparent)]
    Chain(#[from] ChainError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("oriented simplex {0:?} repeats a vertex")]
    RepeatedVertices(Vec<VertexId>),
    #[error("cannot combine a {0}-chain with a {1}-chain")]
    DimensionMismatch(usize, usize),
    #[error("face {key:?} has dimension {got}, chain holds {expected}-faces")]
    FaceDimension { key: Vec<VertexId>, got: usize, expected: usize },
    #[error("chain coefficient overflow")]
    CoefficientOverflow,
}

/// Canonical (sorted) vertex tuple identifying an unoriented face.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceKey(Vec<VertexId>);

impl FaceKey {
    /// Canonicalises an oriented vertex tuple. Returns the sorted key and the
    /// sign (+1 or -1) of the permutation that sorts the input.
    pub fn from_oriented(verts: &[VertexId]) -> Result<(Self, i64), ChainError> {
        let mut v = verts.to_vec();
        // Insertion sort, counting inversions for the permutation parity.
        let mut inversions = 0usize;
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                inversions += 1;
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(ChainError::RepeatedVertices(verts.to_vec()));
        }
        let sign = if inversions.is_multiple_of(2) { 1 } else { -1 };
        Ok((FaceKey(v), sign))
    }

    /// Key from vertices already known to be strictly increasing.
    fn from_sorted(verts: Vec<VertexId>) -> Self {
        debug_assert!(verts.windows(2).all(|w| w[0] < w[1]));
        FaceKey(verts)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// The facet obtained by deleting the vertex at position `omit`.
    fn facet(&self, omit: usize) -> FaceKey {
        let mut v = self.0.clone();
        v.remove(omit);
        FaceKey(v)
    }
}

impl fmt::Debug for FaceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A formal integer combination of faces of a single dimension.
///
/// Terms with coefficient zero are never stored, so two chains are equal as
/// values exactly when they are equal as formal sums. All arithmetic is
/// checked: coefficient overflow is reported, never wrapped.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Chain {
    dim: usize,
    terms: BTreeMap<FaceKey, i64>,
}

impl Chain {
    pub fn zero(dim: usize) -> Self {
        Chain { dim, terms: BTreeMap::new() }
    }

    /// The unit chain `1 * [verts]` with the orientation given by the tuple.
    pub fn from_oriented_simplex(verts: &[VertexId]) -> Result<Self, ChainError> {
        let (key, sign) = FaceKey::from_oriented(verts)?;
        let mut chain = Chain::zero(key.dim());
        chain.terms.insert(key, sign);
        Ok(chain)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &FaceKey) -> i64 {
        self.terms.get(key).copied().unwrap_or(0)
    }

    /// Faces with non-zero coefficient, in canonical order.
    pub fn support(&self) -> impl Iterator<Item = &FaceKey> {
        self.terms.keys()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FaceKey, i64)> {
        self.terms.iter().map(|(k, &a)| (k, a))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff * key` in place.
    pub fn add_term(&mut self, key: FaceKey, coeff: i64) -> Result<(), ChainError> {
        if key.dim() != self.dim {
            let got = key.dim();
            return Err(ChainError::FaceDimension { key: key.0, got, expected: self.dim });
        }
        if coeff == 0 {
            return Ok(());
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().checked_add(coeff).ok_or(ChainError::CoefficientOverflow)?;
                if sum == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Chain) -> Result<Chain, ChainError> {
        if self.dim != other.dim {
            return Err(ChainError::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = self.clone();
        for (key, coeff) in other.terms() {
            out.add_term(key.clone(), coeff)?;
        }
        Ok(out)
    }

    pub fn try_scale(&self, k: i64) -> Result<Chain, ChainError> {
        let mut out = Chain::zero(self.dim);
        for (key, coeff) in self.terms() {
            let scaled = coeff.checked_mul(k).ok_or(ChainError::CoefficientOverflow)?;
            out.add_term(key.clone(), scaled)?;
        }
        Ok(out)
    }

    pub fn try_neg(&self) -> Result<Chain, ChainError> {
        self.try_scale(-1)
    }

    /// The boundary chain, one dimension down. The boundary of a 0-chain is
    /// the zero 0-chain, so `is_cycle` is meaningful in every dimension.
    pub fn boundary(&self) -> Result<Chain, ChainError> {
        if self.dim == 0 {
            return Ok(Chain::zero(0));
        }
        let mut out = Chain::zero(self.dim - 1);
        for (key, coeff) in self.terms() {
            let mut sign = 1i64;
            for omit in 0..key.0.len() {
                let c = coeff.checked_mul(sign).ok_or(ChainError::CoefficientOverflow)?;
                out.add_term(key.facet(omit), c)?;
                sign = -sign;
            }
        }
        Ok(out)
    }

    pub fn is_cycle(&self) -> Result<bool, ChainError> {
        Ok(self.boundary()?.is_zero())
    }
}

/// The boundary of a mesh: its (d-1)-faces with induced orientation, all
/// lower faces, and (for surface meshes) the decomposition into vertex loops.
#[derive(Clone, Debug)]
pub struct BoundaryComplex {
    /// Boundary (d-1)-faces with the orientation induced from the mesh, as
    /// the coefficient (+1/-1) on the canonical key.
    oriented_faces: BTreeMap<FaceKey, i64>,
    /// All faces of the boundary complex, `faces_by_dim[l]` holding l-faces.
    faces_by_dim: Vec<BTreeSet<FaceKey>>,
    /// For d = 2: boundary loops as cyclic sequences of directed edges
    /// `(tail, head)`, each traversed in the induced orientation.
    loops: Vec<Vec<(VertexId, VertexId)>>,
}

impl BoundaryComplex {
    pub fn oriented_faces(&self) -> impl Iterator<Item = (&FaceKey, i64)> {
        self.oriented_faces.iter().map(|(k, &s)| (k, s))
    }

    pub fn contains(&self, key: &FaceKey) -> bool {
        self.faces_by_dim.get(key.dim()).is_some_and(|set| set.contains(key))
    }

    pub fn faces(&self, dim: usize) -> impl Iterator<Item = &FaceKey> {
        self.faces_by_dim.get(dim).into_iter().flatten()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.faces(0).map(|k| k.0[0])
    }

    /// Directed boundary loops (surface meshes only; empty otherwise).
    pub fn loops(&self) -> &[Vec<(VertexId, VertexId)>] {
        &self.loops
    }

    /// The single boundary loop, or an error if the boundary is not one loop.
    pub fn single_loop(&self) -> Result<&[(VertexId, VertexId)], MeshError> {
        match self.loops.as_slice() {
            [l] => Ok(l),
            ls => Err(MeshError::MultipleBoundaryLoops(ls.len())),
        }
    }
}

/// A compact, connected, consistently oriented simplicial `d`-manifold with
/// non-empty boundary, embedded by vertex coordinates in `R^n`, `n >= d`.
///
/// Construction validates every invariant and reports the first violation
/// with the offending element; an instance therefore always satisfies all of
/// them.
#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    ambient_dim: usize,
    coords: Vec<f64>,
    top_faces: Vec<Vec<VertexId>>,
    /// `faces_by_dim[l]` holds every l-face of the mesh, 0 <= l <= d.
    faces_by_dim: Vec<BTreeSet<FaceKey>>,
    /// For each (d-1)-face, the indices of the top faces containing it.
    ridge_tops: BTreeMap<FaceKey, Vec<usize>>,
    boundary: BoundaryComplex,
}

impl SimplicialMesh {
    pub fn new(
        dim: usize,
        ambient_dim: usize,
        coords: Vec<f64>,
        top_faces: Vec<Vec<VertexId>>,
    ) -> Result<Self, MeshError> {
        if !(1..=3).contains(&dim) {
            return Err(MeshError::BadDimension(dim));
        }
        if ambient_dim < dim {
            return Err(MeshError::AmbientTooSmall { dim, ambient: ambient_dim });
        }
        if ambient_dim == 0 || !coords.len().is_multiple_of(ambient_dim) {
            return Err(MeshError::RaggedCoords { len: coords.len(), ambient: ambient_dim });
        }
        let vertex_count = coords.len() / ambient_dim;

        let mut seen_keys: BTreeMap<FaceKey, usize> = BTreeMap::new();
        let mut referenced = vec![false; vertex_count];
        for (i, face) in top_faces.iter().enumerate() {
            if face.len() != dim + 1 {
                return Err(MeshError::BadFaceSize { face: i, got: face.len(), expected: dim + 1 });
            }
            for &v in face {
                if v >= vertex_count {
                    return Err(MeshError::VertexOutOfRange {
                        face: i,
                        vertex: v,
                        count: vertex_count,
                    });
                }
                referenced[v] = true;
            }
            let (key, _) = FaceKey::from_oriented(face).map_err(|_| {
                let dup = face
                    .iter()
                    .find(|&&v| face.iter().filter(|&&w| w == v).count() > 1)
                    .copied()
                    .unwrap_or(face[0]);
                MeshError::RepeatedVertex { face: i, vertex: dup }
            })?;
            if let Some(&first) = seen_keys.get(&key) {
                return Err(MeshError::DuplicateTopFace(first, i));
            }
            seen_keys.insert(key, i);
        }
        if let Some(v) = referenced.iter().position(|&r| !r) {
            return Err(MeshError::UnreferencedVertex(v));
        }
        if top_faces.is_empty() {
            return Err(MeshError::EmptyBoundary);
        }

        // Ridge incidence: every (d-1)-face belongs to one or two top faces.
        let mut ridge_tops: BTreeMap<FaceKey, Vec<usize>> = BTreeMap::new();
        for (i, face) in top_faces.iter().enumerate() {
            let (key, _) = FaceKey::from_oriented(face).expect("validated above");
            for omit in 0..key.0.len() {
                ridge_tops.entry(key.facet(omit)).or_default().push(i);
            }
        }
        for (key, tops) in &ridge_tops {
            if tops.len() > 2 {
                return Err(MeshError::NonManifoldRidge { key: key.0.clone(), count: tops.len() });
            }
        }

        // Connectivity over the top-face adjacency graph.
        if top_faces.len() > 1 {
            let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); top_faces.len()];
            for tops in ridge_tops.values() {
                if let [a, b] = tops[..] {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
            let mut visited = vec![false; top_faces.len()];
            let mut queue = VecDeque::from([0usize]);
            visited[0] = true;
            while let Some(f) = queue.pop_front() {
                for &g in &adjacency[f] {
                    if !visited[g] {
                        visited[g] = true;
                        queue.push_back(g);
                    }
                }
            }
            if let Some(f) = visited.iter().position(|&v| !v) {
                return Err(MeshError::Disconnected(0, f));
            }
        }

        // Orientation consistency: a shared (d-1)-face must receive opposite
        // induced orientations from its two top faces.
        let induced = |top: usize, ridge: &FaceKey| -> i64 {
            let chain = Chain::from_oriented_simplex(&top_faces[top]).expect("validated above");
            chain.boundary().expect("small coefficients").coeff(ridge)
        };
        for (key, tops) in &ridge_tops {
            if let [a, b] = tops[..] {
                if induced(a, key) + induced(b, key) != 0 {
                    return Err(MeshError::InconsistentOrientation(a, b));
                }
            }
        }

        // Faces of every dimension, by enumerating vertex subsets (d <= 3, so
        // a top face has at most 4 vertices; bitmask enumeration is fine).
        let mut faces_by_dim: Vec<BTreeSet<FaceKey>> = vec![BTreeSet::new(); dim + 1];
        for face in &top_faces {
            let (key, _) = FaceKey::from_oriented(face).expect("validated above");
            let n = key.0.len();
            for mask in 1u32..(1 << n) {
                let sub: Vec<VertexId> =
                    (0..n).filter(|&j| mask & (1 << j) != 0).map(|j| key.0[j]).collect();
                faces_by_dim[sub.len() - 1].insert(FaceKey::from_sorted(sub));
            }
        }

        // Boundary complex: ridges with exactly one incident top face, carrying
        // the orientation induced by that face.
        let mut oriented: BTreeMap<FaceKey, i64> = BTreeMap::new();
        for (key, tops) in &ridge_tops {
            if let [single] = tops[..] {
                oriented.insert(key.clone(), induced(single, key));
            }
        }
        if oriented.is_empty() {
            return Err(MeshError::EmptyBoundary);
        }
        let mut bnd_faces: Vec<BTreeSet<FaceKey>> = vec![BTreeSet::new(); dim];
        for key in oriented.keys() {
            let n = key.0.len();
            for mask in 1u32..(1 << n) {
                let sub: Vec<VertexId> =
                    (0..n).filter(|&j| mask & (1 << j) != 0).map(|j| key.0[j]).collect();
                bnd_faces[sub.len() - 1].insert(FaceKey::from_sorted(sub));
            }
        }

        let loops = if dim == 2 { Self::boundary_loops(&oriented)? } else { Vec::new() };

        Ok(SimplicialMesh {
            dim,
            ambient_dim,
            coords,
            top_faces,
            faces_by_dim,
            ridge_tops,
            boundary: BoundaryComplex { oriented_faces: oriented, faces_by_dim: bnd_faces, loops },
        })
    }

    /// Chains directed boundary edges of a surface mesh into loops.
    fn boundary_loops(
        oriented: &BTreeMap<FaceKey, i64>,
    ) -> Result<Vec<Vec<(VertexId, VertexId)>>, MeshError> {
        let mut next: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for (key, sign) in oriented {
            let (a, b) = (key.0[0], key.0[1]);
            let (tail, head) = if *sign > 0 { (a, b) } else { (b, a) };
            if next.insert(tail, head).is_some() {
                return Err(MeshError::NonManifoldBoundaryVertex(tail));
            }
        }
        // Every head must also be a tail exactly once; count in-degrees.
        let mut indeg: BTreeMap<VertexId, usize> = BTreeMap::new();
        for &head in next.values() {
            *indeg.entry(head).or_insert(0) += 1;
        }
        for (&v, &d) in &indeg {
            if d > 1 {
                return Err(MeshError::NonManifoldBoundaryVertex(v));
            }
        }

        let mut loops = Vec::new();
        let mut remaining = next.clone();
        while let Some((&start, _)) = remaining.iter().next() {
            let mut cycle = Vec::new();
            let mut tail = start;
            loop {
                let head =
                    remaining.remove(&tail).ok_or(MeshError::NonManifoldBoundaryVertex(tail))?;
                cycle.push((tail, head));
                tail = head;
                if tail == start {
                    break;
                }
            }
            loops.push(cycle);
        }
        Ok(loops)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / self.ambient_dim
    }

    pub fn vertex(&self, v: VertexId) -> &[f64] {
        &self.coords[v * self.ambient_dim..(v + 1) * self.ambient_dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn top_faces(&self) -> &[Vec<VertexId>] {
        &self.top_faces
    }

    pub fn top_face(&self, i: usize) -> &[VertexId] {
        &self.top_faces[i]
    }

    /// All l-faces of the mesh in canonical order.
    pub fn faces(&self, dim: usize) -> impl Iterator<Item = &FaceKey> {
        self.faces_by_dim.get(dim).into_iter().flatten()
    }

    pub fn contains_face(&self, key: &FaceKey) -> bool {
        self.faces_by_dim.get(key.dim()).is_some_and(|set| set.contains(key))
    }

    /// Top faces incident to a (d-1)-face (one on the boundary, two inside).
    pub fn ridge_tops(&self, key: &FaceKey) -> Option<&[usize]> {
        self.ridge_tops.get(key).map(Vec::as_slice)
    }

    pub fn boundary(&self) -> &BoundaryComplex {
        &self.boundary
    }

    /// Diagonal of the axis-aligned bounding box of the vertices.
    pub fn bbox_diameter(&self) -> f64 {
        let n = self.ambient_dim;
        let mut span2 = 0.0;
        for axis in 0..n {
            let vals = self.coords.iter().skip(axis).step_by(n);
            let lo = vals.clone().fold(f64::INFINITY, |a, &b| a.min(b));
            let hi = vals.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            span2 += (hi - lo) * (hi - lo);
        }
        span2.sqrt()
    }

    /// Boundary operator restricted to chains supported on mesh faces.
    ///
    /// Unlike [`Chain::boundary`], this validates that every face in the
    /// chain's support actually belongs to the mesh.
    pub fn boundary_operator(&self, chain: &Chain) -> Result<Chain, MeshError> {
        for key in chain.support() {
            if !self.contains_face(key) {
                return Err(MeshError::UnknownFace { dim: key.dim(), key: key.0.clone() });
            }
        }
        Ok(chain.boundary()?)
    }

    /// The fundamental chain: every top face with coefficient +1 in its
    /// stored orientation.
    pub fn fundamental_chain(&self) -> Chain {
        let mut chain = Chain::zero(self.dim);
        for face in &self.top_faces {
            let (key, sign) = FaceKey::from_oriented(face).expect("validated");
            chain.add_term(key, sign).expect("unit coefficients");
        }
        chain
    }

    /// The boundary cycle: the boundary of the fundamental chain. Supported
    /// exactly on the boundary (d-1)-faces, each with coefficient +1 or -1.
    pub fn boundary_cycle(&self) -> Chain {
        self.fundamental_chain().boundary().expect("unit coefficients")
    }
}
