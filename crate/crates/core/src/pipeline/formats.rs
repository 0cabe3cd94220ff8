//! File formats: OFF/OBJ mesh loading with validation and orientation
//! repair, the planar-map OBJ writer, and the problem-file parser.
//!
//! Loaders are strict about structure (triangles only, indices in range,
//! manifold edges) but forgiving about orientation: a mesh with mixed
//! winding is repaired by flood fill and, in the plane, normalized to
//! counterclockwise; a non-orientable input is rejected. Every repair is
//! reported in the returned notes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::Vector2;
use thiserror::Error;

use crate::certify::{BoundaryAssignment, CertifyError, Polytope2, PolytopeError, Tolerances};
use crate::coneopt::BdParams;
use crate::mapping::Map2;
use crate::mesh::{MeshError, SimplicialMesh, VertexId};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("{path}: face {face} has {got} vertices; only triangles are supported")]
    NonTriangleFace { path: String, face: usize, got: usize },
    #[error("{path}: face {face} references vertex {vertex}, but only {count} exist")]
    VertexOutOfRange { path: String, face: usize, vertex: usize, count: usize },
    #[error("{path}: edge ({a}, {b}) is shared by {count} faces; a surface allows at most 2")]
    NonManifoldEdge { path: String, a: VertexId, b: VertexId, count: usize },
    #[error("{path}: faces {f1} and {f2} cannot be oriented consistently; the surface is non-orientable")]
    NonOrientable { path: String, f1: usize, f2: usize },
    #[error("{path}: {source}")]
    Mesh {
        path: String,
        #[source]
        source: MeshError,
    },
    #[error("{path}: has {got} vertices, expected {want} to match the source mesh")]
    VertexCountMismatch { path: String, got: usize, want: usize },
    #[error("{path}: vertex {vertex} has z = {z:.3e}; map images must be planar")]
    NonPlanarMap { path: String, vertex: usize, z: f64 },
}

/// A successfully loaded surface mesh plus human-readable notes about any
/// repairs (reorientation, dropped constant z).
#[derive(Debug)]
pub struct LoadedMesh {
    pub mesh: SimplicialMesh,
    pub notes: Vec<String>,
}

fn read_file(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.display().to_string(), source })
}

fn parse_f64(path: &str, line: usize, tok: &str) -> Result<f64, LoadError> {
    tok.parse().map_err(|_| LoadError::Syntax {
        path: path.to_string(),
        line,
        msg: format!("expected a number, got '{tok}'"),
    })
}

fn parse_usize(path: &str, line: usize, tok: &str) -> Result<usize, LoadError> {
    tok.parse().map_err(|_| LoadError::Syntax {
        path: path.to_string(),
        line,
        msg: format!("expected a non-negative integer, got '{tok}'"),
    })
}

struct RawMesh {
    /// 2 or 3 coordinates per vertex, as given by the file.
    coords: Vec<Vec<f64>>,
    faces: Vec<[usize; 3]>,
}

fn parse_off(path: &str, text: &str) -> Result<RawMesh, LoadError> {
    // Meaningful lines with their 1-based numbers; comments and blanks skipped.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let syntax = |line: usize, msg: String| LoadError::Syntax { path: path.to_string(), line, msg };

    let (first_no, first) = lines.next().ok_or_else(|| syntax(1, "empty OFF file".to_string()))?;
    let mut header_tokens: Vec<&str> = first.split_whitespace().collect();
    if header_tokens.first().map(|t| t.eq_ignore_ascii_case("off")) == Some(true) {
        header_tokens.remove(0);
    }
    let counts_line = if header_tokens.is_empty() {
        let (no, l) = lines
            .next()
            .ok_or_else(|| syntax(first_no, "missing count line after OFF header".to_string()))?;
        (no, l.split_whitespace().collect::<Vec<_>>())
    } else {
        (first_no, header_tokens)
    };
    if counts_line.1.len() < 2 {
        return Err(syntax(counts_line.0, "expected 'vertices faces [edges]' counts".to_string()));
    }
    let nv = parse_usize(path, counts_line.0, counts_line.1[0])?;
    let nf = parse_usize(path, counts_line.0, counts_line.1[1])?;

    let mut coords = Vec::with_capacity(nv);
    let mut dim: Option<usize> = None;
    for _ in 0..nv {
        let (no, l) = lines
            .next()
            .ok_or_else(|| syntax(counts_line.0, format!("expected {nv} vertex lines")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let d = *dim.get_or_insert(match toks.len() {
            2 => 2,
            _ => 3,
        });
        if toks.len() < d {
            return Err(syntax(no, format!("expected {d} coordinates, got {}", toks.len())));
        }
        let mut c = Vec::with_capacity(d);
        for tok in &toks[..d] {
            c.push(parse_f64(path, no, tok)?);
        }
        coords.push(c);
    }

    let mut faces = Vec::with_capacity(nf);
    for face in 0..nf {
        let (no, l) = lines
            .next()
            .ok_or_else(|| syntax(counts_line.0, format!("expected {nf} face lines")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let arity = parse_usize(path, no, toks[0])?;
        if arity != 3 {
            return Err(LoadError::NonTriangleFace { path: path.to_string(), face, got: arity });
        }
        if toks.len() < 4 {
            return Err(syntax(no, "expected 3 vertex indices".to_string()));
        }
        // Trailing tokens (per-face colors) are tolerated and ignored.
        let mut f = [0usize; 3];
        for (k, tok) in toks[1..4].iter().enumerate() {
            f[k] = parse_usize(path, no, tok)?;
        }
        faces.push(f);
    }
    Ok(RawMesh { coords, faces })
}

fn parse_obj(path: &str, text: &str) -> Result<RawMesh, LoadError> {
    let mut coords = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap();
        match key {
            "v" => {
                let rest: Vec<&str> = toks.collect();
                if rest.len() < 2 {
                    return Err(LoadError::Syntax {
                        path: path.to_string(),
                        line: no,
                        msg: "vertex needs at least two coordinates".to_string(),
                    });
                }
                let mut c = Vec::with_capacity(3);
                for tok in rest.iter().take(3) {
                    c.push(parse_f64(path, no, tok)?);
                }
                if c.len() == 2 {
                    c.push(0.0);
                }
                coords.push(c);
            }
            "f" => {
                let refs: Vec<&str> = toks.collect();
                if refs.len() != 3 {
                    return Err(LoadError::NonTriangleFace {
                        path: path.to_string(),
                        face: faces.len(),
                        got: refs.len(),
                    });
                }
                let mut f = [0usize; 3];
                for (k, r) in refs.iter().enumerate() {
                    let first = r.split('/').next().unwrap_or("");
                    let idx = parse_usize(path, no, first)?;
                    if idx == 0 {
                        return Err(LoadError::Syntax {
                            path: path.to_string(),
                            line: no,
                            msg: "OBJ face indices are 1-based".to_string(),
                        });
                    }
                    f[k] = idx - 1;
                }
                faces.push(f);
            }
            // Texture/normal/group/material lines are irrelevant here.
            "vt" | "vn" | "vp" | "g" | "o" | "s" | "usemtl" | "mtllib" | "l" | "p" => {}
            other => {
                return Err(LoadError::Syntax {
                    path: path.to_string(),
                    line: no,
                    msg: format!("unsupported OBJ directive '{other}'"),
                })
            }
        }
    }
    Ok(RawMesh { coords, faces })
}

/// Repairs face winding by flood fill so every interior edge is traversed in
/// opposite directions by its two faces. Returns the indices of flipped
/// faces, or the offending pair if no consistent choice exists.
fn orient_by_flood_fill(path: &str, faces: &mut [[usize; 3]]) -> Result<Vec<usize>, LoadError> {
    let mut edge_faces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (f, tri) in faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            edge_faces.entry((a.min(b), a.max(b))).or_default().push(f);
        }
    }
    for (&(a, b), fs) in &edge_faces {
        if fs.len() > 2 {
            return Err(LoadError::NonManifoldEdge {
                path: path.to_string(),
                a,
                b,
                count: fs.len(),
            });
        }
    }

    // Whether face f traverses undirected edge (a<b) as a->b.
    let forward = |tri: &[usize; 3], a: usize, b: usize| -> bool {
        (0..3).any(|k| tri[k] == a && tri[(k + 1) % 3] == b)
    };
    let mut flip = vec![false; faces.len()];
    let mut seen = vec![false; faces.len()];
    let mut flipped = Vec::new();
    for seed in 0..faces.len() {
        if seen[seed] {
            continue;
        }
        seen[seed] = true;
        let mut queue = vec![seed];
        while let Some(f) = queue.pop() {
            for k in 0..3 {
                let (a, b) = (faces[f][k], faces[f][(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                for &g in &edge_faces[&key] {
                    if g == f {
                        continue;
                    }
                    // Consistent orientation: the shared edge must be
                    // traversed in opposite directions (after flips).
                    let same_direction =
                        forward(&faces[f], key.0, key.1) == forward(&faces[g], key.0, key.1);
                    let need_flip_g = flip[f] ^ same_direction;
                    if !seen[g] {
                        seen[g] = true;
                        flip[g] = need_flip_g;
                        queue.push(g);
                    } else if flip[g] != need_flip_g {
                        return Err(LoadError::NonOrientable {
                            path: path.to_string(),
                            f1: f,
                            f2: g,
                        });
                    }
                }
            }
        }
    }
    for (f, tri) in faces.iter_mut().enumerate() {
        if flip[f] {
            tri.swap(1, 2);
            flipped.push(f);
        }
    }
    Ok(flipped)
}

/// Loads a triangle mesh from OFF or OBJ (decided by extension, with a
/// content sniff as fallback), validates it, and repairs orientation.
pub fn load_mesh(path: &Path) -> Result<LoadedMesh, LoadError> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    let ext = path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase());
    let raw = match ext.as_deref() {
        Some("off") => parse_off(&name, &text)?,
        Some("obj") => parse_obj(&name, &text)?,
        _ => {
            let first = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .find(|l| !l.is_empty())
                .unwrap_or("");
            if first.to_ascii_uppercase().starts_with("OFF") {
                parse_off(&name, &text)?
            } else {
                parse_obj(&name, &text)?
            }
        }
    };

    let RawMesh { coords, mut faces } = raw;
    for (f, tri) in faces.iter().enumerate() {
        for &v in tri {
            if v >= coords.len() {
                return Err(LoadError::VertexOutOfRange {
                    path: name,
                    face: f,
                    vertex: v,
                    count: coords.len(),
                });
            }
        }
    }

    let mut notes = Vec::new();
    let flipped = orient_by_flood_fill(&name, &mut faces)?;
    if !flipped.is_empty() {
        notes.push(format!("reoriented {} face(s) to consistent winding", flipped.len()));
    }

    // Collapse a z = 0 plane to true 2D coordinates.
    let mut dim = coords.first().map_or(2, Vec::len);
    let mut coords = coords;
    if dim == 3 {
        let bbox = coords.iter().flat_map(|c| c.iter().map(|x| x.abs())).fold(0.0f64, f64::max);
        if coords.iter().all(|c| c[2].abs() <= 1e-12 * bbox.max(1.0)) {
            for c in &mut coords {
                c.truncate(2);
            }
            dim = 2;
            notes.push("planar input: dropped the zero z coordinate".to_string());
        }
    }

    // Planar meshes are normalized to counterclockwise total area.
    if dim == 2 {
        let signed_area2: f64 = faces
            .iter()
            .map(|t| {
                let (p, q, r) = (&coords[t[0]], &coords[t[1]], &coords[t[2]]);
                (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
            })
            .sum();
        if signed_area2 < 0.0 {
            for tri in &mut faces {
                tri.swap(1, 2);
            }
            notes.push("flipped global winding to counterclockwise".to_string());
        }
    }

    let flat: Vec<f64> = coords.iter().flatten().copied().collect();
    let faces: Vec<Vec<usize>> = faces.iter().map(|t| t.to_vec()).collect();
    let mesh = SimplicialMesh::new(2, dim, flat, faces)
        .map_err(|source| LoadError::Mesh { path: name, source })?;
    Ok(LoadedMesh { mesh, notes })
}

/// Writes a mesh as OFF text (2 or 3 coordinates per vertex as stored).
pub fn mesh_to_off(mesh: &SimplicialMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "OFF\n{} {} 0", mesh.vertex_count(), mesh.top_faces().len());
    for v in 0..mesh.vertex_count() {
        let p = mesh.vertex(v);
        let coords: Vec<String> = p.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "{}", coords.join(" "));
    }
    for tri in mesh.top_faces() {
        let _ = writeln!(out, "3 {} {} {}", tri[0], tri[1], tri[2]);
    }
    out
}

/// Writes a planar map as an OBJ over the source connectivity (z = 0).
/// Coordinates use the shortest exact decimal representation, so loading
/// them back reproduces the images bit for bit.
pub fn map_to_obj(map: &Map2<'_>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# planar map: {} vertices, {} faces",
        map.mesh().vertex_count(),
        map.mesh().top_faces().len()
    );
    for v in 0..map.mesh().vertex_count() {
        let u = map.image(v);
        let _ = writeln!(out, "v {} {} 0", u.x, u.y);
    }
    for tri in map.mesh().top_faces() {
        let _ = writeln!(out, "f {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1);
    }
    out
}

/// Reads back vertex images written by [`map_to_obj`] (or any planar
/// OFF/OBJ with matching vertex count). Connectivity in the file is ignored;
/// the source mesh stays authoritative.
pub fn load_map_images(
    path: &Path,
    expected_vertices: usize,
) -> Result<Vec<Vector2<f64>>, LoadError> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    let ext = path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase());
    let raw = match ext.as_deref() {
        Some("off") => parse_off(&name, &text)?,
        _ => parse_obj(&name, &text)?,
    };
    if raw.coords.len() != expected_vertices {
        return Err(LoadError::VertexCountMismatch {
            path: name,
            got: raw.coords.len(),
            want: expected_vertices,
        });
    }
    let bbox =
        raw.coords.iter().flat_map(|c| c[..2].iter().map(|x| x.abs())).fold(0.0f64, f64::max);
    let mut images = Vec::with_capacity(raw.coords.len());
    for (v, c) in raw.coords.iter().enumerate() {
        if c.len() == 3 && c[2].abs() > 1e-12 * bbox.max(1.0) {
            return Err(LoadError::NonPlanarMap { path: name, vertex: v, z: c[2] });
        }
        images.push(Vector2::new(c[0], c[1]));
    }
    Ok(images)
}

// -------------------------------------------------------------------------
// Problem files

/// What the solve should do with the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Stop after the feasibility phase.
    Feasibility,
    /// Feasibility, then energy minimization with sliding boundary.
    Free,
    /// Pin the boundary at per-edge uniform positions, then minimize energy.
    FixedUniform,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Feasibility => "feasibility",
            Mode::Free => "free",
            Mode::FixedUniform => "fixed-uniform",
        })
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("{path}:{line}: invalid polygon: {source}")]
    Polygon {
        path: String,
        line: usize,
        #[source]
        source: PolytopeError,
    },
    #[error("{path}: invalid assignment: {source}")]
    Assignment {
        path: String,
        #[source]
        source: CertifyError,
    },
}

/// A parsed, fully validated problem: mesh, target, assignment, parameters.
#[derive(Debug)]
pub struct Problem {
    pub path: PathBuf,
    pub mesh_path: PathBuf,
    pub mesh: SimplicialMesh,
    pub load_notes: Vec<String>,
    pub polygon: Polytope2,
    pub assignment: BoundaryAssignment,
    pub mode: Mode,
    pub params: BdParams,
    pub tolerances: Tolerances,
    pub seed: u64,
}

/// Parses a problem file.
///
/// The format is line-oriented; `#` starts a comment. Keys:
///
/// ```text
/// mesh <path>            # OFF or OBJ, relative to the problem file
/// mode feasibility | free | fixed-uniform
/// k <float>              # condition-number bound (default 15)
/// seed <integer>         # RNG seed for degree queries (default 0)
/// tolerance <float>      # relative certification tolerance (default 1e-8)
/// polygon                # CCW target corners, one 'x y' pair per line
///   <x> <y>
///   ...
/// end
/// assign <va> <vb> <e>   # boundary edge (va, vb) -> polygon edge e
/// ```
pub fn parse_problem(path: &Path) -> Result<Problem, ProblemError> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    let syntax = |line: usize, msg: String| ProblemError::Syntax { path: name.clone(), line, msg };

    let mut mesh_path: Option<PathBuf> = None;
    let mut mode = Mode::Free;
    let mut params = BdParams::default();
    let mut tolerances = Tolerances::default();
    let mut seed = 0u64;
    let mut polygon: Option<(usize, Vec<Vector2<f64>>)> = None;
    let mut raw_assign: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();

    let mut lines = text.lines().enumerate();
    while let Some((i, raw)) = lines.next() {
        let no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap();
        let rest: Vec<&str> = toks.collect();
        match key {
            "mesh" => {
                if rest.len() != 1 {
                    return Err(syntax(no, "usage: mesh <path>".to_string()));
                }
                mesh_path = Some(PathBuf::from(rest[0]));
            }
            "mode" => {
                mode = match rest.as_slice() {
                    ["feasibility"] => Mode::Feasibility,
                    ["free"] => Mode::Free,
                    ["fixed-uniform"] => Mode::FixedUniform,
                    _ => {
                        return Err(syntax(
                            no,
                            "mode must be feasibility, free, or fixed-uniform".to_string(),
                        ))
                    }
                };
            }
            "k" => {
                let [tok] = rest.as_slice() else {
                    return Err(syntax(no, "usage: k <float>".to_string()));
                };
                params.cond_bound = tok
                    .parse()
                    .map_err(|_| syntax(no, format!("expected a number, got '{tok}'")))?;
            }
            "seed" => {
                let [tok] = rest.as_slice() else {
                    return Err(syntax(no, "usage: seed <integer>".to_string()));
                };
                seed = tok
                    .parse()
                    .map_err(|_| syntax(no, format!("expected an integer, got '{tok}'")))?;
            }
            "tolerance" => {
                let [tok] = rest.as_slice() else {
                    return Err(syntax(no, "usage: tolerance <float>".to_string()));
                };
                tolerances.eps_con_rel = tok
                    .parse()
                    .map_err(|_| syntax(no, format!("expected a number, got '{tok}'")))?;
            }
            "polygon" => {
                let mut verts = Vec::new();
                let start = no;
                loop {
                    let Some((j, vraw)) = lines.next() else {
                        return Err(syntax(start, "polygon block not closed by 'end'".to_string()));
                    };
                    let vno = j + 1;
                    let vline = vraw.split('#').next().unwrap_or("").trim();
                    if vline.is_empty() {
                        continue;
                    }
                    if vline == "end" {
                        break;
                    }
                    let coords: Vec<&str> = vline.split_whitespace().collect();
                    if coords.len() != 2 {
                        return Err(syntax(vno, "expected 'x y' or 'end'".to_string()));
                    }
                    let x: f64 = coords[0].parse().map_err(|_| {
                        syntax(vno, format!("expected a number, got '{}'", coords[0]))
                    })?;
                    let y: f64 = coords[1].parse().map_err(|_| {
                        syntax(vno, format!("expected a number, got '{}'", coords[1]))
                    })?;
                    verts.push(Vector2::new(x, y));
                }
                polygon = Some((start, verts));
            }
            "assign" => {
                let [a, b, e] = rest.as_slice() else {
                    return Err(syntax(no, "usage: assign <va> <vb> <polygon-edge>".to_string()));
                };
                let a: usize = a
                    .parse()
                    .map_err(|_| syntax(no, format!("expected a vertex id, got '{a}'")))?;
                let b: usize = b
                    .parse()
                    .map_err(|_| syntax(no, format!("expected a vertex id, got '{b}'")))?;
                let e: usize = e
                    .parse()
                    .map_err(|_| syntax(no, format!("expected a polygon edge index, got '{e}'")))?;
                if raw_assign.insert((a.min(b), a.max(b)), e).is_some() {
                    return Err(syntax(no, format!("edge ({a}, {b}) assigned twice")));
                }
            }
            other => return Err(syntax(no, format!("unknown key '{other}'"))),
        }
    }

    let mesh_rel = mesh_path.ok_or_else(|| syntax(0, "missing 'mesh <path>' line".to_string()))?;
    let mesh_abs = path.parent().map_or_else(|| mesh_rel.clone(), |d| d.join(&mesh_rel));
    let loaded = load_mesh(&mesh_abs)?;

    let (poly_line, verts) =
        polygon.ok_or_else(|| syntax(0, "missing 'polygon ... end' block".to_string()))?;
    let polygon = Polytope2::new(verts).map_err(|source| ProblemError::Polygon {
        path: name.clone(),
        line: poly_line,
        source,
    })?;

    let assignment = BoundaryAssignment::new(&loaded.mesh, &polygon, &raw_assign)
        .map_err(|source| ProblemError::Assignment { path: name.clone(), source })?;

    Ok(Problem {
        path: path.to_path_buf(),
        mesh_path: mesh_abs,
        mesh: loaded.mesh,
        load_notes: loaded.notes,
        polygon,
        assignment,
        mode,
        params,
        tolerances,
        seed,
    })
}
