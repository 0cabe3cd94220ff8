//! Bijective simplicial mappings of meshes with boundary onto polygonal targets.
//!
//! The crate is organised around one question: given a mesh `M` with boundary
//! and a piecewise-affine map `Phi` of its vertices into the plane (or the
//! line, or space), is `Phi` injective — and if it is not, can we produce a
//! nearby map that is, together with a machine-checkable certificate?
//!
//! * [`mesh`] — simplicial meshes with boundary and integer chain algebra.
//! * [`mapping`] — simplicial maps, per-face affine factors, and the
//!   rotation/anti-rotation split of a 2x2 Jacobian.
//! * [`degree`] — integer degrees of map restrictions to cycles, preimage
//!   counting, and the counting bound that links the two.
//! * [`certify`] — target polygons, boundary assignments, and the three
//!   sufficient injectivity conditions as runnable certifiers.
//! * [`coneopt`] — convex (second-order cone) solves that produce
//!   bounded-distortion bijections onto a convex polygon.
//! * [`meshgen`] — deterministic example meshes and maps used by the tests
//!   and fixtures.
//! * [`pipeline`] — file formats, problem descriptions, SVG rendering, and
//!   the end-to-end run driving the `bijmap` binary.

pub mod certify;
pub mod coneopt;
pub mod degree;
pub mod mapping;
pub mod mesh;
pub mod meshgen;
pub mod pipeline;
