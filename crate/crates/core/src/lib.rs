//! Exact lattice computations on the Mukai lattice of the K3 cover of an
//! Enriques surface, together with the twisted K¹ computation for surfaces.
//!
//! * [`linalg`]: arbitrary-precision integer matrices, Hermite and Smith forms.
//! * [`lattice`]: Gram-matrix lattices, isometries, eigenlattices, reflections.
//! * [`mukai`]: `H⁰ ⊕ H² ⊕ H⁴`, the involution `τ*`, B-field twists and `T`.
//! * [`ktheory`]: finitely generated abelian groups and `K¹` of a surface.
//! * [`verifier`]: seeded congruence checks and the equivariant-isometry sampler.
//! * [`cli`]: the command-line driver.

pub mod cli;
pub mod ktheory;
pub mod lattice;
pub mod linalg;
pub mod mukai;
pub mod verifier;
