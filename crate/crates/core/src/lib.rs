//! Sub-Riemannian structure analysis and nodal-set experiments for
//! hypoelliptic sub-Laplacians.
//!
//! The crate is layered bottom-up:
//!
//! * [`vf_algebra`]: exact polynomial vector fields, brackets, flags and
//!   privileged coordinates.
//! * [`discretize`]: grids and symmetric finite-difference sub-Laplacians.
//! * [`eigensolve`]: lowest eigenpairs, Rayleigh quotients, symmetry reductions.
//! * [`nodal`]: nodal domains, the Courant check, directional crossings.
//! * [`srgeom`]: Carnot–Carathéodory distance fields, ball-box, box counting,
//!   nodal density.
//! * [`experiments`]: configs, scenarios and reports behind the `subnodal` CLI.

pub mod discretize;
pub mod eigensolve;
pub mod experiments;
pub mod nodal;
pub mod srgeom;
pub mod vf_algebra;
