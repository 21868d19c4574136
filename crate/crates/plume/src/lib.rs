//! Mixed finite element solver for saturated Darcy flow coupled to reactive
//! solute transport with a velocity-dependent (Scheidegger) dispersion tensor.
//!
//! The spatial discretization pairs lowest-order Raviart-Thomas fluxes with
//! piecewise-constant scalars on conforming triangle meshes. Darcy flow is
//! solved once as a saddle-point system; transport then advances with a
//! semi-implicit scheme (implicit dispersive flux, explicit reaction) that
//! costs one sparse factorization per run.
//!
//! Module map:
//! - [`mesh`]: triangle meshes, connectivity, circumcenter geometry,
//!   finite-volume edge coefficients.
//! - [`dispersion`]: the dispersion tensor, its spectral closed forms, and
//!   the constants that drive the time-step guards.
//! - [`quadrature`]: the triangle and edge rules shared by assembly.
//! - [`assembly`]: discrete fields, sparse operators, projections.
//! - [`solver`]: thin deterministic wrapper over a sparse LU backend.
//! - [`darcy`]: the mixed Darcy solve and manufactured-solution studies.
//! - [`transport`]: isotherms, CFL control, the semi-implicit step, runs,
//!   and the stability ledger.
//! - [`analysis`]: discrete norms, time interpolants, error tables.
//! - [`verify`]: seeded self-check suites for the CLI `verify` command.

pub mod analysis;
pub mod assembly;
pub mod darcy;
pub mod dispersion;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod transport;
pub mod verify;
