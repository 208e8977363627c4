//! Obstruction-function computations for strongly pseudoconvex CR
//! hypersurfaces.
//!
//! * [`series`]: truncated weighted power series with exact or
//!   multiprecision coefficients.
//! * [`monge_ampere`]: the complex Monge–Ampère operator, Fefferman's
//!   defining-function recursion and pointwise obstruction extraction.
//! * [`chern_moser`]: normal-form data, trace conditions, osculation orders
//!   and the consistency checks behind obstruction-flat osculation.
//! * [`circle_bundle`]: curvature calculus on Riemann surfaces and formal
//!   Cauchy–Kowalevski solvers for obstruction-flat circle bundles.
//! * [`torus`]: finite-difference obstruction density on flat tori.

pub mod chern_moser;
pub mod circle_bundle;
pub mod monge_ampere;
pub mod series;
pub mod torus;
