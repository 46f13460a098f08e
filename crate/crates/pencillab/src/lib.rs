//! A desk-scale numerical laboratory for critical points of random real
//! Lefschetz pencils on CP¹ and CP².
//!
//! The crate samples Kostlan-distributed pairs of real forms, counts the
//! real critical points of the pencil they span, and compares the observed
//! densities against the closed-form constants predicted by the asymptotic
//! theory: the expected-count density `c_R(n)·Vol_h(RPⁿ)`, the exact complex
//! counts from Euler-characteristic bookkeeping, and the quadric-integral
//! form of the universal constant.
//!
//! Module map:
//! - [`ensembles`]: seeded, reproducible samplers (Kostlan forms, symmetric
//!   Gaussian matrices, quadric-chart proposals).
//! - [`forms`]: algebra of binary/ternary forms, the Wronskian covariant and
//!   its ternary analogue, circle evaluation, resultants.
//! - [`realroots`]: real root counting on RP¹ (grid + bisection, with Sturm
//!   and companion-matrix oracles) and certified subdivision on RP².
//! - [`cohomology`]: exact integer Chern-class arithmetic in H*(CPⁿ) and the
//!   exact complex critical-point counts.
//! - [`constants`]: closed-form scalars (`e_R(n)`, Wallis/Gamma/sphere
//!   factors, Fubini–Study volumes, peak-section normalizations).
//! - [`quadric`]: the A/B matrices, the ψ parametrization of the quadric,
//!   and the importance-sampled universal-constant integral.
//! - [`experiments`]: Monte Carlo campaigns, equidistribution tests, CSV
//!   records and the CLI entry points.

pub mod cohomology;
pub mod constants;
pub mod ensembles;
pub mod experiments;
pub mod forms;
pub mod quad;
pub mod quadric;
pub mod realroots;
