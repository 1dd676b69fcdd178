//! Renormalization-group view of the central limit theorem.
//!
//! Probability measures are handled through their characteristic functions. The map
//! `T ν = law((X + Y)/√2)` is iterated exactly for atomic laws and at the cf level
//! otherwise, and distances to the Gaussian are measured in the Fourier metrics
//! `d_s(ν, μ) = sup_ξ |φ_ν(ξ) − φ_μ(ξ)| / |ξ|^s` for `s ∈ {2, 3}`.

pub mod bank;
pub mod charfn;
mod cmath;
pub mod error;
pub mod flow;
pub mod measure;
pub mod metric;
pub mod oracle;
mod quad;
pub mod report;

pub use error::{Error, Result};
pub use measure::{Atom, Family, Measure, MeasureLiteral, Repr};
pub use metric::{DistanceResult, GridSpec};
