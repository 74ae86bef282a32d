//! Exact computations in the homotopy fixed point spectral sequence for
//! E^{hG24} at the prime 2.

pub mod chart;
pub mod coeff;
pub mod expr;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod presentation;
pub mod resolution;
pub mod sseq;
pub mod stabilizer;

pub use coeff::{Gr, TruncatedSeries};
pub use poly::{Monomial, Poly};
pub use presentation::{BasisEntry, Presentation, PresentationConfig, PresentationError};
