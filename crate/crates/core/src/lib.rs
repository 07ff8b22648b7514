//! Numerical laboratory for restricted Weyl sums: sums and completion sums,
//! measures and their Fourier transforms, restricted mean values, Vinogradov
//! counts, exponent formulas and large-value covers.

pub mod covering;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod measures;
pub mod moments;
pub mod quadrature;
pub mod rectangle;
pub mod rng;
pub mod suite;
pub mod summation;
pub mod torus;
pub mod vinogradov;
pub mod weights;
pub mod weyl;

pub use error::{LabError, Result};
pub use num_complex::Complex64;
pub use measures::MeasureSpec;
pub use rectangle::Rectangle;
pub use rng::Stream;
pub use torus::TorusPoint;
pub use weights::WeightSequence;
