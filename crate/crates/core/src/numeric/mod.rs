//! Numerical building blocks shared by the pricing engines.

pub mod fit;
pub mod interp;
pub mod normal;
pub mod quad;

pub use interp::UniformHermite;
pub use normal::{norm_cdf, norm_pdf, norm_quantile};
