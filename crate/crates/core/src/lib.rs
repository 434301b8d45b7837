pub mod error;
pub mod linalg;
pub mod sampling;
pub mod sphere;
pub mod channels;
pub mod concentration;
pub mod polyapprox;
pub mod experiments;
