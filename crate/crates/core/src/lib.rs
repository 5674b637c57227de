//! Explicit Gaussian test functions on the symmetric space `S_{n+1} = GL_{n+1}(C)/GL_{n+1}(R)`
//! and its Lie algebra, built from the Kudla-Millson form by pulling back along a Borel chart.
//!
//! The crate is `no_std` (with `alloc`). Exact symbolic work happens over
//! `Q(sqrt 2)[pi, 1/pi]`; everything numeric is `f64` / `Complex<f64>`.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod algebra;
pub mod cayley;
mod error;
pub mod kmform;
pub mod linalg;
pub mod orbint;
pub mod pullback;
pub mod quadrature;
pub mod sampling;
pub mod slie;
pub mod transferlab;
pub mod ulie;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex;

pub type C64 = Complex<f64>;
