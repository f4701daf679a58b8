//! Deterministic toolkit for training small spiking neural networks and
//! probing whether a sequence benchmark actually requires temporal processing.
//!
//! The library is organized around three gradient regimes for leaky
//! integrate-and-fire networks:
//!
//! - **STBP**: full backpropagation through both the layer and time axes,
//! - **SDBP**: forward dynamics intact, backward temporal pathways severed,
//! - **NoTD**: temporal state removed from forward and backward passes.
//!
//! Running all three on one dataset and comparing their accuracies yields a
//! suitability verdict on the benchmark (see [`stp`]). Synthetic task
//! generation, training, and theoretical energy accounting live in [`tasks`],
//! [`train`], and [`energy`].
//!
//! All numeric kernels are generic over the scalar type via [`Scalar`];
//! `f64` is the default precision, `f32` an opt-in for speed.

pub mod energy;
pub mod engine;
pub mod error;
pub mod numerics;
pub mod stp;
pub mod tasks;
pub mod train;

pub use error::{Error, Result};
pub use numerics::{Rng64, Scalar, Tensor};

/// Default-precision tensor.
pub type Tensor64 = Tensor<f64>;
/// Single-precision tensor, opt-in for speed.
pub type Tensor32 = Tensor<f32>;
