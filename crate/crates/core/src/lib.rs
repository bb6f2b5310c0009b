//! Camera-trajectory video synthesis from a single RGB-D frame.
//!
//! The crate is split along the two stages of the synthesis process plus
//! the supporting math:
//!
//! * [`geometry`]: pinhole cameras, world-to-camera poses, and motion
//!   trajectory construction.
//! * [`raster`]: dense image containers shared by the renderer, the hole
//!   fillers, and the file codecs in the companion crate.
//! * [`cloud`]: point-cloud lifting, z-buffered splat rendering, hole
//!   filling, per-view depth-scale optimization, and the view-by-view
//!   cloud-growing loop (stage one).
//! * [`diffusion`]: noise schedules, latent inversion, and stochastic
//!   denoising steps over latent frame stacks (stage two).
//! * [`metrics`]: trajectory alignment and absolute/relative pose error.
//! * [`scene`]: an analytic box scene used as a ground-truth oracle.
//! * [`pipeline`]: end-to-end orchestration of both stages.
//!
//! Everything here is deterministic: the only randomness flows through
//! [`rng::NoiseRng`], which is fully specified by its seed. `no_std` with
//! `alloc` is supported; the companion `vantage-io` crate carries file
//! formats and the command-line interface.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod cloud;
pub mod diffusion;
pub mod geometry;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod scene;
