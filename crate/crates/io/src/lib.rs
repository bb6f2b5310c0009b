//! File formats and the command-line front end for the `vantage-core`
//! synthesis library.
//!
//! The binary formats are deliberately old-school: PPM/PGM for images and
//! masks, PFM for float rasters, whitespace-separated text for pose tracks,
//! JSON for trajectory specs and run manifests. Everything round-trips
//! bit-exactly so a run can be reproduced from its manifest alone.

pub mod cli;
pub mod error;
pub mod manifest;
pub mod pfm;
pub mod pnm;
pub mod posefile;
pub mod trajspec;

pub use error::CodecError;
