//! FPGA macro placement: electrostatics-based mixed-size global placement
//! with cascade merging and region clamping, followed by three-stage macro
//! legalization (greedy cascades, per-region min-cost matching, remaining
//! macros). Also ships a legality checker, HPWL evaluation and the
//! contest-style scoring arithmetic.
//!
//! The usual flow:
//!
//! ```no_run
//! use macroplace::{io, pipeline};
//!
//! let (layout, design) = io::generate_benchmark(1, io::Profile::Tiny).unwrap();
//! let out = pipeline::place(&layout, &design, &Default::default()).unwrap();
//! assert!(out.report.is_legal());
//! ```

pub mod cli;
pub mod density;
pub mod error;
pub mod flow;
pub mod gp;
pub mod io;
pub mod legalize;
pub mod model;
pub mod pipeline;
pub mod score;
pub mod wirelength;

pub use error::{Error, Result};
