//! Two-parameter q-Bessel harmonic analysis on the geometric grid.
//!
//! The crate samples every object on a truncated grid `{q^n : n_low <= n <= n_high}`
//! and provides Jackson integration, the normalized and modified q-Bessel kernels,
//! the generalized q-Bessel Fourier and wavelet transforms, and quantitative checks
//! of the Plancherel and uncertainty identities built on them.
//!
//! ```
//! use qwave::{BesselParams, QGrid, TransformPlan, GridFunction};
//!
//! let grid = QGrid::new(0.5, -20, 40).unwrap();
//! let v = BesselParams::new(0.0, 0.0).unwrap();
//! let plan = TransformPlan::new(&grid, v).unwrap();
//! let f = GridFunction::indicator(&grid, 10).unwrap();
//! let back = plan.transform(&plan.transform(&f).unwrap()).unwrap();
//! assert!((back.value_at(10).unwrap() - 1.0).abs() < 1e-9);
//! ```

pub mod error;
pub mod numfmt;
pub mod par;
pub mod probes;
pub mod qbessel;
pub mod qcli;
pub mod qgrid;
pub mod qtransform;
pub mod qwavelet;
pub mod suite;
pub mod sum;
pub mod uncertainty;

pub use error::{QError, Result};
pub use qbessel::{KernelTable, SeriesTolerance, SeriesValue};
pub use qgrid::{BesselParams, Endpoint, GridFunction, JacksonRange, QGrid};
pub use qtransform::{Calibration, Mode, TransformPlan};
pub use qwavelet::{Scaleogram, WaveletSpec};
pub use uncertainty::UncertaintyReport;
