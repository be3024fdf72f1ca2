//! Core of a mixed-methods analysis workbench.
//!
//! A [`Project`](model::Project) holds raw data sources, a codebook with
//! annotations, a notebook and a canvas. The three working areas share it:
//!
//! - [`foraging`] codes text and filters tables,
//! - [`notebook`] aggregates data in cells that share one variable space,
//! - [`canvas`] arranges provenance-stamped blocks, links them, and unwinds
//!   aggregates back to the rows and quotes behind them.
//!
//! [`Workbench`] wraps a project with the session state and undo log and is the
//! usual entry point.
//!
//! ```
//! use mmw_core::{FixedClock, Workbench};
//! use mmw_core::model::{OriginDescriptor, OriginMethod, SourceKind};
//! use chrono::{TimeZone, Utc};
//!
//! let clock = FixedClock(Utc.with_ymd_and_hms(2024, 5, 1, 9, 0, 0).unwrap());
//! let mut wb = Workbench::create("demo", "Demo", Box::new(clock));
//! let origin = OriginDescriptor::new(OriginMethod::Survey);
//! let src = wb.import_source(SourceKind::Table, "survey", b"participant,score\nP1,4\nP2,2\n", origin).unwrap();
//! assert_eq!(src.table().unwrap().len(), 2);
//! ```

pub mod canonical;
pub mod canvas;
pub mod error;
pub mod foraging;
pub mod ids;
pub mod import;
pub mod model;
pub mod notebook;
mod workbench;

pub use canonical::{content_hash, load_project, save_project};
pub use error::{Error, Result};
pub use workbench::{Clock, Execution, FixedClock, SystemClock, Workbench};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/projects.md")]
    mod projects {}
    #[doc = include_str!("../../../book/src/foraging.md")]
    mod foraging {}
    #[doc = include_str!("../../../book/src/notebook.md")]
    mod notebook {}
    #[doc = include_str!("../../../book/src/canvas.md")]
    mod canvas {}
    #[doc = include_str!("../../../book/src/unwinding.md")]
    mod unwinding {}
}
