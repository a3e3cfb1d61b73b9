//! File formats and the `arnoldi-gcn` command line on top of
//! `arnoldi-gcn-core`.

mod app;
pub mod formats;
pub mod model_file;

pub use app::run;
