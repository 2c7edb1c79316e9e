//! Estimation and inference for nonstationary and dependent data: local
//! unit roots, long-run variances, cointegrating and predictive
//! regressions, structural breaks, network dependence, bootstrap, GARCH,
//! random-matrix spectra, and a Monte Carlo driver.

pub mod error;
pub mod io;
pub mod linalg;
pub mod lrv;
pub mod mc;
pub mod series;
pub mod stats;
pub mod unitroot;
pub mod coint;
pub mod predreg;
pub mod breaks;
pub mod netdep;
pub mod bootstrap;
pub mod garch;
pub mod randmat;

pub use error::{Error, Result};
pub use mc::QuantileTable;
pub use series::{MultiSeries, RngSpec, TimeSeries};
