//! Dynamic models for eigenscore time series.

pub mod arma;
pub mod constraints;
pub mod garch;
pub mod sbekk;
pub mod var;

pub use arma::{fit_arma_auto, ArmaFit};
pub use constraints::{check_ar_garch, check_univariate, check_var_sbekk};
pub use garch::{fit_ar_garch, forecast_ar_garch, ArGarchFit};
pub use sbekk::{fit_sbekk, forecast_sbekk, SbekkFit, SbekkOptions};
pub use var::{fit_var1, VarFit};
