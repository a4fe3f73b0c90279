//! Functional PCA forecasting of intraday return curves.
//!
//! Daily curves of intraday log returns are decomposed into a mean curve,
//! a few eigenfunctions and per-day eigenscores. Score dynamics are modelled
//! by AR(1)-GARCH(1,1), ARMA, VAR(1) and scalar BEKK, which yields one-day
//! ahead curve forecasts with pointwise Gaussian intervals. A rolling variant
//! regresses scores of a shifted panel to forecast the tail of the current day.

pub mod curves;
pub mod error;
pub mod eval;
pub mod forecast;
pub mod fpca;
pub mod io;
pub mod linalg;
pub mod optim;
pub mod par;
pub mod rolling;
pub mod score_models;
pub mod sim;

pub use curves::{compute_returns, demean_panel, PricePoint, ReturnCurve, ReturnCurvePanel};
pub use error::{Error, ErrorClass, Result};
pub use forecast::{FunctionalForecast, Method};
pub use fpca::{fit_fpca, FpcaBasis, FpcaOptions, GridWeight};
pub use par::Exec;
