//! Optimal multi-step sensor scheduling for linear Gaussian systems.
//!
//! Exactly one sensor (or a fixed-size subset of sensors) measures at each
//! step. The schedule is chosen to minimize the accumulated weighted
//! estimation error. For linear Gaussian models the error covariance follows
//! the Riccati recursion independently of the measurement values, so the
//! problem is a deterministic search over a tree of covariances.
//!
//! The central strategy is information-based pruning ([`search::ibp_search`]):
//!
//! * sensors whose information matrix `Hᵀ R⁻¹ H` is dominated in the PSD
//!   order by another sensor's can never lead to a better schedule and are
//!   dropped without evaluating the Riccati recursion;
//! * a *bounding sensor*, whose information matrix covers every real one,
//!   gives a lower bound on the cost of any completion of a partial schedule
//!   for depth-first branch-and-bound.
//!
//! ```
//! use ibp_core::model::make_tracking_scenario;
//! use ibp_core::search::{exhaustive_search, ibp_search, SearchOptions};
//!
//! let scenario = make_tracking_scenario(1.0, 0.02, 3, 7).unwrap();
//! let opts = SearchOptions::default();
//! let ibp = ibp_search(&scenario, &opts).unwrap();
//! let oracle = exhaustive_search(&scenario, &opts).unwrap();
//! assert!((ibp.cost.total - oracle.cost.total).abs() <= 1e-9 * oracle.cost.total);
//! assert!(ibp.expanded_nodes < oracle.expanded_nodes);
//! ```

pub mod bounding;
pub mod error;
pub mod model;
pub mod psd;
pub mod riccati;
pub mod search;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/psd-order.md")]
    mod psd_order {}
    #[doc = include_str!("../../../book/src/riccati.md")]
    mod riccati {}
    #[doc = include_str!("../../../book/src/bounding-sensor.md")]
    mod bounding_sensor {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/extensions.md")]
    mod extensions {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
