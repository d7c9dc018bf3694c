//! Cascaded Mamdani fuzzy reasoners for machine-ethics decisions. A
//! simulation harness generates and labels decision data from a cascade, and
//! an NNge learner turns those labels back into readable interval rules.
//!
//! ```
//! use autometric::arch::{build_takeover_architecture, classify_takeover, VirtuousClass};
//!
//! let arch = build_takeover_architecture();
//! let trace = arch
//!     .evaluate_with(&[("distance", 1.0), ("lane", 1.0), ("speed", 0.0)])
//!     .unwrap();
//! assert_eq!(classify_takeover(trace.output), VirtuousClass::Class0);
//! ```

pub mod analysis;
pub mod arch;
pub mod config;
pub mod fuzzy;
pub mod nnge;
pub mod sim;
