//! Complexity of measurable partitions under group actions: entropy, the
//! Rokhlin and matching metrics, Hamming-name covering numbers, maximal
//! pattern entropy, Følner windows and mean metrics.
//!
//! All probabilities are exact rationals on the interval and torus backends
//! and `f64` on weighted point spaces. Entropies are in nats.

pub mod amenable;
pub mod assignment;
pub mod complexity;
pub mod dynamics;
mod error;
pub mod join;
pub mod measure_space;
pub mod partition;
pub mod pattern_entropy;
pub mod rational;
pub mod region;

pub use error::{Error, Result};
pub use measure_space::{MeasurableSet, MeasureSpace, Point, PointSet};
pub use partition::{MetricReport, Partition};
pub use rational::Rational;
pub use region::{AxisMap, RegionSet};
