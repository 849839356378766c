//! Topologies, the keyed random clock field and passage times.

pub mod clock;
pub mod field;
pub mod params;
pub mod path;
pub mod site;

pub use clock::{sample_clock, ClockKey, ClockKind, Clocks};
pub use field::{ClockSource, ForcedField, RandomField};
pub use params::{ClockMode, ModelParams, TopologyKind, Truncation};
pub use path::path_time;
pub use site::{LatticeSite, SiteId, Topology, TreeSite};
