//! Trace variants for partially ordered event data.
//!
//! Activity instances carry a start and a complete timestamp. The instances of
//! one case form an interval order, which is decomposed recursively by maximal
//! ordering cuts and maximal parallel cuts into a nested chevron layout. Traces
//! whose layouts coincide are grouped into one variant.
//!
//! The pipeline, end to end:
//!
//! ```
//! use vw_core::{ingest, layout, order, render};
//!
//! let csv = "case_id,activity,start_timestamp,complete_timestamp\n\
//!            1,A,07/13/2021 08:00,07/13/2021 09:30\n\
//!            1,B,07/13/2021 08:30,07/13/2021 11:00\n\
//!            1,C,07/13/2021 12:00,07/13/2021 13:00\n";
//! let log = ingest::parse_csv(csv.as_bytes(), &ingest::ColumnMapping::default()).unwrap();
//! let traces = ingest::group_by_case(&log);
//! let order = order::build_interval_order(&traces[0]).unwrap();
//! let tree = layout::build_layout(&order).unwrap();
//! assert_eq!(render::render_text(&tree), "seq(par(A,B),C)");
//! ```

pub mod cuts;
mod error;
pub mod ingest;
pub mod layout;
pub mod order;
pub mod render;
pub mod stats;
pub mod synth;
mod time;
mod union_find;

pub use cuts::{find_cut, maximal_ordering_cut, maximal_parallel_cut, CutKind, CutResult};
pub use error::{Error, Result};
pub use ingest::{ActivityInstance, EventLog, InstanceId, Trace};
pub use layout::{build_layout, canonical_form, variant_table, LayoutTree, VariantTable};
pub use order::{build_interval_order, induced_suborder, IntervalOrder};
pub use time::Timestamp;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
/// Output order always matches input order.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}
