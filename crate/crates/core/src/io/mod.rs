//! Files in and out: feature batches, metric traces and run configuration.

mod config;
mod features;
mod trace;

pub use config::{Broadcast, InitialSpec, OperatorSpec, ProbeSection, RetentionPolicy, RetentionSection, RunConfig};
pub use features::{
    decode_gmcf, encode_gmcf, parse_csv, read_feature_batch, write_csv, write_gmcf, GMCF_MAGIC, GMCF_VERSION,
};
pub use trace::{drift_curves_of, read_trace, segments_path, trace_phases, write_trace, TraceRecord};
