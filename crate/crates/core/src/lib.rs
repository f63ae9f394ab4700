//! Event-camera background-activity filtering.
//!
//! * [`dif`]: reference DIF/BIF subarea filters and their division-free decisions.
//! * [`hw`]: bit-accurate integer model of the FPGA datapath and its pipeline.
//! * [`baselines`]: nearest-neighbour and STCF(N) filters.
//! * [`metrics`]: ROC/PR sweeps, sparsity and stability summaries.
//! * [`events`], [`noise`], [`scene`]: data model, labeled noise and a synthetic test scene.

pub mod baselines;
pub mod dif;
pub mod events;
pub mod filter;
pub mod hw;
pub mod metrics;
pub mod noise;
pub mod scene;

pub use baselines::{nnb_filter, stcf_filter, NnbFilter, StcfFilter};
pub use dif::{filter_stream, Algorithm, AreaGrid, DifFilter, FilterConfig, NeighborContext};
pub use events::{
    merge_streams, read_events, relabel_noise, write_events, Event, EventError, EventStream,
    Format, Geometry,
};
pub use filter::{run_filter, EventFilter, FilterError, ScoredEvent};
pub use hw::{
    hw_filter_stream, pipeline_simulate, HwDifFilter, HwParams, HwScore, PipelineConfig,
    PipelineStats, PipelineTiming,
};
pub use metrics::{auprc_from_scores, roc_from_scores, MetricsError, PrCurve, RocCurve};
pub use noise::{generate_noise, NoiseConfig, NoiseError};
