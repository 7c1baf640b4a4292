//! End-to-end pipelines: sample a family of transformed measures, compute
//! every requested distance matrix, rescale against a reference, embed,
//! score and time.

mod run;
mod spec;
mod timing;

pub use run::{
    analytic_matrix, generate, method_matrix, mnist_pipeline, run_experiment, Alignment, ExperimentReport, Generated,
    MethodReport, Witnesses,
};
pub use spec::{ExperimentSpec, Family, Method, MnistSource, ParameterSet, Parameters, Settings};
pub use timing::{sweep_parameters, timing_sweep, TimingOptions, TimingRow, TimingStatus, TimingTable};
