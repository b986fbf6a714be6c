//! HTTP service and command-line front ends for `convo_core`.

pub mod cli;
pub mod http;
