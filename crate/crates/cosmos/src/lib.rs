//! File formats, reports and the command line for the cosmos cost model.

pub mod cli;
pub mod doc;
pub mod manifest;
pub mod report;
pub mod usage_log;
