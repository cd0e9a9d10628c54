//! Library half of the `ambientforge` command-line tool: the metric file
//! format, the report schema and the commands.

pub mod commands;
pub mod fixtures;
pub mod metricfile;
pub mod report;
