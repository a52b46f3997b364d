//! Dense reference oracle, operator spec files, JSON reports and the
//! command runner behind the `woldkit` binary.

pub mod oracle;
pub mod report;
pub mod run;
pub mod spec;
pub mod vector;
