pub mod encoding;
pub mod graph;
pub mod strand;
pub mod tube;
pub mod oracle;
pub mod script;
pub mod pipeline;
pub mod cli;
