pub mod experiment;
pub mod format;
