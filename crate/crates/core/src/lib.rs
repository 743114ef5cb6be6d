pub mod bench;
pub mod dataset;
pub mod engine;
pub mod expr;
pub mod truths;
