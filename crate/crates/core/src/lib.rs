pub mod audit;
pub mod dataset;
pub mod evolver;
pub mod gep;
pub mod hub;
pub mod scoring;
pub mod sim;
