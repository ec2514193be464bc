pub mod beaconing;
pub mod constraint;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod harness;
pub mod radio;
pub mod relay;
pub mod scenario;
pub mod seeds;
pub mod solver;
