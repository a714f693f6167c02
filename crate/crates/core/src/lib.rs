pub mod config;
pub mod dg;
pub mod diagnostics;
pub mod experiments;
pub mod mesh;
pub mod physics;
pub mod projection;
pub mod sbp;
pub mod time;
