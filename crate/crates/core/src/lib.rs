pub mod arima;
pub mod experiments;
pub mod hmd;
pub mod leecarter;
pub mod linalg;
pub mod par;
pub mod lstm;
pub mod synth;
