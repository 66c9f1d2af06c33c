pub mod characterize;
pub mod gates;
pub mod report;
pub mod schedule;
pub mod simulate;
pub mod validate;
