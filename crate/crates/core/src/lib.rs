pub mod aggregation;
pub mod annotation;
pub mod ingest;
pub mod report;
pub mod stats;
