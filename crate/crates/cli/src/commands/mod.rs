pub mod attribute;
pub mod audit;
pub mod bench;
pub mod compare;
pub mod ingest;
