//! Tables, transform pipelines, relationship models and a knowledge graph
//! that ties them to domain knowledge, insights and tasks.

pub mod insight;
pub mod knowledge;
pub mod metrics;
pub mod relationships;
pub mod tabular;
pub mod transforms;
