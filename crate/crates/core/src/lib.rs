pub mod cli;
pub mod exact_linalg;
pub mod fiber_algebra;
pub mod index;
pub mod oracle;
pub mod page_engine;
pub mod presentation;
pub mod schedule;
