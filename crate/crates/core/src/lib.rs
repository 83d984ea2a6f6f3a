pub mod config;
pub mod domain;
pub mod gateway;
pub mod numeric;
pub mod transport;
pub mod weather;
pub mod parser;
pub mod prompts;
pub mod household;
pub mod calendar;
pub mod analytics;
pub mod pipeline;
