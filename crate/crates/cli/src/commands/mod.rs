use crate::CliConfig;

pub mod edit;
pub mod fetch;
pub mod ike;
pub mod judge;
pub mod lint;
pub mod query;
pub mod report;
pub mod verify;

pub struct Context {
    pub seed: u64,
    pub config: CliConfig,
}
