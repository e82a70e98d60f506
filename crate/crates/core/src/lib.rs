pub mod connectivity;
pub mod error;
pub mod event;
pub mod exploration;
pub mod harness;
pub mod lattice;
pub mod oracle;
pub mod par;
pub mod pivotal;
pub mod stats;
pub mod unionfind;

pub use error::{Error, Result};
