//! Reference oracles and the acceptance checks built on them.

pub mod criteria;
pub mod oracle;
pub mod report;
