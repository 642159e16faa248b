pub mod directions;
pub mod equivalence;
pub mod oracle;
