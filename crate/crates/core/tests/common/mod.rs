pub mod oracle;
pub mod data;
