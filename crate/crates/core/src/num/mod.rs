pub mod interval;
pub mod wide;

pub use interval::{WInt, SLACK_ULPS};
pub use wide::Wide;
