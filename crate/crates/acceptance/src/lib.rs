//! Acceptance checks for `cghdg` live in `tests/acceptance.rs`; this crate
//! only exists so they run after the core suites.
