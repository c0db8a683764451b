//! Benchmark-only crate; see benches/induction.rs.
