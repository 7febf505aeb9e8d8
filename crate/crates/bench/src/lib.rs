//! Criterion benchmarks for sumfree-core; see `benches/core.rs`.
