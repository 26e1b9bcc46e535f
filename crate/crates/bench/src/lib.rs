//! Criterion benchmarks for `sepcheck-core`; see `benches/kernels.rs`.
