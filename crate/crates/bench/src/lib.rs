//! Criterion benchmarks for the numerical kernels of `alh-core`; see `benches/kernels.rs`.
