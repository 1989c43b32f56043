//! Criterion benchmarks for the `infobound` kernels; see `benches/kernels.rs`.
