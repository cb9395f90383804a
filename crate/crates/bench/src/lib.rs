//! Criterion benchmarks for the decoding engines; see `benches/`.
