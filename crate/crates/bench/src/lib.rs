//! Criterion benchmarks for obscura live in `benches/`.
