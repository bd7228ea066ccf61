//! Criterion benchmarks for the field, basis and protocol layers; see `benches/`.
