//! Criterion benchmarks for `indeftheta-core`; see `benches/`.
