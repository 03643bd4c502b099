//! Benchmarks for the openattr pipeline live under `benches/`.
