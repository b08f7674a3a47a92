//! Criterion benchmarks of the simulator and learner hot paths live in `benches/`.
