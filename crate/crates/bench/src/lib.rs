//! Benchmark harness package; the measurements live in `benches/engine.rs`.
