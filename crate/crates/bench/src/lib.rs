//! Benchmarks for the pstab kernels live in `benches/`.
