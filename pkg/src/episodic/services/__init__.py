"""Services - synthetic data, level-wise mining and benchmarks."""
