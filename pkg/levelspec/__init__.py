"""LevelSpec: cospectral mates of bounded level and the bounds behind them."""

__all__ = [
    "argtypes",
    "cli",
    "errors",
    "experiments",
    "graphs",
    "io_graph",
    "linalg",
    "logging_async",
    "main",
    "orthogonal",
    "proof",
    "sampling",
    "search",
]
