"""Interval and fuzzy physics-informed neural networks (C++ core)."""

from ._core import (
    ConfigError,
    Error,
    FuzzyNumber,
    ParseError,
    bar_combinations,
    builtin_names,
    check,
    fd_nonlinear,
    resolved_config,
    run,
    train,
    train_fuzzy,
)

__all__ = [
    "ConfigError",
    "Error",
    "FuzzyNumber",
    "ParseError",
    "bar_combinations",
    "builtin_names",
    "check",
    "fd_nonlinear",
    "resolved_config",
    "run",
    "train",
    "train_fuzzy",
]
