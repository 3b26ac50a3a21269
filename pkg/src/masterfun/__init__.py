"""Exact high-temperature expansion engine for the six-vertex model's
master two-point function and the linear-integral-equation functions
derived from it."""

ENGINE_VERSION = "0.1.0"
