"""Acoustic echo tooling: scenario synthesis, linear cancellation, residual suppression.

The package is organized around a single dataflow: far-end audio is pushed
through a simulated nonlinear echo path and mixed with near-end speech
(`echosup.echosim`, `echosup.dataset`); a frequency-domain adaptive Kalman
filter removes the linear part of the echo (`echosup.laec`); a trainable
masking network built on a small reverse-mode autodiff core suppresses the
residual (`echosup.autodiff`, `echosup.nn`, `echosup.model`,
`echosup.trainer`); `echosup.metrics` scores the result.  `echosup.cli`
wires the stages into subcommands.
"""

__version__ = "0.1.0"
