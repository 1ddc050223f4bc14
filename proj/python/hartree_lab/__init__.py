"""Spectral solver and experiment driver for the randomized Hartree equation.

Fields are complex NumPy arrays of shape ``(n,) * d`` holding physical samples
on the periodic box ``[-L/2, L/2)^d``.
"""

from ._core import (
    BlowUpError,
    FormatError,
    ParameterError,
    build_report,
    check_names,
    coefficient,
    derive_seed,
    energy,
    evolve,
    free_propagate,
    load_field,
    lp_project,
    mass,
    minimal_a,
    norm,
    positions,
    randomize,
    rayleigh_samples,
    run_check,
    run_experiment,
    scattering_increments,
    store_field,
    tail_statistics,
)

__all__ = [
    "BlowUpError",
    "FormatError",
    "ParameterError",
    "build_report",
    "check_names",
    "coefficient",
    "derive_seed",
    "energy",
    "evolve",
    "free_propagate",
    "load_field",
    "lp_project",
    "mass",
    "minimal_a",
    "norm",
    "positions",
    "randomize",
    "rayleigh_samples",
    "run_check",
    "run_experiment",
    "scattering_increments",
    "store_field",
    "tail_statistics",
]
