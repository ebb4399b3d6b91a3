"""
symuniv
=======

Symmetric power L-functions of level-one Hecke eigenforms and their
Rankin-Selberg squares, with desk-scale experiments on:
- exact q-expansions and Satake angles
- prime number theorems for the coefficients
- random Euler product models of value distribution
- universality-style shift and jet searches

Supported kinds are sym1..sym4 and rs1..rs4 (sym^m f x sym^m f).
"""

__version__ = "0.1.0"

from .core import SymPowerExperiment
from .errors import SymUnivError
from .kinds import KIND_CONFIGS, LKind, RankinSelberg, Sym
from .lvalue import EvalParams, eval_L, gamma_spec, sigma_strip
from .modform import (SUPPORTED_WEIGHTS, HeckeEigenform, lambda_prime_power,
                      qexp_delta, qexp_newform, satake_angle)
from .sympower import dirichlet_coefficients, local_factor

# Expose main components
__all__ = [
    'SymPowerExperiment',
    'SymUnivError',
    'KIND_CONFIGS',
    'LKind',
    'Sym',
    'RankinSelberg',
    'EvalParams',
    'eval_L',
    'gamma_spec',
    'sigma_strip',
    'HeckeEigenform',
    'qexp_delta',
    'qexp_newform',
    'satake_angle',
    'lambda_prime_power',
    'local_factor',
    'dirichlet_coefficients',
]

# Supported kinds
SUPPORTED_KINDS = list(KIND_CONFIGS.keys())


def get_version():
    """Return the current version of the library."""
    return __version__


def get_supported_kinds():
    """Return list of supported kind labels."""
    return SUPPORTED_KINDS


def get_supported_weights():
    """Return the weights k with dim S_k = 1."""
    return sorted(SUPPORTED_WEIGHTS)


def get_default_config(kind):
    """
    Get default configuration for a specific kind.

    Args:
        kind (str): One of the supported kind labels

    Returns:
        dict: Default disc and sampling configuration for the kind

    Raises:
        ValueError: If kind is not supported
    """
    if kind not in SUPPORTED_KINDS:
        raise ValueError(f"Kind must be one of {SUPPORTED_KINDS}")
    return SymPowerExperiment(kind=kind).config
