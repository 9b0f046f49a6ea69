"""Nonlinearity optimisation and operator analysis for Boolean functions."""

from ._backend import BACKEND
from .core import (DeltaVector, FitnessValue, NotABooleanSpectrum, TruthTable,
                   WalshSpectrum, apply_spectrum_delta, covering_radius_bound,
                   covering_radius_floor, fitness1, fitness2, inverse_walsh,
                   nonlinearity, walsh_transform, walsh_transform_naive)
from .operators import (NOOP, NOT_CLOSED_FORM, CrossoverKind, DimensionMismatch,
                        MutationDescriptor, MutationKind, PositionOutOfRange,
                        apply_mutation, crossover, mixing_mutation, mutation_delta,
                        neighborhood)

__version__ = "0.1.0"
