"""Contextual valuations on finite-dimensional observable algebras.

Observables live in full matrix algebras; a *context* is a commuting family
fixed by an orthonormal joint eigenbasis. Physical states assign one outcome
per context, and sampling is always tied to the context of the device.
"""

from .algebra import Observable, commutator, make_observable, pauli, spectral_decomposition
from .contexts import Context, ObservableFamily, joint_context, make_context, maximal_contexts
from .errors import CQMError, NumericalFailure, ValidationError
from .probability import MeasurementConfig, SampleSet, StateFunctional, sample
from .states import PhysicalState, construct_physical_state, evaluate, prepare

__version__ = "0.1.0"

__all__ = [
    "CQMError", "Context", "MeasurementConfig", "NumericalFailure", "Observable",
    "ObservableFamily", "PhysicalState", "SampleSet", "StateFunctional", "ValidationError",
    "commutator", "construct_physical_state", "evaluate", "joint_context", "make_context",
    "make_observable", "maximal_contexts", "pauli", "prepare", "sample", "spectral_decomposition",
]
