"""
Adaptation Engine

Type-guided, vocabulary-restricted mutation of update rules with the identifier<N>
naming policy and a validation retry loop.
"""

from .engine import (
    DEFAULT_WEIGHTS, IdentifierCounter, MutationOperator, MutationPolicy, OperatorPool, TrackedRng,
    adapt, closure_probe, generate_identifier, mutate, operator_pool, replay
)

__all__ = [
    'DEFAULT_WEIGHTS', 'IdentifierCounter', 'MutationOperator', 'MutationPolicy', 'OperatorPool',
    'TrackedRng', 'adapt', 'closure_probe', 'generate_identifier', 'mutate', 'operator_pool', 'replay'
]
