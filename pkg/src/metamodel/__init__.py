"""
System metamodel: state domains, topologies and the virtual/metastable/actual pipeline.

The regime operations live in src.metamodel.system; only the leaf types are
re-exported here so the rule language can depend on them.
"""

from .states import DomainKind, StateDomain, StateValue
from .topology import Milieu, Neighborhood, TopologyKind, TopologySpec, build_topology

__all__ = [
    'DomainKind', 'StateDomain', 'StateValue',
    'Milieu', 'Neighborhood', 'TopologyKind', 'TopologySpec', 'build_topology'
]
