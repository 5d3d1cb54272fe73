"""
Curb - entity-network simulations whose update rules rewrite themselves
"""
__version__ = "0.1.0"
