"""Bundled rule generators"""

from .rule_library import IDENTITY_SOURCE, elementary_rule_source, life_like_rule_source, parse_life_rule

__all__ = ['IDENTITY_SOURCE', 'elementary_rule_source', 'life_like_rule_source', 'parse_life_rule']
