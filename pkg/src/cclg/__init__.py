"""Constraint categorial grammars over feature descriptions.

Typed lambda terms over feature constraints, a rewrite-based solver
producing solved forms, a grammar DSL, and a chart parser that yields
satisfiable normal-form readings.
"""

__version__ = "0.1.0"
