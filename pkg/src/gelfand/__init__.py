"""Radial solutions of -Delta u = lambda f(u) on the unit disk.

Modules: ``expr`` (expressions for f), ``nonlinearity`` (conditions and the
supercriticality constant), ``shoot`` (radial shooting), ``curve`` (the
bifurcation diagram), ``spectrum`` (Morse indices), ``verify`` (invariant
checks) and ``cli``.
"""

__version__ = "0.1.0"
