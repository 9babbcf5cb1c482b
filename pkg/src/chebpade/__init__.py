"""Diagonal Padé approximants of Cauchy transforms on three-point Chebotarev continua.

Modules, in pipeline order: ``mpnum`` (precision and elliptic functions),
``chebotarev`` (center, arc masses, arcs), ``surface`` (the genus-1 surface,
Abel map, Jacobi inversion), ``szego`` (Szegő functions and S_n), ``pade``
(moments, approximants, errors), ``analysis`` (spurious poles, rates, orbits)
and ``cli``.
"""

__version__ = "0.1.0"
