"""Left/right ranks of morphisms, regularity, invertibility and core probes.

The left rank of ``g`` is the rank of ``d(L_g)`` at the unit ``1_{s(g)}``
restricted to the tangent space of the target fibre; the right rank uses
``d(R_g)`` at ``1_{t(g)}`` on the source fibre.  A morphism is regular when
both equal ``delta = dim C - dim X``.
"""

from dataclasses import dataclass

import numpy as np

from .categories import check_morphism
from .errors import NotInvertible, UnsupportedFamily
from .numerics import DEFAULT_TOL, ToleranceConfig, numerical_rank


@dataclass(frozen=True)
class RankReport:
    left_rank: int
    right_rank: int
    delta: int
    regular: bool
    tolerance: ToleranceConfig


def left_differential_at_unit(C, g, tol=DEFAULT_TOL):
    g = check_morphism(C, g)
    x = C._source(g)
    return C.left_differential(g, C._unit(x), C.ker_dt_basis(x, tol), tol)


def right_differential_at_unit(C, g, tol=DEFAULT_TOL):
    g = check_morphism(C, g)
    x = C._target(g)
    return C.right_differential(g, C._unit(x), C.ker_ds_basis(x, tol), tol)


def left_rank(C, g, tol=DEFAULT_TOL):
    return numerical_rank(left_differential_at_unit(C, g, tol), tol)


def right_rank(C, g, tol=DEFAULT_TOL):
    return numerical_rank(right_differential_at_unit(C, g, tol), tol)


def rank_report(C, g, tol=DEFAULT_TOL):
    lr, rr = left_rank(C, g, tol), right_rank(C, g, tol)
    d = C.delta
    return RankReport(lr, rr, d, lr == d and rr == d, tol)


def constant_rank_probe(C, g, samples=10, seed=0, tol=DEFAULT_TOL, scale=0.1):
    """Sample the fibres near the units and check that both ranks never change.

    Left translation is probed at points ``h`` with ``t(h) = s(g)``, right
    translation at points with ``s(h) = t(g)``; each rank is compared with
    its value at the unit.
    """
    g = check_morphism(C, g)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    x, y = C._source(g), C._target(g)
    lr, rr = left_rank(C, g, tol), right_rank(C, g, tol)
    for _ in range(samples):
        h = C.sample_t_fibre(x, rng, scale)
        if numerical_rank(C.left_differential(g, h, C.ker_dt_basis_at(h, tol), tol), tol) != lr:
            return False
        h = C.sample_s_fibre(y, rng, scale)
        if numerical_rank(C.right_differential(g, h, C.ker_ds_basis_at(h, tol), tol), tol) != rr:
            return False
    return True


def is_invertible(C, g, tol=DEFAULT_TOL):
    g = check_morphism(C, g)
    try:
        return C.is_invertible(g, tol)
    except NotImplementedError as exc:
        raise UnsupportedFamily(str(exc)) from None


def core_probe(C, g, radius=0.01, samples=100, seed=0, tol=DEFAULT_TOL):
    """Fraction of random morphisms near the invertible ``g`` that are invertible.

    A value of 1.0 witnesses openness of the core around ``g``.  For families
    whose invertibles sit in the boundary, candidates are drawn from the
    boundary stratum.
    """
    g = check_morphism(C, g)
    if not is_invertible(C, g, tol):
        raise NotInvertible("core_probe needs an invertible morphism")
    rng = np.random.default_rng(seed)
    hits = sum(is_invertible(C, C.sample_core_candidate(g, radius, rng), tol) for _ in range(samples))
    return hits / samples
