"""Statistical thermodynamics on the probability simplex.

Configurations are probability vectors ``p = (p_0, ..., p_n)``.  Chart
coordinates, where needed, are ``(p_1, ..., p_n)`` with ``p_0`` eliminated.
Logarithms are natural.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize
from scipy.special import entr

from .errors import (
    BadDimension,
    BoundaryConfiguration,
    DimensionMismatch,
    InvalidConfiguration,
    NonFinite,
)

SUM_TOL = 1e-12
INTERIOR_MARGIN = 1e-12
UNIFORM_EXCLUSION = 1e-12
INVERTIBLE_TOL = 1e-12


def as_configuration(p):
    """Validate and return ``p`` as a float array on the simplex."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise InvalidConfiguration(f"configuration needs at least two entries, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise InvalidConfiguration("configuration has non-finite entries")
    if np.any(p < 0):
        raise InvalidConfiguration("configuration has negative entries")
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise InvalidConfiguration(f"configuration sums to {p.sum()!r}, not 1")
    return p


def from_chart(c):
    """Full configuration from chart coordinates ``(p_1, ..., p_n)``."""
    c = np.asarray(c, dtype=float)
    return np.concatenate(([1.0 - c.sum()], c))


def to_chart(p):
    return np.asarray(p, dtype=float)[1:].copy()


def entropy(p):
    """Shannon entropy ``-sum p_i log p_i`` with ``0 log 0 = 0``."""
    p = as_configuration(p)
    return float(entr(p).sum())


def _same_size(q, p):
    q = as_configuration(q)
    p = as_configuration(p)
    if q.size != p.size:
        raise DimensionMismatch(f"configurations of sizes {q.size} and {p.size}")
    return q, p


def delta_S(q, p):
    """Entropy change of the process ``p -> q``."""
    q, p = _same_size(q, p)
    return entropy(q) - entropy(p)


def is_feasible(q, p, slack=0.0):
    """Second law: the process ``p -> q`` is feasible iff entropy does not drop."""
    return delta_S(q, p) >= -slack


def microcanonical(n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise BadDimension(f"n must be an integer >= 1, got {n!r}")
    return np.full(n + 1, 1.0 / (n + 1))


def entropy_gradient(p):
    """Gradient of the entropy in chart coordinates: ``-(log p_i - log p_0)``."""
    p = as_configuration(p)
    if np.any(p <= 0):
        raise BoundaryConfiguration("entropy is not differentiable on the simplex boundary")
    logp = np.log(p)
    return -(logp[1:] - logp[0])


def is_valid_object(p, n):
    """Interior configuration different from the uniform one."""
    try:
        p = as_configuration(p)
    except InvalidConfiguration:
        return False
    if p.size != n + 1:
        return False
    if p.min() <= INTERIOR_MARGIN:
        return False
    return bool(np.max(np.abs(p - 1.0 / (n + 1))) > UNIFORM_EXCLUSION)


def can_reach(target, p):
    """Whether ``target`` is attainable from ``p`` by a feasible process."""
    target, p = _same_size(target, p)
    n = p.size - 1
    for name, c in (("target", target), ("p", p)):
        if not is_valid_object(c, n):
            raise InvalidConfiguration(f"{name} is not a valid object (interior, non-uniform)")
    return entropy(target) >= entropy(p)


@dataclass(frozen=True)
class EnergyModel:
    energies: tuple
    temperature: float
    boltzmann: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        if len(self.energies) < 2:
            raise BadDimension("need at least two microstates")
        values = self.energies + (self.temperature, self.boltzmann)
        if not all(math.isfinite(v) for v in values):
            raise NonFinite("energy model has non-finite entries")
        if self.temperature <= 0 or self.boltzmann <= 0:
            raise InvalidConfiguration("temperature and Boltzmann constant must be positive")

    @property
    def kT(self):
        return self.boltzmann * self.temperature

    @property
    def n(self):
        return len(self.energies) - 1


@dataclass(frozen=True)
class GibbsSolution:
    p_eq: np.ndarray
    Z: float
    lambda1: float


def gibbs_equilibrium(model):
    """Boltzmann distribution ``exp(-E_i/kT) / Z``, shifted by ``min E`` for overflow safety."""
    E = np.asarray(model.energies)
    beta = 1.0 / model.kT
    shift = E.min() * beta
    w = np.exp(-(E * beta - shift))
    total = w.sum()
    p = w / total
    with np.errstate(over="ignore"):
        Z = float(total * np.exp(-shift))
    if not (np.all(np.isfinite(p)) and math.isfinite(Z) and Z > 0):
        raise NonFinite("partition function over- or underflows")
    return GibbsSolution(p_eq=p, Z=Z, lambda1=-beta)


def _simplex_grid(n, resolution):
    # All compositions of `resolution` into n+1 parts, scaled to the simplex.
    def rec(k, remaining):
        if k == 0:
            yield (remaining,)
            return
        for i in range(remaining + 1):
            for rest in rec(k - 1, remaining - i):
                yield (i,) + rest

    return np.array(list(rec(n, resolution)), dtype=float) / resolution


def gibbs_bruteforce_oracle(model, resolution=None):
    """Entropy maximizer on the energy level set of the Gibbs solution.

    Dense simplex grid, projected onto the affine constraint set, best point
    refined with SLSQP.  Independent of the exponential closed form except
    for the target mean energy.  Desk scale only (n <= 3).
    """
    n = model.n
    if n > 3:
        raise BadDimension(f"brute-force oracle supports n <= 3, got n={n}")
    E = np.asarray(model.energies)
    target = float(gibbs_equilibrium(model).p_eq @ E)
    if resolution is None:
        resolution = {1: 200, 2: 200, 3: 60}[n]

    A = np.vstack([np.ones(n + 1), E])
    b = np.array([1.0, target])
    if np.ptp(E) == 0:
        A, b = A[:1], b[:1]
    pinv = np.linalg.pinv(A)

    grid = _simplex_grid(n, resolution)
    proj = grid - (grid @ A.T - b) @ pinv.T
    proj = proj[np.all(proj >= 0, axis=1)]
    if proj.size == 0:
        proj = (b @ pinv.T)[None, :]
    start = proj[np.argmax(entr(np.clip(proj, 0, None)).sum(axis=1))]

    def neg_entropy(p):
        return -entr(np.clip(p, 0, None)).sum()

    def neg_entropy_grad(p):
        return np.log(np.clip(p, 1e-300, None)) + 1.0

    constraints = [{"type": "eq", "fun": lambda p, a=a, c=c: a @ p - c} for a, c in zip(A, b)]
    res = scipy.optimize.minimize(
        neg_entropy,
        start,
        jac=neg_entropy_grad,
        method="SLSQP",
        bounds=[(1e-15, 1.0)] * (n + 1),
        constraints=constraints,
        options={"ftol": 1e-15, "maxiter": 500},
    )
    p = np.clip(res.x, 0, None)
    return p / p.sum()
