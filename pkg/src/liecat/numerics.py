"""Dense numerical kernels: rank, nullspaces, finite differences, RK4, expm.

All functions are pure.  Matrices are plain ``numpy.ndarray`` objects.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainExit, LieCatError, NonFinite


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical knobs shared by every computation.

    Parameters
    ----------
    rank_rel_tol : float
        Singular values at or below ``rank_rel_tol * sigma_max`` count as zero.
    fd_step : float
        Finite-difference step.
    ode_steps : int
        RK4 steps per unit of time.
    """

    rank_rel_tol: float = 1e-8
    fd_step: float = 1e-6
    ode_steps: int = 1000

    def __post_init__(self):
        for name in ("rank_rel_tol", "fd_step", "ode_steps"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and strictly positive, got {value!r}")


DEFAULT_TOL = ToleranceConfig()


def as_finite_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.all(np.isfinite(M)):
        raise NonFinite("matrix contains NaN or inf")
    return M


def _singular_values(M):
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def numerical_rank(M, tol=DEFAULT_TOL):
    """Number of singular values above ``rank_rel_tol`` times the largest one."""
    M = as_finite_matrix(M)
    s = _singular_values(M)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel_tol * s[0]))


def _canonical_columns(B):
    # Deterministic representative of span(B): pivoted QR of the orthogonal
    # projector, columns ordered by pivot index, largest entry made positive.
    if B.shape[1] == 0:
        return B
    P = B @ B.T
    Q, _, piv = scipy.linalg.qr(P, pivoting=True)
    k = B.shape[1]
    order = np.argsort(piv[:k])
    Q = Q[:, :k][:, order]
    for j in range(k):
        i = np.argmax(np.abs(Q[:, j]))
        if Q[i, j] < 0:
            Q[:, j] = -Q[:, j]
    return Q + 0.0


def nullspace_basis(M, tol=DEFAULT_TOL):
    """Orthonormal basis of the numerical kernel of ``M``, as columns.

    The basis is canonicalized so that equal kernels give equal bases, and
    kernels spanned by coordinate axes come back as those axes.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(cols)
    M = as_finite_matrix(M)
    if cols == 0:
        return np.zeros((0, 0))
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    r = 0 if s.size == 0 or s[0] == 0.0 else int(np.count_nonzero(s > tol.rank_rel_tol * s[0]))
    return _canonical_columns(Vh[r:].T.copy())


def _probe(f, x, domain):
    if domain is not None and not domain(x):
        return None
    try:
        y = np.atleast_1d(np.asarray(f(x), dtype=float))
    except (LieCatError, ValueError, ArithmeticError):
        return None
    if not np.all(np.isfinite(y)):
        return None
    return y


def fd_jacobian(f, x, tol=DEFAULT_TOL, domain=None):
    """Central-difference Jacobian of ``f`` at ``x``.

    Probe points rejected by ``domain``, or at which ``f`` raises or returns
    non-finite values, trigger a second-order one-sided difference on the
    other side (first order if only one extra probe is available).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    f0 = _probe(f, x, domain)
    if f0 is None:
        raise DomainExit("function undefined at the base point")
    h = tol.fd_step
    J = np.empty((f0.size, x.size))
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        fp = _probe(f, x + e, domain)
        fm = _probe(f, x - e, domain)
        if fp is not None and fm is not None:
            J[:, j] = (fp - fm) / (2 * h)
        elif fp is not None:
            fp2 = _probe(f, x + 2 * e, domain)
            J[:, j] = (fp - f0) / h if fp2 is None else (-3 * f0 + 4 * fp - fp2) / (2 * h)
        elif fm is not None:
            fm2 = _probe(f, x - 2 * e, domain)
            J[:, j] = (f0 - fm) / h if fm2 is None else (3 * f0 - 4 * fm + fm2) / (2 * h)
        else:
            raise DomainExit(f"function undefined on both sides of coordinate {j}")
    return J


def step_count(t, ode_steps):
    """``ceil(|t| * ode_steps)``, ignoring float noise in the product."""
    x = abs(t) * ode_steps
    return int(math.ceil(x - 1e-9 * max(1.0, x)))


def rk4_flow(field, x0, t, tol=DEFAULT_TOL, validity=None):
    """Integrate ``x' = field(x)`` from ``x0`` for time ``t`` with fixed-step RK4.

    Every stage state is checked against ``validity``; on the first failure
    ``DomainExit`` is raised carrying the last step boundary that was valid.
    """
    x = np.asarray(x0, dtype=float).copy()
    if validity is not None and not validity(x):
        raise DomainExit("initial state outside the domain", t_exit=0.0, state=x)
    n = step_count(t, tol.ode_steps)
    if n == 0:
        return x
    dt = t / n

    if validity is None:
        # only finiteness to watch, and a non-finite stage poisons the step result anyway
        for i in range(n):
            k1 = field(x)
            k2 = field(x + 0.5 * dt * k1)
            k3 = field(x + 0.5 * dt * k2)
            k4 = field(x + dt * k3)
            y = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.isfinite(y).all():
                raise DomainExit("trajectory is no longer finite", t_exit=i * dt, state=x)
            x = y
        return x

    def ok(y):
        return np.isfinite(y).all() and validity(y)

    for i in range(n):
        k1 = np.asarray(field(x), dtype=float)
        y = x + 0.5 * dt * k1
        if not ok(y):
            raise DomainExit("trajectory left the domain", t_exit=i * dt, state=x)
        k2 = np.asarray(field(y), dtype=float)
        y = x + 0.5 * dt * k2
        if not ok(y):
            raise DomainExit("trajectory left the domain", t_exit=i * dt, state=x)
        k3 = np.asarray(field(y), dtype=float)
        y = x + dt * k3
        if not ok(y):
            raise DomainExit("trajectory left the domain", t_exit=i * dt, state=x)
        k4 = np.asarray(field(y), dtype=float)
        y = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not ok(y):
            raise DomainExit("trajectory left the domain", t_exit=i * dt, state=x)
        x = y
    return x


def matrix_exp_oracle(A):
    """Matrix exponential by scaling and squaring of a truncated Taylor series.

    Kept independent of the ODE path so it can serve as a reference.
    """
    A = as_finite_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("matrix_exp_oracle needs a square matrix")
    n = A.shape[0]
    norm = np.linalg.norm(A, 1)
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    B = A / 2.0**s
    term = np.eye(n)
    E = np.eye(n)
    for k in range(1, 20):
        term = term @ B / k
        E = E + term
    for _ in range(s):
        E = E @ E
    return E
