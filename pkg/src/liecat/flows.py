"""Left-invariant vector fields, their flows, the exponential map, brackets, anchors.

A section of the left algebroid is given by constant coefficients in the
``ker dt`` frame returned by ``ker_dt_basis_at_unit``.  Its left-invariant
extension at ``g`` is ``d(L_g)`` at ``1_{s(g)}`` applied to that vector.
"""

from dataclasses import dataclass

import numpy as np

from .categories import (
    HalfSpaceMonoid,
    Realization,
    _BilinearMonoid,
    MatrixMonoid,
    VectorGroup,
    check_morphism,
    check_object,
)
from .errors import (
    DomainExit,
    NonFinite,
    NotHomomorphism,
    OutwardVector,
    ProjectionError,
    UnsupportedFamily,
)
from .numerics import DEFAULT_TOL, fd_jacobian, rk4_flow

BRACKET_STEP = 1e-3
PROJECTION_TOL = 1e-4


@dataclass(frozen=True)
class SectionSpec:
    """Constant-coefficient section.

    ``mode="constant-coefficients"`` reads ``coeffs`` in the ``ker dt`` frame;
    ``mode="monoid-vector"`` reads them as ambient tangent coordinates at the
    identity of a monoid (the two agree for the built-in monoids).
    """

    coeffs: tuple
    mode: str = "constant-coefficients"

    def __post_init__(self):
        coeffs = tuple(float(c) for c in np.atleast_1d(self.coeffs))
        if not np.all(np.isfinite(coeffs)):
            raise NonFinite("section coefficients must be finite")
        if self.mode not in ("constant-coefficients", "monoid-vector"):
            raise ValueError(f"unknown section mode {self.mode!r}")
        object.__setattr__(self, "coeffs", coeffs)

    def vector_at(self, C, x, tol=DEFAULT_TOL, side="left"):
        c = np.asarray(self.coeffs)
        if self.mode == "monoid-vector":
            if not C.is_monoid:
                raise UnsupportedFamily("monoid-vector sections need a monoid")
            if c.size != C.dim_morphisms:
                raise ValueError(f"expected {C.dim_morphisms} coefficients, got {c.size}")
            return c
        B = C.ker_dt_basis(x, tol) if side == "left" else C.ker_ds_basis(x, tol)
        if c.size != B.shape[1]:
            raise ValueError(f"expected {B.shape[1]} coefficients, got {c.size}")
        return B @ c


@dataclass(frozen=True)
class TangentAtUnit:
    base: np.ndarray
    vector: np.ndarray


@dataclass(frozen=True)
class FlowResult:
    endpoint: np.ndarray
    t_reached: float
    exited: bool


def as_section(alpha):
    return alpha if isinstance(alpha, SectionSpec) else SectionSpec(alpha)


def tangent_at_unit(C, alpha, x, tol=DEFAULT_TOL):
    x = check_object(C, x)
    alpha = as_section(alpha)
    B = C.ker_dt_basis(x, tol)
    v = alpha.vector_at(C, x, tol)
    coords, *_ = np.linalg.lstsq(B, v, rcond=None)
    return TangentAtUnit(base=x, vector=coords)


def _left_field(C, alpha, g, tol):
    x = C._source(g)
    v = alpha.vector_at(C, x, tol)
    if not np.any(v):
        return np.zeros(C.dim_morphisms)
    return _left_translate(C, g, v, tol)


def _left_translate(C, g, v, tol):
    if isinstance(C, _BilinearMonoid):
        # L_g is linear, so d(L_g) v = g v
        return C._compose(g, v)
    if isinstance(C, VectorGroup):
        return v.copy()
    return C.left_differential(g, C._unit(C._source(g)), v[:, None], tol)[:, 0]


def _right_field(C, alpha, g, tol):
    y = C._target(g)
    v = alpha.vector_at(C, y, tol, side="right")
    if not np.any(v):
        return np.zeros(C.dim_morphisms)
    if isinstance(C, _BilinearMonoid):
        return C._compose(v, g)
    if isinstance(C, VectorGroup):
        return v.copy()
    return C.right_differential(g, C._unit(y), v[:, None], tol)[:, 0]


def left_invariant_eval(C, alpha, g, tol=DEFAULT_TOL):
    """Value of the left-invariant extension of ``alpha`` at ``g``, ambient coordinates."""
    return _left_field(C, as_section(alpha), check_morphism(C, g), tol)


def right_invariant_eval(C, alpha, g, tol=DEFAULT_TOL):
    """Mirror of ``left_invariant_eval``: ``d(R_g)`` at ``1_{t(g)}`` on the ``ker ds`` frame."""
    return _right_field(C, as_section(alpha), check_morphism(C, g), tol)


def flow_left_invariant(C, alpha, g, t, tol=DEFAULT_TOL):
    """Integrate the left-invariant field of ``alpha`` from ``g`` for time ``t``.

    The morphism manifold is the integration domain.  Leaving it is reported
    through ``exited`` with the last valid step boundary in ``t_reached``.
    """
    alpha = as_section(alpha)
    g = check_morphism(C, g)
    if isinstance(C, _BilinearMonoid):
        # k -> k v is linear in k; vec(k v) = right_matrix(v) vec(k)
        R = C.right_matrix(alpha.vector_at(C, np.zeros(0), tol))

        def field(k):
            return R @ k
    elif C.is_monoid:
        v = alpha.vector_at(C, np.zeros(0), tol)

        def field(k):
            return _left_translate(C, k, v, tol)
    else:
        def field(k):
            return _left_field(C, alpha, k, tol)
    # families without a boundary only need the finiteness check rk4 always does
    unbounded = type(C)._valid_morphism is Realization._valid_morphism
    try:
        end = rk4_flow(field, g, t, tol, validity=None if unbounded else C.is_valid_morphism)
    except DomainExit as exc:
        return FlowResult(endpoint=exc.state, t_reached=float(np.sign(t) * abs(exc.t_exit)), exited=True)
    if not np.all(np.isfinite(end)):
        raise NonFinite("flow diverged")
    return FlowResult(endpoint=end, t_reached=float(t), exited=False)


def _require_monoid(M):
    if not M.is_monoid:
        raise UnsupportedFamily(f"{M.family} is not a monoid")


def is_inward(M, v, tol=DEFAULT_TOL):
    """Chart test for the inward cone at the identity: ``e + fd_step * v`` stays in ``M``."""
    _require_monoid(M)
    return M.is_valid_morphism(M.identity + tol.fd_step * np.asarray(v, dtype=float))


def exp_monoid(M, v, tol=DEFAULT_TOL):
    """Time-one flow of the left-invariant extension of ``v`` from the identity."""
    _require_monoid(M)
    v = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise NonFinite("vector must be finite")
    if not is_inward(M, v, tol):
        raise OutwardVector("vector points out of the monoid at the identity")
    res = flow_left_invariant(M, SectionSpec(v, "monoid-vector"), M.identity, 1.0, tol)
    if res.exited:
        raise OutwardVector(f"flow left the monoid at t={res.t_reached}")
    return res.endpoint


def _flow_endpoint(C, alpha, g, t, tol):
    res = flow_left_invariant(C, alpha, g, t, tol)
    if res.exited:
        raise DomainExit("flow left the category while computing a bracket", t_exit=res.t_reached)
    return res.endpoint


def bracket_at_unit(C, alpha, beta, x=None, tol=DEFAULT_TOL, h=BRACKET_STEP):
    """Lie bracket of two left-invariant fields at ``1_x``, in ``ker dt`` frame coordinates.

    Uses the flow commutator ``phi^b_{-h} phi^a_{-h} phi^b_h phi^a_h (p) = p + h^2 [a, b] + O(h^3)``
    at ``h`` and ``h/2`` with one Richardson step.
    """
    x = np.zeros(0) if x is None else np.asarray(x, dtype=float).reshape(-1)
    x = check_object(C, x)
    alpha, beta = as_section(alpha), as_section(beta)
    p = C._unit(x)

    def commutator(step):
        k = _flow_endpoint(C, alpha, p, step, tol)
        k = _flow_endpoint(C, beta, k, step, tol)
        k = _flow_endpoint(C, alpha, k, -step, tol)
        k = _flow_endpoint(C, beta, k, -step, tol)
        return (k - p) / step**2

    ambient = 2.0 * commutator(h / 2) - commutator(h)
    B = C.ker_dt_basis(x, tol)
    coords, *_ = np.linalg.lstsq(B, ambient, rcond=None)
    residual = np.linalg.norm(B @ coords - ambient)
    if residual > PROJECTION_TOL:
        raise ProjectionError(f"bracket leaves the ker dt frame (residual {residual:.3g})")
    if not np.all(np.isfinite(coords)):
        raise NonFinite("bracket is not finite")
    return coords


def anchor_matrix(C, x=None, tol=DEFAULT_TOL, side="left"):
    """``ds`` on ``ker dt`` at ``1_x`` (left), or ``dt`` on ``ker ds`` (right)."""
    x = np.zeros(0) if x is None else np.asarray(x, dtype=float).reshape(-1)
    x = check_object(C, x)
    u = C._unit(x)
    if side == "left":
        return C.source_jacobian(u, tol) @ C.ker_dt_basis(x, tol)
    return C.target_jacobian(u, tol) @ C.ker_ds_basis(x, tol)


# --------------------------------------------------------------------------
# monoid homomorphisms and naturality of exp


@dataclass(frozen=True)
class MonoidMap:
    name: str
    source: object
    target: object
    fn: object

    def __call__(self, g):
        return np.atleast_1d(np.asarray(self.fn(np.asarray(g, dtype=float)), dtype=float))

    def differential(self, v, tol=DEFAULT_TOL):
        e = self.source.identity
        J = fd_jacobian(self, e, tol, domain=self.source.is_valid_morphism)
        return J @ np.asarray(v, dtype=float)


def builtin_homomorphism(name, M):
    """``det`` (MatrixMonoid(n) -> MatrixMonoid(1)), ``identity`` (M -> M),
    ``boundary_inclusion`` (VectorGroup(n-1) -> HalfSpaceMonoid(n))."""
    if name == "det":
        if not isinstance(M, MatrixMonoid):
            raise UnsupportedFamily("det is defined on matrix monoids")
        return MonoidMap("det", M, MatrixMonoid(1), lambda g: np.linalg.det(g.reshape(M.n, M.n)))
    if name == "identity":
        return MonoidMap("identity", M, M, lambda g: g)
    if name == "boundary_inclusion":
        if not isinstance(M, HalfSpaceMonoid):
            raise UnsupportedFamily("boundary_inclusion targets a half-space monoid")
        return MonoidMap("boundary_inclusion", VectorGroup(M.n - 1), M, lambda g: np.append(g, 0.0))
    raise ValueError(f"unknown homomorphism {name!r}")


def check_homomorphism(phi, samples=5, seed=0, atol=1e-9):
    M, N = phi.source, phi.target
    if np.max(np.abs(phi(M.identity) - N.identity)) > atol:
        raise NotHomomorphism(f"{phi.name} does not preserve the identity")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        g, h = M.sample_morphism(rng), M.sample_morphism(rng)
        lhs = phi(M._compose(g, h))
        rhs = N._compose(phi(g), phi(h))
        if np.max(np.abs(lhs - rhs)) > atol * (1.0 + np.max(np.abs(lhs))):
            raise NotHomomorphism(f"{phi.name} does not preserve products")


def naturality_check(phi, v, t_grid, tol=DEFAULT_TOL):
    """Max over ``t`` of ``|phi(exp_M(t v)) - exp_N(t dphi(v))|``."""
    check_homomorphism(phi)
    M, N = phi.source, phi.target
    v = np.asarray(v, dtype=float).reshape(-1)
    dv = phi.differential(v, tol)
    worst = 0.0
    for t in t_grid:
        lhs = phi(exp_monoid(M, t * v, tol))
        rhs = exp_monoid(N, t * dv, tol)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst
