"""Chart-level realizations of concrete Lie categories and Lie monoids.

A realization works in global chart coordinates.  Morphisms and objects are
plain 1-D float arrays of length ``dim_morphisms`` and ``dim_objects``; the
module-level functions (``source``, ``compose``, ...) validate their inputs
and delegate to the family.

Families
--------
MatrixMonoid(n)            n x n real matrices, row-major, under multiplication
AlgebraMonoid(spec)        finite-dimensional unital algebra from structure constants
HalfSpaceMonoid(n)         R^{n-1} x [0, inf) under addition
VectorGroup(n)             R^n under addition
TrivialCategory(d, inner)  X x M x X with X = R^d
OrderCategory()            {(y, x) : x <= y}, source x, target y
EntropyCategory(n)         {(q, p) : S(q) >= S(p)} over the punctured open simplex
ActionCategory(...)        regular points of a monoid action on R^d
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import thermo
from .errors import (
    InvalidAlgebra,
    InvalidMorphism,
    InvalidObject,
    InvalidResult,
    NonFinite,
    NotComposable,
    SamplerUnavailable,
)
from .numerics import DEFAULT_TOL, fd_jacobian, nullspace_basis, numerical_rank

COMPOSABLE_TOL = 1e-9
ALGEBRA_TOL = 1e-12
DET_REL_TOL = 1e-10

_EMPTY = np.zeros(0)


def _vec(v):
    return np.atleast_1d(np.asarray(v, dtype=float))


class Realization:
    """Base class.  Subclasses fill in the structure maps in chart coordinates."""

    family = "Realization"
    dim_morphisms = 0
    dim_objects = 0
    is_monoid = False

    @property
    def delta(self):
        return self.dim_morphisms - self.dim_objects

    # structure maps, inputs already validated
    def _source(self, g):
        raise NotImplementedError

    def _target(self, g):
        raise NotImplementedError

    def _unit(self, x):
        raise NotImplementedError

    def _compose(self, g, h):
        raise NotImplementedError

    def _valid_morphism(self, g):
        return True

    def _valid_object(self, x):
        return True

    def is_valid_morphism(self, g):
        g = _vec(g)
        return g.size == self.dim_morphisms and bool(np.all(np.isfinite(g))) and self._valid_morphism(g)

    def is_valid_object(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        return x.size == self.dim_objects and bool(np.all(np.isfinite(x))) and self._valid_object(x)

    # tangent data; subclasses override with exact values where they are known
    def target_jacobian(self, g, tol=DEFAULT_TOL):
        return fd_jacobian(self._target, g, tol, domain=self.is_valid_morphism).reshape(self.dim_objects, -1)

    def source_jacobian(self, g, tol=DEFAULT_TOL):
        return fd_jacobian(self._source, g, tol, domain=self.is_valid_morphism).reshape(self.dim_objects, -1)

    def left_differential(self, g, h, basis, tol=DEFAULT_TOL):
        """``d(L_g)_h`` applied to the columns of ``basis`` (tangent at ``h``)."""
        return _restricted_fd(lambda k: self._checked_compose(g, k), h, basis, tol, self.is_valid_morphism)

    def right_differential(self, g, h, basis, tol=DEFAULT_TOL):
        """``d(R_g)_h`` applied to the columns of ``basis``."""
        return _restricted_fd(lambda k: self._checked_compose(k, g), h, basis, tol, self.is_valid_morphism)

    def _checked_compose(self, g, h):
        if not self.is_valid_morphism(h) or not self.is_valid_morphism(g):
            raise InvalidMorphism("probe left the morphism manifold")
        if not self._composable(g, h):
            raise NotComposable("probe is not composable")
        return self._compose(g, h)

    def _composable(self, g, h):
        if self.dim_objects == 0:
            return True
        return bool(np.max(np.abs(self._source(g) - self._target(h))) <= COMPOSABLE_TOL)

    # Families whose s and t are coordinate projections list the projected
    # coordinates here; their kernels are then the complementary axes, which is
    # what the canonicalized SVD route returns anyway, minus the cost.
    target_coords = None
    source_coords = None

    def _axes_without(self, coords):
        keep = np.ones(self.dim_morphisms, dtype=bool)
        keep[list(coords)] = False
        return np.eye(self.dim_morphisms)[:, keep]

    def ker_dt_basis(self, x, tol=DEFAULT_TOL):
        if self.target_coords is not None:
            return self._axes_without(self.target_coords)
        return nullspace_basis(self.target_jacobian(self._unit(x), tol), tol)

    def ker_ds_basis(self, x, tol=DEFAULT_TOL):
        if self.source_coords is not None:
            return self._axes_without(self.source_coords)
        return nullspace_basis(self.source_jacobian(self._unit(x), tol), tol)

    def ker_dt_basis_at(self, h, tol=DEFAULT_TOL):
        if self.target_coords is not None:
            return self._axes_without(self.target_coords)
        return nullspace_basis(self.target_jacobian(h, tol), tol)

    def ker_ds_basis_at(self, h, tol=DEFAULT_TOL):
        if self.source_coords is not None:
            return self._axes_without(self.source_coords)
        return nullspace_basis(self.source_jacobian(h, tol), tol)

    def is_invertible(self, g, tol=DEFAULT_TOL):
        raise NotImplementedError(f"no invertibility test for {self.family}")

    def sample_t_fibre(self, x, rng, scale):
        """A random morphism ``h`` with ``t(h) = x`` near ``1_x``."""
        raise SamplerUnavailable(f"no fibre sampler for {self.family}")

    def sample_s_fibre(self, x, rng, scale):
        """A random morphism ``h`` with ``s(h) = x`` near ``1_x``."""
        raise SamplerUnavailable(f"no fibre sampler for {self.family}")

    def sample_morphism(self, rng):
        raise SamplerUnavailable(f"no morphism sampler for {self.family}")

    def sample_core_candidate(self, g, radius, rng):
        """A random valid morphism within ``radius`` of the invertible ``g``.

        Families whose invertibles lie in the boundary sample inside the
        boundary, where the core is open.
        """
        for _ in range(1000):
            k = g + radius * rng.uniform(-1, 1, size=g.size)
            if self.is_valid_morphism(k):
                return k
        raise SamplerUnavailable("could not sample a valid morphism near g")

    def spec_fields(self):
        return {"family": self.family}


def _restricted_fd(f, h, basis, tol, domain):
    h = _vec(h)
    if basis.shape[1] == 0:
        return np.zeros((h.size, 0))

    def along(c):
        return f(h + basis @ c)

    return fd_jacobian(along, np.zeros(basis.shape[1]), tol,
                       domain=lambda c: domain(h + basis @ c))


# --------------------------------------------------------------------------
# monoids


class _Monoid(Realization):
    is_monoid = True
    dim_objects = 0

    def _source(self, g):
        return _EMPTY

    _target = _source

    def _unit(self, x):
        return self.identity.copy()

    def target_jacobian(self, g, tol=DEFAULT_TOL):
        return np.zeros((0, self.dim_morphisms))

    source_jacobian = target_jacobian

    def ker_dt_basis(self, x, tol=DEFAULT_TOL):
        return np.eye(self.dim_morphisms)

    ker_ds_basis = ker_dt_basis

    def ker_dt_basis_at(self, h, tol=DEFAULT_TOL):
        return np.eye(self.dim_morphisms)

    ker_ds_basis_at = ker_dt_basis_at

    def sample_t_fibre(self, x, rng, scale):
        for _ in range(1000):
            h = self.identity + scale * rng.standard_normal(self.dim_morphisms)
            if self.is_valid_morphism(h):
                return h
        raise SamplerUnavailable("could not sample a valid element")

    sample_s_fibre = sample_t_fibre

    def sample_morphism(self, rng):
        return self.sample_t_fibre(_EMPTY, rng, 1.0)


class _BilinearMonoid(_Monoid):
    """Monoids with bilinear product; translations are linear, so exact."""

    def left_matrix(self, g):
        raise NotImplementedError

    def right_matrix(self, g):
        raise NotImplementedError

    def left_differential(self, g, h, basis, tol=DEFAULT_TOL):
        return self.left_matrix(_vec(g)) @ basis

    def right_differential(self, g, h, basis, tol=DEFAULT_TOL):
        return self.right_matrix(_vec(g)) @ basis


@dataclass(frozen=True, eq=False)
class MatrixMonoid(_BilinearMonoid):
    n: int
    family = "MatrixMonoid"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def dim_morphisms(self):
        return self.n * self.n

    @property
    def identity(self):
        return np.eye(self.n).reshape(-1)

    def matrix(self, g):
        return _vec(g).reshape(self.n, self.n)

    def _compose(self, g, h):
        return (self.matrix(g) @ self.matrix(h)).reshape(-1)

    def left_matrix(self, g):
        # row-major vec(A H) = (A kron I) vec(H)
        return np.kron(self.matrix(g), np.eye(self.n))

    def right_matrix(self, g):
        return np.kron(np.eye(self.n), self.matrix(g).T)

    def is_invertible(self, g, tol=DEFAULT_TOL):
        A = self.matrix(g)
        scale = 1.0 + np.linalg.norm(A, 2) ** self.n
        return bool(abs(np.linalg.det(A)) > DET_REL_TOL * scale)

    def spec_fields(self):
        return {"family": self.family, "n": self.n}


@dataclass(frozen=True)
class AlgebraSpec:
    """Unital algebra with ``e_i e_j = sum_k c[i, j, k] e_k``."""

    structure_constants: np.ndarray
    unit_coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        u = np.asarray(self.unit_coords, dtype=float).reshape(-1)
        d = u.size
        if c.size != d**3:
            raise InvalidAlgebra(f"need {d**3} structure constants for dimension {d}, got {c.size}")
        c = c.reshape(d, d, d)
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(u))):
            raise InvalidAlgebra("structure constants or unit are not finite")
        object.__setattr__(self, "structure_constants", c)
        object.__setattr__(self, "unit_coords", u)
        self.validate()

    @property
    def dim(self):
        return self.unit_coords.size

    def product(self, x, y):
        return np.einsum("i,j,ijk->k", x, y, self.structure_constants)

    def validate(self):
        c = self.structure_constants
        lhs = np.einsum("ijm,mkl->ijkl", c, c)
        rhs = np.einsum("jkm,iml->ijkl", c, c)
        err = np.max(np.abs(lhs - rhs)) if c.size else 0.0
        if err > ALGEBRA_TOL:
            raise InvalidAlgebra(f"structure constants are not associative (defect {err:.3g})")
        eye = np.eye(self.dim)
        left = np.einsum("i,ijk->jk", self.unit_coords, c)
        right = np.einsum("j,ijk->ik", self.unit_coords, c)
        err = max(np.max(np.abs(left - eye)), np.max(np.abs(right - eye)))
        if err > ALGEBRA_TOL:
            raise InvalidAlgebra(f"unit_coords is not a two-sided unit (defect {err:.3g})")


def upper_triangular_algebra():
    """Upper-triangular 2x2 matrices in the basis a = E11, b = E22, c = E12."""
    c = np.zeros((3, 3, 3))
    a_, b_, c_ = 0, 1, 2
    c[a_, a_, a_] = 1.0   # a a = a
    c[a_, c_, c_] = 1.0   # a c = c
    c[b_, b_, b_] = 1.0   # b b = b
    c[c_, b_, c_] = 1.0   # c b = c
    return AlgebraSpec(c, np.array([1.0, 1.0, 0.0]))


@dataclass(frozen=True, eq=False)
class AlgebraMonoid(_BilinearMonoid):
    spec: AlgebraSpec
    family = "AlgebraMonoid"

    @property
    def dim_morphisms(self):
        return self.spec.dim

    @property
    def identity(self):
        return self.spec.unit_coords.copy()

    def _compose(self, g, h):
        return self.spec.product(g, h)

    def left_matrix(self, g):
        return np.einsum("i,ijk->kj", g, self.spec.structure_constants)

    def right_matrix(self, g):
        return np.einsum("j,ijk->ki", g, self.spec.structure_constants)

    def is_invertible(self, g, tol=DEFAULT_TOL):
        g = _vec(g)
        e = self.identity
        x, *_ = np.linalg.lstsq(self.left_matrix(g), e, rcond=None)
        y, *_ = np.linalg.lstsq(self.right_matrix(g), e, rcond=None)
        scale = 1.0 + np.linalg.norm(g)
        res = max(np.linalg.norm(self.spec.product(g, x) - e), np.linalg.norm(self.spec.product(y, g) - e))
        return bool(res <= 1e-9 * scale and np.linalg.norm(x - y) <= 1e-9 * (1.0 + np.linalg.norm(x)))

    def spec_fields(self):
        return {
            "family": self.family,
            "structure_constants": self.spec.structure_constants.reshape(-1),
            "unit_coords": self.spec.unit_coords,
        }


@dataclass(frozen=True, eq=False)
class VectorGroup(_Monoid):
    n: int
    family = "VectorGroup"

    @property
    def dim_morphisms(self):
        return self.n

    @property
    def identity(self):
        return np.zeros(self.n)

    def _compose(self, g, h):
        return g + h

    def left_differential(self, g, h, basis, tol=DEFAULT_TOL):
        return basis.copy()

    right_differential = left_differential

    def is_invertible(self, g, tol=DEFAULT_TOL):
        return True

    def spec_fields(self):
        return {"family": self.family, "n": self.n}


@dataclass(frozen=True, eq=False)
class HalfSpaceMonoid(VectorGroup):
    """``R^{n-1} x [0, inf)`` under addition; the unit lies on the boundary."""

    family = "HalfSpaceMonoid"

    def _valid_morphism(self, g):
        return g[-1] >= 0.0

    def is_invertible(self, g, tol=DEFAULT_TOL):
        return bool(_vec(g)[-1] == 0.0)

    def sample_t_fibre(self, x, rng, scale):
        h = scale * rng.standard_normal(self.n)
        h[-1] = abs(h[-1])
        return h

    sample_s_fibre = sample_t_fibre

    def sample_core_candidate(self, g, radius, rng):
        k = g + radius * rng.uniform(-1, 1, size=self.n)
        k[-1] = 0.0
        return k


# --------------------------------------------------------------------------
# categories with a nontrivial object manifold


@dataclass(frozen=True, eq=False)
class TrivialCategory(Realization):
    """``X x M x X`` with ``s = pr3``, ``t = pr1``, ``(z,g,y)(y,h,x) = (z,gh,x)``."""

    dim_X: int
    inner: Realization
    family = "TrivialCategory"

    def __post_init__(self):
        if not self.inner.is_monoid:
            raise ValueError("inner realization must be a monoid")

    @property
    def dim_objects(self):
        return self.dim_X

    @property
    def dim_morphisms(self):
        return 2 * self.dim_X + self.inner.dim_morphisms

    @property
    def target_coords(self):
        return np.arange(self.dim_X)

    @property
    def source_coords(self):
        return np.arange(self.dim_morphisms - self.dim_X, self.dim_morphisms)

    def split(self, g):
        d = self.dim_X
        return g[:d], g[d:-d] if d else g[d:], g[-d:] if d else _EMPTY

    def _source(self, g):
        return self.split(g)[2]

    def _target(self, g):
        return self.split(g)[0]

    def _unit(self, x):
        return np.concatenate((x, self.inner.identity, x))

    def _compose(self, g, h):
        z, a, _ = self.split(g)
        _, b, x = self.split(h)
        return np.concatenate((z, self.inner._compose(a, b), x))

    def _valid_morphism(self, g):
        return self.inner.is_valid_morphism(self.split(g)[1])

    def target_jacobian(self, g, tol=DEFAULT_TOL):
        d, m = self.dim_X, self.inner.dim_morphisms
        return np.hstack((np.eye(d), np.zeros((d, m + d))))

    def source_jacobian(self, g, tol=DEFAULT_TOL):
        d, m = self.dim_X, self.inner.dim_morphisms
        return np.hstack((np.zeros((d, d + m)), np.eye(d)))

    def left_differential(self, g, h, basis, tol=DEFAULT_TOL):
        # L_g(y, b, x) = (z, a b, x): the first block is frozen
        d, m = self.dim_X, self.inner.dim_morphisms
        a, b = self.split(_vec(g))[1], self.split(_vec(h))[1]
        J = np.zeros((self.dim_morphisms, self.dim_morphisms))
        J[d:d + m, d:d + m] = self.inner.left_differential(a, b, np.eye(m), tol)
        J[d + m:, d + m:] = np.eye(d)
        return J @ basis

    def right_differential(self, g, h, basis, tol=DEFAULT_TOL):
        d, m = self.dim_X, self.inner.dim_morphisms
        a, b = self.split(_vec(g))[1], self.split(_vec(h))[1]
        J = np.zeros((self.dim_morphisms, self.dim_morphisms))
        J[:d, :d] = np.eye(d)
        J[d:d + m, d:d + m] = self.inner.right_differential(a, b, np.eye(m), tol)
        return J @ basis

    def is_invertible(self, g, tol=DEFAULT_TOL):
        return self.inner.is_invertible(self.split(_vec(g))[1], tol)

    def sample_t_fibre(self, x, rng, scale):
        a = self.inner.sample_t_fibre(_EMPTY, rng, scale)
        y = x + scale * rng.standard_normal(self.dim_X)
        return np.concatenate((x, a, y))

    def sample_s_fibre(self, x, rng, scale):
        a = self.inner.sample_s_fibre(_EMPTY, rng, scale)
        z = x + scale * rng.standard_normal(self.dim_X)
        return np.concatenate((z, a, x))

    def sample_morphism(self, rng):
        a = self.inner.sample_morphism(rng)
        return np.concatenate((rng.standard_normal(self.dim_X), a, rng.standard_normal(self.dim_X)))

    def sample_core_candidate(self, g, radius, rng):
        z, a, x = self.split(_vec(g))
        a = self.inner.sample_core_candidate(a, radius, rng)
        z = z + radius * rng.uniform(-1, 1, size=z.size)
        x = x + radius * rng.uniform(-1, 1, size=x.size)
        return np.concatenate((z, a, x))

    def spec_fields(self):
        fields = {"family": self.family, "dim_X": self.dim_X}
        inner = self.inner.spec_fields()
        fields["inner"] = inner.pop("family")
        fields.update(inner)
        return fields


@dataclass(frozen=True, eq=False)
class OrderCategory(Realization):
    """Morphisms ``(y, x)`` with ``x <= y``; ``s = x``, ``t = y``."""

    family = "OrderCategory"
    dim_morphisms = 2
    dim_objects = 1
    target_coords = (0,)
    source_coords = (1,)

    def _source(self, g):
        return g[1:2]

    def _target(self, g):
        return g[0:1]

    def _unit(self, x):
        return np.array([x[0], x[0]])

    def _compose(self, g, h):
        return np.array([g[0], h[1]])

    def _valid_morphism(self, g):
        # exact: the diagonal is the boundary and carries every invertible
        return g[1] <= g[0]

    def target_jacobian(self, g, tol=DEFAULT_TOL):
        return np.array([[1.0, 0.0]])

    def source_jacobian(self, g, tol=DEFAULT_TOL):
        return np.array([[0.0, 1.0]])

    def left_differential(self, g, h, basis, tol=DEFAULT_TOL):
        # g (y', x') = (g_0, x')
        return np.array([[0.0, 0.0], [0.0, 1.0]]) @ basis

    def right_differential(self, g, h, basis, tol=DEFAULT_TOL):
        return np.array([[1.0, 0.0], [0.0, 0.0]]) @ basis

    def is_invertible(self, g, tol=DEFAULT_TOL):
        g = _vec(g)
        return bool(g[0] == g[1])

    def sample_t_fibre(self, x, rng, scale):
        return np.array([x[0], x[0] - scale * abs(rng.standard_normal())])

    def sample_s_fibre(self, x, rng, scale):
        return np.array([x[0] + scale * abs(rng.standard_normal()), x[0]])

    def sample_morphism(self, rng):
        x = rng.standard_normal()
        return np.array([x + abs(rng.standard_normal()), x])

    def sample_core_candidate(self, g, radius, rng):
        d = g[0] + radius * rng.uniform(-1, 1)
        return np.array([d, d])


@dataclass(frozen=True, eq=False)
class EntropyCategory(Realization):
    """Processes ``p -> q`` with ``S(q) >= S(p)`` on the punctured open simplex.

    Objects use chart coordinates ``(p_1, ..., p_n)``; a morphism is the
    concatenation ``(q_1..q_n, p_1..p_n)`` with target ``q`` and source ``p``.
    """

    n: int
    family = "EntropyCategory"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def dim_objects(self):
        return self.n

    @property
    def dim_morphisms(self):
        return 2 * self.n

    @property
    def target_coords(self):
        return np.arange(self.n)

    @property
    def source_coords(self):
        return np.arange(self.n, 2 * self.n)

    def left_differential(self, g, h, basis, tol=DEFAULT_TOL):
        # g (q', p') = (q_g, p'): only the source block moves
        J = np.zeros((2 * self.n, 2 * self.n))
        J[self.n:, self.n:] = np.eye(self.n)
        return J @ basis

    def right_differential(self, g, h, basis, tol=DEFAULT_TOL):
        J = np.zeros((2 * self.n, 2 * self.n))
        J[:self.n, :self.n] = np.eye(self.n)
        return J @ basis

    def configuration(self, x):
        return thermo.from_chart(x)

    def _source(self, g):
        return g[self.n:]

    def _target(self, g):
        return g[:self.n]

    def _unit(self, x):
        return np.concatenate((x, x))

    def _compose(self, g, h):
        return np.concatenate((g[:self.n], h[self.n:]))

    def _valid_object(self, x):
        return thermo.is_valid_object(thermo.from_chart(x), self.n)

    def _valid_morphism(self, g):
        q, p = thermo.from_chart(g[:self.n]), thermo.from_chart(g[self.n:])
        if not (thermo.is_valid_object(q, self.n) and thermo.is_valid_object(p, self.n)):
            return False
        return thermo.delta_S(q, p) >= 0.0

    def delta_S(self, g):
        g = _vec(g)
        return thermo.delta_S(thermo.from_chart(g[:self.n]), thermo.from_chart(g[self.n:]))

    def target_jacobian(self, g, tol=DEFAULT_TOL):
        return np.hstack((np.eye(self.n), np.zeros((self.n, self.n))))

    def source_jacobian(self, g, tol=DEFAULT_TOL):
        return np.hstack((np.zeros((self.n, self.n)), np.eye(self.n)))

    def is_invertible(self, g, tol=DEFAULT_TOL):
        return bool(abs(self.delta_S(g)) <= thermo.INVERTIBLE_TOL)

    def random_object(self, rng):
        while True:
            x = thermo.to_chart(rng.dirichlet(np.ones(self.n + 1)))
            if self.is_valid_object(x):
                return x

    def _perturb_object(self, x, rng, scale):
        for _ in range(1000):
            y = x + scale * rng.standard_normal(self.n)
            if self.is_valid_object(y):
                return y
        raise SamplerUnavailable("could not perturb the configuration inside the object manifold")

    def sample_t_fibre(self, x, rng, scale):
        # h = (x, p) with S(p) <= S(x)
        for _ in range(1000):
            d = scale * rng.standard_normal(self.n)
            for p in (x + d, x - d):
                h = np.concatenate((x, p))
                if self.is_valid_morphism(h):
                    return h
        raise SamplerUnavailable("could not sample the target fibre")

    def sample_s_fibre(self, x, rng, scale):
        for _ in range(1000):
            d = scale * rng.standard_normal(self.n)
            for q in (x + d, x - d):
                h = np.concatenate((q, x))
                if self.is_valid_morphism(h):
                    return h
        raise SamplerUnavailable("could not sample the source fibre")

    def sample_morphism(self, rng):
        a, b = self.random_object(rng), self.random_object(rng)
        g = np.concatenate((a, b))
        return g if self.is_valid_morphism(g) else np.concatenate((b, a))

    def sample_core_candidate(self, g, radius, rng):
        """Random point of the zero-entropy-change level set near ``g``.

        The target ``q`` is perturbed freely.  The source is then found on the
        ray from the uniform configuration through a perturbed copy of
        ``s(g)``; entropy is strictly decreasing along such rays, so the level
        ``S(q)`` is hit at most once and a bracketing root finder is enough.
        The returned endpoint keeps ``S(q) - S(p) >= 0``.
        """
        g = _vec(g)
        q0, p0 = g[:self.n], g[self.n:]
        mu = thermo.microcanonical(self.n)

        def S_at(lam, w):
            return thermo.entropy(mu + lam * w)

        for _ in range(1000):
            q = self._perturb_object(q0, rng, radius / 4)
            w = thermo.from_chart(self._perturb_object(p0, rng, radius / 4)) - mu
            if np.max(np.abs(w)) < 1e-9:
                continue
            neg = w < 0
            lam_max = np.min(mu[neg] / -w[neg])
            Sq = thermo.entropy(thermo.from_chart(q))
            lo, hi = 0.0, lam_max * (1 - 1e-12)
            if S_at(hi, w) > Sq:
                continue     # the ray reaches the boundary before the level set
            lam = optimize.brentq(lambda t: S_at(t, w) - Sq, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)
            # step outward until the process is feasible (S(p) <= S(q))
            for _ in range(64):
                if S_at(lam, w) <= Sq:
                    break
                lam = np.nextafter(lam, hi)
            k = np.concatenate((q, thermo.to_chart(mu + lam * w)))
            if self.is_valid_morphism(k) and np.max(np.abs(k - g)) <= radius:
                return k
        raise SamplerUnavailable("level-set sampler failed to converge")

    def spec_fields(self):
        return {"family": self.family, "n": self.n}


# --------------------------------------------------------------------------
# action categories


@dataclass(frozen=True)
class Action:
    """A named smooth monoid action ``phi(g, x)`` on ``R^dim_X``."""

    name: str
    monoid: Realization
    dim_X: int
    phi: object = field(repr=False)


def builtin_action(name, n=1):
    """Built-in actions.

    ``scale``      (R, *) on R by multiplication (``n`` ignored)
    ``translate``  (H^n, +) on R^n by translation
    ``linear``     (R^{n x n}, *) on R^n by matrix-vector product
    """
    if name == "scale":
        return Action("scale", MatrixMonoid(1), 1, lambda g, x: g * x)
    if name == "translate":
        return Action("translate", HalfSpaceMonoid(n), n, lambda g, x: g + x)
    if name == "linear":
        return Action("linear", MatrixMonoid(n), n, lambda g, x: g.reshape(n, n) @ x)
    raise ValueError(f"unknown action {name!r}; expected scale, translate or linear")


@dataclass(frozen=True, eq=False)
class ActionCategory(Realization):
    """Regular points ``(g, x)`` of a monoid action; ``s = x``, ``t = g x``."""

    action: Action
    tol: object = DEFAULT_TOL
    family = "ActionCategory"

    @property
    def monoid(self):
        return self.action.monoid

    @property
    def dim_objects(self):
        return self.action.dim_X

    @property
    def dim_morphisms(self):
        return self.monoid.dim_morphisms + self.action.dim_X

    def split(self, g):
        m = self.monoid.dim_morphisms
        return g[:m], g[m:]

    def _phi(self, g):
        a, x = self.split(g)
        return np.atleast_1d(np.asarray(self.action.phi(a, x), dtype=float))

    def _source(self, g):
        return self.split(g)[1]

    def _target(self, g):
        return self._phi(g)

    def _unit(self, x):
        return np.concatenate((self.monoid.identity, x))

    def _compose(self, g, h):
        a, _ = self.split(g)
        b, x = self.split(h)
        k = np.concatenate((self.monoid._compose(a, b), x))
        if not self._valid_morphism(k):
            raise InvalidResult("composite is not a regular point of the action")
        return k

    def regular(self, g, tol=None):
        tol = self.tol if tol is None else tol
        if not self.monoid.is_valid_morphism(self.split(g)[0]):
            return False
        J = fd_jacobian(self._phi, g, tol, domain=lambda k: self.monoid.is_valid_morphism(self.split(k)[0]))
        return numerical_rank(J, tol) == self.action.dim_X

    def _valid_morphism(self, g):
        return self.regular(g)

    def target_jacobian(self, g, tol=DEFAULT_TOL):
        return fd_jacobian(self._phi, g, tol,
                           domain=lambda k: self.monoid.is_valid_morphism(self.split(k)[0]))

    def source_jacobian(self, g, tol=DEFAULT_TOL):
        m, d = self.monoid.dim_morphisms, self.action.dim_X
        return np.hstack((np.zeros((d, m)), np.eye(d)))

    def is_invertible(self, g, tol=DEFAULT_TOL):
        return self.monoid.is_invertible(self.split(_vec(g))[0], tol)

    def sample_morphism(self, rng):
        for _ in range(1000):
            g = np.concatenate((self.monoid.sample_morphism(rng), rng.standard_normal(self.action.dim_X)))
            if self.is_valid_morphism(g):
                return g
        raise SamplerUnavailable("could not sample a regular point")

    def spec_fields(self):
        fields = {"family": self.family, "action": self.action.name}
        if self.action.name != "scale":
            fields["n"] = self.action.dim_X
        return fields


# --------------------------------------------------------------------------
# validated operations


def check_morphism(C, g):
    g = _vec(g)
    if not C.is_valid_morphism(g):
        raise InvalidMorphism(f"{g.tolist()} is not a morphism of {C.family}")
    return g


def check_object(C, x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if not C.is_valid_object(x):
        raise InvalidObject(f"{x.tolist()} is not an object of {C.family}")
    return x


def source(C, g):
    return C._source(check_morphism(C, g)).copy()


def target(C, g):
    return C._target(check_morphism(C, g)).copy()


def unit(C, x=_EMPTY):
    return C._unit(check_object(C, x))


def is_composable(C, g, h):
    return C._composable(check_morphism(C, g), check_morphism(C, h))


def compose(C, g, h):
    """The composite ``g h`` (first ``h``, then ``g``)."""
    g, h = check_morphism(C, g), check_morphism(C, h)
    if not C._composable(g, h):
        raise NotComposable(f"s(g)={C._source(g).tolist()} differs from t(h)={C._target(h).tolist()}")
    return C._compose(g, h)


def ker_dt_basis_at_unit(C, x=_EMPTY, tol=DEFAULT_TOL):
    return C.ker_dt_basis(check_object(C, x), tol)


def ker_ds_basis_at_unit(C, x=_EMPTY, tol=DEFAULT_TOL):
    return C.ker_ds_basis(check_object(C, x), tol)


def action_is_regular(C, g, x, tol=DEFAULT_TOL):
    """Whether the action map is a submersion at ``(g, x)``."""
    k = np.concatenate((_vec(g), _vec(x)))
    if not np.all(np.isfinite(k)):
        raise NonFinite("non-finite point")
    return C.regular(k, tol)


def random_composable_pair(C, rng):
    """Random ``(g, h)`` with ``s(g) = t(h)``."""
    if isinstance(C, EntropyCategory):
        objs = sorted((C.random_object(rng) for _ in range(3)),
                      key=lambda x: thermo.entropy(thermo.from_chart(x)))
        p, q, r = objs
        return np.concatenate((r, q)), np.concatenate((q, p))
    if isinstance(C, OrderCategory):
        x, y, z = np.sort(rng.standard_normal(3))
        return np.array([z, y]), np.array([y, x])
    if C.is_monoid:
        return C.sample_morphism(rng), C.sample_morphism(rng)
    h = C.sample_morphism(rng)
    g = C.sample_s_fibre(C._target(h), rng, 1.0)
    return g, h
