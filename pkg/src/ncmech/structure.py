"""Phase-space bracket structures.

Two models share one bracket interface so the dynamics layer stays
structure-agnostic:

* ``deriglazov-canonical`` -- {x^i, x^j} = theta^{ij}, {x^i, p_j} = delta,
  {p_i, p_j} = 0, with a constant antisymmetric theta.
* ``duval-horvathy`` -- planar (n = 2) brackets carrying the factor
  d(x) = 1 - e*theta*B(x): {x^i, x^j} = eps^{ij} theta d,
  {x^i, p_j} = delta d, {p_i, p_j} = eps_{ij} e B d.

Phase polynomials live over 2n variables ordered (x^1..x^n, p_1..p_n).
Symbolic brackets for the duval-horvathy kind require constant B; a
field-dependent B leaves the polynomial ring once derived quantities divide
by d, so it is only supported in pointwise numeric evaluation (dynamics).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .poly import (
    EXACT,
    FLOAT,
    DimensionMismatchError,
    Polynomial,
    ThetaMatrix,
    as_scalar,
    poisson_bracket,
)

KIND_DERIGLAZOV = "deriglazov-canonical"
KIND_DUVAL_HORVATHY = "duval-horvathy"

SINGULARITY_TOLERANCE = 1e-12


class WrongKindError(ValueError):
    """Operation applied to a bracket structure of the wrong kind."""


class NonConstantFieldError(ValueError):
    """Symbolic duval-horvathy brackets require a constant magnetic field."""


class SingularStructureError(RuntimeError):
    """The duval-horvathy factor d = 1 - e*theta*B vanished."""


@dataclass(frozen=True)
class PhaseState:
    """Position/momentum pair; lengths must agree with the structure's n."""

    x: tuple
    p: tuple

    def __post_init__(self):
        if len(self.x) != len(self.p):
            raise DimensionMismatchError(
                f"x has length {len(self.x)} but p has length {len(self.p)}")

    @property
    def n(self) -> int:
        return len(self.x)

    def as_vector(self) -> tuple:
        return tuple(self.x) + tuple(self.p)


@dataclass(frozen=True)
class BracketStructure:
    kind: str
    n: int
    theta: ThetaMatrix
    e: object = None
    B: Polynomial | None = None
    theta_scalar: object = None

    def __post_init__(self):
        if self.kind not in (KIND_DERIGLAZOV, KIND_DUVAL_HORVATHY):
            raise ValueError(f"unknown bracket structure kind {self.kind!r}")
        if self.theta.n != self.n:
            raise DimensionMismatchError(
                f"theta is {self.theta.n}x{self.theta.n} for n={self.n}")
        if self.kind == KIND_DUVAL_HORVATHY:
            if self.n != 2:
                raise DimensionMismatchError("duval-horvathy structure needs n=2")
            if self.e is None or self.B is None or self.theta_scalar is None:
                raise ValueError("duval-horvathy structure needs e, B and theta_scalar")
            if self.B.nvars != 2:
                raise DimensionMismatchError("B must be a polynomial in (x, y)")

    @property
    def mode(self) -> str:
        return self.theta.mode

    # -- constructors ------------------------------------------------------

    @staticmethod
    def deriglazov(theta: ThetaMatrix) -> "BracketStructure":
        return BracketStructure(kind=KIND_DERIGLAZOV, n=theta.n, theta=theta)

    @staticmethod
    def duval_horvathy(e, theta_scalar, B: Polynomial) -> "BracketStructure":
        mode = B.mode
        return BracketStructure(
            kind=KIND_DUVAL_HORVATHY,
            n=2,
            theta=ThetaMatrix.planar(theta_scalar, mode),
            e=as_scalar(e, mode),
            B=B,
            theta_scalar=as_scalar(theta_scalar, mode),
        )

    # -- duval-horvathy specifics -------------------------------------------

    def d_factor_poly(self) -> Polynomial:
        """d(x) = 1 - e*theta*B(x) as a polynomial over the n position vars."""
        if self.kind != KIND_DUVAL_HORVATHY:
            raise WrongKindError("d-factor only exists for the duval-horvathy kind")
        one = Polynomial.constant(self.n, 1, self.mode)
        return one - self.B.scale(self.e * self.theta_scalar)

    def constant_d(self):
        dpoly = self.d_factor_poly()
        if not dpoly.is_constant:
            raise NonConstantFieldError(
                "duval-horvathy bracket table is symbolic only for constant B")
        return dpoly.constant_value()

    # -- the bracket table ---------------------------------------------------

    def omega(self) -> ThetaMatrix:
        """Constant 2n x 2n bracket table Omega^{ab} over (x^1..x^n, p_1..p_n)."""
        n = self.n
        mode = self.mode
        zero = as_scalar(0, mode)
        one = as_scalar(1, mode)
        rows = [[zero] * (2 * n) for _ in range(2 * n)]
        if self.kind == KIND_DERIGLAZOV:
            for i in range(n):
                for j in range(n):
                    rows[i][j] = self.theta[i, j]
            for i in range(n):
                rows[i][n + i] = one
                rows[n + i][i] = -one
            return ThetaMatrix(rows, mode)
        d = self.constant_d()
        th = self.theta_scalar
        eb = self.e * self.B.constant_value()
        rows[0][1] = th * d
        rows[1][0] = -th * d
        for i in range(2):
            rows[i][2 + i] = d
            rows[2 + i][i] = -d
        rows[2][3] = eb * d
        rows[3][2] = -eb * d
        return ThetaMatrix(rows, mode)


def phase_bracket(f: Polynomial, g: Polynomial,
                  structure: BracketStructure) -> Polynomial:
    """Bracket of two phase polynomials under the structure's table."""
    if f.nvars != 2 * structure.n:
        raise DimensionMismatchError(
            f"phase polynomials need nvars={2 * structure.n}, got {f.nvars}")
    return poisson_bracket(f, g, structure.omega())


@dataclass(frozen=True)
class SingularityResult:
    d: object
    singular: bool


def singularity_check(structure: BracketStructure, point) -> SingularityResult:
    """Evaluate d = 1 - e*theta*B at a position; flag |d| < 1e-12 as singular."""
    if structure.kind != KIND_DUVAL_HORVATHY:
        raise WrongKindError("singularity check applies to the duval-horvathy kind")
    d = structure.d_factor_poly().eval(point)
    return SingularityResult(d=d, singular=abs(d) < SINGULARITY_TOLERANCE)
