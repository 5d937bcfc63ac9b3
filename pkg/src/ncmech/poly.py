"""Sparse multivariate polynomial arithmetic with dual scalar backends.

Coefficients are either exact rationals (``fractions.Fraction``) or double
floats; the two backends never mix silently.  Variables are indexed
``0..nvars-1`` and carry no names; interface layers attach names (x, y, p1,
...) on top.  All values are immutable after construction and every
operation is a pure function, so polynomials can be shared freely between
threads or tasks.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Sequence

EXACT = "exact"
FLOAT = "float"

#: Per-variable exponent cap.  Nested brackets and compositions grow degree
#: linearly; the cap turns a runaway configuration into a clean error.
DEGREE_CAP = 32


class ModeMismatchError(ValueError):
    """Exact-rational and float values met inside one operation."""


class DimensionMismatchError(ValueError):
    """Variable counts or tuple lengths disagree."""


class DegreeOverflowError(ValueError):
    """A product exceeded the per-variable degree cap."""


class SingularMatrixError(ValueError):
    """A linear solve hit a singular coefficient matrix."""


def as_scalar(value, mode: str):
    """Coerce ``value`` to the scalar type of ``mode``.

    Ints are accepted in both modes.  Strings hold rationals ("3/4"),
    decimals ("0.5") or exponent notation ("1e-3"); in exact mode they are
    parsed without rounding.  Passing a float to exact mode (or a Fraction
    to float mode) raises ``ModeMismatchError`` -- conversions must be
    explicit.
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if mode == EXACT:
        if isinstance(value, (int, Fraction)):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value)
        raise ModeMismatchError(
            f"cannot use {type(value).__name__} value in exact mode")
    if mode == FLOAT:
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            return float(Fraction(value))
        if isinstance(value, Fraction):
            raise ModeMismatchError(
                "exact rational passed to float mode; convert explicitly")
        raise ModeMismatchError(
            f"cannot use {type(value).__name__} value in float mode")
    raise ValueError(f"unknown scalar mode {mode!r}")


def scalar_to_string(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return repr(float(value))


class Polynomial:
    """Canonical sparse polynomial: map exponent-tuple -> nonzero coefficient.

    Two polynomials are equal iff nvars, mode and the canonical term maps
    are equal.  The zero polynomial has an empty term map.
    """

    __slots__ = ("nvars", "mode", "_terms")

    def __init__(self, nvars: int, terms=None, mode: str = EXACT):
        if nvars < 0:
            raise DimensionMismatchError("nvars must be nonnegative")
        if mode not in (EXACT, FLOAT):
            raise ValueError(f"unknown scalar mode {mode!r}")
        self.nvars = int(nvars)
        self.mode = mode
        clean: dict[tuple, object] = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for exps, coeff in items:
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.nvars:
                    raise DimensionMismatchError(
                        f"exponent tuple {exps} does not match nvars={self.nvars}")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                if any(e > DEGREE_CAP for e in exps):
                    raise DegreeOverflowError(
                        f"exponent above cap {DEGREE_CAP} in {exps}")
                c = as_scalar(coeff, mode)
                if exps in clean:
                    c = clean[exps] + c
                if c == 0:
                    clean.pop(exps, None)
                else:
                    clean[exps] = c
        self._terms = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, nvars: int, mode: str = EXACT) -> "Polynomial":
        return cls(nvars, None, mode)

    @classmethod
    def constant(cls, nvars: int, value, mode: str = EXACT) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value}, mode)

    @classmethod
    def variable(cls, index: int, nvars: int, mode: str = EXACT) -> "Polynomial":
        if not 0 <= index < nvars:
            raise DimensionMismatchError(
                f"variable index {index} out of range for nvars={nvars}")
        exps = tuple(1 if i == index else 0 for i in range(nvars))
        return cls(nvars, {exps: 1}, mode)

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff, mode: str = EXACT) -> "Polynomial":
        return cls(len(exps), {tuple(exps): coeff}, mode)

    @classmethod
    def from_records(cls, records: Iterable[dict], nvars: int,
                     mode: str = EXACT) -> "Polynomial":
        """Parse the exchange format: [{"coeff": str, "exps": [int,...]}, ...]."""
        terms = []
        for rec in records:
            extra = set(rec) - {"coeff", "exps"}
            if extra:
                raise ValueError(f"unknown keys in polynomial record: {sorted(extra)}")
            terms.append((tuple(rec["exps"]), rec["coeff"]))
        return cls(nvars, terms, mode)

    # -- inspection -----------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exps) for exps in self._terms)

    def constant_value(self):
        """Value of a constant polynomial (0 for the zero polynomial)."""
        if not self.is_constant:
            raise ValueError("polynomial is not constant")
        zero = Fraction(0) if self.mode == EXACT else 0.0
        return self._terms.get((0,) * self.nvars, zero)

    def __len__(self):
        return len(self._terms)

    def max_degree(self, index: int) -> int:
        if not 0 <= index < self.nvars:
            raise DimensionMismatchError(f"variable index {index} out of range")
        return max((e[index] for e in self._terms), default=0)

    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    # -- canonical comparisons -------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self.nvars == other.nvars and self.mode == other.mode
                and self._terms == other._terms)

    def __hash__(self):
        return hash((self.nvars, self.mode, frozenset(self._terms.items())))

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for exps in sorted(self._terms):
            coeff = self._terms[exps]
            factors = [str(coeff)]
            for i, e in enumerate(exps):
                if e == 1:
                    factors.append(f"x{i}")
                elif e > 1:
                    factors.append(f"x{i}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    # -- ring operations --------------------------------------------------

    def _require_same(self, other: "Polynomial"):
        if self.nvars != other.nvars:
            raise DimensionMismatchError(
                f"nvars mismatch: {self.nvars} vs {other.nvars}")
        if self.mode != other.mode:
            raise ModeMismatchError(
                f"scalar mode mismatch: {self.mode} vs {other.mode}")

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._require_same(other)
        terms = dict(self._terms)
        for exps, c in other._terms.items():
            s = terms.get(exps, 0) + c
            if s == 0:
                terms.pop(exps, None)
            else:
                terms[exps] = s
        return self._steal(terms)

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._require_same(other)
        terms = dict(self._terms)
        for exps, c in other._terms.items():
            s = terms.get(exps, 0) - c
            if s == 0:
                terms.pop(exps, None)
            else:
                terms[exps] = s
        return self._steal(terms)

    def __neg__(self):
        return self._steal({e: -c for e, c in self._terms.items()})

    def scale(self, value) -> "Polynomial":
        c = as_scalar(value, self.mode)
        if c == 0:
            return Polynomial.zero(self.nvars, self.mode)
        return self._steal({e: c * v for e, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._require_same(other)
            return self._steal(_mul_terms(self._terms, other._terms, None))
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial power must be a nonnegative integer")
        result = Polynomial.constant(self.nvars, 1, self.mode)
        for _ in range(exponent):
            result = result * self
        return result

    def _steal(self, terms: dict) -> "Polynomial":
        # Internal: wrap an already-canonical term dict without re-validation.
        p = Polynomial.__new__(Polynomial)
        p.nvars = self.nvars
        p.mode = self.mode
        p._terms = terms
        return p

    # -- calculus ---------------------------------------------------------

    def diff(self, index: int) -> "Polynomial":
        """Formal partial derivative with respect to variable ``index``."""
        if not 0 <= index < self.nvars:
            raise DimensionMismatchError(f"variable index {index} out of range")
        terms = {}
        for exps, c in self._terms.items():
            e = exps[index]
            if e == 0:
                continue
            new = exps[:index] + (e - 1,) + exps[index + 1:]
            coeff = c * e
            s = terms.get(new, 0) + coeff
            if s == 0:
                terms.pop(new, None)
            else:
                terms[new] = s
        return self._steal(terms)

    def antiderivative(self, index: int) -> "Polynomial":
        """Monomial-wise antiderivative in variable ``index`` (no constant)."""
        if not 0 <= index < self.nvars:
            raise DimensionMismatchError(f"variable index {index} out of range")
        terms = {}
        for exps, c in self._terms.items():
            e = exps[index] + 1
            if e > DEGREE_CAP:
                raise DegreeOverflowError(
                    f"antiderivative exceeds degree cap in variable {index}")
            new = exps[:index] + (e,) + exps[index + 1:]
            if self.mode == EXACT:
                terms[new] = c / e
            else:
                terms[new] = c / float(e)
        return self._steal(terms)

    # -- evaluation and substitution ---------------------------------------

    def eval(self, point: Sequence):
        """Evaluate at ``point``; exact in exact mode."""
        if len(point) != self.nvars:
            raise DimensionMismatchError(
                f"point of length {len(point)} for nvars={self.nvars}")
        vals = [as_scalar(v, self.mode) for v in point]
        total = Fraction(0) if self.mode == EXACT else 0.0
        for exps, c in self._terms.items():
            term = c
            for v, e in zip(vals, exps):
                if e:
                    term = term * v ** e
            total = total + term
        return total

    def compose(self, args: Sequence["Polynomial"],
                trunc: tuple[int, int] | None = None) -> "Polynomial":
        """Substitute ``args[i]`` for variable i.

        ``trunc=(var, maxdeg)`` drops, during accumulation, every term whose
        exponent of ``var`` (an index in the *target* space) exceeds
        ``maxdeg``; used for order-truncated series work.
        """
        if len(args) != self.nvars:
            raise DimensionMismatchError(
                f"{len(args)} substitution args for nvars={self.nvars}")
        if self.nvars == 0:
            raise DimensionMismatchError("cannot compose a 0-variable polynomial")
        target_n = args[0].nvars
        for a in args:
            if a.nvars != target_n:
                raise DimensionMismatchError("substitution args disagree on nvars")
            if a.mode != self.mode:
                raise ModeMismatchError("substitution args disagree on mode")
        one = Polynomial.constant(target_n, 1, self.mode)
        pow_cache: dict[tuple[int, int], Polynomial] = {}

        def arg_pow(i: int, k: int) -> Polynomial:
            if k == 0:
                return one
            if k == 1:
                return args[i]
            key = (i, k)
            if key not in pow_cache:
                lower = arg_pow(i, k - 1)
                pow_cache[key] = lower._steal(
                    _mul_terms(lower._terms, args[i]._terms, trunc))
            return pow_cache[key]

        acc: dict[tuple, object] = {}
        for exps, coeff in self._terms.items():
            term = Polynomial.constant(target_n, coeff, self.mode)
            for i, e in enumerate(exps):
                if e:
                    term = term._steal(
                        _mul_terms(term._terms, arg_pow(i, e)._terms, trunc))
            for ee, cc in term._terms.items():
                s = acc.get(ee, 0) + cc
                if s == 0:
                    acc.pop(ee, None)
                else:
                    acc[ee] = s
        return one._steal(acc)

    def embed(self, target_nvars: int, var_map: Sequence[int]) -> "Polynomial":
        """Reindex variables: old variable i becomes ``var_map[i]``."""
        if len(var_map) != self.nvars:
            raise DimensionMismatchError("var_map length must equal nvars")
        if len(set(var_map)) != len(var_map):
            raise ValueError("var_map must be injective")
        if any(not 0 <= m < target_nvars for m in var_map):
            raise DimensionMismatchError("var_map index out of target range")
        terms = {}
        for exps, c in self._terms.items():
            new = [0] * target_nvars
            for i, e in enumerate(exps):
                new[var_map[i]] = e
            terms[tuple(new)] = c
        p = Polynomial.__new__(Polynomial)
        p.nvars = target_nvars
        p.mode = self.mode
        p._terms = terms
        return p

    def substitute_scalar(self, index: int, value) -> "Polynomial":
        """Fix variable ``index`` to a scalar value (nvars unchanged)."""
        if not 0 <= index < self.nvars:
            raise DimensionMismatchError(f"variable index {index} out of range")
        v = as_scalar(value, self.mode)
        terms = {}
        for exps, c in self._terms.items():
            coeff = c * v ** exps[index] if exps[index] else c
            new = exps[:index] + (0,) + exps[index + 1:]
            s = terms.get(new, 0) + coeff
            if s == 0:
                terms.pop(new, None)
            else:
                terms[new] = s
        return self._steal(terms)

    def coeff_of_power(self, index: int, power: int) -> "Polynomial":
        """Coefficient of ``x_index**power`` (exponent of that variable zeroed)."""
        terms = {}
        for exps, c in self._terms.items():
            if exps[index] == power:
                terms[exps[:index] + (0,) + exps[index + 1:]] = c
        return self._steal(terms)

    def truncate_var(self, index: int, maxdeg: int) -> "Polynomial":
        terms = {e: c for e, c in self._terms.items() if e[index] <= maxdeg}
        return self._steal(terms)

    def drop_var(self, index: int) -> "Polynomial":
        """Remove a variable that no term uses."""
        if self.max_degree(index) > 0:
            raise ValueError(f"variable {index} still occurs; cannot drop")
        terms = {e[:index] + e[index + 1:]: c for e, c in self._terms.items()}
        p = Polynomial.__new__(Polynomial)
        p.nvars = self.nvars - 1
        p.mode = self.mode
        p._terms = terms
        return p

    # -- conversions --------------------------------------------------------

    def to_float(self) -> "Polynomial":
        if self.mode == FLOAT:
            return self
        p = Polynomial.__new__(Polynomial)
        p.nvars = self.nvars
        p.mode = FLOAT
        p._terms = {e: float(c) for e, c in self._terms.items()}
        return p

    def to_records(self) -> list[dict]:
        """Exchange format, canonical lexicographic order on exponent tuples."""
        return [{"coeff": scalar_to_string(self._terms[e]), "exps": list(e)}
                for e in sorted(self._terms)]

    def as_callable(self) -> Callable[[Sequence[float]], float]:
        """Compile to a float-evaluating function of a state sequence."""
        if not self._terms:
            return lambda s: 0.0
        parts = []
        for exps in sorted(self._terms):
            factors = [repr(float(self._terms[exps]))]
            for i, e in enumerate(exps):
                if e == 1:
                    factors.append(f"s[{i}]")
                elif e > 1:
                    factors.append(f"s[{i}]**{e}")
            parts.append("*".join(factors))
        src = "def _poly(s):\n    return " + " + ".join(parts)
        namespace: dict = {}
        exec(src, {"__builtins__": {}}, namespace)
        return namespace["_poly"]


def _mul_terms(a: dict, b: dict, trunc: tuple[int, int] | None) -> dict:
    """Multiply two canonical term maps; optionally drop high powers of one var."""
    out: dict[tuple, object] = {}
    tvar = tmax = None
    if trunc is not None:
        tvar, tmax = trunc
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            exps = tuple(x + y for x, y in zip(e1, e2))
            if tvar is not None and exps[tvar] > tmax:
                continue
            if any(x > DEGREE_CAP for x in exps):
                raise DegreeOverflowError(
                    f"product exceeds degree cap {DEGREE_CAP}")
            s = out.get(exps, 0) + c1 * c2
            if s == 0:
                out.pop(exps, None)
            else:
                out[exps] = s
    return out


class ThetaMatrix:
    """Constant antisymmetric n-by-n matrix of scalars.

    Used both for the position-position noncommutativity block and, with
    n = 2*dim, for full phase-space bracket tables.
    """

    __slots__ = ("n", "mode", "entries")

    def __init__(self, entries: Sequence[Sequence], mode: str = EXACT):
        rows = [tuple(as_scalar(v, mode) for v in row) for row in entries]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise DimensionMismatchError("theta matrix must be square")
        for i in range(n):
            for j in range(n):
                if rows[i][j] != -rows[j][i]:
                    raise ValueError(
                        f"theta matrix not antisymmetric at ({i},{j})")
        self.n = n
        self.mode = mode
        self.entries = tuple(rows)

    @classmethod
    def zeros(cls, n: int, mode: str = EXACT) -> "ThetaMatrix":
        return cls([[0] * n for _ in range(n)], mode)

    @classmethod
    def planar(cls, value, mode: str = EXACT) -> "ThetaMatrix":
        v = as_scalar(value, mode)
        return cls([[0, v], [-v, 0]], mode)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, ThetaMatrix):
            return NotImplemented
        return (self.n == other.n and self.mode == other.mode
                and self.entries == other.entries)

    def __repr__(self):
        return f"ThetaMatrix({[list(r) for r in self.entries]!r})"

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for row in self.entries for v in row)

    def neg(self) -> "ThetaMatrix":
        return ThetaMatrix([[-v for v in row] for row in self.entries], self.mode)

    def scaled(self, factor) -> "ThetaMatrix":
        c = as_scalar(factor, self.mode)
        return ThetaMatrix([[c * v for v in row] for row in self.entries], self.mode)

    def extended(self, extra: int) -> "ThetaMatrix":
        """Append ``extra`` zero rows/columns (grading variables bracket to 0)."""
        zero = as_scalar(0, self.mode)
        m = self.n + extra
        rows = []
        for i in range(m):
            row = []
            for j in range(m):
                row.append(self.entries[i][j] if i < self.n and j < self.n else zero)
            rows.append(row)
        return ThetaMatrix(rows, self.mode)

    def to_float(self) -> "ThetaMatrix":
        if self.mode == FLOAT:
            return self
        return ThetaMatrix([[float(v) for v in row] for row in self.entries], FLOAT)


def poly_eval(poly: Polynomial, point: Sequence):
    return poly.eval(point)


def poly_diff(poly: Polynomial, index: int) -> Polynomial:
    return poly.diff(index)


def poisson_bracket(f: Polynomial, g: Polynomial, theta: ThetaMatrix) -> Polynomial:
    """Configuration-space bracket sum_kl (d_k f) theta[k,l] (d_l g)."""
    f._require_same(g)
    if theta.n != f.nvars:
        raise DimensionMismatchError(
            f"theta is {theta.n}x{theta.n} but polynomials have nvars={f.nvars}")
    if theta.mode != f.mode:
        raise ModeMismatchError("theta scalar mode differs from polynomial mode")
    result = Polynomial.zero(f.nvars, f.mode)
    df: dict[int, Polynomial] = {}
    dg: dict[int, Polynomial] = {}

    def d(cache, poly, k):
        if k not in cache:
            cache[k] = poly.diff(k)
        return cache[k]

    for k in range(theta.n):
        for l in range(k + 1, theta.n):
            coeff = theta.entries[k][l]
            if coeff == 0:
                continue
            term = d(df, f, k) * d(dg, g, l) - d(df, f, l) * d(dg, g, k)
            result = result + term.scale(coeff)
    return result


def nested_bracket(f: Polynomial, gauge: Polynomial, depth: int,
                   theta: ThetaMatrix) -> Polynomial:
    """Left-nested bracket {...{{f, gauge}, gauge}, ..., gauge}, ``depth`` times."""
    if depth < 0:
        raise ValueError("nesting depth must be nonnegative")
    result = f
    for _ in range(depth):
        result = poisson_bracket(result, gauge, theta)
    return result


def solve_linear(matrix: Sequence[Sequence], rhs: Sequence[Polynomial]) -> list[Polynomial]:
    """Solve M * x = rhs where M holds scalars and rhs holds polynomials.

    Gaussian elimination; exact over rationals, partial pivoting over floats.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix) or len(rhs) != n:
        raise DimensionMismatchError("linear system shape mismatch")
    mode = rhs[0].mode
    m = [[as_scalar(v, mode) for v in row] for row in matrix]
    b = list(rhs)
    for col in range(n):
        if mode == FLOAT:
            pivot_row = max(range(col, n), key=lambda r: abs(m[r][col]))
        else:
            pivot_row = next((r for r in range(col, n) if m[r][col] != 0), col)
        if m[pivot_row][col] == 0:
            raise SingularMatrixError("singular matrix in linear solve")
        if pivot_row != col:
            m[col], m[pivot_row] = m[pivot_row], m[col]
            b[col], b[pivot_row] = b[pivot_row], b[col]
        pivot = m[col][col]
        for r in range(n):
            if r == col or m[r][col] == 0:
                continue
            factor = m[r][col] / pivot
            m[r] = [v - factor * w for v, w in zip(m[r], m[col])]
            b[r] = b[r] - b[col].scale(factor)
    out = []
    for i in range(n):
        inv = Fraction(1, 1) / m[i][i] if mode == EXACT else 1.0 / m[i][i]
        out.append(b[i].scale(inv))
    return out
