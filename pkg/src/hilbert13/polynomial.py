"""Dense monomial-basis polynomials in two and three variables.

Coefficients live in a numpy array indexed by per-variable exponents, so
``coeffs[i, j, k]`` multiplies ``x1**i * x2**j * x3**k``. Two coefficient
modes are supported:

* float mode (``float64`` arrays), used for fitting and grid norms;
* exact mode (``object`` arrays of :class:`fractions.Fraction`), used where
  algebraic identities are asserted with equality.

The domain is the unit cube ``[0, 1]**3`` (unit square for two variables).
Sup norms computed here are grid estimates, i.e. lower bounds of the true
sup over the cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Any, ClassVar, Sequence

import numpy as np

PER_VARIABLE = "per-variable"
TOTAL_DEGREE = "total-degree"
TRUNCATION_MODES = (PER_VARIABLE, TOTAL_DEGREE)

DEFAULT_GRID_N = 17


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, str):
        return Fraction(c)
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    return Fraction(float(c))


_fraction_array = np.frompyfunc(_to_fraction, 1, 1)


def _coeff_array(coeffs, ndim: int, exact: bool | None) -> np.ndarray:
    if isinstance(coeffs, np.ndarray) and coeffs.dtype == object:
        arr = coeffs
        is_exact = True if exact is None else exact
    else:
        arr = np.array(coeffs, dtype=object if exact else float)
        is_exact = bool(exact)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d coefficient array, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("coefficient array must be non-empty")
    if is_exact:
        out = np.empty(arr.shape, dtype=object)
        out[...] = _fraction_array(arr) if arr.size else arr
        return out
    return np.asarray(arr, dtype=float).copy()


def _horner(coeffs: np.ndarray, xs: Sequence[Any]):
    """Nested Horner evaluation; ``xs`` may be scalars, Fractions or arrays."""
    if len(xs) == 1:
        acc = coeffs[-1]
        for c in coeffs[-2::-1]:
            acc = acc * xs[0] + c
        return acc
    acc = _horner(coeffs[-1], xs[1:])
    for sub in coeffs[-2::-1]:
        acc = acc * xs[0] + _horner(sub, xs[1:])
    return acc


def _integer_scaled(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Write a Fraction array as an integer array over a common denominator."""
    den = reduce(math.lcm, (c.denominator for c in a.flat), 1)
    ints = np.empty(a.shape, dtype=object)
    ints.flat[:] = [c.numerator * (den // c.denominator) for c in a.flat]
    return ints, den


def _from_integer_scaled(ints: np.ndarray, den: int) -> np.ndarray:
    out = np.empty(ints.shape, dtype=object)
    out.flat[:] = [Fraction(c, den) for c in ints.flat]
    return out


def _int_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Convolution of two integer (object dtype) tensors."""
    if np.count_nonzero(a) > np.count_nonzero(b):
        a, b = b, a
    shape = tuple(sa + sb - 1 for sa, sb in zip(a.shape, b.shape))
    out = np.zeros(shape, dtype=object)
    out[...] = 0
    for idx in zip(*np.nonzero(a)):
        window = tuple(slice(i, i + s) for i, s in zip(idx, b.shape))
        out[window] += a[idx] * b
    return out


def _int_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    shape = tuple(max(sa, sb) for sa, sb in zip(a.shape, b.shape))
    out = np.zeros(shape, dtype=object)
    out[...] = 0
    out[tuple(slice(0, s) for s in a.shape)] += a
    out[tuple(slice(0, s) for s in b.shape)] += b
    return out


def _horner_int(ints: np.ndarray, nums: Sequence[int], dens: Sequence[int]) -> int:
    """Integer Horner for exact evaluation at rational points.

    Returns ``N`` with ``p(nums/dens) = N / prod(dens[v] ** (shape[v] - 1))``
    for integer coefficients ``ints``.
    """
    n = ints.shape[0] - 1
    q, a = dens[0], nums[0]
    if ints.ndim == 1:
        inner = [int(c) for c in ints]
    else:
        inner = [_horner_int(sub, nums[1:], dens[1:]) for sub in ints]
    acc = inner[n]
    qpow = 1
    for i in range(n - 1, -1, -1):
        qpow *= q
        acc = acc * a + inner[i] * qpow
    return acc


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full n-d convolution of two coefficient tensors (polynomial product)."""
    if a.dtype == object or b.dtype == object:
        a_int, da = _integer_scaled(_coeff_array(a, a.ndim, True))
        b_int, db = _integer_scaled(_coeff_array(b, b.ndim, True))
        return _from_integer_scaled(_int_convolve(a_int, b_int), da * db)
    if np.count_nonzero(a) > np.count_nonzero(b):
        a, b = b, a
    shape = tuple(sa + sb - 1 for sa, sb in zip(a.shape, b.shape))
    out = np.zeros(shape)
    for idx in zip(*np.nonzero(a)):
        window = tuple(slice(i, i + s) for i, s in zip(idx, b.shape))
        out[window] += a[idx] * b
    return out


class _DensePoly:
    """Shared machinery for :class:`BiPoly` and :class:`TriPoly`."""

    ndim: ClassVar[int]
    __slots__ = ("coeffs",)

    def __init__(self, coeffs, exact: bool | None = None):
        arr = _coeff_array(coeffs, self.ndim, exact)
        arr.setflags(write=False)
        self.coeffs = arr

    # construction helpers

    @classmethod
    def zero(cls, bounds: Sequence[int] | int = 0, exact: bool = False):
        if isinstance(bounds, int):
            bounds = (bounds,) * cls.ndim
        shape = tuple(b + 1 for b in bounds)
        arr = np.zeros(shape, dtype=object if exact else float)
        if exact:
            arr[...] = Fraction(0)
        return cls(arr)

    @classmethod
    def constant(cls, c, exact: bool = False):
        arr = np.zeros((1,) * cls.ndim, dtype=object if exact else float)
        arr[(0,) * cls.ndim] = c
        return cls(arr, exact=exact)

    @classmethod
    def monomial(cls, exponents: Sequence[int], c=1, exact: bool = False):
        if len(exponents) != cls.ndim:
            raise ValueError(f"need {cls.ndim} exponents")
        arr = np.zeros(tuple(e + 1 for e in exponents), dtype=object if exact else float)
        if exact:
            arr[...] = Fraction(0)
        arr[tuple(exponents)] = c
        return cls(arr, exact=exact)

    @classmethod
    def variable(cls, n: int, exact: bool = False):
        """The coordinate polynomial for variable ``n`` (1-based)."""
        exps = [0] * cls.ndim
        exps[n - 1] = 1
        return cls.monomial(exps, 1, exact=exact)

    # properties

    @property
    def exact(self) -> bool:
        return self.coeffs.dtype == object

    @property
    def bounds(self) -> tuple[int, ...]:
        """Declared per-variable degree bounds (array shape minus one)."""
        return tuple(s - 1 for s in self.coeffs.shape)

    @property
    def degree(self) -> tuple[int, ...]:
        """Tightest per-variable degree bounds; the zero polynomial reports zeros."""
        nz = np.nonzero(self.coeffs)
        if len(nz[0]) == 0:
            return (0,) * self.ndim
        return tuple(int(ix.max()) for ix in nz)

    @property
    def total_degree(self) -> int:
        nz = np.nonzero(self.coeffs)
        if len(nz[0]) == 0:
            return 0
        return int(sum(nz).max())

    def is_zero(self) -> bool:
        return not np.any(self.coeffs != 0)

    # conversions

    def trim(self):
        return self.pad(self.degree, allow_shrink=True)

    def pad(self, bounds: Sequence[int], allow_shrink: bool = False):
        shape = tuple(b + 1 for b in bounds)
        if not allow_shrink and any(s < c for s, c in zip(shape, self.coeffs.shape)):
            raise ValueError(f"cannot pad {self.bounds} down to {tuple(bounds)}")
        out = np.zeros(shape, dtype=self.coeffs.dtype)
        if self.exact:
            out[...] = Fraction(0)
        common = tuple(slice(0, min(s, c)) for s, c in zip(shape, self.coeffs.shape))
        out[common] = self.coeffs[common]
        return type(self)(out)

    def to_float(self):
        return type(self)(np.asarray(self.coeffs, dtype=float))

    def to_exact(self):
        return type(self)(self.coeffs, exact=True)

    # evaluation and arithmetic

    def __call__(self, *xs):
        if len(xs) != self.ndim:
            raise TypeError(f"expected {self.ndim} arguments, got {len(xs)}")
        if self.exact and all(isinstance(x, (int, Fraction)) for x in xs):
            xs = [Fraction(x) for x in xs]
            ints, den = _integer_scaled(self.coeffs)
            num = _horner_int(ints, [x.numerator for x in xs], [x.denominator for x in xs])
            for x, s in zip(xs, self.coeffs.shape):
                den *= x.denominator ** (s - 1)
            return Fraction(num, den)
        return _horner(self.coeffs, xs)

    def _coerce(self, other):
        if isinstance(other, type(self)):
            return other
        if isinstance(other, (int, float, Fraction, np.floating, np.integer)):
            return type(self).constant(other, exact=self.exact)
        return NotImplemented

    def _aligned(self, other):
        bounds = tuple(max(a, b) for a, b in zip(self.bounds, other.bounds))
        a, b = self.pad(bounds).coeffs, other.pad(bounds).coeffs
        if a.dtype != b.dtype:
            a, b = _coeff_array(a, self.ndim, True), _coeff_array(b, self.ndim, True)
        return a, b

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._aligned(other)
        return type(self)(a + b)

    __radd__ = __add__

    def __neg__(self):
        return type(self)(-self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._aligned(other)
        return type(self)(a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, Fraction, np.floating, np.integer)):
            if self.exact:
                return type(self)(self.coeffs * _to_fraction(other))
            return type(self)(self.coeffs * float(other))
        if not isinstance(other, type(self)):
            return NotImplemented
        return type(self)(_convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = type(self).constant(1, exact=self.exact)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, type(self)):
            return NotImplemented
        a, b = self._aligned(other)
        return bool(np.all(a == b))

    __hash__ = None  # type: ignore[assignment]

    def allclose(self, other, rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        a, b = self._aligned(other)
        return bool(np.allclose(np.asarray(a, float), np.asarray(b, float), rtol=rtol, atol=atol))

    def __repr__(self):
        terms = []
        for idx in zip(*np.nonzero(self.coeffs)):
            c = self.coeffs[idx]
            mono = "*".join(f"x{v + 1}^{e}" if e > 1 else f"x{v + 1}" for v, e in enumerate(idx) if e)
            terms.append(f"{c}*{mono}" if mono else f"{c}")
        return f"{type(self).__name__}({' + '.join(terms) or '0'})"

    # serialization

    def to_json(self) -> dict:
        """``{"degrees": [...], "coeffs": [...]}`` with row-major coefficients.

        Exact coefficients are written as ``"p/q"`` strings.
        """
        if self.exact:
            flat = [str(c) for c in self.coeffs.flat]
        else:
            flat = [float(c) for c in self.coeffs.flat]
        return {"degrees": list(self.bounds), "coeffs": flat}

    @classmethod
    def from_json(cls, doc: dict):
        try:
            degrees = [int(d) for d in doc["degrees"]]
            flat = list(doc["coeffs"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial document: {exc}") from None
        if len(degrees) != cls.ndim or any(d < 0 for d in degrees):
            raise ValueError(f"'degrees' must hold {cls.ndim} nonnegative integers")
        shape = tuple(d + 1 for d in degrees)
        if len(flat) != math.prod(shape):
            raise ValueError(f"expected {math.prod(shape)} coefficients, got {len(flat)}")
        exact = any(isinstance(c, str) for c in flat)
        arr = np.array(flat, dtype=object if exact else float).reshape(shape)
        return cls(arr, exact=exact)


class TriPoly(_DensePoly):
    """Polynomial in ``x1, x2, x3``; ``coeffs[i, j, k]`` multiplies ``x1^i x2^j x3^k``."""

    ndim = 3
    __slots__ = ()


class BiPoly(_DensePoly):
    """Polynomial in ``u, v`` with a square ``(r+1) x (r+1)`` coefficient matrix.

    Rectangular input is zero-padded to the square shape.
    """

    ndim = 2
    __slots__ = ()

    def __init__(self, coeffs, exact: bool | None = None):
        super().__init__(coeffs, exact)
        rows, cols = self.coeffs.shape
        if rows != cols:
            r = max(rows, cols)
            self.coeffs = self.pad((r - 1, r - 1)).coeffs

    @property
    def r(self) -> int:
        return self.coeffs.shape[0] - 1

    def shift(self, a, b) -> "BiPoly":
        """Coefficients of ``(u, v) -> p(u + a, v + b)``."""
        n = self.coeffs.shape[0]
        if self.exact:
            a, b = _to_fraction(a), _to_fraction(b)
        sa = _shift_matrix(n, a, self.exact)
        sb = _shift_matrix(n, b, self.exact)
        # c'[k, l] = sum_{i, j} S_a[k, i] c[i, j] S_b[l, j]
        return BiPoly(sa.dot(self.coeffs).dot(sb.T))


def _shift_matrix(n: int, a, exact: bool) -> np.ndarray:
    """``S[k, i] = C(i, k) a^(i-k)``: coefficients of ``(u + a)^i`` in ``u^k``."""
    s = np.empty((n, n), dtype=object if exact else float)
    for k in range(n):
        for i in range(n):
            s[k, i] = math.comb(i, k) * a ** (i - k) if i >= k else 0 * a
    return s


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice on the unit cube with ``n`` nodes per axis, endpoints included."""

    n: int = DEFAULT_GRID_N

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs at least 2 points per axis, got {self.n}")

    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def mesh(self, ndim: int = 3) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis()] * ndim), indexing="ij"))

    def points(self, ndim: int = 3) -> np.ndarray:
        """Lattice points as an ``(n**ndim, ndim)`` array in row-major order."""
        return np.stack([m.ravel() for m in self.mesh(ndim)], axis=1)


def eval_tri(p: TriPoly, x1, x2, x3):
    """Evaluate ``p`` at a point (or broadcast arrays of points) by nested Horner."""
    return p(x1, x2, x3)


def eval_bi(p: BiPoly, u, v):
    return p(u, v)


def lin_comb(g: TriPoly, f: TriPoly, s=1.0, t=1.0) -> TriPoly:
    """Coefficientwise ``s*g + t*f``; the neighborhood perturbation is ``lin_comb(g, f, 1, t)``."""
    return g * s + f * t


def truncate(p, r: int, mode: str = PER_VARIABLE):
    """Zero every coefficient beyond order ``r``.

    ``per-variable`` drops monomials with some exponent above ``r``;
    ``total-degree`` drops monomials whose exponents sum above ``r``.
    Works for both :class:`TriPoly` and :class:`BiPoly`; declared bounds are kept.
    """
    if r < 0:
        raise ValueError("truncation order must be nonnegative")
    idx = np.indices(p.coeffs.shape)
    if mode == PER_VARIABLE:
        drop = idx.max(axis=0) > r
    elif mode == TOTAL_DEGREE:
        drop = idx.sum(axis=0) > r
    else:
        raise ValueError(f"unknown truncation mode {mode!r}; expected one of {TRUNCATION_MODES}")
    out = p.coeffs.copy()
    out[drop] = Fraction(0) if p.exact else 0.0
    return type(p)(out)


def grid_values(p, grid: GridSpec) -> np.ndarray:
    q = p.to_float() if p.exact else p
    mesh = grid.mesh(p.ndim)
    return np.broadcast_to(q(*mesh), mesh[0].shape)


def sup_norm(p, grid: GridSpec | None = None) -> float:
    """Grid sup-norm: max of ``|p|`` over the lattice (a lower bound of the sup over the cube)."""
    grid = grid or GridSpec()
    return float(np.max(np.abs(grid_values(p, grid))))


def coeff_count(p) -> int:
    """Number of coefficient slots at the declared bounds."""
    return int(p.coeffs.size)


def substitute(p: BiPoly, left: TriPoly, right: TriPoly) -> TriPoly:
    """Symbolic ``p(left, right)`` by Horner in the first argument.

    The exact path runs entirely on integers over a common denominator and
    converts to Fractions once at the end.
    """
    if p.exact or left.exact or right.exact:
        return _substitute_exact(p.to_exact(), left.to_exact(), right.to_exact())
    n = p.coeffs.shape[0]
    right_powers = [TriPoly.constant(1.0)]
    for _ in range(1, n):
        right_powers.append((right_powers[-1] * right).trim())
    acc = None
    for i in range(n - 1, -1, -1):
        row = TriPoly.zero(0)
        for j in range(n):
            c = p.coeffs[i, j]
            if c != 0:
                row = row + right_powers[j] * c
        acc = row if acc is None else (acc * left + row).trim()
    return acc.trim()


def _substitute_exact(p: BiPoly, left: TriPoly, right: TriPoly) -> TriPoly:
    # p(L/dl, R/dr) = sum_ij C_ij L^i R^j dl^(n-i) dr^(n-j) / (dc dl^n dr^n)
    n = p.coeffs.shape[0] - 1
    c, dc = _integer_scaled(p.coeffs)
    lft, dl = _integer_scaled(left.trim().coeffs)
    rgt, dr = _integer_scaled(right.trim().coeffs)
    one = np.ones((1, 1, 1), dtype=object)
    right_powers = [one]
    for _ in range(n):
        right_powers.append(_int_convolve(right_powers[-1], rgt))
    acc = None
    for i in range(n, -1, -1):
        row = np.zeros((1, 1, 1), dtype=object)
        row[...] = 0
        for j in range(n + 1):
            if c[i, j]:
                row = _int_add(row, right_powers[j] * (c[i, j] * dr ** (n - j)))
        if acc is None:
            acc = row
        else:
            acc = _int_add(_int_convolve(acc, lft), row * dl ** (n - i))
    return TriPoly(_from_integer_scaled(acc, dc * dl**n * dr**n)).trim()
