"""Digit-interleaving bijection between the unit square and the unit interval.

A :class:`PairingCodec` with base ``b`` and ``d`` digits acts exactly on the
grid ``G_d = {m / b**d : 0 <= m < b**d}``. ``pair`` interleaves the base-``b``
digits of ``x2`` (positions 1, 3, 5, ...) with those of ``x3`` (positions
2, 4, 6, ...) into a ``2d``-digit number ``y``; ``unpair`` splits them again.
Through this map a trivariate function becomes bivariate:
``f(x1, x2, x3) = F(x1, pair(x2, x3))`` with ``F(x, y) = f(x, *unpair(y))``.

The map is a bijection of grids, but as a real map it is badly discontinuous
(``0.1999...`` and ``0.2`` land far apart), which is the whole reason the
continuous version of the question has content.

Inputs off the grid are quantized by truncation toward zero. Floats are read
as the grid point they are the correctly rounded image of, when there is one,
so ``0.12`` in base 10 means ``12/100`` rather than the binary value just
below it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


class PairingDomainError(ValueError):
    """Input outside the half-open unit interval ``[0, 1)``."""


class Quantized(NamedTuple):
    index: int  # grid index m, the value is m / scale
    exact: bool  # False when truncation moved the input


@dataclass(frozen=True)
class PairingCodec:
    base: int = 2
    digits: int = 20

    def __post_init__(self):
        if int(self.base) != self.base or self.base < 2:
            raise ValueError(f"base must be an integer >= 2, got {self.base}")
        if int(self.digits) != self.digits or self.digits < 1:
            raise ValueError(f"digits must be an integer >= 1, got {self.digits}")

    @property
    def scale(self) -> int:
        """Grid denominator ``b**d`` for one coordinate."""
        return self.base**self.digits

    @property
    def pair_scale(self) -> int:
        return self.base ** (2 * self.digits)

    @property
    def max_value(self) -> Fraction:
        """Largest grid point ``1 - b**-d``; the CLI clamps 1 to this."""
        return Fraction(self.scale - 1, self.scale)

    # quantization

    def quantize(self, x, ndigits: int | None = None) -> Quantized:
        """Grid index of ``x`` at ``ndigits`` base-``b`` digits (default ``d``)."""
        ndigits = self.digits if ndigits is None else ndigits
        scale = self.base**ndigits
        if isinstance(x, str):
            return self._quantize_str(x, ndigits)
        if isinstance(x, float):
            if not 0.0 <= x < 1.0:
                raise PairingDomainError(f"{x!r} is outside [0, 1)")
            exact_x = Fraction(x)
            nearest = round(exact_x * scale)
            if nearest < scale and float(Fraction(nearest, scale)) == x:
                return Quantized(nearest, True)
            m = int(exact_x * scale)
            return Quantized(m, False)
        if isinstance(x, Decimal):
            x = Fraction(x)
        x = Fraction(x)
        if not 0 <= x < 1:
            raise PairingDomainError(f"{x} is outside [0, 1)")
        m = x.numerator * scale // x.denominator
        return Quantized(m, Fraction(m, scale) == x)

    def _quantize_str(self, s: str, ndigits: int) -> Quantized:
        text = s.strip().lower()
        whole, _, frac = text.partition(".")
        if whole not in ("", "0") or not (whole or frac):
            raise PairingDomainError(f"{s!r} is outside [0, 1) or not a base-{self.base} fraction")
        values = []
        for ch in frac:
            v = _DIGITS.find(ch)
            if v < 0 or v >= self.base:
                raise ValueError(f"invalid base-{self.base} digit {ch!r} in {s!r}")
            values.append(v)
        kept, dropped = values[:ndigits], values[ndigits:]
        kept += [0] * (ndigits - len(kept))
        m = 0
        for v in kept:
            m = m * self.base + v
        return Quantized(m, not any(dropped))

    def grid_value(self, x) -> float:
        """``x`` snapped down to ``G_d``, as a float."""
        return float(Fraction(self.quantize(x).index, self.scale))

    # integer-level bijection

    def _digits_of(self, m: int, n: int) -> list[int]:
        out = [0] * n
        for pos in range(n - 1, -1, -1):
            m, out[pos] = divmod(m, self.base)
        return out

    def pair_index(self, m2: int, m3: int) -> int:
        if not (0 <= m2 < self.scale and 0 <= m3 < self.scale):
            raise PairingDomainError(f"grid indices ({m2}, {m3}) out of range [0, {self.scale})")
        n = 0
        for a, b in zip(self._digits_of(m2, self.digits), self._digits_of(m3, self.digits)):
            n = (n * self.base + a) * self.base + b
        return n

    def unpair_index(self, n: int) -> tuple[int, int]:
        if not 0 <= n < self.pair_scale:
            raise PairingDomainError(f"grid index {n} out of range [0, {self.pair_scale})")
        digits = self._digits_of(n, 2 * self.digits)
        m2 = m3 = 0
        for a, b in zip(digits[0::2], digits[1::2]):
            m2 = m2 * self.base + a
            m3 = m3 * self.base + b
        return m2, m3

    # real-valued API

    def pair_exact(self, x2, x3) -> Fraction:
        n = self.pair_index(self.quantize(x2).index, self.quantize(x3).index)
        return Fraction(n, self.pair_scale)

    def unpair_exact(self, y) -> tuple[Fraction, Fraction]:
        m2, m3 = self.unpair_index(self.quantize(y, 2 * self.digits).index)
        return Fraction(m2, self.scale), Fraction(m3, self.scale)

    def pair(self, x2, x3) -> float:
        """``y = phi(x2, x3)`` as the nearest float to the exact ``2d``-digit value."""
        return float(self.pair_exact(x2, x3))

    def unpair(self, y) -> tuple[float, float]:
        """``(alpha(y), beta(y))``; exact inverse of :meth:`pair` on the grid."""
        a, b = self.unpair_exact(y)
        return float(a), float(b)

    def alpha(self, y) -> float:
        return self.unpair(y)[0]

    def beta(self, y) -> float:
        return self.unpair(y)[1]

    # string API, no float round trips

    def format_index(self, n: int, ndigits: int) -> str:
        return "0." + "".join(_DIGITS[v] for v in self._digits_of(n, ndigits))

    def pair_str(self, x2: str, x3: str) -> str:
        n = self.pair_index(self.quantize(x2).index, self.quantize(x3).index)
        return self.format_index(n, 2 * self.digits)

    def unpair_str(self, y: str) -> tuple[str, str]:
        m2, m3 = self.unpair_index(self.quantize(y, 2 * self.digits).index)
        return self.format_index(m2, self.digits), self.format_index(m3, self.digits)


TrivariateOracle = Callable[[float, float, float], float]


@dataclass(frozen=True)
class RepresentedFunction:
    """``F(x, y) = f(x, alpha(y), beta(y))`` for a trivariate oracle ``f``."""

    f: TrivariateOracle
    codec: PairingCodec

    def __call__(self, x, y):
        x2, x3 = self.codec.unpair(y)
        return self.f(x, x2, x3)


def represent(f: TrivariateOracle, codec: PairingCodec) -> RepresentedFunction:
    return RepresentedFunction(f, codec)


@dataclass
class IdentityReport:
    """Outcome of checking ``f(x1, x2, x3) == F(x1, pair(x2, x3))`` on samples.

    ``exact`` holds one flag per sample, evaluated on grid-quantized ``x2, x3``;
    ``deviations`` are ``|F(x1, pair(x2, x3)) - f(x1, x2, x3)|`` on the raw inputs.
    """

    exact: list[bool] = field(default_factory=list)
    deviations: list[float] = field(default_factory=list)
    quantized: int = 0  # samples whose x2 or x3 was off the grid

    @property
    def all_exact(self) -> bool:
        return all(self.exact)

    @property
    def max_deviation(self) -> float:
        return max(self.deviations, default=0.0)

    def to_json(self) -> dict:
        return {
            "samples": len(self.exact),
            "all_exact": self.all_exact,
            "exact_count": sum(self.exact),
            "quantized_inputs": self.quantized,
            "max_deviation": self.max_deviation,
        }


def verify_identity(
    f: TrivariateOracle,
    F: Callable[[float, float], float],
    samples: Sequence[Sequence[float]],
    codec: PairingCodec,
) -> IdentityReport:
    report = IdentityReport()
    for x1, x2, x3 in samples:
        q2, q3 = codec.quantize(x2), codec.quantize(x3)
        g2 = float(Fraction(q2.index, codec.scale))
        g3 = float(Fraction(q3.index, codec.scale))
        report.exact.append(bool(F(x1, codec.pair(g2, g3)) == f(x1, g2, g3)))
        report.deviations.append(abs(float(F(x1, codec.pair(x2, x3))) - float(f(x1, x2, x3))))
        report.quantized += not (q2.exact and q3.exact)
    return report
