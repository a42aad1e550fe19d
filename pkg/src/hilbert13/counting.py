"""Coefficient counting for trivariate polynomials versus k-fold compositions.

A degree-``r`` trivariate polynomial carries more coefficients than ``k``
bivariate nodes of order ``r`` can supply once ``r > k``, so the set of
``k``-polynomials cannot fill the space and polynomials outside it exist.

Two counting conventions are offered side by side:

``literal``
    ``r**3`` target coefficients, ``r**2`` per node.
``exact``
    monomials of per-variable degree ``<= r`` with the constant term removed
    (the normalized, origin-vanishing form): ``(r+1)**3 - 1`` and
    ``(r+1)**2 - 1``.

A holding certificate is a dimension argument. It proves existence of
non-``k``-polynomials of that degree; it never decides whether a given
polynomial is one.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .polynomial import TriPoly

LITERAL = "literal"
EXACT = "exact"
MODES = (LITERAL, EXACT)

DISCLAIMER = (
    "counting certificates show that non-k-polynomials of degree r exist; "
    "they do not certify any particular polynomial"
)


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"unknown counting mode {mode!r}; expected one of {MODES}")


def trivariate_count(r: int, mode: str = LITERAL) -> int:
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    _check_mode(mode)
    return r**3 if mode == LITERAL else (r + 1) ** 3 - 1


def bivariate_count(r: int, mode: str = LITERAL) -> int:
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    _check_mode(mode)
    return r**2 if mode == LITERAL else (r + 1) ** 2 - 1


@dataclass(frozen=True)
class CountCertificate:
    k: int
    r: int
    mode: str
    target_count: int
    composition_count: int

    @property
    def gap(self) -> int:
        return self.target_count - self.composition_count

    @property
    def holds(self) -> bool:
        return self.gap > 0

    def row(self) -> tuple:
        return (self.k, self.r, self.mode, self.target_count, self.composition_count, self.gap, self.holds)

    def to_json(self) -> dict:
        return {**asdict(self), "gap": self.gap, "holds": self.holds, "note": DISCLAIMER}


CSV_HEADER = ("k", "r", "mode", "target", "composition", "gap", "holds")


def certificate(k: int, r: int, mode: str = LITERAL) -> CountCertificate:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return CountCertificate(k, r, mode, trivariate_count(r, mode), k * bivariate_count(r, mode))


def min_gap_degree(k: int, mode: str = LITERAL) -> int:
    """Smallest ``r`` whose certificate holds.

    The search stops by ``r = k + 1``: in literal mode ``(k+1)**3 > k (k+1)**2``,
    and in exact mode ``(k+2)**3 - 1 - k((k+2)**2 - 1) = 2(k+2)**2 + k - 1 > 0``.
    The loop bound ``k**2 + 2`` is therefore never reached.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    for r in range(1, k * k + 3):
        if certificate(k, r, mode).holds:
            return r
    raise AssertionError("unreachable: a certificate holds at r = k + 1")


def count_table(ks, rs, modes=(LITERAL,)) -> list[CountCertificate]:
    return [certificate(k, r, mode) for mode in modes for k in ks for r in rs]


def witness(k: int, seed: int = 0) -> TriPoly:
    """Random polynomial of per-variable degree ``k + 1``, coefficients uniform in ``[-1, 1]``.

    Generic by the counting argument (the ``k``-polynomials form a lower
    dimensional image), but not certified to lie outside that image.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(seed)
    n = k + 2
    return TriPoly(rng.uniform(-1.0, 1.0, size=(n, n, n)))
