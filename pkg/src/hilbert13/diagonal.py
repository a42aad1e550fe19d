"""Finite prefixes of the diagonal sequence ``f_1, f_2, ...`` and their uniform-Cauchy bookkeeping.

Each step adds a scaled random witness: ``f_{i+1} = f_i + t_i w_i`` with the
grid sup of ``t_i w_i`` equal to ``eps_i / 4``, so consecutive terms stay
within ``eps_i / 2`` and any two terms satisfy the triangle-sum bound
``|f_j - f_i| <= sum_{l=i}^{j-1} eps_l / 4``.

What is verified here is only the convergence bookkeeping. The witnesses are
seeded random polynomials, not certified non-approximable functions, and
nothing is claimed about the limit beyond uniform convergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .counting import witness
from .polynomial import GridSpec, TriPoly, eval_tri, lin_comb, sup_norm

# relative slack for float rounding in the Cauchy bound comparisons
_ROUNDING_SLACK = 1e-12


@dataclass(frozen=True)
class DiagonalSchedule:
    """Closeness radii ``eps`` and node budgets ``ns`` for ``m`` terms.

    ``ratio`` records a geometric decay ``eps_{i+1} = ratio * eps_i`` when the
    schedule has one; it is what allows a tail bound past the last term.
    """

    eps: tuple
    ns: tuple
    seed: int = 0
    ratio: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        if not self.eps or len(self.eps) != len(self.ns):
            raise ValueError("eps and ns must be non-empty and of equal length")
        if any(e <= 0 for e in self.eps) or any(b >= a for a, b in zip(self.eps, self.eps[1:])):
            raise ValueError("eps must be positive and strictly decreasing")
        if self.ns[0] < 1 or any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ValueError("ns must be positive and strictly increasing")
        if self.ratio is not None and not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")

    @classmethod
    def geometric(cls, m: int = 5, eps1: float = 0.5, ratio: float = 0.5, seed: int = 0):
        """Default schedule: ``eps_i = 2**-i`` and ``n_i = i`` for ``i = 1..m``."""
        if m < 1:
            raise ValueError("schedule length must be >= 1")
        eps = tuple(eps1 * ratio**i for i in range(m))
        return cls(eps, tuple(range(1, m + 1)), seed, ratio)

    @property
    def m(self) -> int:
        return len(self.eps)

    def tail(self, i: int) -> float:
        """``sum_{l >= i} eps_l / 4`` (1-based), over the infinite continuation when geometric."""
        if self.ratio is not None:
            return self.eps[i - 1] / 4 / (1 - self.ratio)
        return sum(self.eps[i - 1:]) / 4

    def to_json(self) -> dict:
        return {"eps": list(self.eps), "ns": list(self.ns), "seed": self.seed, "ratio": self.ratio}


@dataclass
class DiagonalSequence:
    terms: list[TriPoly]
    schedule: DiagonalSchedule
    steps: list[float] = field(default_factory=list)  # grid sup |f_{i+1} - f_i|
    grid: GridSpec = field(default_factory=GridSpec)

    @property
    def m(self) -> int:
        return len(self.terms)

    def to_json(self) -> dict:
        return {
            "schedule": self.schedule.to_json(),
            "grid": self.grid.n,
            "steps": self.steps,
            "terms": [p.to_json() for p in self.terms],
        }


def build(schedule: DiagonalSchedule, grid: GridSpec | None = None) -> DiagonalSequence:
    grid = grid or GridSpec()
    seed = schedule.seed
    terms = [witness(schedule.ns[0], seed)]
    steps = []
    for i in range(1, schedule.m):
        draw = seed + i
        w = witness(schedule.ns[i], draw)
        size = sup_norm(w, grid)
        while size == 0.0:  # degenerate draw, try the next seed
            draw += schedule.m
            w = witness(schedule.ns[i], draw)
            size = sup_norm(w, grid)
        t = schedule.eps[i - 1] / 4 / size
        nxt = lin_comb(terms[-1], w, 1.0, t)
        steps.append(sup_norm(nxt - terms[-1], grid))
        terms.append(nxt)
    return DiagonalSequence(terms, schedule, steps, grid)


@dataclass
class CauchyReport:
    distances: dict  # (i, j) -> grid sup |f_j - f_i|, 1-based, j > i
    bounds: dict  # (i, j) -> sum_{l=i}^{j-1} eps_l / 4
    step_violations: list  # i with step_i >= eps_i / 2
    pair_violations: list  # (i, j) exceeding the triangle-sum bound

    @property
    def ok(self) -> bool:
        return not self.step_violations and not self.pair_violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "pairs": [
                {"i": i, "j": j, "distance": d, "bound": self.bounds[i, j]}
                for (i, j), d in sorted(self.distances.items())
            ],
            "step_violations": self.step_violations,
            "pair_violations": [list(p) for p in self.pair_violations],
            "norm": "grid sup-norm",
        }


def cauchy_check(seq: DiagonalSequence | Sequence[TriPoly], grid: GridSpec | None = None,
                 schedule: DiagonalSchedule | None = None) -> CauchyReport:
    """All pairwise grid sup distances against the schedule's bounds.

    A bare list of polynomials may be passed together with a schedule; this is
    how hand-made (e.g. deliberately broken) sequences are checked.
    """
    if isinstance(seq, DiagonalSequence):
        terms, schedule = seq.terms, schedule or seq.schedule
        grid = grid or seq.grid
    else:
        terms = list(seq)
        if schedule is None:
            raise ValueError("a schedule is needed to check a bare list of terms")
    grid = grid or GridSpec()
    m = len(terms)
    distances, bounds = {}, {}
    step_violations, pair_violations = [], []
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            d = sup_norm(terms[j - 1] - terms[i - 1], grid)
            b = sum(schedule.eps[i - 1:j - 1]) / 4
            distances[i, j], bounds[i, j] = d, b
            if d > b * (1 + _ROUNDING_SLACK):
                pair_violations.append((i, j))
            if j == i + 1 and not d < schedule.eps[i - 1] / 2:
                step_violations.append(i)
    return CauchyReport(distances, bounds, step_violations, pair_violations)


class LimitValue(NamedTuple):
    value: float
    tail_bound: float  # a-priori bound on |f_i(x) - limit(x)|


def limit_eval(seq: DiagonalSequence, x: Sequence[float], i: int | None = None) -> LimitValue:
    """Value of the ``i``-th term (1-based, default last) with its tail bound attached."""
    i = seq.m if i is None else i
    if not 1 <= i <= seq.m:
        raise IndexError(f"term index {i} outside 1..{seq.m}")
    x1, x2, x3 = x
    return LimitValue(float(eval_tri(seq.terms[i - 1], x1, x2, x3)), seq.schedule.tail(i))
