"""Nestings of bivariate functions over the inputs ``x1, x2, x3``.

A :class:`CompositionDag` is an ordered node list. Each node is an input
(one of the three coordinates) or a bivariate node that applies a
:class:`~hilbert13.polynomial.BiPoly` (or, evaluation-only, any callable of
two arguments) to two strictly earlier nodes. A DAG with ``n`` bivariate
polynomial nodes realizes an ``n``-polynomial.

JSON layout (indices are list positions)::

    {"nodes": [{"kind": "input", "var": 1},
               {"kind": "bi", "left": 0, "right": 1, "poly": {...}}],
     "output": 1}
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

from .counting import EXACT, bivariate_count
from .polynomial import PER_VARIABLE, BiPoly, TriPoly, substitute, truncate


class DagError(ValueError):
    """Structural problem in a composition DAG (ordering, arity, output)."""


class UnsupportedNodeError(TypeError):
    """An algebraic operation met an opaque (non-polynomial) node."""


@dataclass(frozen=True)
class InputNode:
    var: int  # 1, 2 or 3


@dataclass(frozen=True)
class BiNode:
    left: int
    right: int
    poly: Union[BiPoly, Callable]

    @property
    def is_polynomial(self) -> bool:
        return isinstance(self.poly, BiPoly)


Node = Union[InputNode, BiNode]


@dataclass(frozen=True)
class CompositionDag:
    nodes: tuple
    output: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        validate(self)

    @property
    def n_bivariate(self) -> int:
        return sum(isinstance(nd, BiNode) for nd in self.nodes)

    @property
    def bivariate_indices(self) -> list[int]:
        return [i for i, nd in enumerate(self.nodes) if isinstance(nd, BiNode)]

    @property
    def is_polynomial(self) -> bool:
        return all(nd.is_polynomial for nd in self.nodes if isinstance(nd, BiNode))

    @property
    def exact(self) -> bool:
        polys = [nd.poly for nd in self.nodes if isinstance(nd, BiNode)]
        return bool(polys) and all(isinstance(p, BiPoly) and p.exact for p in polys)

    def polys(self) -> list[BiPoly]:
        return [self.nodes[i].poly for i in self.bivariate_indices]

    def with_polys(self, polys: Sequence) -> "CompositionDag":
        """Same topology, bivariate node functions replaced in node order."""
        idx = self.bivariate_indices
        if len(polys) != len(idx):
            raise ValueError(f"need {len(idx)} node functions, got {len(polys)}")
        nodes = list(self.nodes)
        for i, p in zip(idx, polys):
            nodes[i] = BiNode(nodes[i].left, nodes[i].right, p)
        return CompositionDag(tuple(nodes), self.output)

    def reachable(self) -> list[int]:
        """Indices of the nodes the output depends on, in list order."""
        seen = {self.output}
        for i in range(self.output, -1, -1):
            nd = self.nodes[i]
            if i in seen and isinstance(nd, BiNode):
                seen.update((nd.left, nd.right))
        return sorted(seen)

    def to_json(self) -> dict:
        out = []
        for nd in self.nodes:
            if isinstance(nd, InputNode):
                out.append({"kind": "input", "var": nd.var})
            elif nd.is_polynomial:
                out.append({"kind": "bi", "left": nd.left, "right": nd.right, "poly": nd.poly.to_json()})
            else:
                raise UnsupportedNodeError("opaque callable nodes cannot be serialized")
        return {"nodes": out, "output": self.output}

    @classmethod
    def from_json(cls, doc: dict) -> "CompositionDag":
        if not isinstance(doc, dict) or "nodes" not in doc or "output" not in doc:
            raise DagError("DAG document needs 'nodes' and 'output'")
        nodes = []
        for i, nd in enumerate(doc["nodes"]):
            kind = nd.get("kind") if isinstance(nd, dict) else None
            if kind == "input":
                nodes.append(InputNode(int(nd["var"])))
            elif kind == "bi":
                children = [nd[key] for key in ("left", "right") if key in nd]
                if len(children) != 2:
                    raise DagError(f"node {i}: bivariate node needs exactly two children, got {len(children)}")
                if "poly" not in nd:
                    raise DagError(f"node {i}: bivariate node has no 'poly'")
                nodes.append(BiNode(int(children[0]), int(children[1]), BiPoly.from_json(nd["poly"])))
            else:
                raise DagError(f"node {i}: unknown kind {kind!r}")
        return cls(tuple(nodes), int(doc["output"]))


def validate(dag: CompositionDag) -> None:
    """Raise :class:`DagError` describing the first violated invariant."""
    nodes = dag.nodes
    if not nodes:
        raise DagError("DAG has no nodes")
    for i, nd in enumerate(nodes):
        if isinstance(nd, InputNode):
            if nd.var not in (1, 2, 3):
                raise DagError(f"node {i}: input variable must be 1, 2 or 3, got {nd.var}")
        elif isinstance(nd, BiNode):
            for side, ref in (("left", nd.left), ("right", nd.right)):
                if ref is None:
                    raise DagError(f"node {i}: missing {side} child")
                if not 0 <= ref < i:
                    raise DagError(f"node {i}: {side} child {ref} does not point to an earlier node")
            if not (isinstance(nd.poly, BiPoly) or callable(nd.poly)):
                raise DagError(f"node {i}: node function must be a BiPoly or a callable")
        else:
            raise DagError(f"node {i}: unknown node type {type(nd).__name__}")
    if not 0 <= dag.output < len(nodes):
        raise DagError(f"output index {dag.output} out of range")


def eval_dag(dag: CompositionDag, x1, x2, x3):
    """Evaluate in list (topological) order. Arguments may be numpy arrays."""
    inputs = (x1, x2, x3)
    values = [None] * len(dag.nodes)
    for i in dag.reachable():
        nd = dag.nodes[i]
        if isinstance(nd, InputNode):
            values[i] = inputs[nd.var - 1]
        else:
            values[i] = nd.poly(values[nd.left], values[nd.right])
    return values[dag.output]


def compose(p: BiPoly, left: TriPoly, right: TriPoly) -> TriPoly:
    """Symbolic ``p(left, right)``."""
    return substitute(p, left, right)


def _require_polynomial(dag: CompositionDag) -> None:
    for i in dag.reachable():
        nd = dag.nodes[i]
        if isinstance(nd, BiNode) and not nd.is_polynomial:
            raise UnsupportedNodeError(f"node {i} is an opaque callable; algebra needs polynomial nodes")


def expand(dag: CompositionDag, exact: bool | None = None) -> TriPoly:
    """Expand the DAG into a single trivariate polynomial.

    Exact (Fraction) arithmetic is used when every node polynomial is exact,
    or when ``exact=True`` is passed.
    """
    _require_polynomial(dag)
    exact = dag.exact if exact is None else exact
    values: dict[int, TriPoly] = {}
    for i in dag.reachable():
        nd = dag.nodes[i]
        if isinstance(nd, InputNode):
            values[i] = TriPoly.variable(nd.var, exact=exact)
        else:
            p = nd.poly.to_exact() if exact else nd.poly.to_float() if nd.poly.exact else nd.poly
            values[i] = compose(p, values[nd.left], values[nd.right])
    return values[dag.output]


@dataclass(frozen=True)
class NormalizationResult:
    dag: CompositionDag
    constant: object  # the original DAG's value at the origin


def normalize_origin(dag: CompositionDag) -> NormalizationResult:
    """Rewrite the DAG so every node polynomial vanishes at ``(0, 0)``.

    Each node absorbs its children's values at the origin by shifting its
    arguments, then hands its own origin value up to its parents. The result
    satisfies ``eval(normalized, x) + constant == eval(dag, x)``.
    """
    _require_polynomial(dag)
    origin: list = [0] * len(dag.nodes)
    nodes = list(dag.nodes)
    for i, nd in enumerate(dag.nodes):
        if isinstance(nd, InputNode):
            continue
        q = nd.poly.shift(origin[nd.left], origin[nd.right])
        origin[i] = q.coeffs[0, 0]
        coeffs = q.coeffs.copy()
        coeffs[0, 0] = Fraction(0) if q.exact else 0.0
        nodes[i] = BiNode(nd.left, nd.right, BiPoly(coeffs))
    return NormalizationResult(CompositionDag(tuple(nodes), dag.output), origin[dag.output])


def truncate_nodes(dag: CompositionDag, r: int, mode: str = PER_VARIABLE) -> CompositionDag:
    _require_polynomial(dag)
    return dag.with_polys([truncate(p, r, mode) for p in dag.polys()])


def param_count(dag: CompositionDag, r: int, mode: str = EXACT) -> int:
    """Free coefficients of ``n`` origin-vanishing nodes at order ``r``.

    ``exact``: ``(r+1)**2 - 1`` per node; ``literal``: ``r**2`` per node.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    if dag.n_bivariate == 0:
        return 0
    if r == 0:
        return 0
    return dag.n_bivariate * bivariate_count(r, mode)


# presets


def _zero_node(r: int, exact: bool) -> BiPoly:
    return BiPoly.zero((r, r), exact=exact)


def chain(k: int, r: int = 1, exact: bool = False) -> CompositionDag:
    """``k`` nested nodes: ``t1(x2, x3)``, then ``t2(x1, t1)``, ``t3(x2, t2)``, ..."""
    if k < 1:
        raise ValueError("a chain needs at least one node")
    nodes: list = [InputNode(1), InputNode(2), InputNode(3)]
    nodes.append(BiNode(1, 2, _zero_node(r, exact)))
    for step in range(1, k):
        nodes.append(BiNode((step - 1) % 3, len(nodes) - 1, _zero_node(r, exact)))
    return CompositionDag(tuple(nodes), len(nodes) - 1)


def hilbert_3leaf(r: int = 1, exact: bool = False) -> CompositionDag:
    """Leaves ``f(x1,x2), g(x2,x3), h(x3,x1)``, then ``a(f,g), b(g,h), c(h,f)``,
    ``A(a,b), B(b,c)`` and output ``C(A,B)``."""
    z = lambda: _zero_node(r, exact)  # noqa: E731
    nodes = [
        InputNode(1), InputNode(2), InputNode(3),
        BiNode(0, 1, z()),  # 3: f
        BiNode(1, 2, z()),  # 4: g
        BiNode(2, 0, z()),  # 5: h
        BiNode(3, 4, z()),  # 6: a
        BiNode(4, 5, z()),  # 7: b
        BiNode(5, 3, z()),  # 8: c
        BiNode(6, 7, z()),  # 9: A
        BiNode(7, 8, z()),  # 10: B
        BiNode(9, 10, z()),  # 11: C
    ]
    return CompositionDag(tuple(nodes), 11)


PRESETS = ("chain2", "hilbert-3leaf", "chain<k>")


def preset(name: str, r: int = 1, exact: bool = False) -> CompositionDag:
    """Named topology with zero node polynomials of per-variable order ``r``."""
    if name == "hilbert-3leaf":
        return hilbert_3leaf(r, exact)
    m = re.fullmatch(r"chain(\d+)", name)
    if m:
        return chain(int(m.group(1)), r, exact)
    raise ValueError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")


def origin_values(dag: CompositionDag) -> list:
    """Each node's value at ``x = (0, 0, 0)``; used by normalization checks."""
    zero = Fraction(0) if dag.exact else 0.0
    vals: list = [zero] * len(dag.nodes)
    for i, nd in enumerate(dag.nodes):
        if isinstance(nd, BiNode):
            vals[i] = nd.poly(vals[nd.left], vals[nd.right])
    return vals

