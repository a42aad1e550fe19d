"""Shared builders for tests: random DAGs, naive oracles, DAG permutations."""

from fractions import Fraction

import numpy as np

from hilbert13.composition import BiNode, CompositionDag, InputNode
from hilbert13.polynomial import BiPoly, TriPoly


def random_bipoly(rng, r, exact=True, constant=True, density=0.6):
    """Coefficients on the total-degree triangle i + j <= r, small rationals."""
    c = np.zeros((r + 1, r + 1), dtype=object)
    c[...] = Fraction(0)
    for i in range(r + 1):
        for j in range(r + 1 - i):
            if (i, j) == (0, 0) and not constant:
                continue
            if rng.random() < density or i + j == r:
                c[i, j] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 5)))
    p = BiPoly(c, exact=True)
    return p if exact else p.to_float()


def random_dag(rng, max_nodes=4, max_degree=3, degree_cap=27, exact=True, constant=True):
    """Random polynomial DAG whose composed total degree stays <= degree_cap.

    Children are drawn uniformly among earlier nodes; node orders are
    redrawn (smaller) when the composed degree would exceed the cap.
    """
    n = int(rng.integers(1, max_nodes + 1))
    nodes = [InputNode(1), InputNode(2), InputNode(3)]
    degs = [1, 1, 1]
    for _ in range(n):
        i = len(nodes)
        left, right = (int(v) for v in rng.integers(0, i, size=2))
        child = max(degs[left], degs[right])
        r_max = max(1, min(max_degree, degree_cap // child))
        r = int(rng.integers(1, r_max + 1))
        nodes.append(BiNode(left, right, random_bipoly(rng, r, exact=exact, constant=constant)))
        degs.append(r * child)
    return CompositionDag(tuple(nodes), len(nodes) - 1)


def random_rational_point(rng):
    return tuple(Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 12))) for _ in range(3))


def naive_eval(p, xs):
    """Monomial-by-monomial sum, independent of Horner."""
    total = 0
    for idx in np.ndindex(*p.coeffs.shape):
        term = p.coeffs[idx]
        for x, e in zip(xs, idx):
            term = term * x**e
        total = total + term
    return total


def permute_dag(dag, order):
    """Reorder the non-output-dependent layout: ``order`` is a topological order of old indices."""
    pos = {old: new for new, old in enumerate(order)}
    nodes = []
    for old in order:
        nd = dag.nodes[old]
        if isinstance(nd, BiNode):
            nd = BiNode(pos[nd.left], pos[nd.right], nd.poly)
        nodes.append(nd)
    return CompositionDag(tuple(nodes), pos[dag.output])


def random_topological_order(dag, rng):
    n = len(dag.nodes)
    deps = {i: ({nd.left, nd.right} if isinstance(nd, BiNode) else set()) for i, nd in enumerate(dag.nodes)}
    done, order = set(), []
    while len(order) < n:
        ready = sorted(i for i in range(n) if i not in done and deps[i] <= done)
        pick = ready[int(rng.integers(0, len(ready)))]
        order.append(pick)
        done.add(pick)
    return order


def tri(expr_terms, exact=False):
    """TriPoly from ``{(i, j, k): c}``."""
    shape = tuple(max(idx[v] for idx in expr_terms) + 1 for v in range(3))
    c = np.zeros(shape, dtype=object if exact else float)
    if exact:
        c[...] = Fraction(0)
    for idx, val in expr_terms.items():
        c[idx] = val
    return TriPoly(c, exact=exact)
