"""Least-squares fitting of composition DAGs to trivariate targets on a grid.

The fitted class is "``k`` bivariate polynomial nodes of order ``r`` wired
as a given topology". The objective is the mean squared residual over the
grid; the grid sup residual is reported alongside and is what thresholds
are stated in. Optimization is damped Gauss-Newton (Levenberg damping
``lambda * I``) with several seeded restarts.

Node parametrization: every coefficient of every node is free except the
constant term of non-output nodes, which is pinned to zero. By origin
normalization this loses no generality; the output node keeps its constant
so targets that do not vanish at the origin can still be fitted.

A large best residual is evidence that the target is far from the fitted
class over the restarts tried. It is never a proof, and says nothing about
continuous (non-polynomial) nestings, which can represent every continuous
trivariate function.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .composition import BiNode, CompositionDag, eval_dag, preset
from .polynomial import BiPoly, GridSpec, TriPoly, grid_values, lin_comb


@dataclass(frozen=True)
class FitConfig:
    r: int = 2
    restarts: int = 20
    max_iter: int = 300
    seed: int = 0
    lam0: float = 1e-3
    lam_shrink: float = 0.5
    lam_grow: float = 4.0
    lam_max: float = 1e12
    tol: float = 1e-10  # relative decrease of the objective that counts as stalled
    init_scale: float = 0.5  # coefficients start uniform in [-init_scale, init_scale]
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("node order r must be >= 1")
        if self.restarts < 1 or self.max_iter < 1:
            raise ValueError("restarts and max_iter must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not (0 < self.lam_shrink < 1 < self.lam_grow):
            raise ValueError("need 0 < lam_shrink < 1 < lam_grow")

    def to_json(self) -> dict:
        return {
            "r": self.r, "restarts": self.restarts, "max_iter": self.max_iter, "seed": self.seed,
            "lam0": self.lam0, "lam_shrink": self.lam_shrink, "lam_grow": self.lam_grow,
            "lam_max": self.lam_max, "tol": self.tol, "init_scale": self.init_scale,
            "grid": self.grid.n,
        }


def _as_topology(topology, r: int) -> CompositionDag:
    if isinstance(topology, str):
        return preset(topology, r)
    return topology


class LeastSquaresProblem:
    """Residuals and Jacobian of ``eval_dag - target`` over a grid, as functions of the node coefficients.

    The parameter vector concatenates, node by node, the free coefficients of
    each ``(r+1) x (r+1)`` coefficient matrix in row-major order.
    """

    def __init__(self, topology: CompositionDag, target, r: int, grid: GridSpec | None = None):
        self.topology = topology
        self.r = r
        self.grid = grid or GridSpec()
        pts = self.grid.points(3)
        self.inputs = (pts[:, 0], pts[:, 1], pts[:, 2])
        if isinstance(target, TriPoly):
            self.target = grid_values(target, self.grid).ravel()
        else:
            self.target = np.asarray(target, dtype=float).ravel()
        if self.target.size != pts.shape[0]:
            raise ValueError("target values do not match the grid")
        self.nodes = topology.bivariate_indices
        if not self.nodes:
            raise ValueError("topology has no bivariate nodes to fit")
        m = r + 1
        self.masks = []
        for i in self.nodes:
            mask = np.ones((m, m), dtype=bool)
            if i != topology.output:
                mask[0, 0] = False
            self.masks.append(mask)
        sizes = [int(mk.sum()) for mk in self.masks]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.n_params = int(self.offsets[-1])
        self._input_powers = {
            i: np.vander(self.inputs[nd.var - 1], r + 1, increasing=True)
            for i, nd in enumerate(topology.nodes)
            if not isinstance(nd, BiNode)
        }

    @property
    def n_points(self) -> int:
        return self.target.size

    # parameter packing

    def unpack(self, theta: np.ndarray) -> list[np.ndarray]:
        m = self.r + 1
        out = []
        for k, mask in enumerate(self.masks):
            c = np.zeros((m, m))
            c[mask] = theta[self.offsets[k]:self.offsets[k + 1]]
            out.append(c)
        return out

    def pack(self, dag: CompositionDag) -> np.ndarray:
        """Parameter vector of a DAG with this topology (higher-order terms must vanish)."""
        theta = np.zeros(self.n_params)
        for k, (i, mask) in enumerate(zip(self.nodes, self.masks)):
            p = dag.nodes[i].poly.to_float()
            if max(p.degree) > self.r:
                raise ValueError(f"node {i} has order above r={self.r}")
            c = p.pad((max(p.r, self.r),) * 2).coeffs[: self.r + 1, : self.r + 1]
            if np.any(c[~mask] != 0):
                raise ValueError(f"node {i} has a nonzero pinned constant term")
            theta[self.offsets[k]:self.offsets[k + 1]] = c[mask]
        return theta

    def to_dag(self, theta: np.ndarray) -> CompositionDag:
        return self.topology.with_polys([BiPoly(c) for c in self.unpack(theta)])

    def random_parameters(self, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
        """Uniform in ``[-scale, scale]``; the free output constant starts at zero."""
        theta = rng.uniform(-scale, scale, size=self.n_params)
        for k, i in enumerate(self.nodes):
            if i == self.topology.output:
                theta[self.offsets[k]] = 0.0  # (0, 0) is the first free slot
        return theta

    # evaluation

    def _forward(self, theta: np.ndarray):
        coeffs = self.unpack(theta)
        values: list = [None] * len(self.topology.nodes)
        powers = {}
        for i, nd in enumerate(self.topology.nodes):
            if not isinstance(nd, BiNode):
                values[i] = self.inputs[nd.var - 1]
        for k, i in enumerate(self.nodes):
            nd = self.topology.nodes[i]
            pl, pr = self._powers(nd.left, values), self._powers(nd.right, values)  # (P, r+1)
            powers[i] = (pl, pr)
            values[i] = ((pl @ coeffs[k]) * pr).sum(axis=1)
        return coeffs, values, powers

    def _powers(self, i: int, values: list) -> np.ndarray:
        cached = self._input_powers.get(i)
        if cached is not None:
            return cached
        return np.vander(values[i], self.r + 1, increasing=True)

    def residuals(self, theta: np.ndarray) -> np.ndarray:
        _, values, _ = self._forward(theta)
        return values[self.topology.output] - self.target

    def jacobian(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Residual vector and its Jacobian, by reverse accumulation through the DAG."""
        coeffs, values, powers = self._forward(theta)
        res = values[self.topology.output] - self.target
        npts = res.size
        adj = [np.zeros(npts) for _ in self.topology.nodes]
        adj[self.topology.output] = np.ones(npts)
        deg = np.arange(self.r + 1, dtype=float)
        jac = np.zeros((npts, self.n_params))
        for k in range(len(self.nodes) - 1, -1, -1):
            i = self.nodes[k]
            nd = self.topology.nodes[i]
            pl, pr = powers[i]
            a = adj[i]
            rows, cols = np.nonzero(self.masks[k])
            jac[:, self.offsets[k]:self.offsets[k + 1]] = (a[:, None] * pl[:, rows]) * pr[:, cols]
            if not np.any(a):
                continue
            c = coeffs[k]
            # d/du sum c_ij u^i v^j = sum_{i>=1} i c_ij u^(i-1) v^j
            dl = ((pl[:, :-1] @ (deg[1:, None] * c[1:, :])) * pr).sum(axis=1)
            dr = ((pl @ (c[:, 1:] * deg[None, 1:])) * pr[:, :-1]).sum(axis=1)
            adj[nd.left] = adj[nd.left] + a * dl
            adj[nd.right] = adj[nd.right] + a * dr
        return res, jac

    def objective(self, theta: np.ndarray) -> float:
        """Half the mean squared residual."""
        res = self.residuals(theta)
        return 0.5 * float(res @ res) / res.size

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        res, jac = self.jacobian(theta)
        return jac.T @ res / res.size


@dataclass
class RestartResult:
    theta: np.ndarray
    rms: float
    sup: float
    iterations: int
    converged: bool
    stop: str
    history: list = field(default_factory=list)  # objective after each accepted step


def _levenberg(problem: LeastSquaresProblem, theta: np.ndarray, cfg: FitConfig) -> RestartResult:
    npts = problem.n_points
    res = problem.residuals(theta)
    cost = float(res @ res) / npts
    history = [cost]
    lam = cfg.lam0
    eye = np.eye(problem.n_params)
    stop = "max-iter"
    it = 0
    for it in range(1, cfg.max_iter + 1):
        if cost == 0.0:
            stop = "zero-residual"
            break
        res, jac = problem.jacobian(theta)
        a = jac.T @ jac / npts
        g = jac.T @ res / npts
        accepted = False
        while lam <= cfg.lam_max:
            try:
                delta = np.linalg.solve(a + lam * eye, -g)
            except np.linalg.LinAlgError:
                lam *= cfg.lam_grow
                continue
            trial = theta + delta
            tres = problem.residuals(trial)
            tcost = float(tres @ tres) / npts
            if np.isfinite(tcost) and tcost < cost:
                accepted = True
                break
            lam *= cfg.lam_grow
        if not accepted:
            stop = "no-improvement"
            break
        decrease = (cost - tcost) / cost
        theta, cost = trial, tcost
        history.append(cost)
        lam = max(lam * cfg.lam_shrink, 1e-15)
        if decrease < cfg.tol:
            stop = "small-decrease"
            break
    res = problem.residuals(theta)
    return RestartResult(
        theta=theta,
        rms=float(np.sqrt(res @ res / npts)),
        sup=float(np.max(np.abs(res))),
        iterations=it,
        converged=stop != "max-iter",
        stop=stop,
        history=history,
    )


@dataclass
class FitReport:
    topology: str
    r: int
    dag: CompositionDag
    rms: float
    sup: float
    best_restart: int
    restart_rms: list[float]
    restart_sup: list[float]
    iterations: list[int]
    converged: bool
    config: FitConfig

    @property
    def parameters(self) -> list[BiPoly]:
        return self.dag.polys()

    def to_json(self) -> dict:
        return {
            "topology": self.topology,
            "r": self.r,
            "norms": "grid sup-norm and grid rms",
            "rms": self.rms,
            "sup": self.sup,
            "best_restart": self.best_restart,
            "restart_rms": self.restart_rms,
            "restart_sup": self.restart_sup,
            "iterations": self.iterations,
            "converged": self.converged,
            "config": self.config.to_json(),
            "dag": self.dag.to_json(),
            "note": f"best grid residual over {len(self.restart_sup)} restarts; evidence, not proof",
        }


def fit(topology, target: TriPoly, config: FitConfig | None = None, name: str | None = None) -> FitReport:
    """Fit the node polynomials of ``topology`` to ``target`` on ``config.grid``.

    ``topology`` is a :class:`CompositionDag` (its node polynomials are
    ignored, only the wiring is used) or a preset name. Restart ``i`` draws
    its start from ``default_rng([seed, i])``. The best restart is the one
    with the smallest grid sup residual, ties going to the lower index.
    """
    cfg = config or FitConfig()
    label = name or (topology if isinstance(topology, str) else "custom")
    topo = _as_topology(topology, cfg.r)
    if not topo.is_polynomial:
        raise TypeError("fitting needs polynomial nodes")
    problem = LeastSquaresProblem(topo, target, cfg.r, cfg.grid)
    results = []
    for i in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, i])
        results.append(_levenberg(problem, problem.random_parameters(rng, cfg.init_scale), cfg))
    best = min(range(len(results)), key=lambda i: (results[i].sup, i))
    b = results[best]
    return FitReport(
        topology=label,
        r=cfg.r,
        dag=problem.to_dag(b.theta),
        rms=b.rms,
        sup=b.sup,
        best_restart=best,
        restart_rms=[x.rms for x in results],
        restart_sup=[x.sup for x in results],
        iterations=[x.iterations for x in results],
        converged=b.converged,
        config=cfg,
    )


def residual(dag: CompositionDag, target: TriPoly, grid: GridSpec | None = None) -> tuple[float, float]:
    """``(rms, sup)`` of ``eval_dag - target`` over the grid."""
    grid = grid or GridSpec()
    x1, x2, x3 = grid.mesh(3)
    diff = np.asarray(eval_dag(dag, x1, x2, x3), dtype=float) - grid_values(target, grid)
    diff = np.broadcast_to(diff, x1.shape)
    return float(np.sqrt(np.mean(diff**2))), float(np.max(np.abs(diff)))


def grad_check(
    topology,
    target: TriPoly,
    grid: GridSpec | None = None,
    seed: int = 0,
    h: float = 1e-5,
    r: int | None = None,
) -> float:
    """Compare the analytic gradient of the objective with central differences.

    The objective is half the mean squared grid residual, evaluated at
    parameters drawn like a fit's starting point. Returns
    ``max_i |g_i - fd_i| / max(|g|_inf, |fd|_inf)``, i.e. the componentwise
    error measured against the gradient's own scale.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    if r is None:
        r = 1 if isinstance(topology, str) else max(p.r for p in topology.polys())
    topo = _as_topology(topology, r)
    problem = LeastSquaresProblem(topo, target, r, grid)
    theta = problem.random_parameters(np.random.default_rng(seed))
    analytic = problem.gradient(theta)
    fd = _central_differences(problem, theta, h)
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(fd)), np.finfo(float).tiny)
    return float(np.max(np.abs(analytic - fd)) / scale)


def _central_differences(problem: LeastSquaresProblem, theta: np.ndarray, h: float) -> np.ndarray:
    fd = np.empty_like(theta)
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        fd[i] = (problem.objective(up) - problem.objective(down)) / (2 * h)
    return fd


@dataclass
class ProbeReport:
    t_values: list[float]
    fits: list[FitReport]

    @property
    def rms(self) -> list[float]:
        return [f.rms for f in self.fits]

    @property
    def sup(self) -> list[float]:
        return [f.sup for f in self.fits]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t", "rms", "sup", "best_restart"))
        for t, f in zip(self.t_values, self.fits):
            w.writerow((repr(float(t)), repr(f.rms), repr(f.sup), f.best_restart))
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "t": [float(t) for t in self.t_values],
            "rms": self.rms,
            "sup": self.sup,
            "note": "grid residuals of the best of several restarts; evidence, not proof",
        }


def probe_neighborhood(
    g: TriPoly,
    f: TriPoly,
    t_values: Sequence[float],
    topology,
    config: FitConfig | None = None,
) -> ProbeReport:
    """Fit ``topology`` to ``h = g + t f`` for each ``t``; every fit uses the same seeds."""
    cfg = config or FitConfig()
    fits = [fit(topology, lin_comb(g, f, 1.0, t), cfg) for t in t_values]
    return ProbeReport([float(t) for t in t_values], fits)
