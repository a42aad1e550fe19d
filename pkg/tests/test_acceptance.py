"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the PASS/FAIL lines are
repeated in the terminal summary. Criteria 4 to 7 write their artifacts
through the CLI so that criterion 8 can rerun them and compare bytes.
"""

import json
import time
from fractions import Fraction

import numpy as np
import pytest

from helpers import random_dag, random_rational_point
from hilbert13.approximation import grad_check
from hilbert13.cli import run
from hilbert13.composition import eval_dag, expand, normalize_origin
from hilbert13.counting import LITERAL, certificate, min_gap_degree
from hilbert13.diagonal import DiagonalSchedule, build, cauchy_check
from hilbert13.pairing import PairingCodec, represent, verify_identity
from hilbert13.polynomial import GridSpec, TriPoly, eval_tri

RESULTS: list[str] = []

x1, x2, x3 = (TriPoly.variable(i) for i in (1, 2, 3))


def record(number, title, ok, elapsed, limit, detail=""):
    ok = ok and (limit is None or elapsed < limit)
    budget = f" (limit {limit:g}s)" if limit is not None else ""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}; {elapsed:.2f}s{budget}"
    if detail:
        line += f"; {detail}"
    RESULTS.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    """Directory where criteria 4 to 7 leave their first-run outputs."""
    return tmp_path_factory.mktemp("acceptance")


# criterion 1


def test_criterion_1_counting_table():
    t0 = time.perf_counter()
    mismatches = [
        (k, r)
        for k in range(1, 101)
        for r in range(1, 101)
        if certificate(k, r, LITERAL).holds != (r > k)
    ]
    bad_min = [k for k in range(1, 101) if min_gap_degree(k, LITERAL) != k + 1]
    ok = not mismatches and not bad_min
    elapsed = time.perf_counter() - t0
    assert record(1, "literal certificate holds iff r > k, k, r <= 100", ok, elapsed, 1.0,
                  f"{len(mismatches)} table mismatches, {len(bad_min)} min-degree mismatches")


# criterion 2


def test_criterion_2_pairing_identity():
    t0 = time.perf_counter()
    codec = PairingCodec(2, 20)
    rng = np.random.default_rng(2024)
    idx = rng.integers(0, codec.scale, size=(10_000, 2))
    xs1 = rng.uniform(0.0, 1.0, size=10_000)
    samples = [(float(a), float(Fraction(int(m), codec.scale)), float(Fraction(int(n), codec.scale)))
               for a, (m, n) in zip(xs1, idx)]
    oracles = {"sum": lambda a, b, c: a + b + c, "product": lambda a, b, c: a * b * c}
    failures = {}
    for name, f in oracles.items():
        report = verify_identity(f, represent(f, codec), samples, codec)
        failures[name] = len(report.exact) - sum(report.exact)
        assert report.quantized == 0
    bad_round_trips = 0
    for d in range(1, 6):
        small = PairingCodec(2, d)
        images = set()
        for m in range(small.scale):
            for n in range(small.scale):
                y = small.pair_index(m, n)
                images.add(y)
                bad_round_trips += small.unpair_index(y) != (m, n)
                bad_round_trips += small.unpair(small.pair(m / small.scale, n / small.scale)) != (
                    m / small.scale, n / small.scale)
        bad_round_trips += images != set(range(small.pair_scale))
    ok = not any(failures.values()) and bad_round_trips == 0
    elapsed = time.perf_counter() - t0
    assert record(2, "f = F(x1, pair(x2, x3)) on 10^4 grid points; unpair(pair) = id for d <= 5", ok,
                  elapsed, 5.0, f"identity failures {failures}, round-trip failures {bad_round_trips}")


# criterion 3


def test_criterion_3_expand_and_normalize():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    expand_fail = norm_fail = const_fail = 0
    for _ in range(200):
        dag = random_dag(rng, max_nodes=4, max_degree=3)
        poly = expand(dag)
        norm = normalize_origin(dag)
        const_fail += any(p.coeffs[0, 0] != 0 for p in norm.dag.polys())
        for _ in range(50):
            x = random_rational_point(rng)
            value = eval_dag(dag, *x)
            expand_fail += eval_tri(poly, *x) != value
            norm_fail += eval_dag(norm.dag, *x) + norm.constant != value
    ok = expand_fail == norm_fail == const_fail == 0
    elapsed = time.perf_counter() - t0
    assert record(3, "expand = eval and normalization exact on 200 random DAGs x 50 points", ok,
                  elapsed, 30.0, f"failures: expand {expand_fail}, normalize {norm_fail}, constants {const_fail}")


# criteria 4 to 7 as reproducible artifact producers


def run_criterion_4(out):
    sups = {}
    for name, target, r in (("sum", x1 + x2 + x3, 1), ("product", x1 * x2 * x3, 2)):
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{name}_target.json"
        path.write_text(json.dumps(target.to_json()), encoding="utf-8")
        code = run(["fit", "--preset", "chain2", "--target", str(path), "--r", str(r),
                    "--restarts", "20", "--grid", "17", "--seed", "0", "--out", str(out / name)])
        assert code == 0
        sups[name] = json.loads((out / name / "fit_report.json").read_text())["sup"]
    return sups


def run_criterion_5(out):
    out.mkdir(parents=True, exist_ok=True)
    path = out / "target.json"
    path.write_text(json.dumps((x1 * x2 + x2 * x3 + x3 * x1).to_json()), encoding="utf-8")
    sups = {}
    for r in (1, 2, 3, 4):
        code = run(["fit", "--preset", "chain2", "--target", str(path), "--r", str(r),
                    "--restarts", "20", "--grid", "17", "--seed", "0", "--out", str(out / f"r{r}")])
        assert code == 0
        sups[r] = json.loads((out / f"r{r}" / "fit_report.json").read_text())["sup"]
    return sups


def run_criterion_6(out):
    target = x1 * x2 + x2 * x3 + x3 * x1
    errors = {}
    for name in ("chain2", "hilbert-3leaf"):
        for r in (1, 2, 3):
            for seed in range(5):
                errors[f"{name} r={r} seed={seed}"] = grad_check(name, target, GridSpec(17), seed=seed, h=1e-5, r=r)
    out.mkdir(parents=True, exist_ok=True)
    (out / "grad_check.json").write_text(json.dumps(errors, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return errors


def run_criterion_7(out):
    assert run(["diagonal", "--m", "5", "--seed", "0", "--grid", "17", "--out", str(out)]) == 0
    report = json.loads((out / "cauchy.json").read_text())
    # negative control: enlarge one step beyond its eps / 2 budget
    seq = build(DiagonalSchedule.geometric())
    terms = list(seq.terms)
    terms[3] = terms[2] + (terms[3] - terms[2]) * 3.0
    control = cauchy_check(terms, schedule=seq.schedule)
    return report, control


def test_criterion_4_exact_recovery(artifacts):
    t0 = time.perf_counter()
    sups = run_criterion_4(artifacts / "c4")
    ok = all(s < 1e-6 for s in sups.values())
    elapsed = time.perf_counter() - t0
    assert record(4, "chain2 recovers x1+x2+x3 (r=1) and x1x2x3 (r=2) to sup < 1e-6", ok, elapsed, 60.0,
                  "best sup " + ", ".join(f"{k} {v:.2e}" for k, v in sups.items()))


def test_criterion_5_separation_evidence(artifacts):
    t0 = time.perf_counter()
    sups = run_criterion_5(artifacts / "c5")
    ok = all(s >= 0.01 for s in sups.values())
    elapsed = time.perf_counter() - t0
    assert record(5, "x1x2+x2x3+x3x1 on chain2, r <= 4, 20 restarts: best sup >= 0.01 (evidence, not proof)",
                  ok, elapsed, 120.0, "best sup " + ", ".join(f"r={r} {s:.4f}" for r, s in sups.items()))


def test_criterion_6_gradient(artifacts):
    t0 = time.perf_counter()
    errors = run_criterion_6(artifacts / "c6")
    worst = max(errors, key=errors.get)
    ok = errors[worst] < 1e-5
    elapsed = time.perf_counter() - t0
    assert record(6, "grad_check < 1e-5 on chain2 and hilbert-3leaf, r <= 3, seeds 0..4", ok, elapsed, 10.0,
                  f"worst {errors[worst]:.2e} at {worst}")


def test_criterion_7_diagonal(artifacts):
    t0 = time.perf_counter()
    report, control = run_criterion_7(artifacts / "c7")
    ok = report["ok"] and not report["step_violations"] and not control.ok and 3 in control.step_violations
    elapsed = time.perf_counter() - t0
    assert record(7, "diagonal m=5 steps < eps/2 and pair bounds hold; negative control flagged", ok, elapsed,
                  5.0, f"{len(report['pairs'])} pairs checked, control violations {control.step_violations}")


# criterion 8


def _files(root):
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file() and p.name != "manifest.json"
    }


def test_criterion_8_reproducibility(artifacts, tmp_path):
    t0 = time.perf_counter()
    runners = {"c4": run_criterion_4, "c5": run_criterion_5, "c6": run_criterion_6, "c7": run_criterion_7}
    differing, compared = [], 0
    for name, runner in runners.items():
        first = artifacts / name
        if not first.exists():
            runner(first)
        runner(tmp_path / name)
        a, b = _files(first), _files(tmp_path / name)
        compared += len(a)
        if not a or a != b:
            differing.append(name)
    elapsed = time.perf_counter() - t0
    assert record(8, "reruns of criteria 4-7 give byte-identical output files", not differing, elapsed, None,
                  f"{compared} files compared, differing: {differing or 'none'}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
