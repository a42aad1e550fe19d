import json

import numpy as np
import pytest

from hilbert13.counting import witness
from hilbert13.diagonal import DiagonalSchedule, build, cauchy_check, limit_eval
from hilbert13.polynomial import GridSpec, eval_tri, sup_norm


@pytest.fixture(scope="module")
def default_seq():
    return build(DiagonalSchedule.geometric())


def test_default_schedule():
    s = DiagonalSchedule.geometric()
    assert s.eps == (0.5, 0.25, 0.125, 0.0625, 0.03125)
    assert s.ns == (1, 2, 3, 4, 5)
    assert s.m == 5


def test_single_term():
    seq = build(DiagonalSchedule.geometric(m=1))
    assert seq.m == 1 and seq.steps == []
    assert seq.terms[0] == witness(1, 0)
    report = cauchy_check(seq)
    assert report.ok and report.distances == {}


def test_steps_within_budget(default_seq):
    eps = default_seq.schedule.eps
    assert len(default_seq.steps) == 4
    for i, step in enumerate(default_seq.steps):
        assert step < eps[i] / 2
        assert step == pytest.approx(eps[i] / 4, rel=1e-12)


def test_terms_follow_construction(default_seq):
    assert default_seq.terms[0] == witness(1, 0)
    grid = GridSpec()
    for i in range(1, 5):
        diff = default_seq.terms[i] - default_seq.terms[i - 1]
        w = witness(i + 1, i)
        # the increment is a positive multiple of the seeded witness
        ratio = sup_norm(diff, grid) / sup_norm(w, grid)
        assert diff.allclose(w * ratio, atol=1e-12)


def test_triangle_bound_f5_f2(default_seq):
    eps = default_seq.schedule.eps
    d = sup_norm(default_seq.terms[4] - default_seq.terms[1])
    bound = (eps[1] + eps[2] + eps[3]) / 4
    assert d <= bound * (1 + 1e-12)
    assert bound < eps[1]


def test_cauchy_default(default_seq):
    report = cauchy_check(default_seq)
    assert report.ok
    assert len(report.distances) == 10
    assert report.bounds[1, 5] == pytest.approx(sum(default_seq.schedule.eps[:4]) / 4)


def test_negative_control_flagged(default_seq):
    terms = list(default_seq.terms)
    # blow up the step from f_2 to f_3 to the full eps_2 budget and beyond
    bump = witness(3, 99)
    terms[2] = terms[1] + bump * (default_seq.schedule.eps[1] / sup_norm(bump))
    terms[3:] = [terms[2]] * 2
    report = cauchy_check(terms, schedule=default_seq.schedule)
    assert not report.ok
    assert 2 in report.step_violations
    assert (2, 3) in report.pair_violations


def test_bare_list_needs_schedule(default_seq):
    with pytest.raises(ValueError):
        cauchy_check(default_seq.terms)


def test_limit_eval(default_seq):
    x = (0.3, 0.7, 0.1)
    last = limit_eval(default_seq, x)
    assert last.value == float(eval_tri(default_seq.terms[-1], *x))
    assert limit_eval(default_seq, x, 5) == last
    prev = limit_eval(default_seq, x, 4)
    assert abs(last.value - prev.value) <= default_seq.schedule.eps[3] / 2
    assert limit_eval(default_seq, x, 1).tail_bound == pytest.approx(0.25)
    for i in (0, 6):
        with pytest.raises(IndexError):
            limit_eval(default_seq, x, i)


def test_tail_bounds_decrease():
    s = DiagonalSchedule.geometric(m=8)
    tails = [s.tail(i) for i in range(1, 9)]
    assert all(b < a for a, b in zip(tails, tails[1:]))
    finite = DiagonalSchedule((0.4, 0.2), (1, 2))
    assert finite.tail(1) == pytest.approx(0.15)


def test_limit_within_tail_of_each_term():
    seq = build(DiagonalSchedule.geometric(m=6))
    rng = np.random.default_rng(3)
    for x in rng.uniform(0, 1, size=(20, 3)):
        last = limit_eval(seq, x).value
        for i in range(1, 6):
            assert abs(limit_eval(seq, x, i).value - last) <= seq.schedule.tail(i) * (1 + 1e-12)


def test_deterministic():
    a = build(DiagonalSchedule.geometric(seed=4))
    b = build(DiagonalSchedule.geometric(seed=4))
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())
    c = build(DiagonalSchedule.geometric(seed=5))
    assert a.terms[0] != c.terms[0]


def test_other_grid():
    grid = GridSpec(5)
    seq = build(DiagonalSchedule.geometric(m=4), grid)
    assert cauchy_check(seq).ok
    assert all(s == pytest.approx(e / 4) for s, e in zip(seq.steps, seq.schedule.eps))


@pytest.mark.parametrize(
    "eps, ns",
    [
        ((), ()),
        ((0.5, 0.25), (1,)),
        ((0.5, 0.5), (1, 2)),
        ((0.5, -0.1), (1, 2)),
        ((0.5, 0.25), (2, 2)),
        ((0.5, 0.25), (0, 1)),
    ],
)
def test_schedule_validation(eps, ns):
    with pytest.raises(ValueError):
        DiagonalSchedule(eps, ns)


def test_geometric_validation():
    with pytest.raises(ValueError):
        DiagonalSchedule.geometric(m=0)
    with pytest.raises(ValueError):
        DiagonalSchedule.geometric(ratio=1.0)
