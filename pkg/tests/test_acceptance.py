"""Acceptance criteria 1-10, each at its stated tolerance, one PASS/FAIL line per criterion."""
import time

import numpy as np
import pytest

from heptamap.capacity import CondenserSpec, Rectangle, Slit, condenser_capacity, slot_capacity
from heptamap.capacity import exterior_to_slots, symmetric_pair_capacity
from heptamap.curve import cs_quadrature, period_basis
from heptamap.mapping import MapContext
from heptamap.polygon import PolygonSpec, slit_tips
from heptamap.solver import solve, solve_slit
from heptamap.verify import run_suite

from conftest import REFERENCE, SLIT_REFERENCE


@pytest.fixture
def report(capsys):
    def emit(number, title, passed, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}")
        assert passed, detail
    return emit


def _suite(name):
    res = run_suite(name, "full", seed=0)
    worst = ", ".join(f"{k} {v['max_residual']:.2e}/{v['tolerance']:.0e}" for k, v in res.checks.items())
    if res.error:
        worst += f", error: {res.error}"
    return res, worst


def test_criterion_01_theta(report):
    res, worst = _suite("theta")
    report(1, "theta suite", res.passed and res.seconds < 10, f"{worst}, {res.seconds:.1f}s")


def test_criterion_02_periods(report):
    res, worst = _suite("periods")
    report(2, "period oracle", res.passed and res.cases == 20 and res.seconds < 60,
           f"{worst}, {res.cases} sextics, {res.seconds:.1f}s")


def test_criterion_03_divisor(report):
    res, worst = _suite("divisor")
    report(3, "divisor law", res.passed and res.cases == 250, f"{worst}, {res.cases} points")


def test_criterion_04_projection(report):
    res, worst = _suite("projection")
    report(4, "projection consistency", res.passed and res.cases == 50, f"{worst}, {res.cases} points")


def test_criterion_05_heptagon(report):
    res, worst = _suite("heptagon")
    report(5, "heptagon solve", res.passed and res.cases >= 8 and res.seconds < 300,
           f"{worst}, {res.cases} restarts, {res.seconds:.1f}s")


def test_criterion_06_oracle(report):
    res, worst = _suite("oracle")
    report(6, "oracle equivalence", res.passed, f"{worst}")


def test_criterion_07_round_trips(report):
    res, worst = _suite("roundtrip")
    report(7, "round trips", res.passed and res.cases == 100, f"{worst}, {res.cases} points")


def test_criterion_08_slits(report):
    hept = solve(REFERENCE)
    short = solve_slit(PolygonSpec(REFERENCE.sigma, REFERENCE.H, (1e-12,) * 3))
    recover = float(np.abs(short.vector() - hept.vector()).max())

    p = solve_slit(SLIT_REFERENCE)
    ctx = MapContext(SLIT_REFERENCE, p)
    xs = ctx.branch_x
    xi = ctx.x_of_u(p.zeros).real
    cur = period_basis(xs)
    A = ctx.asymptotic_scale()

    def w_at(x):
        total, a = 0j, xs[0]
        for b in [q for q in xs[1:] if q < x] + [x]:
            total += cs_quadrature(cur, SLIT_REFERENCE.sigma, A, a, b, zeros=xi)
            a = b
        return total

    tips = np.array([w_at(z) for z in xi])
    tip_err = float(np.abs(tips - slit_tips(SLIT_REFERENCE)).max())
    report(8, "slit extension", recover < 1e-8 and tip_err < 1e-7,
           f"length->0 parameter gap {recover:.2e}/1e-08, tip quadrature {tip_err:.2e}/1e-07")


def test_criterion_09_capacity(report):
    L = 2.7
    seg = condenser_capacity(CondenserSpec(rectangles=(Rectangle(-0.4, -0.4 + L, 0.0),)))
    e_seg = abs(seg - L / 4)
    a, b = 0.35, 1.6
    e_pair = abs(slot_capacity(np.array([[-b, -a], [a, b]])) - symmetric_pair_capacity(a, b))

    three = CondenserSpec((Slit(0.0, 1.0), Slit(2.4, 0.6), Slit(3.7, 0.3)))
    cap = condenser_capacity(three)
    moved = condenser_capacity(three.translated(0.81))
    lam = 1.7
    scaled = condenser_capacity(CondenserSpec(tuple(Slit(lam * s.position, lam * s.half_length)
                                                    for s in three.slits)))
    e_inv = max(abs(moved - cap), abs(scaled - lam * cap)) / cap
    _, slots = exterior_to_slots(three)
    e_nodes = abs(slot_capacity(slots, n0=32) - slot_capacity(slots, n0=16)) / cap
    ok = e_seg < 1e-6 and e_pair < 1e-6 and e_inv < 1e-9 and e_nodes < 1e-5
    report(9, "capacity", ok, f"segment {e_seg:.1e}/1e-06, pair {e_pair:.1e}/1e-06, "
                              f"invariance {e_inv:.1e}/1e-09, node doubling {e_nodes:.1e}/1e-05")


def test_criterion_10_streamlines(report):
    t0 = time.perf_counter()
    res, worst = _suite("streamlines")
    report(10, "streamlines", res.passed, f"{worst}, {res.cases} levels, {time.perf_counter() - t0:.1f}s")
