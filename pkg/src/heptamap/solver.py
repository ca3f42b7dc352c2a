"""Auxiliary parameter problem: damped Newton with continuation in side-length space.

Heptagon mode has nine unknowns (Omega11, Omega12, Omega22, u0_1, u0_2, c, c1,
c2, h) and nine equations: three wedge conditions at the intruding corners,
theta[35](u0) = 0 and five side-length equations. The slit mode adds, for each
spike, a zero point of the CS differential on the boundary oval next to its
corner (two real coordinates) with three equations: divisor membership,
vanishing of the differential and the spike length.
"""
from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .curve import cs_side_lengths, initial_curve_guess, marked_point_image
from .exceptions import ConvergenceError, InputError, PoleError, ValidationError
from .jacobian import _w_formula, marked_gradient, w_gradient
from .params import AuxParams
from .polygon import (PolygonSpec, attached_side, check_valid, expected_sign, slit_direction,
                      validate)
from .theta import BLOCK_HALF_PERIODS, CHAR_35, block_half_period, char_of_branch_subset, theta_jet

log = logging.getLogger(__name__)

MIN_STEP = 1e-3
MAX_STEP = 0.25


@dataclass
class SolverOptions:
    tol: float = 1e-11
    step_tol: float = 1e-9
    max_iter: int = 20
    fd_step: float = 1e-6
    min_step: float = MIN_STEP
    max_step: float = MAX_STEP


# ----------------------------------------------------------------- residuals

def _wedge_phase(s: int) -> complex:
    # d(u(p_s)) times this phase is real by the reflection symmetry of the block
    beta = BLOCK_HALF_PERIODS[s][1]
    return np.exp(0.5j * np.pi * (beta[0] + beta[1]))


def _side_rows(H, params: AuxParams, g):
    H1, H2, H3, H4, H5 = H
    om, u0 = params.omega, params.u0
    c, c1, c2, h = params.c, params.c1, params.c2, params.h
    pi = np.pi
    return [
        2 * H1 - (4 * pi * c * g[1] - 4 * pi * h * u0[0] - c1 * om[0, 0] - c2 * om[0, 1] + 2 * pi * h),
        2 * H2 + c1,
        2 * H4 - c2,
        2 * H5 - (4 * pi * c * g[0] + 4 * pi * h * u0[1] + c1 * om[0, 1] + c2 * om[1, 1]),
        H1 - H3 + H5 - pi * h,
    ]


def corner_characteristics(params: AuxParams, bases=range(1, 7)) -> dict:
    """Per corner, the odd characteristic [k35] best conditioned at u0 -+ u(p_s).

    theta[35](u0 - u) vanishes identically at u(p_1), and for u0 close to 0 it
    is small at every half-period. On the solution set all [k35] expressions
    for the wedge and for differences of w agree; choosing one per corner and
    keeping it fixed during a Newton solve keeps the residual smooth.
    """
    out = {}
    for s in bases:
        u = block_half_period(s, params.omega)
        best, best_val = CHAR_35, -1.0
        for k in range(1, 7):
            ch = char_of_branch_subset((k, 3, 5))
            val = theta_jet(ch, np.stack([params.u0 - u, params.u0 + u]), params.omega, 0)[0]
            m = float(np.abs(val).min())
            if m > best_val + 1e-12:
                best, best_val = ch, m
        out[s] = best
    return out


def corner_wedge(params: AuxParams, s: int, g=None, char=None) -> float:
    """Real scalar of det(grad w, grad theta[35]) at u(p_s), scaled by |grad theta[35]|."""
    u = block_half_period(s, params.omega)
    gt = theta_jet(CHAR_35, u, params.omega, 1)[1]
    if char is None:
        char = corner_characteristics(params, (s,))[s]
    gw = w_gradient(params, u, char, g)
    d = gw[0] * gt[1] - gw[1] * gt[0]
    return float((d * _wedge_phase(s)).real / np.linalg.norm(gt))


def residual(spec: PolygonSpec, params: AuxParams, chars: dict | None = None) -> np.ndarray:
    """Nine residual rows of the heptagon system (wedges, marked point, sides)."""
    g = marked_gradient(params)
    chars = corner_characteristics(params, spec.sigma) if chars is None else chars
    rows = [corner_wedge(params, s, g, chars[s]) for s in spec.sigma]
    rows.append(float(theta_jet(CHAR_35, params.u0, params.omega, 0)[0].real))
    rows += _side_rows(spec.H, params, g)
    return np.array(rows)


# ------------------------------------------------------- zero points on ovals

@dataclass(frozen=True)
class OvalChart:
    """Boundary segment ``seg`` as a real 2-parameter family inside the Jacobian.

    Odd segments are coreal (Re u fixed, u = Re u_b + i r); even segments,
    including the two rays (0 and 6), are real (Im u fixed, u = i Im u_b + r).
    """

    seg: int
    base: int
    fixed: np.ndarray
    coreal: bool
    char_eps: np.ndarray
    char_eps_prime: np.ndarray

    def point(self, r):
        r = np.asarray(r, float)
        return self.fixed + (1j * r if self.coreal else r)

    def coords(self, u):
        u = np.asarray(u, complex)
        return u.imag.copy() if self.coreal else u.real.copy()

    def theta_phase(self, r):
        if self.coreal:
            b = self.char_eps_prime
            return np.exp(0.5j * np.pi * (1 + b[0] + b[1]))
        a = self.char_eps
        return np.exp(1j * np.pi * (a @ np.asarray(r, float) + 0.5 * a[1]))

    def wedge_phase(self, r):
        if self.coreal:
            b = self.char_eps_prime
            return np.exp(0.5j * np.pi * (b[0] + b[1]))
        return self.theta_phase(r)


def oval_chart(spec: PolygonSpec, k: int, omega) -> OvalChart:
    seg = attached_side(spec, k)
    base = spec.sigma[k]
    ub = block_half_period(base, omega)
    eps = np.array(BLOCK_HALF_PERIODS[base][0], float)
    eps_p = np.array(BLOCK_HALF_PERIODS[base][1], float)
    coreal = seg % 2 == 1
    fixed = ub.real + 0j if coreal else 1j * ub.imag
    return OvalChart(seg, base, fixed, coreal, eps, eps_p)


def _theta_scalar(chart: OvalChart, params: AuxParams, r):
    u = chart.point(r)
    v = theta_jet(CHAR_35, u, params.omega, 0)[0]
    return float((v * chart.theta_phase(r)).real)


def _zero_rows(spec: PolygonSpec, params: AuxParams, k: int, r, g, char):
    chart = oval_chart(spec, k, params.omega)
    u = chart.point(r)
    t, gt = theta_jet(CHAR_35, u, params.omega, 1)
    gw = w_gradient(params, u, char, g)
    d = gw[0] * gt[1] - gw[1] * gt[0]
    theta_row = float((t * chart.theta_phase(r)).real)
    wedge_row = float((d * chart.wedge_phase(r)).real / np.linalg.norm(gt))
    spike = float((_w_difference(params, u, chart.base, g, char) * np.conj(slit_direction(spec, k))).real)
    return theta_row, wedge_row, spike


def _w_difference(params: AuxParams, u, base: int, g, char) -> complex:
    """w(u) - w(u(p_base)) from the [char] expression (additive constants cancel)."""
    ub = block_half_period(base, params.omega)
    pair = _w_formula(char, params, np.stack([np.asarray(u, complex), ub]), g)
    return complex(pair[0] - pair[1])


def residual_slit(spec: PolygonSpec, params: AuxParams, chars: dict | None = None) -> np.ndarray:
    """Fifteen rows: divisor (3), vanishing (3), sides (5), spikes (3), marked point (1)."""
    if params.zeros is None:
        raise InputError("slit residual needs the three zero points")
    g = marked_gradient(params)
    chars = corner_characteristics(params, spec.sigma) if chars is None else chars
    L = spec.slit_lengths()
    div, van, spk = [], [], []
    for k in range(3):
        chart = oval_chart(spec, k, params.omega)
        r = chart.coords(params.zeros[k])
        t_row, w_row, s_val = _zero_rows(spec, params, k, r, g, chars[chart.base])
        div.append(t_row)
        van.append(w_row)
        spk.append(s_val - L[k])
    sides = _side_rows(spec.H, params, g)
    marked = float(theta_jet(CHAR_35, params.u0, params.omega, 0)[0].real)
    return np.array(div + van + sides + spk + [marked])


# ------------------------------------------------------------ Newton engine

def _fd_jacobian(F, z, f0, step):
    n = len(z)
    J = np.empty((len(f0), n))
    for i in range(n):
        hstep = step * max(1.0, abs(z[i]))
        zp = z.copy()
        zm = z.copy()
        zp[i] += hstep
        zm[i] -= hstep
        J[:, i] = (F(zp) - F(zm)) / (2 * hstep)
    return J


def _newton(F, z0, admissible, tol, opts: SolverOptions):
    z = np.array(z0, float)
    try:
        f = F(z)
    except Exception as exc:  # noqa: BLE001 - any evaluation failure means a bad start
        return z, np.inf, 0, False, str(exc)
    nrm = np.abs(f).max()
    it = 0
    while nrm > tol and it < opts.max_iter:
        it += 1
        J = _fd_jacobian(F, z, f, getattr(F, "fd_step", opts.fd_step))
        try:
            dz = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            dz = np.linalg.lstsq(J, -f, rcond=None)[0]
        lam = 1.0
        accepted = False
        while lam >= 1.0 / 64:
            zn = z + lam * dz
            if admissible(zn):
                try:
                    fn = F(zn)
                    nn = np.abs(fn).max()
                except Exception:  # noqa: BLE001
                    nn = np.inf
                if np.isfinite(nn) and nn < (1 - 0.25 * lam) * nrm + 1e-15:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            return z, nrm, it, False, "line search failed"
        z, f, nrm = zn, fn, nn
    return z, nrm, it, nrm <= tol, ""


def _continuation(make_F, z_start, admissible, opts: SolverOptions, label="H"):
    """Follow F_t(z) = 0 from t = 0 (solved by z_start) to t = 1.

    ``make_F(t, z_ref)`` builds the residual for parameter t; z_ref is the
    latest accepted point, from which per-corner formula choices are fixed.
    """
    t, z = 0.0, np.array(z_start, float)
    z_prev, t_prev = None, None
    dt = opts.max_step
    total_iter = 0
    while t < 1.0:
        t_new = min(1.0, t + dt)
        pred = z
        if z_prev is not None:
            pred = z + (z - z_prev) * (t_new - t) / (t - t_prev)
            if not admissible(pred):
                pred = z
        z_new, nrm, it, ok, why = _newton(make_F(t_new, z), pred, admissible, opts.step_tol, opts)
        total_iter += it
        if ok:
            z_prev, t_prev = z, t
            z, t = z_new, t_new
            if it <= 3:
                dt = min(2 * dt, opts.max_step)
            log.debug("continuation %s: t=%.4f |F|=%.2e iters=%d", label, t, nrm, it)
        else:
            dt *= 0.5
            if dt < opts.min_step:
                best = z_new if np.isfinite(nrm) else z
                raise ConvergenceError(
                    f"continuation stalled at t={t:.4f} ({why or 'no convergence'})",
                    best=best, residual=float(nrm))
    return z, total_iter


@contextmanager
def _best_as_params(to_params):
    """Re-raise a continuation failure with its best iterate as AuxParams."""
    try:
        yield
    except ConvergenceError as exc:
        if isinstance(exc.best, np.ndarray):
            best = to_params(exc.best).with_status(residual_norm=exc.residual, converged=False)
            raise ConvergenceError(str(exc), best=best, residual=exc.residual) from None
        raise


# ----------------------------------------------------------- heptagon solve

def _admissible_vector(z) -> bool:
    return bool(0 < z[1] < min(z[0], z[2]) and z[5] < 0 and np.all(z[3:5] > 0) and np.all(z[3:5] < 0.5))


def linear_parameters(H, omega, u0):
    """(c, c1, c2, h) from the side equations for given Omega and u0."""
    H1, H2, H3, H4, H5 = H
    c1, c2 = -2 * H2, 2 * H4
    h = (H1 - H3 + H5) / np.pi
    g = theta_jet(CHAR_35, u0, omega, 1)[1].real
    c = (2 * H5 - 4 * np.pi * h * u0[1] - c1 * omega[0, 1] - c2 * omega[1, 1]) / (4 * np.pi * g[0])
    return c, c1, c2, h


def symmetric_start(spec: PolygonSpec):
    """Start parameters on the symmetric curve and the side lengths they realise."""
    curve = initial_curve_guess(spec.sigma, spec.H)
    if min(spec.sigma) < 1:
        raise InputError("sigma_1 = 0 (intruding angle at infinity) is not supported by the solver")
    H_unit = cs_side_lengths(curve, spec.sigma, 1.0)
    A = np.linalg.norm(spec.H) / np.linalg.norm(H_unit)
    H0 = A * H_unit
    u0 = marked_point_image(curve)
    c, c1, c2, h = linear_parameters(H0, curve.omega, u0)
    return AuxParams(curve.omega, u0, c, c1, c2, h), H0


def _path_waypoints(spec: PolygonSpec, H0: np.ndarray):
    """Straight path in H, with a detour when the segment leaves the admissible set."""
    H1 = np.asarray(spec.H, float)
    ts = np.linspace(0, 1, 41)
    ok = all(not validate(PolygonSpec(spec.sigma, tuple((1 - t) * H0 + t * H1))) for t in ts[1:-1])
    if ok:
        return [H0, H1]
    # go first to the target with the conditional sides enlarged, then to the target
    mid = H1.copy()
    if spec.sigma in ((1, 2, 6), (1, 5, 6)):
        mid[3] = max(H1[3], H1[1] + abs(H1[1]) + 1.0) if H1[3] > 0 else H1[3]
    return [H0, mid, H1]


def solve(spec: PolygonSpec, init: AuxParams | None = None,
          options: SolverOptions | None = None) -> AuxParams:
    opts = options or SolverOptions()
    check_valid(spec)
    if spec.has_slits:
        return solve_slit(spec, init, opts)
    if min(spec.sigma) < 1:
        raise InputError("sigma_1 = 0 (intruding angle at infinity) is not supported by the solver")
    H_target = np.asarray(spec.H, float)

    def make_F(H, z_ref):
        s = PolygonSpec(spec.sigma, tuple(H))
        chars = corner_characteristics(AuxParams.from_vector(z_ref), spec.sigma)
        return lambda z: residual(s, AuxParams.from_vector(z), chars)

    total = 0
    if init is not None:
        z0 = init.vector()
        z, nrm, it, ok, _ = _newton(make_F(H_target, z0), z0, _admissible_vector, opts.tol, opts)
        total += it
        if ok:
            return AuxParams.from_vector(z, residual_norm=nrm, converged=True, iterations=total)
    start, H0 = symmetric_start(spec)
    z = start.vector()
    waypoints = _path_waypoints(spec, H0)
    for Ha, Hb in zip(waypoints[:-1], waypoints[1:]):
        with _best_as_params(AuxParams.from_vector):
            z, it = _continuation(lambda t, zr, Ha=Ha, Hb=Hb: make_F((1 - t) * Ha + t * Hb, zr),
                                  z, _admissible_vector, opts)
        total += it
    z, nrm, it, ok, why = _newton(make_F(H_target, z), z, _admissible_vector, opts.tol, opts)
    total += it
    if not ok:
        raise ConvergenceError(f"final Newton polish failed ({why})",
                               best=AuxParams.from_vector(z, residual_norm=nrm, converged=False),
                               residual=float(nrm))
    return AuxParams.from_vector(z, residual_norm=float(nrm), converged=True, iterations=total)


# --------------------------------------------------------------- slit solve

def _trace_oval(chart: OvalChart, params: AuxParams, r0, direction, delta):
    """Point on the divisor inside the chart at tangential offset ``delta`` from r0."""
    n = np.array([-direction[1], direction[0]])
    r = r0 + delta * direction
    for _ in range(30):
        f = _theta_scalar(chart, params, r)
        h = 1e-7 * max(1.0, abs(delta))
        df = (_theta_scalar(chart, params, r + h * n) - _theta_scalar(chart, params, r - h * n)) / (2 * h)
        step = -f / df
        r = r + step * n
        if abs(step) < 1e-15:
            break
    return r


def _oval_tangent(chart: OvalChart, params: AuxParams, r0):
    h = 1e-7
    gr = np.array([
        (_theta_scalar(chart, params, r0 + h * e) - _theta_scalar(chart, params, r0 - h * e)) / (2 * h)
        for e in np.eye(2)])
    t = np.array([gr[1], -gr[0]])
    return t / np.linalg.norm(t)


def initial_zero(spec: PolygonSpec, params: AuxParams, k: int, length: float):
    """Predicted zero point on the oval for a short spike of the given length.

    At a double zero the spike grows like the cube of the zero's offset; the
    cubic coefficient is read off from w along the oval of the unsplit corner.
    """
    chart = oval_chart(spec, k, params.omega)
    g = marked_gradient(params)
    ub = block_half_period(chart.base, params.omega)
    r0 = chart.coords(ub)
    char = corner_characteristics(params, (chart.base,))[chart.base]
    d = slit_direction(spec, k)
    tang = _oval_tangent(chart, params, r0)
    delta = 0.02
    best = None
    for sgn in (1.0, -1.0):
        r = _trace_oval(chart, params, r0, sgn * tang, delta)
        rho = float((_w_difference(params, chart.point(r), chart.base, g, char) * np.conj(d)).real)
        if rho < 0:
            kappa = abs(rho) / delta ** 3
            t0 = (length / (2 * kappa)) ** (1.0 / 3.0)
            best = _trace_oval(chart, params, r0, sgn * tang, t0)
            break
    if best is None:
        raise ConvergenceError(f"no admissible direction for spike {k + 1}")
    return chart.point(best)


def _heptagon_sides_for(spec: PolygonSpec) -> np.ndarray:
    """Side lengths of the unslit start: zero sides carrying a slit become short steps."""
    H = np.asarray(spec.H, float).copy()
    L = spec.slit_lengths()
    for k in range(3):
        s = attached_side(spec, k)
        if 1 <= s <= 5 and H[s - 1] == 0:
            H[s - 1] = expected_sign(spec.sigma, s) * 0.5 * max(L[k], 1e-3)
    return H


def _slit_vector(params: AuxParams, spec: PolygonSpec, active):
    parts = [params.vector()]
    for k in active:
        parts.append(oval_chart(spec, k, params.omega).coords(params.zeros[k]))
    return np.concatenate(parts)


def _unpack_slit(z, spec: PolygonSpec, active):
    base = AuxParams.from_vector(z[:9])
    zeros = np.array([block_half_period(s, base.omega) for s in spec.sigma])
    for i, k in enumerate(active):
        chart = oval_chart(spec, k, base.omega)
        zeros[k] = chart.point(z[9 + 2 * i: 11 + 2 * i])
    return AuxParams.from_vector(z[:9], zeros=zeros)


def _reduced_slit_residual(spec: PolygonSpec, z, active, chars):
    """Slit rows for the active spikes, the plain corner wedge for the others."""
    params = _unpack_slit(z, spec, active)
    g = marked_gradient(params)
    L = spec.slit_lengths()
    rows = []
    for k in range(3):
        base = spec.sigma[k]
        if k in active:
            chart = oval_chart(spec, k, params.omega)
            r = chart.coords(params.zeros[k])
            t_row, w_row, s_val = _zero_rows(spec, params, k, r, g, chars[base])
            rows += [t_row, w_row, s_val - L[k]]
        else:
            rows.append(corner_wedge(params, base, g, chars[base]))
    rows.append(float(theta_jet(CHAR_35, params.u0, params.omega, 0)[0].real))
    rows += _side_rows(spec.H, params, g)
    return np.array(rows)


def _slit_F(spec: PolygonSpec, active, z_ref, opts: SolverOptions):
    chars = corner_characteristics(AuxParams.from_vector(z_ref[:9]), spec.sigma)

    def F(v):
        return _reduced_slit_residual(spec, v, active, chars)

    # a spike of length l splits a double zero by delta ~ l^(2/3); difference
    # steps must stay well below delta or the Jacobian loses the spike rows
    L = spec.slit_lengths()
    rel = float(min(L[k] for k in active)) / max(float(np.linalg.norm(spec.H)), 1.0)
    F.fd_step = opts.fd_step * min(1.0, 30.0 * rel ** (2.0 / 3.0))
    return F


def solve_slit(spec: PolygonSpec, init: AuxParams | None = None,
               options: SolverOptions | None = None) -> AuxParams:
    opts = options or SolverOptions()
    check_valid(spec)
    L = spec.slit_lengths()
    active = [k for k in range(3) if L[k] > 0]
    if not active:
        base = solve(PolygonSpec(spec.sigma, spec.H), init if init is not None and init.zeros is None else None, opts)
        zeros = np.array([block_half_period(s, base.omega) for s in spec.sigma])
        return base.with_status(zeros=zeros)

    def adm(z):
        return _admissible_vector(z[:9])

    total = 0
    if init is not None and init.zeros is not None:
        z0 = _slit_vector(init, spec, active)
        z, nrm, it, ok, _ = _newton(_slit_F(spec, active, z0, opts), z0, adm, opts.tol, opts)
        total += it
        if ok:
            p = _unpack_slit(z, spec, active)
            return p.with_status(residual_norm=float(np.abs(residual_slit(spec, p)).max()),
                                 converged=True, iterations=total)

    H_start = _heptagon_sides_for(spec)
    hept = solve(PolygonSpec(spec.sigma, tuple(H_start)), None, opts)
    H_target = np.asarray(spec.H, float)

    def spec_at(t):
        H = (1 - t) * H_start + t * H_target
        return PolygonSpec(spec.sigma, tuple(H), tuple(t ** 3 * L), spec.slit_side)

    if np.array_equal(H_start, H_target):
        # short spikes on an unchanged heptagon: the cubic law is usually close enough
        try:
            zeros = np.array([block_half_period(s, hept.omega) for s in spec.sigma])
            for k in active:
                zeros[k] = initial_zero(spec, hept, k, L[k])
            z = _slit_vector(hept.with_status(zeros=zeros), spec, active)
            z, nrm, it, ok, _ = _newton(_slit_F(spec, active, z, opts), z, adm, opts.tol, opts)
            total += it
        except (ConvergenceError, PoleError, np.linalg.LinAlgError):
            ok = False
        if ok:
            p = _unpack_slit(z, spec, active)
            return p.with_status(residual_norm=float(np.abs(residual_slit(spec, p)).max()),
                                 converged=True, iterations=total)

    # first step: place the zeros by the local cubic law, then correct
    t1 = 0.1
    s1 = spec_at(t1)
    zeros = np.array([block_half_period(s, hept.omega) for s in spec.sigma])
    for k in active:
        zeros[k] = initial_zero(s1, hept, k, t1 ** 3 * L[k])
    p1 = hept.with_status(zeros=zeros)
    z = _slit_vector(p1, spec, active)
    z, nrm, it, ok, why = _newton(_slit_F(s1, active, z, opts), z, adm, opts.step_tol, opts)
    total += it
    if not ok:
        raise ConvergenceError(f"slit continuation failed at its first step ({why})",
                               best=_unpack_slit(z, spec, active), residual=float(nrm))

    with _best_as_params(lambda v: _unpack_slit(v, spec, active)):
        z, it = _continuation(lambda s, zr: _slit_F(spec_at(t1 + s * (1 - t1)), active, zr, opts),
                              z, adm, opts, label="slits")
    total += it
    z, nrm, it, ok, why = _newton(_slit_F(spec, active, z, opts), z, adm, opts.tol, opts)
    total += it
    p = _unpack_slit(z, spec, active)
    full = float(np.abs(residual_slit(spec, p)).max())
    if not ok:
        raise ConvergenceError(f"final slit Newton polish failed ({why})",
                               best=p.with_status(residual_norm=full), residual=full)
    return p.with_status(residual_norm=full, converged=True, iterations=total)
