"""Direct computations on the sextic y^2 = prod (x - x_s) with six real branch points.

Conventions (fixed once here, checked by the test-suite):

* ``y_upper`` is the product of principal square roots sqrt(x - x_s) on the
  closed upper half-plane. It is positive on (x_6, inf) and is the sheet whose
  point over infinity is the marked point p_0.
* a-cycles are the lifts of [x_2, x_3] and [x_4, x_5] (twice the upper-side
  integral, left to right); b-cycles are the coreal ovals over [x_1, x_2]
  (with a minus sign) and [x_5, x_6].
* du_j = (C_1j x + C_2j) dx / y is normalised by int_{a_s} du_j = delta_sj,
  and Omega = Im of the b-period matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import roots_jacobi, roots_legendre

from .exceptions import AccuracyError, DegenerateCurveError, InputError, PathError

EPS_GAP = 1e-9
SYMMETRIC_X = (-3.0, -2.0, -1.0, 1.0, 2.0, 3.0)


@dataclass(frozen=True)
class CurveData:
    x: np.ndarray  # (6,) branch points
    C: np.ndarray  # (2,2): column j holds (C_1j, C_2j)
    omega: np.ndarray  # (2,2)
    period_matrix: np.ndarray  # complex (2,2), b-periods of the normalised basis
    nodes: int = 0

    @property
    def coeffs(self) -> np.ndarray:
        """Row k holds the coefficient of x^k: du_j = (coeffs[0,j] + coeffs[1,j] x) dx / y."""
        return np.array([self.C[1], self.C[0]])

    def du(self, x):
        """Normalised differentials at x on the upper sheet, shape (..., 2)."""
        x = np.asarray(x, complex)
        y = y_upper(x, self.x)
        k = self.coeffs
        return (k[0] + np.multiply.outer(x, k[1])) / y[..., None]


@dataclass(frozen=True)
class CurvePoint:
    """Point (x, y) with y = sheet * y_ref(x).

    y_ref is ``y_upper`` on the closed upper half-plane and its complex
    conjugate reflection conj(y_upper(conj x)) below the real axis.
    """

    x: complex
    sheet: int = 1


def check_branch_points(x, eps_gap: float = EPS_GAP) -> np.ndarray:
    xs = np.asarray(x, dtype=float).ravel()
    if xs.shape != (6,) or not np.all(np.isfinite(xs)):
        raise InputError("six finite branch points are required")
    gaps = np.diff(xs)
    if np.any(gaps <= eps_gap * max(1.0, np.abs(xs).max())):
        raise DegenerateCurveError(f"branch points must increase with gaps > {eps_gap:g}")
    return xs


def y_upper(x, xs):
    x = np.asarray(x, dtype=complex)
    # +0j keeps points of the real axis on the upper side of the cuts
    x = x.real + 1j * np.where(x.imag == 0, 0.0, x.imag)
    out = np.ones_like(x)
    for s in xs:
        out = out * np.sqrt(x - s)
    return out


def y_ref(x, xs):
    x = np.asarray(x, dtype=complex)
    return np.where(x.imag >= 0, y_upper(x, xs), np.conj(y_upper(np.conj(x), xs)))


@lru_cache(maxsize=64)
def _jacobi_rule(n: int, left: bool, right: bool):
    # weight (1-t)^a (1+t)^b on [-1, 1]; a belongs to the right end
    a = -0.5 if right else 0.0
    b = -0.5 if left else 0.0
    if a == 0.0 and b == 0.0:
        return roots_legendre(n)
    return roots_jacobi(n, a, b)


def real_segment_integral(f, a: float, b: float, xs, left_singular: bool, right_singular: bool,
                          n: int, absolute: bool = False):
    """int_a^b f(x) / y_upper(x) dx with optional inverse-square-root endpoints.

    ``f`` maps an array of real nodes to values of shape (n, ...). With
    ``absolute`` the modulus of the integrand is integrated instead.
    """
    t, w = _jacobi_rule(n, left_singular, right_singular)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    x = mid + half * t
    # the endpoint factors sqrt(x - a) = sqrt(half (1 + t)), sqrt(x - b) = i sqrt(half (1 - t))
    # are absorbed into the Jacobi weight exactly, never formed from x - b
    keep = np.ones(len(xs), bool)
    if left_singular:
        keep[np.argmin(np.abs(np.asarray(xs) - a))] = False
    if right_singular:
        keep[np.argmin(np.abs(np.asarray(xs) - b))] = False
    reduced = y_upper(x + 0j, np.asarray(xs)[keep])
    if right_singular:
        reduced = 1j * reduced
    fx = np.asarray(f(x))
    g = fx / reduced.reshape((-1,) + (1,) * (fx.ndim - 1))
    if absolute:
        g = np.abs(g)
    # each singular end trades one factor sqrt(half) for the Jacobi weight
    factor = half ** (1.0 - 0.5 * (int(left_singular) + int(right_singular)))
    return factor * np.tensordot(w, g, axes=(0, 0))


def _graded_pieces(a, b, xs, left, right):
    """Split [a, b] so that every piece is long compared with its distance to other branch points.

    Pieces shrink geometrically (ratio 2) towards an end that has a foreign
    branch point nearby; only the outermost pieces carry the endpoint weight.
    """
    L = b - a
    others = xs[(np.abs(xs - a) > 1e-14 * L) & (np.abs(xs - b) > 1e-14 * L)]
    dl = float(np.abs(others - a).min()) if others.size else np.inf
    dr = float(np.abs(others - b).min()) if others.size else np.inf
    cuts_l, cuts_r = [], []
    d = 0.5 * dl
    while d < 0.25 * L:
        cuts_l.append(a + d)
        d *= 2
    d = 0.5 * dr
    while d < 0.25 * L:
        cuts_r.append(b - d)
        d *= 2
    pts = [a] + cuts_l + cuts_r[::-1] + [b]
    pts = sorted(set(pts))
    n = len(pts) - 1
    return [(pts[i], pts[i + 1], left and i == 0, right and i == n - 1) for i in range(n)]


def _piecewise_integral(f, pieces, xs, n, absolute=False):
    return sum(real_segment_integral(f, p, q, xs, ls, rs, n, absolute) for p, q, ls, rs in pieces)


def _converged_segment(f, a, b, xs, left, right, tol=1e-13, n0=24, nmax=1 << 14):
    pieces = _graded_pieces(a, b, np.asarray(xs, float), left, right)
    prev = _piecewise_integral(f, pieces, xs, n0)
    # measure error against int |f / y| so that integrals which cancel to zero still converge
    scale = max(np.abs(_piecewise_integral(f, pieces, xs, n0, absolute=True)).max(), 1e-300)
    n = n0
    last_diff = np.inf
    while n < nmax:
        n *= 2
        cur = _piecewise_integral(f, pieces, xs, n)
        diff = np.abs(cur - prev).max()
        if diff <= tol * scale:
            return cur, n * len(pieces)
        # past the roundoff floor further doubling only adds noise
        if diff > last_diff and last_diff <= 100 * tol * scale:
            return prev, n // 2 * len(pieces)
        last_diff = diff
        prev = cur
    raise AccuracyError(f"segment quadrature on [{a}, {b}] did not converge", best=prev,
                        residual=float(last_diff))


def _raw_periods(xs, tol=1e-13):
    powers = lambda x: np.stack([np.ones_like(x), x], axis=-1)
    A = np.zeros((2, 2), complex)
    B = np.zeros((2, 2), complex)
    nodes = 0
    for s, (i, j) in enumerate([(1, 2), (3, 4)]):
        v, n = _converged_segment(powers, xs[i], xs[j], xs, True, True, tol)
        A[s] = 2 * v
        nodes = max(nodes, n)
    for s, (i, j, sign) in enumerate([(0, 1, -1.0), (4, 5, 1.0)]):
        v, n = _converged_segment(powers, xs[i], xs[j], xs, True, True, tol)
        B[s] = sign * 2 * v
        nodes = max(nodes, n)
    return A, B, nodes


def period_basis(x, eps_gap: float = EPS_GAP, tol: float = 1e-13) -> CurveData:
    xs = check_branch_points(x, eps_gap)
    A, B, nodes = _raw_periods(xs, tol)
    if np.abs(A.imag).max() > 1e-9 * np.abs(A).max():
        raise AccuracyError("a-periods are not real")
    M = np.linalg.inv(A.real)  # rows: power of x, columns: differential index
    Pi = B @ M
    om = Pi.imag
    if np.abs(Pi.real).max() > 1e-9 * np.abs(om).max():
        raise AccuracyError("period matrix is not purely imaginary",
                            residual=float(np.abs(Pi.real).max()))
    om = 0.5 * (om + om.T)
    C = np.array([M[1], M[0]])
    return CurveData(x=xs, C=C, omega=om, period_matrix=Pi, nodes=nodes)


def initial_curve_guess(sigma=None, H=None) -> CurveData:
    """Continuation origin: the symmetric sextic with branch points -3,-2,-1,1,2,3."""
    return _symmetric_curve()


@lru_cache(maxsize=1)
def _symmetric_curve() -> CurveData:
    return period_basis(SYMMETRIC_X)


def _quad_complex(f, a=0.0, b=1.0):
    def g(t):
        v = np.asarray(f(t))
        return np.concatenate([v.real, v.imag])

    val, err = integrate.quad_vec(g, a, b, epsabs=1e-15, epsrel=1e-13, limit=400)
    k = val.size // 2
    return val[:k] + 1j * val[k:]


def _leg_integral(curve: CurveData, z0, z1, y_of, singular_start, singular_end):
    """Integral of du along the straight leg z0 -> z1 with y given by ``y_of``."""
    k = curve.coeffs

    def integrand_at(z, dz):
        y = y_of(z)
        return (k[0] + k[1] * z) / y * dz

    if singular_start and singular_end:
        mid = 0.5 * (z0 + z1)
        return (_leg_integral(curve, z0, mid, y_of, True, False)
                + _leg_integral(curve, mid, z1, y_of, False, True))
    if singular_start:
        return _quad_complex(lambda s: integrand_at(z0 + (z1 - z0) * s * s, 2 * s * (z1 - z0)))
    if singular_end:
        return _quad_complex(lambda s: integrand_at(z1 - (z1 - z0) * s * s, 2 * s * (z1 - z0)))
    return _quad_complex(lambda t: integrand_at(z0 + (z1 - z0) * t, z1 - z0))


def _near_branch(z, xs, tol=1e-12):
    return np.min(np.abs(z - xs)) <= tol * max(1.0, np.abs(xs).max())


def _segment_hits_branch(z0, z1, xs, skip_ends=True):
    d = z1 - z0
    for s in xs:
        if abs(d) == 0:
            continue
        t = ((s - z0) * np.conj(d)).real / abs(d) ** 2
        lo, hi = (1e-12, 1 - 1e-12) if skip_ends else (0.0, 1.0)
        if lo < t < hi and abs(z0 + t * d - s) < 1e-12 * max(1.0, abs(s)):
            return True
    return False


def abel_jacobi(curve: CurveData, p, path=None) -> np.ndarray:
    """u(p) = int_{p_1}^{p} du.

    Without ``path`` the integral runs x_1 -> x_1 + iY -> Re x + iY -> x
    (mirrored below the real axis for Im x < 0). ``path`` may give explicit
    complex waypoints from x_1 to p.x; y is continued analytically along the
    straight legs and the sheet of the end point decides the final sign.
    """
    if not isinstance(p, CurvePoint):
        p = CurvePoint(complex(p), 1)
    xs = curve.x
    x = complex(p.x)
    if path is None:
        if _near_branch(x, xs) and abs(x - xs[0]) <= 1e-12 * max(1.0, abs(xs[0])):
            return np.zeros(2, complex)
        span = xs[-1] - xs[0]
        if x.imag >= 0:
            Y = max(x.imag, 0.5 * span)
            pts = [xs[0], xs[0] + 1j * Y, x.real + 1j * Y, x]
        else:
            Y = max(-x.imag, 0.5 * span)
            pts = [xs[0], xs[0] - 1j * Y, x.real - 1j * Y, x]
    else:
        pts = [complex(z) for z in path]
        if abs(pts[0] - xs[0]) > 1e-12 * max(1.0, abs(xs[0])):
            raise PathError("path must start at the base point x_1")
        if abs(pts[-1] - x) > 1e-12 * max(1.0, abs(x)):
            raise PathError("path must end at the point")
    # drop zero-length legs
    clean = [pts[0]]
    for z in pts[1:]:
        if abs(z - clean[-1]) > 0:
            clean.append(z)
    pts = clean
    if len(pts) == 1:
        return np.zeros(2, complex)
    first = pts[1] - pts[0]
    if first.imag == 0:
        raise PathError("first leg must leave the real axis")
    upper = first.imag > 0

    def y_first(z):
        z = np.asarray(z, complex)
        return y_upper(z, xs) if upper else np.conj(y_upper(np.conj(z), xs))

    total = np.zeros(2, complex)
    y_prev = None
    for i, (z0, z1) in enumerate(zip(pts[:-1], pts[1:])):
        if _segment_hits_branch(z0, z1, xs):
            raise PathError("integration path passes through a branch point")
        end_branch = i == len(pts) - 2 and _near_branch(z1, xs)
        if i == 0:
            y_of = y_first
            total += _leg_integral(curve, z0, z1, y_of, True, end_branch)
            y_prev = complex(y_first(z1)) if not end_branch else 0j
        else:
            if _near_branch(z0, xs):
                raise PathError("intermediate waypoint at a branch point")
            y0 = y_prev
            base = z0

            def y_of(z, y0=y0, base=base):
                z = np.asarray(z, complex)
                out = np.full(z.shape, y0, dtype=complex)
                for s in xs:
                    out = out * np.sqrt((z - s) / (base - s))
                return out

            total += _leg_integral(curve, z0, z1, y_of, False, end_branch)
            y_prev = complex(y_of(np.array(z1))) if not end_branch else 0j
    target = p.sheet * complex(y_ref(np.array(x), xs))
    if abs(target) > 0 and abs(y_prev) > 0:
        if abs(y_prev + target) < abs(y_prev - target):
            total = -total
    elif p.sheet < 0 and path is None:
        total = -total
    return total


def marked_point_image(curve: CurveData) -> np.ndarray:
    """u0 = u(p_0), p_0 over x = infinity on the upper sheet, taken real in (0, 1)^2 / 2 + ...

    Integrated from p_6 (image (1/2, 1/2)) along (x_6, inf) with x = x_6 + t^2.
    """
    xs = curve.x
    k = curve.coeffs

    def f(t):
        x = xs[5] + t * t
        return (2 * t * (k[0] + k[1] * x) / y_upper(x + 0j, xs).real)

    val, _ = integrate.quad_vec(f, 0.0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=400)
    return np.array([0.5, 0.5]) + val


def cs_quadrature(curve: CurveData, sigma, A: float, x_a: float, x_b: float, zeros=None,
                  tol: float = 1e-13) -> complex:
    """int_{x_a}^{x_b} A prod (x - z_j) dx / y_upper along the real axis.

    The z_j are the branch points x_{sigma_j} (sigma entries 1..6) or, when
    ``zeros`` is given, those real numbers instead.
    """
    xs = curve.x
    roots = np.asarray(zeros, float) if zeros is not None else np.array([xs[s - 1] for s in sigma])
    a, b = float(x_a), float(x_b)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    if a == b:
        return 0j
    scale = max(1.0, np.abs(xs).max())
    inside = [s for s in xs if a + 1e-13 * scale < s < b - 1e-13 * scale]
    if inside:
        raise PathError("interval straddles a branch point")
    left = bool(np.min(np.abs(xs - a)) <= 1e-13 * scale)
    right = bool(np.min(np.abs(xs - b)) <= 1e-13 * scale)
    if left:
        a = float(xs[np.argmin(np.abs(xs - a))])
    if right:
        b = float(xs[np.argmin(np.abs(xs - b))])
    f = lambda x: A * np.prod(x[:, None] - roots[None, :], axis=1)
    val, _ = _converged_segment(f, a, b, xs, left, right, tol)
    return sign * complex(val)


def cs_vertices(curve: CurveData, sigma, A: float = 1.0, zeros=None) -> np.ndarray:
    """Images w_1..w_6 of the branch points under the CS integral, with w_1 = 0."""
    xs = curve.x
    w = [0j]
    for s in range(5):
        w.append(w[-1] + cs_quadrature(curve, sigma, A, xs[s], xs[s + 1], zeros))
    return np.array(w)


def cs_side_lengths(curve: CurveData, sigma, A: float = 1.0, zeros=None) -> np.ndarray:
    """Signed side lengths H_s = (w_{s+1} - w_s) / i^s of the CS image."""
    w = cs_vertices(curve, sigma, A, zeros)
    return np.array([((w[s + 1] - w[s]) / 1j ** (s + 1)).real for s in range(5)])
