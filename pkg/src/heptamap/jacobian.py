"""Theta-function expressions for the CS integral and the projection to the x-plane.

Everything here is a pure function of the auxiliary parameters. With
R(u) = theta[e](u0 - u) / theta[e](u0 + u) and g = grad theta[35](u0),

    w(u) = c * det[grad log theta[e](u0+u) - grad log theta[e](u0-u), g]
           + h * log R(u) + c1 u1 + c2 u2,

and the logarithm is taken as log(i R) + i pi/2. On the upper half-plane image
arg R stays in [pi, 2 pi], far from the cut of that expression, so no path
tracking is needed and w(u(p_1)) = 0.
"""
from __future__ import annotations

import numpy as np

from .exceptions import PoleError
from .params import AuxParams
from .theta import CHAR_35, Characteristic, char_of_branch_subset, theta_jet, block_half_period

POLE_MARGIN = 1e-8


def marked_gradient(params: AuxParams) -> np.ndarray:
    """grad theta[35](u0), real for real u0."""
    return theta_jet(CHAR_35, params.u0, params.omega, 1)[1].real


def _pair_jets(char, params: AuxParams, u, order):
    u = np.asarray(u, complex)
    args = np.stack([params.u0 - u, params.u0 + u], axis=-2)
    return theta_jet(char, args, params.omega, order)


def _check_poles(t1, t2, scale):
    if np.any(np.abs(t1) < POLE_MARGIN * scale) or np.any(np.abs(t2) < POLE_MARGIN * scale):
        raise PoleError("point too close to a pole of the CS integral")


def _w_formula(char, params: AuxParams, u, g):
    val, grad = _pair_jets(char, params, u, 1)
    t1, t2 = val[..., 0], val[..., 1]
    g1, g2 = grad[..., 0, :], grad[..., 1, :]
    G = -g1 / t1[..., None] + g2 / t2[..., None]
    D = G[..., 0] * g[1] - G[..., 1] * g[0]
    L = np.log(1j * t1 / t2) + 0.5j * np.pi
    return params.c * D + params.h * L + params.c1 * u[..., 0] + params.c2 * u[..., 1]


# u(p_1) = 0 and theta[35](u0) = 0, so the [35] expression is a 0/0 quotient
# near u = 0; there the [635] expression, shifted to vanish at 0, is used
ANCHOR_CHAR = char_of_branch_subset((6, 3, 5))
ANCHOR_RADIUS = 0.05


def _near_anchor(params: AuxParams, u):
    eps = 2 * np.linalg.solve(params.omega, np.moveaxis(u.imag, -1, 0).reshape(2, -1)).T.reshape(u.shape)
    return np.maximum(np.abs(eps), np.abs(2 * u.real)).max(axis=-1) < ANCHOR_RADIUS


def w_value(params: AuxParams, u, g=None) -> np.ndarray:
    """CS integral in Jacobian variables; u has shape (..., 2)."""
    u = np.asarray(u, complex)
    g = marked_gradient(params) if g is None else g
    with np.errstate(divide="ignore", invalid="ignore"):
        w = _w_formula(CHAR_35, params, u, g)
    near = _near_anchor(params, u)
    if np.any(near):
        offset = _w_formula(ANCHOR_CHAR, params, np.zeros(2, complex), g)
        alt = _w_formula(ANCHOR_CHAR, params, u[near], g) - offset
        w = np.array(w, complex)
        w[near] = alt
    return w


def _best_char(params: AuxParams, u):
    """[35] unless one of theta[35](u0 -+ u) nearly vanishes; then the best-conditioned [k35]."""
    candidates = [CHAR_35] + [char_of_branch_subset((k, 3, 5)) for k in range(2, 7)]
    best, best_val = None, -1.0
    for ch in candidates:
        val = theta_jet(ch, np.stack([params.u0 - u, params.u0 + u]), params.omega, 0)[0]
        m = float(np.abs(val).min())
        if ch == CHAR_35 and m > 1e-4:
            return ch
        if m > best_val:
            best, best_val = ch, m
    return best


def w_gradient(params: AuxParams, u, char: Characteristic | None = None, g=None) -> np.ndarray:
    """Analytic gradient of w with respect to u (single point).

    Away from the divisor the gradient depends on the chosen odd
    characteristic; on the divisor different choices differ by a multiple of
    grad theta[35], which leaves the wedge with that gradient unchanged.
    """
    u = np.asarray(u, complex)
    g = marked_gradient(params) if g is None else g
    ch = _best_char(params, u) if char is None else char
    val, grad, hess = _pair_jets(ch, params, u, 2)
    t1, t2 = val[0], val[1]
    g1, g2 = grad[0], grad[1]
    H1, H2 = hess[0], hess[1]
    dG = H1 / t1 - np.outer(g1, g1) / t1 ** 2 + H2 / t2 - np.outer(g2, g2) / t2 ** 2
    grad_D = dG[:, 0] * g[1] - dG[:, 1] * g[0]
    grad_L = -g1 / t1 - g2 / t2
    return params.c * grad_D + params.h * grad_L + np.array([params.c1, params.c2])


def w_gradient_batch(params: AuxParams, u, g=None) -> np.ndarray:
    """Gradient with the [35] formula for points away from its singular set, shape (..., 2)."""
    u = np.asarray(u, complex)
    g = marked_gradient(params) if g is None else g
    val, grad, hess = _pair_jets(CHAR_35, params, u, 2)
    t1, t2 = val[..., 0, None], val[..., 1, None]
    g1, g2 = grad[..., 0, :], grad[..., 1, :]
    H1, H2 = hess[..., 0, :, :], hess[..., 1, :, :]
    outer = lambda a: a[..., :, None] * a[..., None, :]
    dG = (H1 / t1[..., None] - outer(g1) / t1[..., None] ** 2
          + H2 / t2[..., None] - outer(g2) / t2[..., None] ** 2)
    grad_D = dG[..., :, 0] * g[1] - dG[..., :, 1] * g[0]
    grad_L = -g1 / t1 - g2 / t2
    return params.c * grad_D + params.h * grad_L + np.array([params.c1, params.c2])


def wedge(params: AuxParams, u, char=None, g=None) -> complex:
    """det(grad w, grad theta[35]) at u."""
    gw = w_gradient(params, u, char, g)
    gt = theta_jet(CHAR_35, u, params.omega, 1)[1]
    return complex(gw[0] * gt[1] - gw[1] * gt[0])


def _block_distance(omega, u, centre):
    d = np.asarray(u, complex) - centre
    eps = 2 * np.linalg.solve(omega, np.moveaxis(d.imag, -1, 0).reshape(2, -1)).T.reshape(d.shape)
    return np.maximum(np.abs(eps), np.abs(2 * d.real)).max(axis=-1)


class Projection:
    """x(u) = F(u) / F(u(p_l)), F(u) = theta[jk35](u)^2 / (theta[k35](u + u0) theta[k35](u - u0)).

    F is lattice periodic on the divisor and its zeros and poles sit over
    x_j and x_0 = infinity, so x(u(p_j)) = 0 and x(u(p_l)) = 1. At u(p_k) the
    quotient degenerates to 0/0; within ``SWITCH_RADIUS`` of it the same
    function is evaluated with a different k.
    """

    SWITCH_RADIUS = 0.05

    def __init__(self, params: AuxParams, j: int = 1, l: int = 6, k: int = 3, _alt: bool = True):
        if len({j, l, k}) < 3 or not all(1 <= v <= 6 for v in (j, l, k)):
            raise ValueError("projection indices j, l, k must be distinct values in 1..6")
        self.params = params
        self.j, self.l, self.k = j, l, k
        self.num_char = char_of_branch_subset((j, k, 3, 5))
        self.den_char = char_of_branch_subset((k, 3, 5))
        self.kappa = 1.0 / self._F(block_half_period(l, params.omega))
        self.u_k = block_half_period(k, params.omega)
        self.alt = None
        if _alt:
            k2 = next(m for m in (2, 3, 4, 5, 6, 1) if m not in (j, l, k))
            self.alt = Projection(params, j, l, k2, _alt=False)

    def _near(self, u):
        if self.alt is None:
            return np.zeros(np.shape(u)[:-1], bool)
        return _block_distance(self.params.omega, u, self.u_k) < self.SWITCH_RADIUS

    def _F(self, u):
        p = self.params
        u = np.asarray(u, complex)
        a = theta_jet(self.num_char, u, p.omega, 0)[0]
        b = theta_jet(self.den_char, np.stack([u + p.u0, u - p.u0], axis=-2), p.omega, 0)[0]
        return a * a / (b[..., 0] * b[..., 1])

    def value(self, u):
        u = np.asarray(u, complex)
        near = self._near(u)
        if np.ndim(near) == 0:
            return self.alt.value(u) if near else self.kappa * self._F(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(self.kappa * self._F(u), complex)
        if near.any():
            out[near] = self.alt.value(u[near])
        return out

    def value_and_gradient(self, u):
        """Single point: x and grad x."""
        u = np.asarray(u, complex)
        if self._near(u):
            return self.alt.value_and_gradient(u)
        p = self.params
        a, ga = theta_jet(self.num_char, u, p.omega, 1)
        b, gb = theta_jet(self.den_char, np.stack([u + p.u0, u - p.u0]), p.omega, 1)
        if np.abs(b).min() < POLE_MARGIN * max(np.abs(b).max(), 1e-300):
            raise PoleError("point too close to the pole of the projection")
        x = self.kappa * a * a / (b[0] * b[1])
        dlog = 2 * ga / a - gb[0] / b[0] - gb[1] / b[1]
        return x, x * dlog

    def reciprocal_and_gradient(self, u):
        """Single point: 1/x and its gradient, regular near the pole u0."""
        u = np.asarray(u, complex)
        if self._near(u):
            return self.alt.reciprocal_and_gradient(u)
        p = self.params
        a, ga = theta_jet(self.num_char, u, p.omega, 1)
        b, gb = theta_jet(self.den_char, np.stack([u + p.u0, u - p.u0]), p.omega, 1)
        denom = self.kappa * a * a
        q = b[0] * b[1] / denom
        # product rule form: never divides by the vanishing factor b[1]
        grad = (gb[0] * b[1] + gb[1] * b[0]) / denom - 2 * q * ga / a
        return q, grad


def closed_form_prefactor(params: AuxParams, j: int, l: int, k: int) -> complex:
    """Prefactor theta^2[lk35](u0) / theta^2[lkj35](0) with sign (-1)^{eps(l).eps'(j)}.

    Kept for cross-checking ``Projection.kappa``; for some index triples the
    sign disagrees with the direct normalisation.
    """
    from .theta import BRANCH_CHARS

    om = params.omega
    a = theta_jet(char_of_branch_subset((l, k, 3, 5)), params.u0, om, 0)[0]
    b = theta_jet(char_of_branch_subset((l, k, j, 3, 5)), np.zeros(2), om, 0)[0]
    el = np.array(BRANCH_CHARS[l].eps)
    epj = np.array(BRANCH_CHARS[j].eps_prime)
    sign = (-1) ** int(el @ epj % 2)
    return complex(sign * a * a / (b * b))
