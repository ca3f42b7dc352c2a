"""Genus-2 Riemann theta functions with matrix argument i*Omega.

Characteristics are written with integer labels (eps, eps') in {0, 1}^2 and
enter the series with halved entries:

    theta[eps, eps'](u) = sum_{n in Z^2 + eps/2} exp(-pi n.Omega.n + 2 pi i n.(u + eps'/2))

The box of summation is centred at c = -Omega^{-1} Im(u); the factor
exp(pi c.Omega.c) is pulled out so every retained term has modulus <= 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import InputError, MatrixDomainError

DEFAULT_TOL = 1e-14
_settings = {"tol": DEFAULT_TOL}


def set_default_tolerance(tol: float) -> None:
    """Truncation tolerance used when a call passes none (process wide)."""
    if not (1e-16 < tol <= 1e-2):
        raise InputError("theta tolerance must lie in (1e-16, 1e-2]")
    _settings["tol"] = float(tol)


def default_tolerance() -> float:
    return _settings["tol"]


@dataclass(frozen=True)
class Characteristic:
    eps: tuple[int, int]
    eps_prime: tuple[int, int]

    def __post_init__(self):
        e = tuple(int(v) for v in self.eps)
        ep = tuple(int(v) for v in self.eps_prime)
        object.__setattr__(self, "eps", e)
        object.__setattr__(self, "eps_prime", ep)

    @property
    def parity(self) -> int:
        """0 for even, 1 for odd."""
        return (self.eps[0] * self.eps_prime[0] + self.eps[1] * self.eps_prime[1]) % 2

    @property
    def is_odd(self) -> bool:
        return self.parity == 1

    def __add__(self, other: "Characteristic") -> "Characteristic":
        return Characteristic(
            ((self.eps[0] + other.eps[0]) % 2, (self.eps[1] + other.eps[1]) % 2),
            ((self.eps_prime[0] + other.eps_prime[0]) % 2,
             (self.eps_prime[1] + other.eps_prime[1]) % 2),
        )

    def reduced(self) -> "Characteristic":
        return Characteristic(tuple(v % 2 for v in self.eps), tuple(v % 2 for v in self.eps_prime))

    def display(self) -> str:
        """Row-wise display: rows (eps_1 eps'_1) and (eps_2 eps'_2)."""
        return f"[{self.eps[0]}{self.eps_prime[0]}|{self.eps[1]}{self.eps_prime[1]}]"


ZERO_CHAR = Characteristic((0, 0), (0, 0))

# AJ images of the branch points p_1..p_6 (base point p_1), as characteristics
BRANCH_CHARS = {
    1: Characteristic((0, 0), (0, 0)),
    2: Characteristic((1, 0), (0, 0)),
    3: Characteristic((1, 0), (1, 0)),
    4: Characteristic((0, 1), (1, 0)),
    5: Characteristic((0, 1), (1, 1)),
    6: Characteristic((0, 0), (1, 1)),
}

# Representatives of the same half-periods reached from p_1 inside the upper
# half-plane: u = (i Omega eps + eps') / 2 with eps in {-1,0}^2, eps' in {0,1}^2
BLOCK_HALF_PERIODS = {
    1: ((0, 0), (0, 0)),
    2: ((-1, 0), (0, 0)),
    3: ((-1, 0), (1, 0)),
    4: ((0, -1), (1, 0)),
    5: ((0, -1), (1, 1)),
    6: ((0, 0), (1, 1)),
}


def char_of_branch_subset(indices) -> Characteristic:
    """Mod-2 sum of the branch-point characteristics of ``indices`` (a multiset of 1..6)."""
    out = ZERO_CHAR
    for s in indices:
        if int(s) not in BRANCH_CHARS:
            raise InputError(f"branch index {s} outside 1..6")
        out = out + BRANCH_CHARS[int(s)]
    return out


CHAR_35 = char_of_branch_subset((3, 5))


def odd_characteristics() -> list[Characteristic]:
    """The six odd characteristics [k35], k = 1..6."""
    return [char_of_branch_subset((k, 3, 5)) for k in range(1, 7)]


def check_riemann_matrix(omega) -> np.ndarray:
    om = np.asarray(omega, dtype=float)
    if om.shape != (2, 2) or not np.all(np.isfinite(om)):
        raise MatrixDomainError("Omega must be a finite real 2x2 matrix")
    if abs(om[0, 1] - om[1, 0]) > 1e-12 * max(1.0, np.abs(om).max()):
        raise MatrixDomainError("Omega must be symmetric")
    om = 0.5 * (om + om.T)
    if np.linalg.eigvalsh(om).min() <= 0:
        raise MatrixDomainError("Omega must be positive definite")
    return om


def in_cone(omega) -> bool:
    om = np.asarray(omega, dtype=float)
    return bool(0 < om[0, 1] < min(om[0, 0], om[1, 1]))


@lru_cache(maxsize=4096)
def _radius(lam_min: float, tol: float) -> int:
    r = 1
    while np.exp(-np.pi * lam_min * (r - 1) ** 2) * (2 * r + 1) ** 2 >= tol:
        r += 1
    return r


def truncation_radius(omega, tol: float | None = None) -> int:
    """Smallest R with exp(-pi lam_min (R-1)^2) (2R+1)^2 < tol."""
    tol = _settings["tol"] if tol is None else tol
    if not (0 < tol <= 1e-2):
        raise InputError("tolerance must lie in (0, 1e-2]")
    om = check_riemann_matrix(omega)
    return _radius(float(np.linalg.eigvalsh(om).min()), float(tol))


def _as_char(char) -> Characteristic:
    if isinstance(char, Characteristic):
        return char
    if char is None:
        return ZERO_CHAR
    eps, eps_prime = char
    return Characteristic(tuple(eps), tuple(eps_prime))


@lru_cache(maxsize=256)
def _matrix_info(raw: bytes):
    om = check_riemann_matrix(np.frombuffer(raw, float).reshape(2, 2))
    return om, float(np.linalg.eigvalsh(om).min()), np.linalg.inv(om)


def theta_jet(char, u, omega, order: int = 0, tol: float | None = None):
    """Theta with characteristic and its derivatives up to ``order`` (0, 1 or 2).

    ``u`` has shape (..., 2). Returns a tuple (value, gradient, hessian)
    truncated to ``order + 1`` entries with shapes (...), (..., 2), (..., 2, 2).
    """
    ch = _as_char(char)
    raw = np.asarray(omega, dtype=float)
    if raw.shape != (2, 2):
        raise MatrixDomainError("Omega must be a finite real 2x2 matrix")
    om, lam_min, om_inv = _matrix_info(np.ascontiguousarray(raw).tobytes())
    u = np.asarray(u, dtype=complex)
    lead = u.shape[:-1]
    uf = u.reshape(-1, 2)
    R = _radius(lam_min, float(_settings["tol"] if tol is None else tol))
    half_e = np.array(ch.eps, float) / 2
    half_ep = np.array(ch.eps_prime, float) / 2

    c = -uf.imag @ om_inv.T  # (P, 2)
    k = np.arange(-R, R + 1, dtype=float)
    n1 = (np.round(c[:, 0] - half_e[0]) + half_e[0])[:, None] + k  # (P, K)
    n2 = (np.round(c[:, 1] - half_e[1]) + half_e[1])[:, None] + k
    d1 = n1 - c[:, :1]
    d2 = n2 - c[:, 1:]
    quad = (om[0, 0] * d1[:, :, None] ** 2 + 2 * om[0, 1] * d1[:, :, None] * d2[:, None, :]
            + om[1, 1] * d2[:, None, :] ** 2)
    shift = uf.real + half_ep
    phase = 2 * np.pi * (n1[:, :, None] * shift[:, 0, None, None] + n2[:, None, :] * shift[:, 1, None, None])
    terms = np.exp(-np.pi * quad + 1j * phase)
    scale = np.exp(np.pi * np.einsum("pi,ij,pj->p", c, om, c))

    out = [(terms.sum(axis=(1, 2)) * scale).reshape(lead)]
    if order >= 1:
        f = 2j * np.pi
        g1 = (terms * n1[:, :, None]).sum(axis=(1, 2))
        g2 = (terms * n2[:, None, :]).sum(axis=(1, 2))
        out.append((f * np.stack([g1, g2], axis=-1) * scale[:, None]).reshape(lead + (2,)))
    if order >= 2:
        f2 = (2j * np.pi) ** 2
        h11 = (terms * n1[:, :, None] ** 2).sum(axis=(1, 2))
        h12 = (terms * n1[:, :, None] * n2[:, None, :]).sum(axis=(1, 2))
        h22 = (terms * n2[:, None, :] ** 2).sum(axis=(1, 2))
        hess = np.stack([np.stack([h11, h12], -1), np.stack([h12, h22], -1)], -2)
        out.append((f2 * hess * scale[:, None, None]).reshape(lead + (2, 2)))
    return tuple(out)


def theta(u, omega, tol: float | None = None):
    """Riemann theta function theta(u, i Omega)."""
    return theta_jet(ZERO_CHAR, u, omega, 0, tol)[0]


def theta_char(char, u, omega, tol: float | None = None):
    return theta_jet(char, u, omega, 0, tol)[0]


def grad_theta_char(char, u, omega, tol: float | None = None):
    return theta_jet(char, u, omega, 1, tol)[1]


def hessian_theta_char(char, u, omega, tol: float | None = None):
    return theta_jet(char, u, omega, 2, tol)[2]


def char_prefactor(char, u, omega):
    """exp(i pi e.(i Omega).e + 2 i pi e.(u + e')) with e, e' the halved labels."""
    ch = _as_char(char)
    e = np.array(ch.eps, float) / 2
    ep = np.array(ch.eps_prime, float) / 2
    u = np.asarray(u, complex)
    return np.exp(-np.pi * e @ np.asarray(omega, float) @ e + 2j * np.pi * ((u + ep) @ e))


def lattice_shift_factor(char, u, omega, m, m_prime):
    """Factor F with theta[char](u + i Omega m + m') = F * theta[char](u)."""
    ch = _as_char(char)
    om = np.asarray(omega, float)
    m = np.asarray(m, float)
    mp = np.asarray(m_prime, float)
    e = np.array(ch.eps, float) / 2
    ep = np.array(ch.eps_prime, float) / 2
    u = np.asarray(u, complex)
    return np.exp(np.pi * m @ om @ m - 2j * np.pi * (u @ m) + 2j * np.pi * (e @ mp - ep @ m))


def half_period(s: int, omega) -> np.ndarray:
    """Tabulated AJ image of the branch point p_s: (i Omega eps + eps') / 2."""
    if int(s) not in BRANCH_CHARS:
        raise InputError(f"branch index {s} outside 1..6")
    ch = BRANCH_CHARS[int(s)]
    om = np.asarray(omega, float)
    return 0.5 * (1j * om @ np.array(ch.eps, float) + np.array(ch.eps_prime, float))


def block_half_period(s: int, omega) -> np.ndarray:
    """Representative of u(p_s) continuous with the upper half-plane image of the curve."""
    if int(s) not in BLOCK_HALF_PERIODS:
        raise InputError(f"branch index {s} outside 1..6")
    eps, eps_prime = BLOCK_HALF_PERIODS[int(s)]
    om = np.asarray(omega, float)
    return 0.5 * (1j * om @ np.array(eps, float) + np.array(eps_prime, float))


def block_coordinates(u, omega):
    """Characteristic coordinates (eps, eps') of u = (i Omega eps + eps') / 2, real 2-vectors."""
    u = np.asarray(u, complex)
    om = np.asarray(omega, float)
    eps = 2 * np.linalg.solve(om, u.imag.T).T
    return eps, 2 * u.real


def lattice_reduce(u, omega):
    """Shift u by a lattice vector so that Omega^{-1} Im u and Re u lie in [-1/2, 1/2).

    Returns (reduced u, m, m') with u = reduced + i Omega m + m'.
    """
    u = np.asarray(u, complex)
    om = np.asarray(omega, float)
    r = np.linalg.solve(om, u.imag.T).T
    m = np.floor(r + 0.5)
    v = u - 1j * (m @ om.T)
    mp = np.floor(v.real + 0.5)
    return v - mp, m.astype(int), mp.astype(int)
