"""Auxiliary parameters of the theta form of the CS integral."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import InputError

PARAM_NAMES = ("omega11", "omega12", "omega22", "u0_1", "u0_2", "c", "c1", "c2", "h")


@dataclass(frozen=True)
class AuxParams:
    omega: np.ndarray
    u0: np.ndarray
    c: float
    c1: float
    c2: float
    h: float
    zeros: np.ndarray | None = None  # (3, 2) complex, slit extension only
    residual_norm: float = float("nan")
    converged: bool = False
    iterations: int = 0

    def __post_init__(self):
        om = np.asarray(self.omega, float)
        object.__setattr__(self, "omega", 0.5 * (om + om.T))
        object.__setattr__(self, "u0", np.asarray(self.u0, float).reshape(2))
        for name in ("c", "c1", "c2", "h"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.zeros is not None:
            object.__setattr__(self, "zeros", np.asarray(self.zeros, complex).reshape(3, 2))

    def vector(self) -> np.ndarray:
        om = self.omega
        return np.array([om[0, 0], om[0, 1], om[1, 1], self.u0[0], self.u0[1],
                         self.c, self.c1, self.c2, self.h])

    @classmethod
    def from_vector(cls, v, **extra) -> "AuxParams":
        v = np.asarray(v, float)
        om = np.array([[v[0], v[1]], [v[1], v[2]]])
        return cls(om, v[3:5], v[5], v[6], v[7], v[8], **extra)

    def with_status(self, **kw) -> "AuxParams":
        return replace(self, **kw)

    def admissible(self) -> bool:
        """Omega in the cone, c < 0 and 2 u0 in (0, 1)^2."""
        om = self.omega
        return bool(0 < om[0, 1] < min(om[0, 0], om[1, 1]) and self.c < 0
                    and np.all(self.u0 > 0) and np.all(self.u0 < 0.5))

    def to_dict(self) -> dict:
        out = {
            "omega": self.omega.tolist(),
            "u0": self.u0.tolist(),
            "c": self.c,
            "c1": self.c1,
            "c2": self.c2,
            "h": self.h,
            "residual_norm": float(self.residual_norm),
            "converged": bool(self.converged),
        }
        if self.zeros is not None:
            out["zeros"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.zeros]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AuxParams":
        try:
            om = np.asarray(data["omega"], float)
            u0 = np.asarray(data["u0"], float)
            vals = [float(data[k]) for k in ("c", "c1", "c2", "h")]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed parameter data: {exc}") from None
        if om.shape != (2, 2) or u0.shape != (2,):
            raise InputError("omega must be 2x2 and u0 a 2-vector")
        zeros = data.get("zeros")
        if zeros is not None:
            z = np.asarray(zeros, float)
            if z.shape != (3, 2, 2):
                raise InputError("zeros must be three complex 2-vectors given as [re, im] pairs")
            zeros = z[..., 0] + 1j * z[..., 1]
        return cls(om, u0, *vals, zeros=zeros,
                   residual_norm=float(data.get("residual_norm", float("nan"))),
                   converged=bool(data.get("converged", False)))
