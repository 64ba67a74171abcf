"""Analytic potentials above a gapless electrode plane.

Each rectangle at unit voltage in an otherwise grounded plane contributes the
solid-angle potential

    phi = 1/(2 pi) * sum_corners s_c * arctan(a b / (y R)),

with ``a = X_c - x``, ``b = Z_c - z``, ``R = sqrt(a^2 + b^2 + y^2)`` and
``s_c = +1`` for the (x2, z2) and (x1, z1) corners, ``-1`` otherwise.  The
argument of the arctangent is finite for every ``y > 0`` so the expression is
continuous across the planes ``x = X_c`` and ``z = Z_c``.  Gradients and
Hessians are the closed-form derivatives of the same expression.

Points are arrays whose last axis is (x, y, z); leading axes broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numba
import numpy as np
from scipy import optimize

from sixwire import constants as k
from sixwire.geometry import Electrode, ElectrodeLayout, LayoutError, Role

_INV2PI = 1.0 / (2.0 * np.pi)
# corners as (x column, z column, sign) into the (x1, x2, z1, z2) rectangle row
_CORNERS = ((1, 3, 1.0), (0, 3, -1.0), (1, 2, -1.0), (0, 2, 1.0))


class FieldDomainError(ValueError):
    """Evaluation requested at or below the electrode plane."""


def _points(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 3:
        raise ValueError("points must have a trailing axis of length 3")
    if np.any(p[..., 1] <= 0):
        raise FieldDomainError("field points must satisfy y > 0")
    return p


def _rects(e) -> np.ndarray:
    if isinstance(e, Electrode):
        return e.array
    return np.asarray(e, dtype=float).reshape(-1, 4)


def _corner_terms(rects, weights, p, order):
    """Sum weighted corner contributions of ``order`` 0, 1 or 2."""
    x = p[..., 0, None]
    y = p[..., 1, None]
    z = p[..., 2, None]
    if order == 0:
        out = np.zeros(p.shape[:-1])
    elif order == 1:
        out = np.zeros(p.shape)
    else:
        out = np.zeros(p.shape + (3,))
    y2 = y * y
    for ci, zi, s in _CORNERS:
        a = rects[:, ci] - x
        b = rects[:, zi] - z
        a2 = a * a
        b2 = b * b
        R2 = a2 + b2 + y2
        R = np.sqrt(R2)
        w = s * weights
        if order == 0:
            out += (w * np.arctan(a * b / (y * R))).sum(-1)
            continue
        ay = a2 + y2
        by = b2 + y2
        if order == 1:
            Fa = y * b / (ay * R)
            Fb = y * a / (by * R)
            Fy = -(a * b / R) * (1.0 / by + 1.0 / ay)
            out[..., 0] -= (w * Fa).sum(-1)
            out[..., 1] += (w * Fy).sum(-1)
            out[..., 2] -= (w * Fb).sum(-1)
            continue
        R3 = R2 * R
        Faa = -a * b * y * (3 * a2 + 2 * b2 + 3 * y2) / (ay * ay * R3)
        Fbb = -a * b * y * (2 * a2 + 3 * b2 + 3 * y2) / (by * by * R3)
        Fab = y / R3
        Fay = b * (a2 * (a2 + b2) - y2 * (a2 + b2) - 2 * y2 * y2) / (ay * ay * R3)
        Fby = a * (b2 * (a2 + b2) - y2 * (a2 + b2) - 2 * y2 * y2) / (by * by * R3)
        hxx = (w * Faa).sum(-1)
        hzz = (w * Fbb).sum(-1)
        hxz = (w * Fab).sum(-1)
        hxy = -(w * Fay).sum(-1)
        hyz = -(w * Fby).sum(-1)
        out[..., 0, 0] += hxx
        out[..., 2, 2] += hzz
        out[..., 1, 1] -= hxx + hzz
        out[..., 0, 2] += hxz
        out[..., 2, 0] += hxz
        out[..., 0, 1] += hxy
        out[..., 1, 0] += hxy
        out[..., 1, 2] += hyz
        out[..., 2, 1] += hyz
    return out * _INV2PI


@numba.njit(cache=True, fastmath=False)
def _gradient_batch(rects, weights, p):
    """Compiled equivalent of ``_corner_terms(..., order=1)`` for (n, 3) points."""
    n = p.shape[0]
    out = np.zeros((n, 3))
    for i in range(n):
        x, y, z = p[i, 0], p[i, 1], p[i, 2]
        y2 = y * y
        gx = gy = gz = 0.0
        for j in range(rects.shape[0]):
            w = weights[j]
            for c in range(4):
                if c == 0:
                    a, b, s = rects[j, 1] - x, rects[j, 3] - z, 1.0
                elif c == 1:
                    a, b, s = rects[j, 0] - x, rects[j, 3] - z, -1.0
                elif c == 2:
                    a, b, s = rects[j, 1] - x, rects[j, 2] - z, -1.0
                else:
                    a, b, s = rects[j, 0] - x, rects[j, 2] - z, 1.0
                a2 = a * a
                b2 = b * b
                R = np.sqrt(a2 + b2 + y2)
                ay = a2 + y2
                by = b2 + y2
                ws = w * s
                gx -= ws * y * b / (ay * R)
                gz -= ws * y * a / (by * R)
                gy -= ws * (a * b / R) * (1.0 / by + 1.0 / ay)
        out[i, 0] = gx * _INV2PI
        out[i, 1] = gy * _INV2PI
        out[i, 2] = gz * _INV2PI
    return out


def unit_potential(e, p) -> np.ndarray:
    """Potential (V per applied V) of electrode ``e`` at points ``p``; in [0, 1]."""
    return _corner_terms(_rects(e), 1.0, _points(p), 0)


def unit_gradient(e, p) -> np.ndarray:
    """Gradient of :func:`unit_potential` (V/m per V), shape ``p.shape``."""
    return _corner_terms(_rects(e), 1.0, _points(p), 1)


def unit_hessian(e, p) -> np.ndarray:
    """Hessian of :func:`unit_potential` (V/m^2 per V), shape ``p.shape + (3,)``."""
    return _corner_terms(_rects(e), 1.0, _points(p), 2)


class Conductors:
    """A set of rectangles carrying fixed voltages, evaluated as one potential."""

    def __init__(self, rects, volts):
        self.rects = np.asarray(rects, dtype=float).reshape(-1, 4)
        self.volts = np.asarray(volts, dtype=float).reshape(-1)

    @classmethod
    def from_layout(cls, layout: ElectrodeLayout, voltages: dict) -> "Conductors":
        rects, volts = [], []
        unknown = set(voltages) - set(layout.names)
        if unknown:
            raise LayoutError(f"unknown electrode(s): {', '.join(sorted(unknown))}")
        for name, v in voltages.items():
            if v == 0:
                continue
            for r in layout[name].rects:
                rects.append(r)
                volts.append(v)
        return cls(np.reshape(rects, (-1, 4)), volts)

    def potential(self, p):
        p = _points(p)
        if not len(self.volts):
            return np.zeros(p.shape[:-1])
        return _corner_terms(self.rects, self.volts, p, 0)

    def gradient(self, p):
        p = _points(p)
        if not len(self.volts):
            return np.zeros(p.shape)
        if p.ndim == 2 and p.shape[0] > 8:
            return _gradient_batch(self.rects, self.volts, np.ascontiguousarray(p))
        return _corner_terms(self.rects, self.volts, p, 1)

    def hessian(self, p):
        p = _points(p)
        if not len(self.volts):
            return np.zeros(p.shape + (3,))
        return _corner_terms(self.rects, self.volts, p, 2)

    def field(self, p):
        return -self.gradient(p)


@dataclass(frozen=True)
class OperatingPoint:
    """Everything needed to evaluate the trapping potential of ``layout``.

    ``V_rf`` is the rf amplitude applied to every rf-role electrode and
    ``dc_voltages`` maps electrode names to static voltages.
    """

    layout: ElectrodeLayout
    V_rf: float = 175.0
    Omega_rf: float = k.OMEGA_RF
    mass: float = k.M_CA40
    charge: float = k.e
    dc_voltages: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.Omega_rf > 0:
            raise ValueError("Omega_rf must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.charge == 0:
            raise ValueError("charge must be non-zero")
        unknown = set(self.dc_voltages) - set(self.layout.names)
        if unknown:
            raise LayoutError(f"unknown electrode(s): {', '.join(sorted(unknown))}")

    def replace(self, **kw) -> "OperatingPoint":
        d = dict(layout=self.layout, V_rf=self.V_rf, Omega_rf=self.Omega_rf, mass=self.mass,
                 charge=self.charge, dc_voltages=dict(self.dc_voltages))
        d.update(kw)
        return OperatingPoint(**d)

    @cached_property
    def rf(self) -> Conductors:
        """rf electrodes at unit amplitude."""
        return Conductors.from_layout(self.layout, {e.name: 1.0 for e in self.layout.by_role(Role.rf)})

    @cached_property
    def dc(self) -> Conductors:
        return Conductors.from_layout(self.layout, self.dc_voltages)

    @property
    def ps_scale(self) -> float:
        """Q^2 V_rf^2 / (4 m Omega^2): multiplies |E_rf|^2 per volt^2."""
        return self.charge**2 * self.V_rf**2 / (4 * self.mass * self.Omega_rf**2)


def pseudopotential(op: OperatingPoint, p) -> np.ndarray:
    """rf pseudopotential energy (J) at ``p``."""
    g = op.rf.gradient(p)
    return op.ps_scale * np.einsum("...i,...i->...", g, g)


def pseudopotential_gradient(op: OperatingPoint, p) -> np.ndarray:
    p = _points(p)
    g = op.rf.gradient(p)
    H = op.rf.hessian(p)
    return 2 * op.ps_scale * np.einsum("...ij,...j->...i", H, g)


def pseudopotential_hessian(op: OperatingPoint, p) -> np.ndarray:
    """Hessian of the pseudopotential (J/m^2).

    Includes the third-derivative term of the rf potential, evaluated by
    central differences of the analytic Hessian.
    """
    p = _points(p)
    g = op.rf.gradient(p)
    H = op.rf.hessian(p)
    scale = np.abs(p[..., 1]).mean() if p.ndim > 1 else p[1]
    step = 1e-4 * scale
    third = np.empty(p.shape + (3, 3))
    for i in range(3):
        dp = np.zeros(3)
        dp[i] = step
        third[..., i, :, :] = (op.rf.hessian(p + dp) - op.rf.hessian(p - dp)) / (2 * step)
    # d2/didj (g.g) = 2 H_ki H_kj + 2 g_k T_kij
    out = np.einsum("...ki,...kj->...ij", H, H) + np.einsum("...k,...ikj->...ij", g, third)
    return 2 * op.ps_scale * out


def total_energy(op: OperatingPoint, p) -> np.ndarray:
    """Secular potential energy: pseudopotential + Q * dc potential (J)."""
    return pseudopotential(op, p) + op.charge * op.dc.potential(p)


def total_gradient(op: OperatingPoint, p) -> np.ndarray:
    return pseudopotential_gradient(op, p) + op.charge * op.dc.gradient(p)


def total_hessian(op: OperatingPoint, p) -> np.ndarray:
    return pseudopotential_hessian(op, p) + op.charge * op.dc.hessian(p)


def _null_height_2d(op: OperatingPoint, y_lo: float, y_hi: float) -> float:
    """Height on x = z = 0 where E_rf,y changes sign (the rf null)."""
    def ey(y):
        return op.rf.gradient(np.array([0.0, y, 0.0]))[1]

    ys = np.geomspace(y_lo, y_hi, 200)
    vals = op.rf.gradient(np.stack([np.zeros_like(ys), ys, np.zeros_like(ys)], -1))[:, 1]
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if not len(idx):
        raise RuntimeError("no rf null found in search range")
    i = idx[0]
    return optimize.brentq(ey, ys[i], ys[i + 1], xtol=1e-15, rtol=1e-13)


def find_rf_null(op: OperatingPoint, box=None) -> np.ndarray:
    """Pseudopotential minimum above the chip, returned as (x, y, z) in metres.

    The search runs along the symmetry line x = z = 0, bracketing the zero of
    the vertical rf field, and is then polished with Newton steps on the full
    3-D gradient of |E_rf|^2.
    """
    extent = max(max(abs(r[0]), abs(r[1])) for e in op.layout.by_role(Role.rf) for r in e.rects)
    y_lo, y_hi = box if box is not None else (1e-3 * extent, 20 * extent)
    p = np.array([0.0, _null_height_2d(op, y_lo, y_hi), 0.0])
    # polish: rf field is linear in displacement near the null, E = H dr
    for _ in range(8):
        g = op.rf.gradient(p)
        H = op.rf.hessian(p)
        dp = np.linalg.lstsq(H, -g, rcond=None)[0]
        p = p + dp
        if np.linalg.norm(dp) < 1e-15:
            break
    if p[1] <= 0 or np.linalg.norm(op.rf.gradient(p)) * p[1] > 1e-6:
        raise RuntimeError("rf null refinement did not converge")
    return p


def trap_depth(op: OperatingPoint, null=None, n_angles: int = 181, n_radii: int = 400) -> float:
    """Pseudopotential escape barrier in joules.

    The barrier is the minimax over straight rays from the null in the x-y
    plane: along each ray take the maximum of the pseudopotential, then take
    the lowest such maximum over all directions.  The best ray is refined by a
    bounded scalar minimisation over angle, which locates the saddle for the
    smooth potentials considered here.
    """
    null = find_rf_null(op) if null is None else np.asarray(null, float)
    h = null[1]
    radii = np.linspace(0.0, 6 * h, n_radii)[1:]

    def ray_max(theta):
        d = np.array([np.cos(theta), np.sin(theta), 0.0])
        pts = null + radii[:, None] * d
        ok = pts[:, 1] > 1e-3 * h
        if not ok.all():
            # paths that reach the chip are bounded by the grounded plane
            pts = pts[ok]
        vals = pseudopotential(op, pts)
        return vals.max()

    thetas = np.linspace(0, np.pi, n_angles)
    maxima = np.array([ray_max(t) for t in thetas])
    i = int(np.argmin(maxima))
    lo, hi = thetas[max(i - 1, 0)], thetas[min(i + 1, n_angles - 1)]
    res = optimize.minimize_scalar(ray_max, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
    return float(min(res.fun, maxima[i]) - pseudopotential(op, null))
