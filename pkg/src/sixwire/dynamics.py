"""Time-dependent ion motion in the radial (x, y) plane.

The ion moves in the full rf + dc fields of the electrode model, not in the
pseudopotential:

    m r'' = Q [E_dc(r) + V_rf E_rf(r) cos(Omega t + phi) + E_drive(r, t)]

Motion is confined to the plane z = 0 through the trap centre.  Integration
uses fixed-step velocity Verlet, compiled, looping over independent ions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numba
import numpy as np

from sixwire import constants as k
from sixwire import fields
from sixwire.basis import find_equilibrium
from sixwire.fields import _INV2PI, Conductors, OperatingPoint

log = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    pass


@dataclass
class Trajectory:
    t: np.ndarray  # (n_t,)
    r: np.ndarray  # (n_t, ..., 2)
    v: np.ndarray  # (n_t, ..., 2)


@dataclass(frozen=True)
class CollisionTrial:
    E0: float
    angle: float
    rf_phase: float
    lost: bool
    t_loss: float | None


@dataclass
class LossCurve:
    E0: np.ndarray
    p_loss: np.ndarray
    stderr: np.ndarray
    n_trials: int
    depth_ref: float

    @property
    def points(self):
        return list(zip(self.E0, self.p_loss, self.stderr))


@numba.njit(cache=True)
def _grad_xy(rects, w, x, y):
    """(d/dx, d/dy) of a weighted rectangle sum at (x, y, 0)."""
    gx = 0.0
    gy = 0.0
    y2 = y * y
    for j in range(rects.shape[0]):
        for c in range(4):
            if c == 0:
                a, b, s = rects[j, 1] - x, rects[j, 3], 1.0
            elif c == 1:
                a, b, s = rects[j, 0] - x, rects[j, 3], -1.0
            elif c == 2:
                a, b, s = rects[j, 1] - x, rects[j, 2], -1.0
            else:
                a, b, s = rects[j, 0] - x, rects[j, 2], 1.0
            a2 = a * a
            b2 = b * b
            R = np.sqrt(a2 + b2 + y2)
            ay = a2 + y2
            ws = w[j] * s
            gx -= ws * y * b / (ay * R)
            gy -= ws * (a * b / R) * (1.0 / (b2 + y2) + 1.0 / ay)
    return gx * _INV2PI, gy * _INV2PI


@numba.njit(cache=True)
def _accel(x, y, t, phase, wd, qm, Rdc, Wdc, Rrf, Wrf, Om, Rdr, Wdr):
    ax = 0.0
    ay = 0.0
    if Rdc.shape[0]:
        gx, gy = _grad_xy(Rdc, Wdc, x, y)
        ax -= gx
        ay -= gy
    if Rrf.shape[0]:
        gx, gy = _grad_xy(Rrf, Wrf, x, y)
        c = np.cos(Om * t + phase)
        ax -= c * gx
        ay -= c * gy
    if Rdr.shape[0]:
        gx, gy = _grad_xy(Rdr, Wdr, x, y)
        c = np.cos(wd * t)
        ax -= c * gx
        ay -= c * gy
    return qm * ax, qm * ay


@numba.njit(cache=True)
def _run(r, v, phase, wd, dt, n_steps, qm, Rdc, Wdc, Rrf, Wrf, Om, Rdr, Wdr,
         center, R2esc, escape, limit, rec_every, tail_start):
    """Kick-drift-kick velocity Verlet for independent ions in the z = 0 plane.

    Returns final (r, v), recorded states, loss times (NaN if kept), the
    summed squared speed over steps after ``tail_start`` and a divergence flag.
    """
    n = r.shape[0]
    n_rec = n_steps // rec_every + 1 if rec_every > 0 else 0
    rec_r = np.zeros((n_rec, n, 2))
    rec_v = np.zeros((n_rec, n, 2))
    t_loss = np.full(n, np.nan)
    v2_sum = np.zeros(n)
    bad = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        x, y, vx, vy = r[i, 0], r[i, 1], v[i, 0], v[i, 1]
        if rec_every > 0:
            rec_r[0, i, 0], rec_r[0, i, 1], rec_v[0, i, 0], rec_v[0, i, 1] = x, y, vx, vy
        ax, ay = _accel(x, y, 0.0, phase[i], wd[i], qm, Rdc, Wdc, Rrf, Wrf, Om, Rdr, Wdr)
        for s in range(1, n_steps + 1):
            vx += 0.5 * dt * ax
            vy += 0.5 * dt * ay
            x += dt * vx
            y += dt * vy
            t = s * dt
            dx = x - center[0]
            dy = y - center[1]
            if escape and (y <= 0.0 or dx * dx + dy * dy > R2esc):
                t_loss[i] = t
                break
            if not (y > 0.0 and abs(dx) < limit and abs(dy) < limit):
                bad[i] = True
                break
            ax, ay = _accel(x, y, t, phase[i], wd[i], qm, Rdc, Wdc, Rrf, Wrf, Om, Rdr, Wdr)
            vx += 0.5 * dt * ax
            vy += 0.5 * dt * ay
            if rec_every > 0 and s % rec_every == 0:
                k = s // rec_every
                rec_r[k, i, 0], rec_r[k, i, 1], rec_v[k, i, 0], rec_v[k, i, 1] = x, y, vx, vy
            if s > tail_start:
                v2_sum[i] += vx * vx + vy * vy
        r[i, 0], r[i, 1], v[i, 0], v[i, 1] = x, y, vx, vy
    return r, v, rec_r, rec_v, t_loss, v2_sum, bad


_EMPTY_R = np.zeros((0, 4))
_EMPTY_W = np.zeros(0)


def _conductor_arrays(cond, scale=1.0):
    if cond is None or not len(cond.volts):
        return _EMPTY_R, _EMPTY_W
    return np.ascontiguousarray(cond.rects), np.ascontiguousarray(scale * cond.volts)


def _integrate(op, r0, v0, phase, dt, n_steps, drive=None, drive_omega=0.0, escape_radius=None,
               center=None, rec_every=0, tail_start=None):
    r = np.array(np.broadcast_to(r0, np.shape(r0)), float).reshape(-1, 2).copy()
    v = np.array(np.broadcast_to(v0, r.shape), float).copy()
    n = len(r)
    phase = np.ascontiguousarray(np.broadcast_to(np.asarray(phase, float), (n,)))
    wd = np.ascontiguousarray(np.broadcast_to(np.asarray(drive_omega, float), (n,)))
    Rdc, Wdc = _conductor_arrays(op.dc)
    Rrf, Wrf = _conductor_arrays(op.rf, op.V_rf) if op.V_rf else (_EMPTY_R, _EMPTY_W)
    Rdr, Wdr = _conductor_arrays(drive)
    null = fields.find_rf_null(op) if center is None else np.asarray(center, float)
    h = null[1]
    esc = escape_radius is not None
    R2 = escape_radius**2 if esc else 0.0
    tail = n_steps + 1 if tail_start is None else int(tail_start)
    return _run(r, v, phase, wd, float(dt), int(n_steps), op.charge / op.mass, Rdc, Wdc, Rrf, Wrf,
                float(op.Omega_rf), Rdr, Wdr, np.ascontiguousarray(null[:2]), R2, esc, 1e3 * h,
                int(rec_every), tail)


def integrate_trajectory(op: OperatingPoint, r0, v0, t_end: float, dt_per_rf_cycle: int = 100,
                         rf_phase=0.0, record_every: int = 1, drive=None, drive_omega=0.0) -> Trajectory:
    """Integrate the planar equations of motion from (r0, v0).

    ``r0`` and ``v0`` are (x, y) pairs, or arrays ``(n, 2)`` for a batch.
    The step is ``2 pi / (Omega_rf * dt_per_rf_cycle)``.  ``drive`` is an
    optional :class:`Conductors` oscillating as ``cos(drive_omega t)``.
    Raises :class:`IntegrationError` if a trajectory reaches the chip plane or
    runs away (beyond 1000 ion heights).
    """
    if dt_per_rf_cycle < 8:
        raise ValueError("dt_per_rf_cycle must resolve the rf period")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    single = np.ndim(r0) == 1
    dt = 2 * np.pi / op.Omega_rf / dt_per_rf_cycle
    n = int(np.ceil(t_end / dt - 1e-9))
    _, _, rr, vv, _, _, bad = _integrate(op, r0, v0, rf_phase, dt, n, drive, drive_omega, rec_every=record_every)
    if bad.any():
        raise IntegrationError(f"{int(bad.sum())} trajectory(ies) diverged or hit the chip plane")
    t = dt * record_every * np.arange(len(rr))
    if single:
        rr, vv = rr[:, 0], vv[:, 0]
    return Trajectory(t, rr, vv)


def planar_energy(op: OperatingPoint, r, v) -> np.ndarray:
    """Kinetic + dc potential energy (J) in the z = 0 plane (rf ignored)."""
    p = np.concatenate([r, np.zeros(r.shape[:-1] + (1,))], -1)
    return 0.5 * op.mass * (v**2).sum(-1) + op.charge * op.dc.potential(p)


def loss_trials(op: OperatingPoint, E0: float, n_trials: int, rng: np.random.Generator,
                t_max: float = 2e-6, n_steps: int = 10_000, escape_radius: float | None = None,
                start=None) -> list[CollisionTrial]:
    """Kick the ion at rest at equilibrium and follow it for ``t_max``.

    A trial counts as lost when the ion reaches the chip plane (y <= 0) or
    moves farther than ``escape_radius`` (default five ion heights) from the
    rf null.
    """
    null = fields.find_rf_null(op)
    eq = find_equilibrium(op, null) if start is None else np.asarray(start, float)
    R = 5 * null[1] if escape_radius is None else escape_radius
    angle = rng.uniform(0, 2 * np.pi, n_trials)
    phase = rng.uniform(0, 2 * np.pi, n_trials)
    speed = np.sqrt(2 * E0 * k.EV / op.mass)
    v = speed * np.stack([np.cos(angle), np.sin(angle)], -1)
    r = np.tile(eq[:2], (n_trials, 1))

    dt = t_max / n_steps
    _, _, _, _, t_loss, _, bad = _integrate(op, r, v, phase, dt, n_steps, escape_radius=R, center=null)
    if bad.any():
        raise IntegrationError("collision trajectory ran away without meeting the escape criterion")
    lost = np.isfinite(t_loss)
    return [CollisionTrial(E0, angle[i], phase[i], bool(lost[i]), float(t_loss[i]) if lost[i] else None)
            for i in range(n_trials)]


def loss_probability(op: OperatingPoint, E0_grid, n_trials: int = 1000, seed: int = 0,
                     t_max: float = 2e-6, n_steps: int = 10_000, escape_radius=None) -> LossCurve:
    """Probability of loss within ``t_max`` after a collision imparting E0 (eV).

    Angles and rf phases are uniform.  Each grid position gets its own RNG
    stream spawned from ``seed``, so a point's result does not depend on the
    other energies in the grid.
    """
    if n_trials < 100:
        raise ValueError("need at least 100 trials per energy")
    E0_grid = np.asarray(E0_grid, float)
    if not len(E0_grid):
        raise ValueError("empty energy grid")
    null = fields.find_rf_null(op)
    eq = find_equilibrium(op, null)
    streams = np.random.SeedSequence(seed).spawn(len(E0_grid))
    p = np.empty(len(E0_grid))
    for i, (E0, ss) in enumerate(zip(E0_grid, streams)):
        trials = loss_trials(op, E0, n_trials, np.random.default_rng(ss), t_max, n_steps, escape_radius, eq)
        p[i] = np.mean([tr.lost for tr in trials])
        log.info("E0 = %.4f eV: p_loss = %.3f", E0, p[i])
    stderr = np.sqrt(p * (1 - p) / n_trials)
    return LossCurve(E0_grid, p, stderr, n_trials, fields.trap_depth(op, null) / k.EV)


@dataclass
class TickleResponse:
    f: np.ndarray
    energy: np.ndarray  # mean kinetic energy over the last part of the drive (J)

    def peaks(self, n: int = 2) -> np.ndarray:
        """Frequencies of the ``n`` largest local maxima, parabola-refined, ascending."""
        e = self.energy
        idx = [i for i in range(1, len(e) - 1) if e[i] >= e[i - 1] and e[i] > e[i + 1]]
        idx = sorted(idx, key=lambda i: e[i], reverse=True)[:n]
        out = []
        df = self.f[1] - self.f[0]
        for i in idx:
            y0, y1, y2 = np.log(e[i - 1:i + 2])
            den = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / den if den else 0.0
            out.append(self.f[i] + shift * df)
        return np.sort(out)


def tickle_scan(op: OperatingPoint, f_grid, drive_mV: float = 1.0, drive_electrode: str = "T",
                duration: float = 60e-6, dt_per_rf_cycle: int = 40) -> TickleResponse:
    """Ion energy after driving ``drive_electrode`` at each frequency in ``f_grid``.

    Every frequency is an independent ion started at rest at equilibrium;
    all are integrated together as one batch.
    """
    f_grid = np.asarray(f_grid, float)
    if not len(f_grid):
        raise ValueError("empty frequency grid")
    eq = find_equilibrium(op)
    drive = Conductors.from_layout(op.layout, {drive_electrode: drive_mV * 1e-3})
    r0 = np.tile(eq[:2], (len(f_grid), 1))
    v0 = np.zeros_like(r0)
    dt = 2 * np.pi / op.Omega_rf / dt_per_rf_cycle
    n = int(np.ceil(duration / dt))
    tail = int(0.2 * n)
    _, _, _, _, _, v2, bad = _integrate(op, r0, v0, 0.0, dt, n, drive if drive_mV else None,
                                        2 * np.pi * f_grid, tail_start=n - tail)
    if bad.any():
        raise IntegrationError("tickle drive ejected the ion; reduce drive_mV or duration")
    return TickleResponse(f_grid, 0.5 * op.mass * v2 / tail)


def heating_to_spectral_density(ndot: float, f_mode: float, op: OperatingPoint | None = None,
                                mass: float = k.M_CA40, charge: float = k.e) -> float:
    """Electric-field noise density S_E (V^2 m^-2 Hz^-1) from a heating rate.

    S_E = 4 m hbar omega ndot / Q^2, with omega = 2 pi f_mode.
    """
    if op is not None:
        mass, charge = op.mass, op.charge
    return 4 * mass * k.hbar * 2 * np.pi * f_mode * ndot / charge**2


def spectral_density_to_heating(S_E: float, f_mode: float, mass: float = k.M_CA40, charge: float = k.e) -> float:
    return S_E * charge**2 / (4 * mass * k.hbar * 2 * np.pi * f_mode)
