"""Quadratic potential bases, voltage synthesis, secular modes and micromotion.

Near the ion every dc electrode's unit potential is expanded as

    Phi_i = ax x^2 + ay y^2 + az z^2 + bx x + by y + bz z + C_i (+ cross terms)

and a desired potential is realised by solving the linear system relating
the coefficients of the driven electrodes to the target coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from sixwire import constants as k
from sixwire import fields
from sixwire.fields import OperatingPoint

log = logging.getLogger(__name__)

DRIVEN = ("V1", "V2", "V3", "V4", "V5", "V6")
_S2 = np.sqrt(0.5)


class SolveError(RuntimeError):
    """Target potential cannot be realised, or a configuration is unstable."""


@dataclass(frozen=True)
class PotentialBasis:
    """Quadratic (V/m^2) and linear (V/m) coefficients of a potential.

    ``cross`` holds the (xy, xz, yz) coefficients in the cardinal frame; they
    are fitted but not part of the target system.
    """

    alpha: tuple
    beta: tuple
    frame: str = "cardinal"
    cross: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.frame not in ("cardinal", "rotated45"):
            raise ValueError(f"unknown frame {self.frame!r}")
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "cross", tuple(float(v) for v in self.cross))

    @property
    def vector(self) -> np.ndarray:
        """(bx, by, bz, ax, ay, az), the row order of the voltage system."""
        return np.array(self.beta + self.alpha)

    def to_frame(self, frame: str) -> "PotentialBasis":
        """Re-express in ``frame``.  x' = (x + y)/sqrt2, y' = (x - y)/sqrt2."""
        if frame == self.frame:
            return self
        ax, ay, az = self.alpha
        bx, by, bz = self.beta
        cxy, cxz, cyz = self.cross
        # the map is an involution, so the same formulas go both ways
        alpha = ((ax + ay + cxy) / 2, (ax + ay - cxy) / 2, az)
        beta = ((bx + by) * _S2, (bx - by) * _S2, bz)
        cross = (ax - ay, (cxz + cyz) * _S2, (cxz - cyz) * _S2)
        return PotentialBasis(alpha, beta, frame, cross)

    def __add__(self, other):
        other = other.to_frame(self.frame)
        return PotentialBasis(np.add(self.alpha, other.alpha), np.add(self.beta, other.beta), self.frame,
                              np.add(self.cross, other.cross))

    def __mul__(self, s):
        return PotentialBasis(np.multiply(self.alpha, s), np.multiply(self.beta, s), self.frame,
                              np.multiply(self.cross, s))

    __rmul__ = __mul__

    def laplacian_residual(self) -> float:
        a = np.asarray(self.to_frame("cardinal").alpha)
        return abs(a.sum()) / max(np.abs(a).max(), 1e-300)


#: the four operating potentials of the trap
TARGETS = {
    # radial terms set to -az/2 so the target itself satisfies Laplace
    "endcap": PotentialBasis((-1.025e6, -1.025e6, 2.05e6), (0, 0, 0)),
    "xcomp": PotentialBasis((0, 0, 0), (1, 0, 0)),
    "ycomp": PotentialBasis((0, 0, 0), (0, 1, 0)),
    "tilt": PotentialBasis((1.0e7, -1.0e7, 0), (0, 0, 0), frame="rotated45"),
}

#: Reduction matrices V = S u for each symmetry class, columns over DRIVEN.
#: tilt and xcomp tie V3 = V5 and V4 = V6 (the outer pairs move together).
SYMMETRY = {
    "endcap": np.array([[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 1], [0, 0, 1]], float),
    "ycomp": np.array([[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 1], [0, 0, 1]], float),
    "xcomp": np.array([[0], [0], [1], [-1], [1], [-1]], float),
    "tilt": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 0, 0, 1]], float),
    "custom": np.eye(6),
}


@dataclass(frozen=True)
class VoltageSet:
    """Voltages on V1..V6 (volts).  ``achieved`` is the recomputed potential."""

    volts: tuple
    label: str = "custom"
    achieved: PotentialBasis | None = field(default=None, compare=False)
    residual: float = field(default=0.0, compare=False)

    def as_dict(self, scale: float = 1.0) -> dict:
        return {n: scale * v for n, v in zip(DRIVEN, self.volts)}

    def __getitem__(self, name):
        return self.volts[DRIVEN.index(name)]


def _sample_grid(center, radius, n):
    s = np.linspace(-radius, radius, n)
    d = np.stack(np.meshgrid(s, s, s, indexing="ij"), -1).reshape(-1, 3)
    return d, center + d


# monomial exponents up to total degree 4; only the quadratic ones are reported
_EXPONENTS = [(i, j, l) for i in range(5) for j in range(5) for l in range(5) if i + j + l <= 4]
_Q = {e: n for n, e in enumerate(_EXPONENTS)}


def _design(d, scale):
    u = d / scale
    return np.stack([u[:, 0] ** i * u[:, 1] ** j * u[:, 2] ** l for i, j, l in _EXPONENTS], -1)


def fit_samples(d, phi) -> PotentialBasis:
    """Least-squares quadratic fit to potential samples at offsets ``d``.

    Cubic and quartic monomials are fitted as nuisance terms so that they do
    not leak into the quadratic coefficients.
    """
    scale = np.abs(d).max()
    A = _design(d, scale)
    coef, _, rank, sv = np.linalg.lstsq(A, phi, rcond=None)
    if rank < A.shape[1] or sv[-1] / sv[0] < 1e-10:
        raise SolveError("ill-conditioned quadratic fit (degenerate sample grid)")

    def c(e):
        return coef[_Q[e]] / scale ** sum(e)

    alpha = (c((2, 0, 0)), c((0, 2, 0)), c((0, 0, 2)))
    beta = (c((1, 0, 0)), c((0, 1, 0)), c((0, 0, 1)))
    cross = (c((1, 1, 0)), c((1, 0, 1)), c((0, 1, 1)))
    return PotentialBasis(alpha, beta, "cardinal", cross)


def fit_quadratic(e, center, radius=None, n: int = 9) -> PotentialBasis:
    """Per-volt quadratic coefficients of electrode ``e`` about ``center``.

    Samples an ``n^3`` cube of half-width ``radius`` (default: a tenth of the
    height of ``center``) and fits the full quadratic including cross terms.
    """
    center = np.asarray(center, float)
    radius = center[1] / 10 if radius is None else radius
    if n < 5:
        raise SolveError("need at least 5 samples per axis")
    d, pts = _sample_grid(center, radius, n)
    phi = fields.unit_potential(e, pts) if not isinstance(e, fields.Conductors) else e.potential(pts)
    return fit_samples(d, phi)


def electrode_bases(layout, center, radius=None, names=DRIVEN) -> dict:
    return {n: fit_quadratic(layout[n], center, radius) for n in names}


def solve_voltages(target: PotentialBasis, bases, symmetry_class: str = "custom",
                   length_scale: float = 150e-6, tol: float = 1e-3) -> VoltageSet:
    """Minimum-norm voltages on V1..V6 realising ``target``.

    ``bases`` maps V1..V6 to per-volt :class:`PotentialBasis` (or is a list in
    that order).  The voltages are first collapsed to the free parameters of
    ``symmetry_class``.  Rows are made commensurate by expressing each
    coefficient as the potential change over ``length_scale``.
    """
    if isinstance(bases, dict):
        bases = [bases[n] for n in DRIVEN]
    if len(bases) != 6:
        raise ValueError("need six electrode bases")
    S = SYMMETRY[symmetry_class]
    frame = target.frame
    A = np.stack([b.to_frame(frame).vector for b in bases], axis=1)
    w = np.array([length_scale] * 3 + [length_scale**2] * 3)
    t = target.vector
    M = (w[:, None] * A) @ S
    u = np.linalg.pinv(M, rcond=1e-10) @ (w * t)
    V = S @ u
    achieved_vec = A @ V
    achieved = PotentialBasis(achieved_vec[3:], achieved_vec[:3], frame)
    err = np.abs(w * (achieved_vec - t))
    ref = max(np.abs(w * t).max(), 1e-300)
    residual = float(err.max() / ref)
    if residual > tol:
        raise SolveError(f"{symmetry_class} target unreachable: relative residual {residual:.3g}")
    return VoltageSet(tuple(V), symmetry_class if symmetry_class in TARGETS else "custom", achieved, residual)


def solve_all_bases(layout, center=None, radius=None) -> dict:
    """The four operating voltage sets, keyed by label."""
    if center is None:
        center = fields.find_rf_null(OperatingPoint(layout))
    bases = electrode_bases(layout, center, radius)
    return {lab: solve_voltages(t, bases, lab, length_scale=center[1]) for lab, t in TARGETS.items()}


# ---------------------------------------------------------------- secular modes


@dataclass(frozen=True)
class ModeAnalysis:
    f_axial: float
    f_radial: tuple
    tilt_angle_deg: float
    q: float
    mode_axes: np.ndarray
    frequencies: np.ndarray
    position: np.ndarray
    f_rf_radial: float
    stable: bool = True


def dc_voltages(bases: dict, endcap: float = 1.0, tilt: float = 0.0, xcomp: float = 0.0,
                ycomp: float = 0.0) -> dict:
    """Electrode voltages for a linear combination of the operating bases.

    ``xcomp``/``ycomp`` are the compensation fields in V/m.
    """
    out = dict.fromkeys(DRIVEN, 0.0)
    for lab, s in (("endcap", endcap), ("tilt", tilt), ("xcomp", xcomp), ("ycomp", ycomp)):
        if s:
            for n, v in bases[lab].as_dict(s).items():
                out[n] += v
    return out


def find_equilibrium(op: OperatingPoint, start=None, maxiter: int = 50) -> np.ndarray:
    """Minimum of pseudopotential + dc energy, Newton iteration from ``start``."""
    p = fields.find_rf_null(op) if start is None else np.asarray(start, float)
    h = p[1]
    for _ in range(maxiter):
        g = fields.total_gradient(op, p)
        H = fields.total_hessian(op, p)
        try:
            dp = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            raise SolveError("singular Hessian while locating equilibrium") from None
        if np.linalg.norm(dp) > 0.2 * h:
            dp *= 0.2 * h / np.linalg.norm(dp)
        p = p + dp
        if np.linalg.norm(dp) < 1e-13 * h:
            break
    return p


def analyze_modes(op: OperatingPoint, position=None) -> ModeAnalysis:
    """Secular frequencies and mode axes of a single ion.

    Frequencies are ``sqrt(lambda/m)/2pi`` for eigenvalues ``lambda`` of the
    energy Hessian at equilibrium.  ``q`` uses the rf-only radial frequency.
    Unstable configurations are returned with ``stable=False``.
    """
    null = fields.find_rf_null(op)
    p = find_equilibrium(op, null) if position is None else np.asarray(position, float)
    H = fields.total_hessian(op, p)
    lam, vec = np.linalg.eigh(H)
    stable = bool(lam.min() > 0)
    if not stable:
        log.warning("unstable configuration: Hessian eigenvalues %s", lam)
    freqs = np.sign(lam) * np.sqrt(np.abs(lam) / op.mass) / (2 * np.pi)

    i_ax = int(np.argmax(np.abs(vec[2, :])))
    radial = [i for i in range(3) if i != i_ax]
    f_low, f_high = sorted(freqs[radial])
    # the initially vertical mode is the radial mode with the larger y component
    vr = vec[:2, radial]
    j = int(np.argmax(np.abs(vr[1])))
    v = vr[:, j]
    theta = np.degrees(np.arctan2(abs(v[0]), abs(v[1])))

    Hrf = fields.pseudopotential_hessian(op, null)[:2, :2]
    lam_rf = np.linalg.eigvalsh(Hrf)
    w_r0 = np.mean(np.sqrt(np.clip(lam_rf, 0, None) / op.mass))
    q = 2 * np.sqrt(2) * w_r0 / op.Omega_rf
    return ModeAnalysis(
        f_axial=float(freqs[i_ax]),
        f_radial=(float(f_low), float(f_high)),
        tilt_angle_deg=float(theta),
        q=float(q),
        mode_axes=vec.T.copy(),
        frequencies=freqs,
        position=p,
        f_rf_radial=float(w_r0 / (2 * np.pi)),
        stable=stable,
    )


def axial_frequency(alpha_z: float, mass: float = k.M_CA40, charge: float = k.e) -> float:
    """Secular frequency (Hz) of a pure quadratic well alpha_z z^2 (V/m^2)."""
    return np.sqrt(2 * charge * alpha_z / mass) / (2 * np.pi)


def infer_rf_amplitude(measured_f_radial: float, op: OperatingPoint, position_bases: dict | None = None) -> float:
    """rf amplitude (V) at which the model's mean radial frequency matches.

    The dc voltages of ``op`` are kept fixed; the mean of the two radial
    secular frequencies is matched to ``measured_f_radial`` (Hz).
    """
    def mean_f(v):
        return np.mean(analyze_modes(op.replace(V_rf=v)).f_radial)

    # mean frequency is close to linear in V_rf; bracket around that guess
    f1 = mean_f(op.V_rf)
    if f1 <= 0:
        raise SolveError("reference operating point has no radial confinement")
    guess = op.V_rf * measured_f_radial / f1
    lo, hi = 0.5 * guess, 1.5 * guess
    return optimize.brentq(lambda v: mean_f(v) - measured_f_radial, lo, hi, xtol=1e-9, rtol=1e-12)


# ---------------------------------------------------------------- micromotion


@dataclass(frozen=True)
class MicromotionResult:
    x_d: float
    x_mu: float
    v0: float


def micromotion(op: OperatingPoint, E_dc: float, omega_r: float) -> MicromotionResult:
    """Displacement, excess-micromotion amplitude and peak velocity for a stray field."""
    if not omega_r > 0:
        raise ValueError("omega_r must be positive")
    x_d = op.charge * E_dc / (op.mass * omega_r**2)
    x_mu = np.sqrt(2) * omega_r / op.Omega_rf * x_d
    return MicromotionResult(x_d, x_mu, x_mu * op.Omega_rf)


def tilt_table(op_base: OperatingPoint, bases: dict, factors=(0, 0.125, 0.25, 0.5, 1, 2)) -> list:
    """(tilt factor, f_low, f_high, theta) rows with endcap voltages applied."""
    rows = []
    for t in factors:
        op = op_base.replace(dc_voltages=dc_voltages(bases, endcap=1.0, tilt=t))
        m = analyze_modes(op)
        rows.append((t, m.f_radial[0], m.f_radial[1], m.tilt_angle_deg))
    return rows

