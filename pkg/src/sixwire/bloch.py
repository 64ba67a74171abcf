"""Eight-level S1/2 - P1/2 - D3/2 optical Bloch model with rf-periodic Doppler shifts.

Levels (index: state):

    0: S1/2 m=-1/2   1: S1/2 m=+1/2
    2: P1/2 m=-1/2   3: P1/2 m=+1/2
    4: D3/2 m=-3/2   5: D3/2 m=-1/2   6: D3/2 m=+1/2   7: D3/2 m=+3/2

The density matrix is vectorised row-major (``rho.reshape(64)``), so a map
``rho -> A rho B`` becomes ``kron(A, B.T)``.  Frequencies are angular inside
the model; the public parameters take detunings and linewidths in Hz.

Micromotion at velocity amplitude ``v0`` along the repumper makes its detuning
oscillate as ``Delta_r + k_r v0 cos(Omega t)``, so

    d rho / dt = (M0 + dM cos(Omega t)) rho,     dM = k_r v0 dM_r,

whose periodic steady state is ``rho(t) = sum_n rho_n exp(-i n Omega t)``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg, optimize

from sixwire import constants as k

log = logging.getLogger(__name__)

N_LEVELS = 8
S = (0, 1)
P = (2, 3)
D = (4, 5, 6, 7)
_M = np.array([-0.5, 0.5, -0.5, 0.5, -1.5, -0.5, 0.5, 1.5])
_G = np.array([k.G_S] * 2 + [k.G_P] * 2 + [k.G_D] * 4)

#: Rabi frequency of a laser at intensity I:  Omega^2 = RABI_SCALE * Gamma^2 * I / I_s.
#: A closed transition of decay rate Gamma has Omega^2 = 6 Gamma Gamma' I / I_s when
#: I_s = 4 pi h c Gamma' / lambda^3; taking Gamma' as the linewidth in Hz,
#: Gamma / 2 pi, gives 3 / pi.
RABI_SCALE = 3 / np.pi


class BlochError(RuntimeError):
    """Singular steady-state problem or nonphysical parameters."""


def _cg(j1: float, m1: float, q: int, J: float, M: float) -> float:
    """Clebsch-Gordan <j1 m1; 1 q | J M> for J = j1 or J = j1 - 1."""
    if m1 + q != M:
        return 0.0
    m = M
    if J == j1:
        den = j1 * (j1 + 1)
        if q == 1:
            return -np.sqrt((j1 + m) * (j1 - m + 1) / (2 * den))
        if q == 0:
            return m / np.sqrt(den)
        return np.sqrt((j1 - m) * (j1 + m + 1) / (2 * den))
    if J == j1 - 1:
        if q == 1:
            return np.sqrt((j1 - m) * (j1 - m + 1) / (2 * j1 * (2 * j1 + 1)))
        if q == 0:
            return -np.sqrt((j1 - m) * (j1 + m) / (j1 * (2 * j1 + 1)))
        return np.sqrt((j1 + m + 1) * (j1 + m) / (2 * j1 * (2 * j1 + 1)))
    raise ValueError("unsupported angular momenta")


def _dipole(lower, j_lower):
    """Signed coupling tables c[q][(g, e)] between ``lower`` levels and P1/2."""
    out = {q: {} for q in (-1, 0, 1)}
    for g in lower:
        for e in P:
            q = int(round(_M[e] - _M[g]))
            if abs(q) <= 1:
                c = _cg(j_lower, _M[g], q, 0.5, _M[e])
                if c:
                    out[q][(g, e)] = c
    return out


_DIP_S = _dipole(S, 0.5)
_DIP_D = _dipole(D, 1.5)


def saturation_intensity(wavelength: float, gamma: float = k.GAMMA_P) -> float:
    """I_s = 4 pi h c Gamma / lambda^3 (W m^-2), with Gamma in s^-1."""
    return 4 * np.pi * k.h * k.c * gamma / wavelength**3


@dataclass(frozen=True)
class LaserParams:
    """Cooling (397 nm) and repumper (866 nm) settings.

    Intensities are in units of the saturation intensity; detunings and
    linewidths in Hz; ``B_field`` in gauss.  ``pol_c`` and ``pol_r`` are
    (sigma-, pi, sigma+) intensity weights, normalised on use.
    """

    I_c: float = 1.5
    Delta_c: float = -14e6
    I_r: float = 95.0
    Delta_r: float = -28.7e6
    linewidth: float = 500e3
    pol_c: tuple = (0.5, 0.0, 0.5)
    pol_r: tuple = (0.5, 0.0, 0.5)
    B_field: float = 1.7
    gamma: float = k.GAMMA_P
    branch_pd: float = k.BRANCH_PD
    linewidth_r: float | None = None
    rabi_scale: float = RABI_SCALE

    def __post_init__(self):
        if self.I_c < 0 or self.I_r < 0:
            raise ValueError("laser intensities must be non-negative")
        if self.linewidth < 0 or (self.linewidth_r is not None and self.linewidth_r < 0):
            raise ValueError("laser linewidth must be non-negative")
        for pol in (self.pol_c, self.pol_r):
            if len(pol) != 3 or min(pol) < 0 or sum(pol) <= 0:
                raise ValueError("polarization weights must be three non-negative numbers")
        if self.rabi_scale <= 0:
            raise ValueError("rabi_scale must be positive")
        if not 0 <= self.branch_pd < 1:
            raise ValueError("branching ratio must lie in [0, 1)")

    def replace(self, **kw) -> "LaserParams":
        return replace(self, **kw)


def _super_commutator(H):
    eye = np.eye(len(H))
    return -1j * (np.kron(H, eye) - np.kron(eye, H.T))


def _dissipator(L):
    eye = np.eye(len(L))
    LdL = L.conj().T @ L
    return np.kron(L, L.conj()) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T)


def _projector(levels):
    p = np.zeros((N_LEVELS, N_LEVELS))
    p[levels, levels] = 1.0
    return p


def _hamiltonian(lp: LaserParams) -> np.ndarray:
    tw = 2 * np.pi
    zeeman = k.mu_B * lp.B_field * 1e-4 / k.hbar * _G * _M
    E = zeeman.astype(complex)
    E[list(P)] += -tw * lp.Delta_c
    E[list(D)] += -tw * lp.Delta_c + tw * lp.Delta_r
    H = np.diag(E)
    for I, pol, dip in ((lp.I_c, lp.pol_c, _DIP_S), (lp.I_r, lp.pol_r, _DIP_D)):
        w = np.asarray(pol, float) / sum(pol)
        omega = lp.gamma * np.sqrt(lp.rabi_scale * I)
        for q, wq in zip((-1, 0, 1), w):
            for (g, e), c in dip[q].items():
                H[e, g] += 0.5 * omega * np.sqrt(wq) * c
                H[g, e] += 0.5 * omega * np.sqrt(wq) * c
    return H


def _jump_operators(lp: LaserParams) -> list:
    ops = []
    for dip, rate in ((_DIP_S, lp.gamma * (1 - lp.branch_pd)), (_DIP_D, lp.gamma * lp.branch_pd)):
        for q in (-1, 0, 1):
            L = np.zeros((N_LEVELS, N_LEVELS))
            for (g, e), c in dip[q].items():
                L[g, e] = c
            if L.any():
                ops.append(np.sqrt(rate) * L)
    # laser phase noise: the cooling phase rides on P and D, the repumper on D
    lw_r = lp.linewidth if lp.linewidth_r is None else lp.linewidth_r
    if lp.linewidth:
        ops.append(np.sqrt(2 * np.pi * lp.linewidth) * _projector(list(P + D)))
    if lw_r:
        ops.append(np.sqrt(2 * np.pi * lw_r) * _projector(list(D)))
    return ops


def liouvillian(lp: LaserParams) -> np.ndarray:
    """64 x 64 generator of the unmodulated Bloch equations."""
    M = _super_commutator(_hamiltonian(lp))
    for L in _jump_operators(lp):
        M = M + _dissipator(L)
    return M


def repumper_derivative() -> np.ndarray:
    """d M0 / d Delta_r with Delta_r in rad/s (exact: M0 is linear in Delta_r)."""
    return _super_commutator(_projector(list(D)).astype(complex))


@dataclass
class ModulationModel:
    """Generator, its repumper-detuning derivative and the modulation settings."""

    M0: np.ndarray
    dM_r: np.ndarray
    Omega: float = k.OMEGA_RF
    v0: float = 0.0
    lambda_r: float = k.LAMBDA_866
    gamma: float = k.GAMMA_P
    params: LaserParams | None = None

    @property
    def deltaM(self) -> np.ndarray:
        return 2 * np.pi * self.v0 / self.lambda_r * self.dM_r

    @property
    def modulation_index(self) -> float:
        """k_r v0 / Omega."""
        return 2 * np.pi * abs(self.v0) / self.lambda_r / self.Omega

    def with_velocity(self, v0: float) -> "ModulationModel":
        return replace(self, v0=float(v0))


def build_liouvillian(lp: LaserParams, v0: float = 0.0, Omega: float = k.OMEGA_RF,
                      lambda_r: float = k.LAMBDA_866) -> ModulationModel:
    return ModulationModel(liouvillian(lp), repumper_derivative(), Omega, v0, lambda_r, lp.gamma, lp)


_TRACE = np.eye(N_LEVELS).reshape(-1)
_P_POP = np.zeros(N_LEVELS * N_LEVELS)
for _i in P:
    _P_POP[_i * N_LEVELS + _i] = 1.0


def _null_vector(A: np.ndarray) -> np.ndarray:
    """Solve A x = 0 with trace(x) = 1 by replacing one row with the trace row."""
    B = A.copy()
    b = np.zeros(len(A), complex)
    B[0] = _TRACE
    b[0] = 1.0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", linalg.LinAlgWarning)
            lu = linalg.lu_factor(B, check_finite=False)
    except (linalg.LinAlgError, linalg.LinAlgWarning, ValueError) as err:
        raise BlochError(f"steady-state system is singular: {err}") from err
    x = linalg.lu_solve(lu, b, check_finite=False)
    if not np.isfinite(x).all():
        raise BlochError("steady-state system is singular")
    return x


def steady_state(M0: np.ndarray) -> np.ndarray:
    """Unmodulated steady state as an 8 x 8 density matrix."""
    return _hermitize(_null_vector(M0).reshape(N_LEVELS, N_LEVELS))


def _hermitize(r):
    return 0.5 * (r + r.conj().T)


@dataclass
class ModulatedSteadyState:
    rho0: np.ndarray
    rho_plus1: np.ndarray
    rho_minus1: np.ndarray
    F0: float
    F1: complex
    harmonics: dict = field(default_factory=dict, repr=False)
    herm_defect: float = 0.0  # max |rho0 - rho0^dagger| before symmetrisation

    @property
    def mod_rel(self) -> float:
        """Relative fluorescence modulation 2|F1| / F0."""
        return 2 * abs(self.F1) / self.F0 if self.F0 > 0 else 0.0

    @property
    def phase(self) -> float:
        """Phase of the modulation: F(t) = F0 + 2|F1| cos(Omega t - phase)."""
        return float(np.angle(self.F1))

    @property
    def p_population(self) -> float:
        return float(np.real(np.trace(self.rho0[2:4, 2:4])))


def solve_modulated(model: ModulationModel, n_max: int = 1) -> ModulatedSteadyState:
    """Periodic steady state truncated at harmonic ``n_max``.

    Harmonics obey ``(M0 + i n Omega) rho_n = -dM (rho_{n-1} + rho_{n+1}) / 2``.
    They are eliminated from the outside in with ``rho_n = S_n rho_{n-1}``
    (and the mirror relation for negative n); ``rho0`` then solves
    ``(M0 + dM (S_1 + S_-1) / 2) rho0 = 0`` with unit trace.  For ``n_max = 1``
    this is the closed form ``rho_{+-1} = -(M0 +- i Omega)^-1 dM rho0 / 2``.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    beta = model.modulation_index
    if beta >= 1:
        warnings.warn(f"modulation index k_r v0 / Omega = {beta:.2f} >= 1; "
                      "sideband expansion is not reliable", RuntimeWarning, stacklevel=2)
    M0, Om = model.M0, model.Omega
    n = len(M0)
    if model.v0 == 0:
        rho0 = steady_state(M0)
        z = np.zeros_like(rho0)
        F0 = model.gamma * rho0[2:4, 2:4].trace().real
        return ModulatedSteadyState(rho0, z, z.copy(), F0, 0j, {0: rho0})
    half = 0.5 * model.deltaM
    eye = np.eye(n)
    S = {}
    for sign in (1, -1):
        nxt = np.zeros((n, n), complex)
        for m in range(n_max, 0, -1):
            A = M0 + sign * 1j * m * Om * eye + half @ nxt
            try:
                nxt = -np.linalg.solve(A, half)
            except np.linalg.LinAlgError as err:
                raise BlochError(f"harmonic {sign * m} block is singular") from err
            S[sign * m] = nxt
    vec0 = _null_vector(M0 + half @ (S[1] + S[-1]))
    vecs = {0: vec0}
    for sign in (1, -1):
        prev = vec0
        for m in range(1, n_max + 1):
            prev = S[sign * m] @ prev
            vecs[sign * m] = prev
    mats = {m: v.reshape(N_LEVELS, N_LEVELS) for m, v in vecs.items()}
    defect = float(np.abs(mats[0] - mats[0].conj().T).max())
    mats[0] = _hermitize(mats[0])
    F0 = model.gamma * mats[0][2:4, 2:4].trace().real
    F1 = model.gamma * mats[1][2:4, 2:4].trace()
    return ModulatedSteadyState(mats[0], mats[1], mats[-1], F0, F1, mats, defect)


def sideband_closed_form(model: ModulationModel) -> ModulatedSteadyState:
    """First-order solution written out explicitly (used as a cross-check)."""
    M0, dM, Om = model.M0, model.deltaM, model.Omega
    eye = np.eye(len(M0))
    eff = M0 - 0.5 * dM @ M0 @ np.linalg.solve(M0 @ M0 + Om**2 * eye, dM)
    rho0 = _null_vector(eff)
    rp = -0.5 * np.linalg.solve(M0 + 1j * Om * eye, dM @ rho0)
    rm = -0.5 * np.linalg.solve(M0 - 1j * Om * eye, dM @ rho0)
    r0 = _hermitize(rho0.reshape(N_LEVELS, N_LEVELS))
    rp, rm = rp.reshape(N_LEVELS, N_LEVELS), rm.reshape(N_LEVELS, N_LEVELS)
    F0 = model.gamma * r0[2:4, 2:4].trace().real
    F1 = model.gamma * rp[2:4, 2:4].trace()
    return ModulatedSteadyState(r0, rp, rm, F0, F1, {0: r0, 1: rp, -1: rm})


# --------------------------------------------------------------------------
# scans


def repumper_scan(lp: LaserParams, Delta_r_grid) -> np.ndarray:
    """Mean fluorescence (photons/s) versus repumper detuning at v0 = 0."""
    grid = np.asarray(Delta_r_grid, float)
    if not grid.size:
        raise ValueError("empty detuning grid")
    M_base = liouvillian(lp.replace(Delta_r=0.0))
    dM = repumper_derivative()
    out = np.empty(grid.shape)
    for i, d in np.ndenumerate(grid):
        x = _null_vector(M_base + 2 * np.pi * d * dM)
        out[i] = lp.gamma * (_P_POP @ x).real
    return out


def micromotion_velocity(E_dc: float, omega_r: float, mass: float = k.M_CA40, charge: float = k.e,
                         projection: float = 1.0) -> float:
    """Peak micromotion velocity x_mu Omega_rf = sqrt2 Q E / (m omega_r), times ``projection``."""
    if omega_r <= 0:
        raise ValueError("omega_r must be positive")
    return projection * np.sqrt(2) * charge * E_dc / (mass * omega_r)


@dataclass(frozen=True)
class Sensitivity:
    per_field: float  # relative modulation per V/m (fraction, not percent)
    phase: float  # rad
    v0_per_field: float  # m/s per V/m

    @property
    def percent(self) -> float:
        return 100 * self.per_field


def sensitivity(lp: LaserParams, op=None, omega_r: float | None = None, E_dc: float = 1.0,
                Omega: float | None = None, projection: float = 1.0, n_max: int = 1) -> Sensitivity:
    """Relative fluorescence modulation per V/m of uncompensated field.

    The field displaces the ion by ``Q E / (m omega_r^2)``; the resulting
    micromotion has peak velocity ``sqrt2 Q E / (m omega_r)`` along the
    repumper (times ``projection``).  ``op`` supplies mass, charge and drive
    frequency; ``omega_r`` is the secular frequency of the mode along the
    field.  The slope is evaluated at ``E_dc`` (default 1 V/m, deep in the
    linear regime).
    """
    mass, charge = (op.mass, op.charge) if op is not None else (k.M_CA40, k.e)
    if Omega is None:
        Omega = op.Omega_rf if op is not None else k.OMEGA_RF
    if omega_r is None:
        raise ValueError("omega_r is required")
    if E_dc == 0:
        return Sensitivity(0.0, 0.0, micromotion_velocity(1.0, omega_r, mass, charge, projection))
    v_per = micromotion_velocity(1.0, omega_r, mass, charge, projection)
    model = build_liouvillian(lp, v0=v_per * E_dc, Omega=Omega)
    st = solve_modulated(model, n_max)
    return Sensitivity(st.mod_rel / abs(E_dc), st.phase, v_per)


#: repumper search window relative to the cooling detuning (Hz); the blue side
#: Delta_r > Delta_c heats the ion and is excluded by default
RED_SPAN = (-40e6, 0.0)


class _FastModel:
    """Reuses the detuning-independent part of M0 for scans over Delta_r."""

    def __init__(self, lp: LaserParams, v0: float, Omega: float, lambda_r: float = k.LAMBDA_866):
        self.lp = lp
        self.M_base = liouvillian(lp.replace(Delta_r=0.0))
        self.dM = repumper_derivative()
        self.v0, self.Omega, self.lambda_r = v0, Omega, lambda_r

    def state(self, Delta_r: float, n_max: int = 1) -> ModulatedSteadyState:
        M0 = self.M_base + 2 * np.pi * Delta_r * self.dM
        return solve_modulated(ModulationModel(M0, self.dM, self.Omega, self.v0, self.lambda_r, self.lp.gamma),
                               n_max)


def sensitivity_scan(lp: LaserParams, Delta_r_grid, omega_r: float, Omega: float = k.OMEGA_RF,
                     E_dc: float = 1.0, mass: float = k.M_CA40, charge: float = k.e):
    """(F0, sensitivity per V/m, phase) arrays over a repumper detuning grid."""
    v_per = micromotion_velocity(1.0, omega_r, mass, charge)
    fm = _FastModel(lp, v_per * E_dc, Omega)
    grid = np.asarray(Delta_r_grid, float)
    F0, sens, ph = (np.empty(grid.shape) for _ in range(3))
    for i, d in np.ndenumerate(grid):
        st = fm.state(d)
        F0[i], sens[i], ph[i] = st.F0, st.mod_rel / E_dc, st.phase
    return F0, sens, ph


@dataclass
class SensitivityMap:
    Delta_c: np.ndarray  # Hz
    I_r: np.ndarray  # units of I_s
    sens: np.ndarray  # (n_c, n_r) relative modulation per V/m
    Delta_r_opt: np.ndarray  # Hz
    phase: np.ndarray  # rad

    def rows(self):
        for i, dc in enumerate(self.Delta_c):
            for j, ir in enumerate(self.I_r):
                yield dc, ir, self.sens[i, j], self.Delta_r_opt[i, j], self.phase[i, j]


def optimize_repumper(lp: LaserParams, omega_r: float, Omega: float = k.OMEGA_RF,
                      span=RED_SPAN, n_coarse: int = 41) -> tuple:
    """Repumper detuning (Hz, absolute) maximising sensitivity; returns (Delta_r, sens, phase).

    ``span`` is relative to the cooling detuning.  A coarse grid locates the
    best bracket, then a bounded scalar search refines it.
    """
    v_per = micromotion_velocity(1.0, omega_r)
    fm = _FastModel(lp, v_per, Omega)
    grid = lp.Delta_c + np.linspace(span[0], span[1], n_coarse)
    vals = np.array([fm.state(d).mod_rel for d in grid])
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda d: -fm.state(d).mod_rel, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e3})
        if -res.fun > vals[i]:
            st = fm.state(res.x)
            return float(res.x), st.mod_rel, st.phase
    st = fm.state(grid[i])
    return float(grid[i]), st.mod_rel, st.phase


def sensitivity_map(lp_base: LaserParams, Delta_c_grid, I_r_grid, omega_r: float,
                    Omega: float = k.OMEGA_RF, span=RED_SPAN, n_coarse: int = 41) -> SensitivityMap:
    """Peak sensitivity over (Delta_c, I_r) with the repumper detuning optimised at each point."""
    dcs = np.asarray(Delta_c_grid, float)
    irs = np.asarray(I_r_grid, float)
    if not dcs.size or not irs.size:
        raise ValueError("empty grid")
    sens = np.zeros((len(dcs), len(irs)))
    dopt = np.zeros_like(sens)
    ph = np.zeros_like(sens)
    for i, dc in enumerate(dcs):
        for j, ir in enumerate(irs):
            lp = lp_base.replace(Delta_c=dc, I_r=ir)
            if ir == 0:
                dopt[i, j], sens[i, j], ph[i, j] = np.nan, 0.0, np.nan
                continue
            dopt[i, j], sens[i, j], ph[i, j] = optimize_repumper(lp, omega_r, Omega, span, n_coarse)
        log.info("Delta_c = %.1f MHz done", dc / 1e6)
    return SensitivityMap(dcs, irs, sens, dopt, ph)


# --------------------------------------------------------------------------
# two-level lineshape


def lineshape(s, Delta, Gamma):
    """Excited-state population (s/2) / (1 + s + (2 Delta / Gamma)^2)."""
    s = np.asarray(s, float)
    return 0.5 * s / (1 + s + (2 * np.asarray(Delta, float) / Gamma) ** 2)


@dataclass(frozen=True)
class LineshapeFit:
    s: float
    Gamma: float  # Hz
    background: float
    stderr: tuple  # (s, Gamma, background)
    residual_rms: float


def fit_lineshape(Delta, signal, amplitude: float = 1.0, fit_background: bool = True,
                  p0=None, sigma=None) -> LineshapeFit:
    """Fit ``signal = amplitude * lineshape(s, Delta, Gamma) + background``.

    ``Delta`` in Hz.  The scale ``amplitude`` (signal per unit excited-state
    population) must be known: with it free, only ``amplitude s / (1 + s)``
    and ``Gamma sqrt(1 + s)`` are identifiable and ``s`` cannot be recovered.
    """
    Delta = np.asarray(Delta, float)
    y = np.asarray(signal, float) / amplitude
    if Delta.shape != y.shape or Delta.size < 5:
        raise ValueError("need at least five (Delta, signal) pairs of equal length")
    if sigma is not None:
        sigma = np.asarray(sigma, float) / abs(amplitude)

    if p0 is None:
        b0 = y.min() if fit_background else 0.0
        peak = min(max(y.max() - b0, 1e-6), 0.49)
        s0 = 2 * peak / (1 - 2 * peak)
        half = y > b0 + 0.5 * (y.max() - b0)
        fwhm = np.ptp(Delta[half]) if half.sum() > 1 else np.ptp(Delta) / 4
        p0 = (s0, fwhm / np.sqrt(1 + s0), b0)
    p0 = tuple(p0)[:3 if fit_background else 2]
    lo, hi = [1e-6, 1.0], [1e4, np.inf]
    if fit_background:
        lo.append(-np.inf)
        hi.append(np.inf)

    def model(d, s, G, b=0.0):
        return lineshape(s, d, G) + b

    try:
        popt, pcov = optimize.curve_fit(model, Delta, y, p0=p0, sigma=sigma, bounds=(lo, hi), maxfev=20000)
    except (RuntimeError, ValueError) as err:
        raise BlochError(f"lineshape fit failed: {err}") from err
    res = (y - model(Delta, *popt)) * amplitude
    err = np.sqrt(np.diag(pcov)) if np.isfinite(pcov).all() else np.full(len(popt), np.nan)
    if not fit_background:
        popt, err = np.append(popt, 0.0), np.append(err, 0.0)
    err = err * np.array([1.0, 1.0, abs(amplitude)])
    return LineshapeFit(float(popt[0]), float(popt[1]), float(popt[2] * amplitude), tuple(map(float, err)),
                        float(np.sqrt(np.mean(res**2))))
