"""Command-line front end.

Every subcommand writes CSV (to ``--out`` or stdout) with unit-suffixed
headers.  Grids are given either as comma lists (``1,2,3``) or as
``start:stop:n`` linear ranges.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numba
import numpy as np

from sixwire import basis, bloch, dynamics, fields
from sixwire import constants as k
from sixwire.geometry import LayoutError, default_layout, load_layout

log = logging.getLogger("sixwire")

TILT_FACTORS = (0, 0.125, 0.25, 0.5, 1, 2)


class UsageError(ValueError):
    pass


def parse_grid(text: str) -> np.ndarray:
    try:
        return _parse_grid(text)
    except ValueError as err:
        if isinstance(err, UsageError):
            raise
        raise UsageError(f"bad grid {text!r}: {err}") from err


def _parse_grid(text: str) -> np.ndarray:
    text = text.strip()
    if not text:
        raise UsageError("empty grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range grid must be start:stop:n, got {text!r}")
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise UsageError("grid must have at least one point")
        return np.linspace(start, stop, n)
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise UsageError("empty grid")
    return np.array(vals)


def _fmt(v):
    if isinstance(v, str):
        return v
    return f"{v + 0.0:.10g}"


def _write(args, header, rows):
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    finally:
        if args.out:
            fh.close()


def _layout(args):
    return load_layout(args.layout) if args.layout else default_layout()


def _operating_point(args, dc=None):
    return fields.OperatingPoint(_layout(args), V_rf=args.vrf, Omega_rf=2 * np.pi * args.frf * 1e6,
                                 dc_voltages=dc or {})


def _bases_for(args):
    op = _operating_point(args)
    return op, basis.solve_all_bases(op.layout, fields.find_rf_null(op))


def _dc_op(args, op, sets):
    return op.replace(dc_voltages=basis.dc_voltages(sets, args.endcap, args.tilt, args.xcomp, args.ycomp))


# ---------------------------------------------------------------- commands


def cmd_bases(args):
    _, sets = _bases_for(args)
    rows = []
    for lab in ("endcap", "tilt", "xcomp", "ycomp"):
        vs = sets[lab]
        rows.append([lab, *(1e3 * v for v in vs.volts), vs.residual])
    _write(args, ["basis", *(f"{n}_mV" for n in basis.DRIVEN), "residual_rel"], rows)


def cmd_modes(args):
    op, sets = _bases_for(args)
    factors = parse_grid(args.tilt_factors)
    op0 = op.replace(dc_voltages=basis.dc_voltages(sets, args.endcap, 0.0))
    if args.fit_frequency:
        vrf = basis.infer_rf_amplitude(args.fit_frequency * 1e6, op0)
        log.info("fitted rf amplitude %.3f V", vrf)
        op = op.replace(V_rf=vrf)
    rows = []
    for t in factors:
        m = basis.analyze_modes(op.replace(dc_voltages=basis.dc_voltages(sets, args.endcap, t)))
        if not m.stable:
            raise basis.SolveError(f"tilt factor {t}: configuration is unstable")
        rows.append([t, m.f_radial[0] / 1e6, m.f_radial[1] / 1e6, m.tilt_angle_deg, m.f_axial / 1e6, m.q, op.V_rf])
    _write(args, ["tilt_factor", "f_low_MHz", "f_high_MHz", "theta_deg", "f_axial_MHz", "q", "V_rf_V"], rows)


def cmd_loss(args):
    op, sets = _bases_for(args)
    op = _dc_op(args, op, sets)
    if args.energies:
        grid = parse_grid(args.energies)
    else:
        depth = fields.trap_depth(op) / k.EV
        grid = parse_grid(args.fractions) * depth
    curve = dynamics.loss_probability(op, grid, n_trials=args.trials, seed=args.seed)
    rows = [[E, E / curve.depth_ref, p, s] for E, p, s in curve.points]
    _write(args, ["E0_eV", "E0_over_depth", "p_loss", "stderr"], rows)


def _laser(args, **kw):
    return bloch.LaserParams(I_c=args.ic, Delta_c=args.dc * 1e6, I_r=args.ir, Delta_r=args.dr * 1e6,
                             B_field=args.bfield, linewidth=args.linewidth * 1e3, **kw)


def cmd_sensmap(args):
    dcs = parse_grid(args.dc_grid) * 1e6
    irs = parse_grid(args.ir_grid)
    m = bloch.sensitivity_map(_laser(args), dcs, irs, 2 * np.pi * args.fr * 1e6, 2 * np.pi * args.frf * 1e6)
    rows = [[dc / 1e6, ir, 100 * s, d / 1e6, ph] for dc, ir, s, d, ph in m.rows()]
    _write(args, ["Delta_c_MHz", "I_r_Is", "sens_pct_per_Vpm", "Delta_r_opt_MHz", "phase_rad"], rows)


def cmd_scan(args):
    grid = parse_grid(args.dr_grid) * 1e6
    F0, sens, ph = bloch.sensitivity_scan(_laser(args), grid, 2 * np.pi * args.fr * 1e6, 2 * np.pi * args.frf * 1e6)
    rows = zip(grid / 1e6, F0, F0 / k.GAMMA_P, 100 * sens, ph)
    _write(args, ["Delta_r_MHz", "F0_per_s", "P_population", "sens_pct_per_Vpm", "phase_rad"], rows)


def cmd_fit_lineshape(args):
    data = np.loadtxt(args.datafile, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] < 2:
        raise UsageError("data file needs two columns: Delta_MHz, counts")
    if args.amplitude <= 0:
        raise UsageError("--amplitude must be positive")
    fit = bloch.fit_lineshape(data[:, 0] * 1e6, data[:, 1], amplitude=args.amplitude,
                              fit_background=not args.no_background)
    _write(args, ["s", "Gamma_MHz", "background_counts", "s_err", "Gamma_err_MHz", "residual_rms_counts"],
           [[fit.s, fit.Gamma / 1e6, fit.background, fit.stderr[0], fit.stderr[1] / 1e6, fit.residual_rms]])


def cmd_heating(args):
    S = dynamics.heating_to_spectral_density(args.ndot, args.f * 1e3)
    _write(args, ["ndot_per_s", "f_kHz", "S_E_V2_per_m2_Hz", "omega_S_E_V2_per_m2"],
           [[args.ndot, args.f, S, 2 * np.pi * args.f * 1e3 * S]])


def cmd_field_grid(args):
    layout = _layout(args)
    if args.electrode:
        if args.electrode not in layout.names:
            raise UsageError(f"unknown electrode {args.electrode!r}")
        volts = {args.electrode: 1.0}
    else:
        volts = {}
        for item in args.voltages.split(","):
            name, _, v = item.partition("=")
            if not v:
                raise UsageError(f"voltage entries must be name=value, got {item!r}")
            volts[name.strip()] = float(v)
    cond = fields.Conductors.from_layout(layout, volts)
    xs, ys, zs = (parse_grid(g) * 1e-6 for g in (args.x, args.y, args.z))
    p = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), -1).reshape(-1, 3)
    phi = cond.potential(p)
    E = cond.field(p)
    rows = ([*pt, ph, *e] for pt, ph, e in zip(p, phi, E))
    _write(args, ["x_m", "y_m", "z_m", "potential_V", "Ex_V_per_m", "Ey_V_per_m", "Ez_V_per_m"], rows)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--layout", help="electrode layout JSON (default: built-in six-wire layout)")
    common.add_argument("--vrf", type=float, default=175.0, help="rf amplitude in volts (default 175)")
    common.add_argument("--frf", type=float, default=25.8, help="rf drive frequency in MHz (default 25.8)")
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=0, help="worker threads for compiled kernels")
    common.add_argument("-v", "--verbose", action="store_true")

    dcopt = argparse.ArgumentParser(add_help=False)
    dcopt.add_argument("--endcap", type=float, default=1.0, help="endcap basis factor")
    dcopt.add_argument("--tilt", type=float, default=1.0, help="tilt basis factor")
    dcopt.add_argument("--xcomp", type=float, default=0.0, help="x compensation field, V/m")
    dcopt.add_argument("--ycomp", type=float, default=0.0, help="y compensation field, V/m")

    laser = argparse.ArgumentParser(add_help=False)
    laser.add_argument("--ic", type=float, default=1.5, help="cooling intensity, units of I_s")
    laser.add_argument("--dc", type=float, default=-14.0, help="cooling detuning, MHz")
    laser.add_argument("--ir", type=float, default=95.0, help="repumper intensity, units of I_s")
    laser.add_argument("--dr", type=float, default=-28.7, help="repumper detuning, MHz")
    laser.add_argument("--bfield", type=float, default=1.7, help="magnetic field, gauss")
    laser.add_argument("--linewidth", type=float, default=500.0, help="laser linewidth, kHz")
    laser.add_argument("--fr", type=float, default=3.135, help="secular frequency along the field, MHz")

    p = argparse.ArgumentParser(prog="sixwire", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bases", parents=[common], help="voltage sets for the four operating bases (mV)")
    s.set_defaults(func=cmd_bases)

    s = sub.add_parser("modes", parents=[common], help="radial modes versus tilt factor")
    s.add_argument("--tilt-factors", default=",".join(str(f) for f in TILT_FACTORS))
    s.add_argument("--endcap", type=float, default=1.0)
    s.add_argument("--fit-frequency", type=float, default=None,
                   help="measured mean radial frequency at tilt 0 (MHz); fits V_rf")
    s.set_defaults(func=cmd_modes)

    s = sub.add_parser("loss", parents=[common, dcopt], help="collision-loss probability curve")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--energies", help="kick energies in eV")
    g.add_argument("--fractions", default="0.1:1.0:10,1.25,1.5,2.0", help="kick energies as fractions of the depth")
    s.add_argument("--trials", type=int, default=1000)
    s.set_defaults(func=cmd_loss)

    s = sub.add_parser("sensmap", parents=[common, laser], help="peak micromotion sensitivity map")
    s.add_argument("--dc-grid", default="-30:-5:20", help="cooling detunings, MHz")
    s.add_argument("--ir-grid", default="50:150:20", help="repumper intensities, units of I_s")
    s.set_defaults(func=cmd_sensmap)

    s = sub.add_parser("scan", parents=[common, laser], help="fluorescence and sensitivity versus repumper detuning")
    s.add_argument("--dr-grid", default="-60:10:141", help="repumper detunings, MHz")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("fit-lineshape", parents=[common], help="fit the two-level lineshape to CSV data")
    s.add_argument("datafile", help="CSV with header and columns Delta_MHz, counts")
    s.add_argument("--amplitude", type=float, default=1.0,
                   help="counts per unit excited-state population (default 1: data are populations)")
    s.add_argument("--no-background", action="store_true", help="fix the background at zero")
    s.set_defaults(func=cmd_fit_lineshape)

    s = sub.add_parser("heating", parents=[common], help="heating rate to field-noise spectral density")
    s.add_argument("--ndot", type=float, required=True, help="heating rate, quanta/s")
    s.add_argument("--f", type=float, required=True, help="mode frequency, kHz")
    s.set_defaults(func=cmd_heating)

    s = sub.add_parser("field-grid", parents=[common], help="potential and field on a grid (positions in um)")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--electrode", help="single electrode at 1 V")
    g.add_argument("--voltages", help="comma list name=volts")
    s.add_argument("--x", default="0")
    s.add_argument("--y", default="150")
    s.add_argument("--z", default="0")
    s.set_defaults(func=cmd_field_grid)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads and args.threads > 0:
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        if args.vrf < 0 or args.frf <= 0:
            raise UsageError("--vrf must be non-negative and --frf positive")
        args.func(args)
    except UsageError as err:
        parser.error(str(err))
    except (LayoutError, basis.SolveError, bloch.BlochError, dynamics.IntegrationError,
            fields.FieldDomainError, ValueError, OSError) as err:
        print(f"sixwire: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
