"""Planar electrode layouts and the parametric six-wire reconstruction.

Electrodes live in the chip plane ``y = 0`` and are unions of axis-aligned
rectangles ``[x1, x2] x [z1, z2]`` (metres).  The trap axis is ``z`` and the
layout is mirror symmetric about ``x = 0``.

JSON layout files store lengths in micrometres::

    {
      "electrodes": [
        {"name": "RF", "role": "rf", "rects": [[x1, z1, x2, z2], ...]},
        ...
      ],
      "pairs": [["RF", "RF"], ["V1", "V2"], ...]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

#: names of the independently driven dc electrodes plus the tickle electrode
CONTROLLED_NAMES = ("V1", "V2", "V3", "V4", "V5", "V6", "T")

_REQUIRED_PAIRS = (("RF", "RF"), ("V1", "V2"), ("V3", "V4"), ("V5", "V6"))

# geometric comparisons are done on a 1 pm grid
_TOL = 1e-12


class LayoutError(ValueError):
    """Raised for malformed or physically inconsistent layouts."""


class Role(str, Enum):
    rf = "rf"
    dc_control = "dc_control"
    ground = "ground"


@dataclass(frozen=True)
class Electrode:
    """A named electrode made of one or more rectangles (x1, x2, z1, z2) in metres."""

    name: str
    role: Role
    rects: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        rects = tuple(tuple(float(v) for v in r) for r in self.rects)
        object.__setattr__(self, "rects", rects)
        if not rects:
            raise LayoutError(f"electrode {self.name!r} has no rectangles")
        for x1, x2, z1, z2 in rects:
            if not (x1 < x2 and z1 < z2):
                raise LayoutError(f"electrode {self.name!r}: degenerate rectangle {(x1, x2, z1, z2)}")
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if _overlap(rects[i], rects[j]):
                    raise LayoutError(f"electrode {self.name!r}: rectangles {i} and {j} overlap")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.rects, dtype=float).reshape(-1, 4)

    def mirrored(self) -> set:
        return {_key((-x2, -x1, z1, z2)) for x1, x2, z1, z2 in self.rects}


@dataclass(frozen=True)
class ElectrodeLayout:
    electrodes: tuple[Electrode, ...]
    pairs: tuple[tuple[str, str], ...]
    controlled_names: tuple[str, ...] = CONTROLLED_NAMES
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "electrodes", tuple(self.electrodes))
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        self.validate()

    def __getitem__(self, name: str) -> Electrode:
        for e in self.electrodes:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.electrodes]

    def by_role(self, role: Role | str) -> list[Electrode]:
        role = Role(role)
        return [e for e in self.electrodes if e.role is role]

    def validate(self) -> None:
        names = self.names
        if len(set(names)) != len(names):
            raise LayoutError("duplicate electrode names")
        if names.count("T") != 1:
            raise LayoutError("layout must contain exactly one electrode named 'T'")
        for n in self.controlled_names:
            if n not in names:
                raise LayoutError(f"controlled electrode {n!r} missing")

        allrects = [(e.name, r) for e in self.electrodes for r in e.rects]
        for i in range(len(allrects)):
            for j in range(i + 1, len(allrects)):
                (na, ra), (nb, rb) = allrects[i], allrects[j]
                if na != nb and _overlap(ra, rb):
                    raise LayoutError(f"electrodes {na!r} and {nb!r} overlap")

        partner = {}
        for a, b in self.pairs:
            for n in (a, b):
                if n not in names:
                    raise LayoutError(f"pair refers to unknown electrode {n!r}")
                if n in partner:
                    raise LayoutError(f"electrode {n!r} appears in more than one pair")
            partner[a] = b
            partner[b] = a
        for a, b in _REQUIRED_PAIRS:
            if partner.get(a) != b:
                raise LayoutError(f"missing mirror pair {a!r} <-> {b!r}")
        for e in self.electrodes:
            if e.name not in partner:
                raise LayoutError(f"electrode {e.name!r} has no declared mirror partner")
            other = self[partner[e.name]]
            if e.role is not other.role and not {e.name, other.name} & {"T"}:
                raise LayoutError(f"mirror pair {e.name!r}/{other.name!r} have different roles")
            if e.mirrored() != {_key(r) for r in other.rects}:
                raise LayoutError(f"electrode {e.name!r} is not the mirror image of {other.name!r}")

    def scaled(self, k: float) -> "ElectrodeLayout":
        """Copy with every length multiplied by ``k``."""
        els = [Electrode(e.name, e.role, [tuple(k * v for v in r) for r in e.rects]) for e in self.electrodes]
        return ElectrodeLayout(els, self.pairs, self.controlled_names, dict(self.meta))

    def to_json(self) -> str:
        lines = ["{", ' "electrodes": [']
        for i, e in enumerate(self.electrodes):
            rects = ", ".join(
                "[" + ", ".join(f"{v * 1e6:.6f}" for v in (x1, z1, x2, z2)) + "]" for x1, x2, z1, z2 in e.rects
            )
            comma = "," if i < len(self.electrodes) - 1 else ""
            lines.append(f'  {{"name": {json.dumps(e.name)}, "role": "{e.role.value}", "rects": [{rects}]}}{comma}')
        lines.append(" ],")
        lines.append(' "pairs": ' + json.dumps([list(p) for p in self.pairs]) + ("," if self.meta else ""))
        if self.meta:
            lines.append(' "meta": ' + json.dumps(self.meta))
        lines.append("}")
        return "\n".join(lines) + "\n"


def _overlap(a, b) -> bool:
    return min(a[1], b[1]) - max(a[0], b[0]) > _TOL and min(a[3], b[3]) - max(a[2], b[2]) > _TOL


def _key(r):
    return tuple(round(v / _TOL) for v in r)


def layout_from_dict(doc: dict) -> ElectrodeLayout:
    try:
        electrodes = []
        for ed in doc["electrodes"]:
            rects = []
            for r in ed["rects"]:
                x1, z1, x2, z2 = (float(v) * 1e-6 for v in r)
                rects.append((x1, x2, z1, z2))
            electrodes.append(Electrode(str(ed["name"]), ed["role"], rects))
        pairs = [tuple(p) for p in doc["pairs"]]
        if any(len(p) != 2 for p in pairs):
            raise LayoutError("each pair must name exactly two electrodes")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LayoutError):
            raise
        raise LayoutError(f"malformed layout: {exc!r}") from exc
    return ElectrodeLayout(electrodes, pairs, meta=doc.get("meta", {}))


def load_layout(path: str | Path) -> ElectrodeLayout:
    """Read and validate a JSON layout file (lengths in micrometres)."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LayoutError(f"{path}: not valid JSON ({exc})") from exc
    return layout_from_dict(doc)


def default_layout() -> ElectrodeLayout:
    """The shipped six-wire reconstruction."""
    with resources.files("sixwire.data").joinpath("six_wire.json").open() as fh:
        return layout_from_dict(json.load(fh))


# Segment index k (k = 0 at the trap centre) of the outer control pairs that
# are wired to each side voltage.  Pairs outside the central five are grounded.
SEGMENT_WIRING = {0: ("V3", "V4"), 1: ("V3", "V4"), -1: ("V3", "V4"), 2: ("V5", "V6"), -2: ("V5", "V6")}
TICKLE_SEGMENT = 3


def reconstruct_six_wire(
    center_width: float,
    rail_width: float,
    gap_center: float = 5e-6,
    gap: float = 10e-6,
    control_width_z: float = 145e-6,
    n_control_pairs: int = 11,
    rail_length: float = 8e-3,
    control_width_x: float = 3000e-6,
    center_length: float | None = None,
    wiring: dict | None = None,
    tickle_segment: int = TICKLE_SEGMENT,
) -> ElectrodeLayout:
    """Build the symmetric six-wire layout.

    From the axis outwards: two centre dc strips (``V1`` at x < 0, ``V2`` at
    x > 0) separated by ``gap_center``, the rf rails, then ``n_control_pairs``
    segmented control electrodes on each side with pitch
    ``control_width_z + gap``.  Centre strips and rails run the full
    ``rail_length``.  Gaps are left as grounded plane.
    """
    for name, v in [
        ("center_width", center_width),
        ("rail_width", rail_width),
        ("gap_center", gap_center),
        ("gap", gap),
        ("control_width_z", control_width_z),
        ("rail_length", rail_length),
        ("control_width_x", control_width_x),
        ("center_length", rail_length if center_length is None else center_length),
    ]:
        if not v > 0:
            raise LayoutError(f"{name} must be positive, got {v}")
    if n_control_pairs < 1 or n_control_pairs % 2 == 0:
        raise LayoutError("n_control_pairs must be a positive odd number")
    wiring = SEGMENT_WIRING if wiring is None else wiring
    half = n_control_pairs // 2
    if abs(tickle_segment) > half or tickle_segment in wiring:
        raise LayoutError("tickle segment must be an unwired segment inside the array")
    pitch = control_width_z + gap
    if n_control_pairs * pitch > rail_length:
        raise LayoutError("segmented control array is longer than the rf rails")

    zl = rail_length / 2
    zc = zl if center_length is None else center_length / 2
    if zc > zl:
        raise LayoutError("centre strips cannot be longer than the rf rails")
    c0 = gap_center / 2
    c1 = c0 + center_width
    r0 = c1 + gap
    r1 = r0 + rail_width
    d0 = r1 + gap
    d1 = d0 + control_width_x

    electrodes = [
        Electrode("V1", "dc_control", [(-c1, -c0, -zc, zc)]),
        Electrode("V2", "dc_control", [(c0, c1, -zc, zc)]),
        Electrode("RF", "rf", [(-r1, -r0, -zl, zl), (r0, r1, -zl, zl)]),
    ]
    groups: dict[str, list] = {}
    pairs = [("RF", "RF"), ("V1", "V2")]
    for k in range(-half, half + 1):
        z0 = k * pitch - control_width_z / 2
        zs = (z0, z0 + control_width_z)
        left, right = (-d1, -d0) + zs, (d0, d1) + zs
        if k in wiring:
            nl, nr = wiring[k]
            groups.setdefault(nl, []).append(left)
            groups.setdefault(nr, []).append(right)
        else:
            nl = "T" if k == tickle_segment else f"GL{k:+d}"
            nr = f"GR{k:+d}"
            electrodes.append(Electrode(nl, "dc_control" if nl == "T" else "ground", [left]))
            electrodes.append(Electrode(nr, "ground", [right]))
            pairs.append((nl, nr))
    for name, rects in groups.items():
        electrodes.append(Electrode(name, "dc_control", rects))
    for a, b in (("V3", "V4"), ("V5", "V6")):
        if a in groups:
            pairs.append((a, b))
    meta = {
        "center_width_um": center_width * 1e6,
        "rail_width_um": rail_width * 1e6,
        "gap_center_um": gap_center * 1e6,
        "gap_um": gap * 1e6,
        "control_width_z_um": control_width_z * 1e6,
        "control_width_x_um": control_width_x * 1e6,
        "rail_length_um": rail_length * 1e6,
        "center_length_um": 2 * zc * 1e6,
        "n_control_pairs": n_control_pairs,
    }
    return ElectrodeLayout(electrodes, pairs, meta=meta)


def control_inner_edge(layout: ElectrodeLayout) -> float:
    """Smallest |x| of any outer control electrode (V3..V6)."""
    return min(min(abs(r[0]), abs(r[1])) for n in ("V3", "V4", "V5", "V6") for r in layout[n].rects)


def solve_heights(
    height: float = 150e-6,
    control_distance: float = 274e-6,
    gap_center: float = 5e-6,
    gap: float = 10e-6,
    **kw,
) -> tuple[float, float]:
    """Centre-strip and rail widths putting the rf null at ``height``.

    ``control_distance`` is the distance from the ion to the nearest edge of
    the outer control electrodes, which fixes the outer edge of the rails.
    The split between centre strip and rail is then root-found with the full
    finite-length field model.  Returns ``(center_width, rail_width)``.
    """
    from scipy import optimize

    from sixwire.fields import OperatingPoint, find_rf_null

    if control_distance <= height:
        raise LayoutError("control electrodes must be farther from the ion than its height")
    x_ctrl = np.sqrt(control_distance**2 - height**2)
    r1 = x_ctrl - gap
    inner = gap_center / 2 + gap

    def widths(a):
        return a - inner, r1 - a

    def excess(a):
        c, w = widths(a)
        lay = reconstruct_six_wire(c, w, gap_center=gap_center, gap=gap, **kw)
        return find_rf_null(OperatingPoint(lay))[1] - height

    # infinite-strip estimate: null at sqrt(inner_edge * outer_edge)
    a0 = height**2 / r1
    if not inner < a0 < r1:
        raise LayoutError("no rail placement reaches the requested height")
    lo, hi = max(inner * 1.001, 0.7 * a0), min(r1 * 0.999, 1.3 * a0)
    a = optimize.brentq(excess, lo, hi, xtol=1e-12)
    return widths(a)
