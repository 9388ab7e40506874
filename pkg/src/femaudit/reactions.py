"""Superstructure statics: interface wrench at the slew bearing.

Given a mass layout and a (slew, luff) pose this computes the force and
moment resultant that the rotating superstructure hands to the portal
structure, about the slew-bearing center. Convention: z up, right-hand
rule, angles in degrees. Platform items rotate with the slew angle only;
boom items additionally pitch with the luff angle about a horizontal
axis through the pivot point on the slew axis.

Process forces (digging, material flow) enter as extra point wrenches
fixed to the boom; their components are given in the boom frame and
rotate with the pose.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import EmptyLayout
from .loads import DEFAULT_GRAVITY, InterfaceWrench, _check_vec3

SLEW_RANGE = (-110.0, 110.0)
LUFF_RANGE = (-9.0, 9.0)

_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class PlatformMass:
    """Mass fixed to the slewing platform at a position relative to the
    bearing center; it follows the slew angle but not the luff."""

    name: str
    mass: float
    position: tuple[float, float, float]

    def __post_init__(self) -> None:
        _check_mass(self.name, self.mass)
        _check_vec3(self.position, f"position of {self.name!r}")


@dataclass(frozen=True)
class BoomMass:
    """Mass on the boom: lever along the boom axis from the pivot, plus a
    vertical offset above the axis. Both pitch with the luff angle."""

    name: str
    mass: float
    lever: float
    offset: float = 0.0

    def __post_init__(self) -> None:
        _check_mass(self.name, self.mass)
        if not (np.isfinite(self.lever) and np.isfinite(self.offset)):
            raise ValueError(f"geometry of {self.name!r} must be finite")


MassItem = Union[PlatformMass, BoomMass]


@dataclass(frozen=True)
class PointWrench:
    """Boom-fixed process force and moment (components in the boom frame)."""

    name: str
    lever: float
    offset: float
    force: tuple[float, float, float] = (0.0, 0.0, 0.0)
    moment: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("point wrench name must be non-empty")
        if not (np.isfinite(self.lever) and np.isfinite(self.offset)):
            raise ValueError(f"geometry of {self.name!r} must be finite")
        _check_vec3(self.force, f"force of {self.name!r}")
        _check_vec3(self.moment, f"moment of {self.name!r}")


@dataclass(frozen=True)
class PoseAngles:
    """Slew and luff angles in degrees."""

    slew_deg: float
    luff_deg: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.slew_deg) and np.isfinite(self.luff_deg)):
            raise ValueError("pose angles must be finite")

    def in_envelope(self) -> bool:
        return (SLEW_RANGE[0] <= self.slew_deg <= SLEW_RANGE[1]
                and LUFF_RANGE[0] <= self.luff_deg <= LUFF_RANGE[1])


@dataclass(frozen=True)
class SuperstructureLayout:
    """Mass items and boom geometry, all relative to the bearing center.

    ``pivot_height`` is the height of the boom pivot on the slew axis;
    ``boom_direction`` is the horizontal boom axis at zero slew.
    """

    items: tuple[MassItem, ...]
    slew_origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    boom_direction: tuple[float, float, float] = (1.0, 0.0, 0.0)
    pivot_height: float = 0.0
    point_wrenches: tuple[PointWrench, ...] = ()

    def __post_init__(self) -> None:
        _check_vec3(self.slew_origin, "slew origin")
        b = _check_vec3(self.boom_direction, "boom direction")
        if abs(b[2]) > 1e-12 * max(1.0, np.linalg.norm(b)):
            raise ValueError("boom direction must be horizontal")
        if np.linalg.norm(b) == 0.0:
            raise ValueError("boom direction must be nonzero")
        if not np.isfinite(self.pivot_height):
            raise ValueError("pivot height must be finite")
        for it in self.items:
            if not isinstance(it, (PlatformMass, BoomMass)):
                raise TypeError(f"not a mass item: {it!r}")


def _check_mass(name: str, mass: float) -> None:
    if not name:
        raise ValueError("mass item name must be non-empty")
    if not np.isfinite(mass) or mass <= 0:
        raise ValueError(f"mass of {name!r} must be positive")


def _pose_rotation(layout: SuperstructureLayout, pose: PoseAngles) -> Rotation:
    """World-from-boom rotation: pitch by the luff, then slew about z."""
    b0 = np.asarray(layout.boom_direction, dtype=float)
    b0 = b0 / np.linalg.norm(b0)
    pitch_axis = np.cross(_Z, b0)
    pitch = Rotation.from_rotvec(-np.deg2rad(pose.luff_deg) * pitch_axis)
    slew = Rotation.from_euler("z", pose.slew_deg, degrees=True)
    return slew * pitch


def _boom_offset(layout, rot: Rotation, lever: float, offset: float):
    """Position relative to the bearing center of a boom-fixed point."""
    b0 = np.asarray(layout.boom_direction, dtype=float)
    b0 = b0 / np.linalg.norm(b0)
    local = lever * b0 + offset * _Z
    return rot.apply(local) + np.array([0.0, 0.0, layout.pivot_height])


def compute_wrench(
    layout: SuperstructureLayout,
    pose: PoseAngles,
    g=DEFAULT_GRAVITY,
) -> InterfaceWrench:
    """Gravity and process resultant about the slew-bearing center.

    Warns (but still computes) when the pose leaves the machine's
    working envelope.
    """
    if not layout.items and not layout.point_wrenches:
        raise EmptyLayout("layout has no mass items and no point wrenches")
    if not pose.in_envelope():
        warnings.warn(
            f"pose (slew {pose.slew_deg} deg, luff {pose.luff_deg} deg) is "
            f"outside the working envelope "
            f"(slew {SLEW_RANGE}, luff {LUFF_RANGE})",
            stacklevel=2)
    gv = _check_vec3(g, "gravity vector")
    rot = _pose_rotation(layout, pose)
    slew_only = Rotation.from_euler("z", pose.slew_deg, degrees=True)

    force = np.zeros(3)
    moment = np.zeros(3)
    for it in layout.items:
        w = it.mass * gv
        if isinstance(it, PlatformMass):
            arm = slew_only.apply(np.asarray(it.position, dtype=float))
        else:
            arm = _boom_offset(layout, rot, it.lever, it.offset)
        force += w
        moment += np.cross(arm, w)
    for pw in layout.point_wrenches:
        fw = rot.apply(np.asarray(pw.force, dtype=float))
        arm = _boom_offset(layout, rot, pw.lever, pw.offset)
        force += fw
        moment += np.cross(arm, fw) + rot.apply(np.asarray(pw.moment, dtype=float))
    return InterfaceWrench(*force, *moment)


@dataclass(frozen=True)
class SweepRow:
    pose: PoseAngles
    wrench: InterfaceWrench

    @property
    def moment_norm(self) -> float:
        w = self.wrench
        return float(np.sqrt(w.Mx ** 2 + w.My ** 2 + w.Mz ** 2))


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    @property
    def governing(self) -> SweepRow:
        """Row with the largest resultant moment; ties keep row order."""
        best = self.rows[0]
        for r in self.rows[1:]:
            if r.moment_norm > best.moment_norm:
                best = r
        return best


def sweep_envelope(
    layout: SuperstructureLayout,
    slew_grid,
    luff_grid,
    g=DEFAULT_GRAVITY,
) -> SweepResult:
    """Wrench at every grid pose, slew outer and luff inner."""
    slews = [float(v) for v in slew_grid]
    luffs = [float(v) for v in luff_grid]
    if not slews or not luffs:
        raise ValueError("angle grids must be non-empty")
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for psi in slews:
            for phi in luffs:
                pose = PoseAngles(psi, phi)
                rows.append(SweepRow(pose, compute_wrench(layout, pose, g)))
    return SweepResult(tuple(rows))


def sweep_csv(result: SweepResult) -> str:
    """CSV text of a sweep, one row per pose in sweep order."""
    lines = ["psi_deg,phi_deg,Fx,Fy,Fz,Mx,My,Mz"]
    for row in result.rows:
        w = row.wrench
        vals = (row.pose.slew_deg, row.pose.luff_deg,
                w.Fx, w.Fy, w.Fz, w.Mx, w.My, w.Mz)
        lines.append(",".join("%.17g" % v for v in vals))
    return "\n".join(lines) + "\n"
