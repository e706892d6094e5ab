"""Constructors for the linear-optics elements used by the protocol.

All elements are polarization-preserving except the half-wave plate, which
mixes H and V on one path. The symmetric beam-splitter convention is
a† -> (a† + i b†)/sqrt(2); any unitary gauge gives the same count statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fock import ModeLabel, ModeRegistry, ModeUnitary

# 2x2 symmetric 50/50 splitter, applied per polarization.
_BS_BLOCK = np.array([[1.0, 1.0j], [1.0j, 1.0]]) / math.sqrt(2.0)


def beam_splitter(registry: ModeRegistry, path_a: str, path_b: str) -> ModeUnitary:
    """50/50 polarization-preserving beam splitter between two paths."""
    if path_a == path_b:
        raise ValueError("beam splitter needs two distinct paths")
    targets = (
        ModeLabel(path_a, "H"),
        ModeLabel(path_b, "H"),
        ModeLabel(path_a, "V"),
        ModeLabel(path_b, "V"),
    )
    matrix = np.zeros((4, 4), dtype=complex)
    matrix[0:2, 0:2] = _BS_BLOCK
    matrix[2:4, 2:4] = _BS_BLOCK
    return ModeUnitary(registry, targets, matrix, name=f"BS({path_a},{path_b})")


def pbs(registry: ModeRegistry, path_1: str, path_2: str) -> ModeUnitary:
    """Polarizing beam splitter: H transmits (stays on path), V swaps paths."""
    if path_1 == path_2:
        raise ValueError("PBS needs two distinct paths")
    targets = (
        ModeLabel(path_1, "H"),
        ModeLabel(path_2, "H"),
        ModeLabel(path_1, "V"),
        ModeLabel(path_2, "V"),
    )
    matrix = np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
        ],
        dtype=complex,
    )
    return ModeUnitary(registry, targets, matrix, name=f"PBS({path_1},{path_2})")


def hwp(registry: ModeRegistry, theta_degrees: float, path: str) -> ModeUnitary:
    """Half-wave plate at angle theta on one path.

    Jones matrix [[cos2t, sin2t], [sin2t, -cos2t]] on (H, V): at 0 deg it
    flips the sign of V, at 45 deg it exchanges H and V.
    """
    theta = math.radians(theta_degrees)
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    targets = (ModeLabel(path, "H"), ModeLabel(path, "V"))
    matrix = np.array([[c, s], [s, -c]], dtype=complex)
    return ModeUnitary(registry, targets, matrix, name=f"HWP({theta_degrees:g},{path})")


def polarizer_monitor(
    registry: ModeRegistry, path: str, orientation: str, monitor_path: str
) -> ModeUnitary:
    """PBS-type polarizer with a monitored reject port.

    The component matching ``orientation`` continues on ``path``; the
    orthogonal component is rerouted to ``monitor_path``, where a later
    photodetection registers the sender's reject-port click. Keeping the
    reroute unitary keeps the global state normalized until measurement.
    """
    if orientation not in ("H", "V"):
        raise ValueError(f"orientation must be 'H' or 'V', got {orientation!r}")
    if monitor_path == path:
        raise ValueError("monitor path must differ from the input path")
    rejected = "V" if orientation == "H" else "H"
    targets = (ModeLabel(path, rejected), ModeLabel(monitor_path, rejected))
    matrix = np.array([[0, 1], [1, 0]], dtype=complex)
    return ModeUnitary(
        registry, targets, matrix, name=f"pol({orientation},{path}->{monitor_path})"
    )


class ElementKind(Enum):
    BEAM_SPLITTER = "beam_splitter"
    PBS = "pbs"
    HALF_WAVE_PLATE = "hwp"
    POLARIZER_MONITOR = "polarizer_monitor"


@dataclass(frozen=True)
class ElementSpec:
    """Declarative description of one element, buildable against a registry."""

    kind: ElementKind
    paths: tuple[str, ...]
    angle_degrees: float | None = None
    orientation: str | None = None
    monitor_path: str | None = None

    def __post_init__(self):
        two_path = (ElementKind.BEAM_SPLITTER, ElementKind.PBS)
        if self.kind in two_path:
            if len(self.paths) != 2:
                raise ValueError(f"{self.kind.value} takes exactly 2 paths")
        elif len(self.paths) != 1:
            raise ValueError(f"{self.kind.value} takes exactly 1 input path")
        if self.kind is ElementKind.HALF_WAVE_PLATE:
            if self.angle_degrees is None or not 0.0 <= self.angle_degrees < 180.0:
                raise ValueError("wave-plate angle must lie in [0, 180) degrees")
        elif self.angle_degrees is not None:
            raise ValueError("angle is only defined for a half-wave plate")
        if self.kind is ElementKind.POLARIZER_MONITOR:
            if self.orientation is None or self.monitor_path is None:
                raise ValueError("polarizer needs an orientation and a monitor path")
        elif self.orientation is not None or self.monitor_path is not None:
            raise ValueError("orientation/monitor only apply to a polarizer")

    def build(self, registry: ModeRegistry) -> ModeUnitary:
        if self.kind is ElementKind.BEAM_SPLITTER:
            return beam_splitter(registry, *self.paths)
        if self.kind is ElementKind.PBS:
            return pbs(registry, *self.paths)
        if self.kind is ElementKind.HALF_WAVE_PLATE:
            return hwp(registry, self.angle_degrees, self.paths[0])
        return polarizer_monitor(
            registry, self.paths[0], self.orientation, self.monitor_path
        )
