"""Turn declarative coil layouts into explicit segment chains."""

from __future__ import annotations

import numpy as np

from .model import LitzWireSpec, RectHelixLayout, WindingGeometry

_AXES = {"x": 0, "y": 1, "z": 2}


def _frame(axis: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if axis not in _AXES:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    k = _AXES[axis]
    eye = np.eye(3)
    return eye[(k + 1) % 3], eye[(k + 2) % 3], eye[k]


def build_winding(
    layout: RectHelixLayout,
    wire: LitzWireSpec,
    coil_id: str = "#1",
    channel: int = 1,
) -> WindingGeometry:
    """Expand a rectangular helix into straight segments.

    Each turn is three in-plane sides plus a fourth side that climbs one pitch
    to the next turn; the last turn closes in its own plane and a single
    axial lead returns to the start. Segment count is ``4 * turns``, plus one
    return lead whenever the last turn does not end where the first began.
    """
    if layout.turns < 1:
        raise ValueError("winding needs at least one turn")
    a, b = layout.footprint
    if a <= 0 or b <= 0:
        raise ValueError(f"degenerate footprint {layout.footprint}")
    if layout.circulation not in (1, -1):
        raise ValueError("circulation must be +1 or -1")

    u, v, w = _frame(layout.axis)
    origin = np.asarray(layout.origin, dtype=float)
    corners = [(-a / 2, -b / 2), (a / 2, -b / 2), (a / 2, b / 2), (-a / 2, b / 2)]
    if layout.circulation < 0:
        corners = corners[::-1]
    corners = [cu * u + cv * v for cu, cv in corners]

    def pt(corner: int, turn: int) -> np.ndarray:
        return origin + corners[corner] + turn * layout.pitch * w

    segs = []
    n = layout.turns
    for k in range(n):
        segs.append((pt(0, k), pt(1, k)))
        segs.append((pt(1, k), pt(2, k)))
        segs.append((pt(2, k), pt(3, k)))
        nxt = k + 1 if k < n - 1 else k
        segs.append((pt(3, k), pt(0, nxt)))
    lead = (pt(0, n - 1), pt(0, 0))
    if np.any(lead[0] != lead[1]):
        segs.append(lead)

    return WindingGeometry(
        coil_id=coil_id,
        channel=channel,
        segments=np.array(segs),
        turns=n,
        wire=wire,
        layout=layout,
    )


def circular_loop(
    radius: float,
    n_segments: int,
    center=(0.0, 0.0, 0.0),
    normal: str = "z",
    wire: LitzWireSpec | None = None,
    coil_id: str = "loop",
) -> WindingGeometry:
    """Regular polygon inscribed in a circle; used by the analytic checks."""
    u, v, _ = _frame(normal)
    phi = np.linspace(0.0, 2 * np.pi, n_segments + 1)
    pts = np.asarray(center, dtype=float) + radius * (np.outer(np.cos(phi), u) + np.outer(np.sin(phi), v))
    pts[-1] = pts[0]
    segs = np.stack([pts[:-1], pts[1:]], axis=1)
    if wire is None:
        wire = LitzWireSpec(strand_diameter=1e-4, strand_count=1)
    return WindingGeometry(coil_id=coil_id, channel=0, segments=segs, turns=1, wire=wire)


def straight_wire(start, end, wire: LitzWireSpec | None = None) -> WindingGeometry:
    """Open single segment; only meaningful for field evaluation."""
    if wire is None:
        wire = LitzWireSpec(strand_diameter=1e-4, strand_count=1)
    segs = np.array([[start, end]], dtype=float)
    return WindingGeometry(coil_id="wire", channel=0, segments=segs, turns=1, wire=wire)
