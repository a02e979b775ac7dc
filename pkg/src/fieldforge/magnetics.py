"""Magnetostatics: Biot-Savart fields, image-current ferrite, Neumann inductance.

Conductors are chains of straight segments. The field of a finite straight
segment is evaluated in closed form; inductances come from the Neumann double
line integral evaluated by Gauss-Legendre quadrature on sub-elements.

A ferrite enclosure with very high permeability behaves like a perfect
magnetic conductor. Its effect is approximated by one mirror image of every
conductor across each of the six enclosure walls (no image-of-image terms).
For such a wall the image keeps the tangential current direction, which is
exactly a geometric reflection of the segment endpoints with the traversal
order unchanged.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .model import ChamberConfig, WindingGeometry
from .units import MU0

_KM = MU0 / (4.0 * math.pi)
# uniform current in a round bundle: GMR = exp(-1/4) * radius
UNIFORM_GMR_FACTOR = math.exp(-0.25)


class SingularPointError(ValueError):
    """Field requested inside a conductor."""


class GeometryError(ValueError):
    """Conductors overlap or a winding is not closed."""


# ---------------------------------------------------------------- ferrite ---


@dataclass(frozen=True)
class FerriteBox:
    """Axis-aligned high-permeability enclosure, walls at ``lower``/``upper``."""

    lower: tuple[float, float, float]
    upper: tuple[float, float, float]
    calibration: float = 1.0

    def planes(self) -> list[tuple[int, float]]:
        return [(k, c) for k in range(3) for c in (self.lower[k], self.upper[k])]

    def images(self, segments: np.ndarray) -> np.ndarray:
        """Mirror copies of ``segments`` across all six walls, stacked."""
        out = []
        for k, c in self.planes():
            img = np.array(segments, dtype=float, copy=True)
            img[..., k] = 2.0 * c - img[..., k]
            out.append(img)
        return np.concatenate(out, axis=0)

    @classmethod
    def around(cls, windings, gap: float, calibration: float = 1.0) -> "FerriteBox":
        """Smallest box clearing every winding by ``gap``."""
        pts = np.concatenate([w.segments.reshape(-1, 3) for w in windings])
        lo = pts.min(axis=0) - gap
        hi = pts.max(axis=0) + gap
        return cls(tuple(map(float, lo)), tuple(map(float, hi)), calibration)


def ferrite_for(config: ChamberConfig) -> FerriteBox | None:
    ch = config.chamber
    if not ch.ferrite_enabled:
        return None
    return FerriteBox.around(config.windings, ch.ferrite_gap, ch.ferrite_calibration)


# ----------------------------------------------------------- Biot-Savart ---


def _segments_field(starts, ends, weights, points, chunk=200_000):
    """B at ``points`` (m, 3) from segments carrying ``weights`` amperes."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros_like(points)
    n_seg = len(starts)
    if n_seg == 0:
        return out
    step = max(1, chunk // n_seg)
    for i0 in range(0, len(points), step):
        p = points[i0 : i0 + step, None, :]
        r1 = p - starts[None, :, :]
        r2 = p - ends[None, :, :]
        n1 = np.linalg.norm(r1, axis=-1)
        n2 = np.linalg.norm(r2, axis=-1)
        cross = np.cross(r1, r2)
        denom = n1 * n2 * (n1 * n2 + np.einsum("ijk,ijk->ij", r1, r2))
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(denom > 0, (n1 + n2) / denom, 0.0)
        out[i0 : i0 + step] = _KM * np.einsum("ij,ijk->ik", factor * weights[None, :], cross)
    return out


def _point_segment_distance(points, starts, ends):
    d = ends - starts
    L2 = np.einsum("ij,ij->i", d, d)
    rel = points[:, None, :] - starts[None, :, :]
    t = np.clip(np.einsum("pij,ij->pi", rel, d) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    closest = starts[None] + t[..., None] * d[None]
    return np.linalg.norm(points[:, None, :] - closest, axis=-1)


def _assemble(windings, currents, ferrite: FerriteBox | None):
    currents = np.broadcast_to(np.asarray(currents, dtype=float), (len(windings),))
    segs, wts = [], []
    for w, i in zip(windings, currents):
        segs.append(w.segments)
        wts.append(np.full(len(w.segments), i))
        if ferrite is not None:
            img = ferrite.images(w.segments)
            segs.append(img)
            wts.append(np.full(len(img), i))
    seg = np.concatenate(segs)
    return seg[:, 0, :], seg[:, 1, :], np.concatenate(wts)


def field_at_points(windings, currents, points, ferrite: FerriteBox | None = None, check=True):
    """Flux density (T) at each row of ``points``; linear in ``currents``."""
    windings = list(windings)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if check:
        for w in windings:
            dist = _point_segment_distance(points, w.starts, w.ends)
            if np.any(dist <= w.wire.bundle_radius):
                raise SingularPointError(f"point within wire radius of winding {w.coil_id}")
    s, e, wt = _assemble(windings, currents, ferrite)
    b = _segments_field(s, e, wt, points)
    if ferrite is not None:
        b = ferrite.calibration * b
    return b


def field_at_point(windings, currents, point, ferrite: FerriteBox | None = None) -> np.ndarray:
    """Flux density 3-vector at a single point."""
    return field_at_points(windings, currents, np.asarray(point, dtype=float)[None, :], ferrite)[0]


# --------------------------------------------------------------- mapping ---


@dataclass(frozen=True, eq=False)
class FieldMap:
    grid_origin: np.ndarray
    grid_spacing: np.ndarray
    samples: np.ndarray  # (nx, ny, nz, 3)
    excitation: dict = field(default_factory=dict)
    # grid points skipped because they sit on a conductor
    flagged: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.samples.shape[:3]

    def coordinates(self) -> np.ndarray:
        nx, ny, nz = self.shape
        ix, iy, iz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
        idx = np.stack([ix, iy, iz], axis=-1).astype(float)
        return self.grid_origin + idx * self.grid_spacing

    def magnitudes(self) -> np.ndarray:
        mag = np.linalg.norm(self.samples, axis=-1)
        if self.flagged is not None:
            mag = mag[~self.flagged]
        return mag.ravel()


@dataclass(frozen=True)
class UniformityStats:
    median_magnitude: float
    min: float
    max: float
    band_fraction: float
    band_halfwidth: float = 0.10


def chamber_grid(inner_dimensions, resolution) -> tuple[np.ndarray, np.ndarray, tuple[int, int, int]]:
    """Cell-centred grid strictly inside a box centred on the origin."""
    dims = np.asarray(inner_dimensions, dtype=float)
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (3,))
    if np.any(res < 2):
        raise ValueError("grid resolution must be at least 2 per axis")
    spacing = dims / res
    origin = -dims / 2 + spacing / 2
    return origin, spacing, tuple(int(r) for r in res)


def compute_field_map(
    config: ChamberConfig,
    channel: int,
    current: float,
    resolution=None,
    region=None,
) -> FieldMap:
    """Field of one channel's windings, both halves carrying ``current``.

    ``region`` overrides the sampled box (defaults to the chamber interior).
    """
    if current <= 0:
        raise ValueError("current must be positive")
    windings = config.windings_for(channel)
    ferrite = ferrite_for(config)
    dims = config.chamber.inner_dimensions if region is None else region
    res = config.chamber.grid_resolution if resolution is None else resolution
    origin, spacing, shape = chamber_grid(dims, res)

    nx, ny, nz = shape
    ix, iy, iz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    pts = origin + np.stack([ix, iy, iz], axis=-1).reshape(-1, 3) * spacing

    flagged = np.zeros(len(pts), dtype=bool)
    for w in windings:
        flagged |= np.any(_point_segment_distance(pts, w.starts, w.ends) <= w.wire.bundle_radius, axis=1)
    b = np.zeros_like(pts)
    ok = ~flagged
    b[ok] = field_at_points(windings, current, pts[ok], ferrite, check=False)
    samples = b.reshape(nx, ny, nz, 3)
    samples.setflags(write=False)
    return FieldMap(
        grid_origin=origin,
        grid_spacing=spacing,
        samples=samples,
        excitation={w.coil_id: float(current) for w in windings},
        flagged=flagged.reshape(nx, ny, nz) if flagged.any() else None,
    )


def uniformity(field_map: FieldMap, band_halfwidth: float = 0.10) -> UniformityStats:
    """Share of samples whose magnitude lies within ``band_halfwidth`` of the median."""
    mag = field_map.magnitudes() if isinstance(field_map, FieldMap) else np.asarray(field_map, float).ravel()
    if mag.size == 0:
        raise ValueError("empty field map")
    med = float(np.median(mag))
    inside = np.abs(mag - med) <= band_halfwidth * med
    return UniformityStats(
        median_magnitude=med,
        min=float(mag.min()),
        max=float(mag.max()),
        band_fraction=float(inside.mean()),
        band_halfwidth=band_halfwidth,
    )


FIELD_CSV_HEADER = ["x_m", "y_m", "z_m", "Bx_T", "By_T", "Bz_T", "Bmag_T"]


def field_map_csv(field_map: FieldMap, stats: UniformityStats | None = None) -> str:
    """CSV text, x slowest and z fastest; stats appended as ``#`` comments."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELD_CSV_HEADER)
    xyz = field_map.coordinates().reshape(-1, 3)
    b = field_map.samples.reshape(-1, 3)
    mag = np.linalg.norm(b, axis=1)
    for p, v, m in zip(xyz, b, mag):
        writer.writerow([repr(float(c)) for c in (*p, *v, m)])
    if stats is not None:
        buf.write(f"# median_magnitude_T={stats.median_magnitude!r}\n")
        buf.write(f"# min_T={stats.min!r}\n")
        buf.write(f"# max_T={stats.max!r}\n")
        buf.write(f"# band_halfwidth={stats.band_halfwidth!r}\n")
        buf.write(f"# band_fraction={stats.band_fraction!r}\n")
    return buf.getvalue()


# ------------------------------------------------------------ inductance ---

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (1, 2, 3, 4)}


def quadrature_nodes(segments: np.ndarray, max_element: float, order: int = 2):
    """Gauss-Legendre nodes along every segment.

    Returns node positions (n, 3) and the matching vector line elements
    ``dl`` (n, 3) so that a line integral of ``f . dl`` is ``sum f(p) . dl``.
    """
    x, w = _GL[order]
    pos, dl = [], []
    for a, b in np.asarray(segments, dtype=float):
        d = b - a
        length = float(np.linalg.norm(d))
        if length == 0.0:
            continue
        m = max(1, int(math.ceil(length / max_element)))
        # element midpoints in parameter space, then Gauss offsets
        edges = np.arange(m) / m
        t = (edges[:, None] + (x[None, :] + 1.0) / (2.0 * m)).ravel()
        pos.append(a + t[:, None] * d)
        dl.append(np.outer(np.tile(w / (2.0 * m), m), d))
    return np.concatenate(pos), np.concatenate(dl)


@numba.njit(cache=True)
def _neumann_sum(pa, da, pb, db, g2):
    total = 0.0
    rmin2 = np.inf
    for i in range(pa.shape[0]):
        ax, ay, az = pa[i, 0], pa[i, 1], pa[i, 2]
        ux, uy, uz = da[i, 0], da[i, 1], da[i, 2]
        for j in range(pb.shape[0]):
            dx = ax - pb[j, 0]
            dy = ay - pb[j, 1]
            dz = az - pb[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            if r2 < rmin2:
                rmin2 = r2
            total += (ux * db[j, 0] + uy * db[j, 1] + uz * db[j, 2]) / math.sqrt(r2 + g2)
    return total, math.sqrt(rmin2)


def _default_element(*windings) -> float:
    return max(min(w.wire.bundle_radius for w in windings), 5e-4)


def mutual_inductance(
    a: WindingGeometry,
    b: WindingGeometry,
    ferrite: FerriteBox | None = None,
    max_element: float | None = None,
    order: int = 2,
) -> float:
    """Mutual inductance (H) of two distinct windings by Neumann's formula."""
    if a is b:
        raise GeometryError("mutual inductance needs two distinct windings")
    h = max_element or 2.0 * _default_element(a, b)
    pa, da = quadrature_nodes(a.segments, h, order)
    pb, db = quadrature_nodes(b.segments, h, order)
    try:
        total, rmin = _neumann_sum(pa, da, pb, db, 0.0)
    except ZeroDivisionError:
        rmin = 0.0
    if rmin < max(a.wire.bundle_radius, b.wire.bundle_radius):
        raise GeometryError(f"windings {a.coil_id} and {b.coil_id} overlap (gap {rmin:.3g} m)")
    if ferrite is not None:
        pi, di = quadrature_nodes(ferrite.images(b.segments), h, order)
        total += _neumann_sum(pa, da, pi, di, 0.0)[0]
        total *= ferrite.calibration
    return _KM * total


def self_inductance(
    w: WindingGeometry,
    ferrite: FerriteBox | None = None,
    gmr_factor: float = UNIFORM_GMR_FACTOR,
    max_element: float | None = None,
    order: int = 2,
    closure_tol: float = 1e-9,
) -> float:
    """Self-inductance (H) of a closed winding.

    The 1/r kernel is softened to 1/sqrt(r^2 + g^2) with ``g`` the bundle's
    geometric mean radius, i.e. the winding's flux is taken through a path
    offset by ``g`` from its centreline. ``gmr_factor`` = exp(-1/4) models a
    uniformly filled bundle; 1.0 models current on the bundle surface.
    """
    if w.closure_gap() > closure_tol:
        raise GeometryError(f"winding {w.coil_id} is not closed")
    g = gmr_factor * w.wire.bundle_radius
    h = max_element or g / 2.0
    p, d = quadrature_nodes(w.segments, h, order)
    total = _neumann_sum(p, d, p, d, g * g)[0]
    if ferrite is not None:
        pi, di = quadrature_nodes(ferrite.images(w.segments), h, order)
        total += _neumann_sum(p, d, pi, di, 0.0)[0]
        total *= ferrite.calibration
    return _KM * total


@dataclass(frozen=True, eq=False)
class InductanceMatrix:
    values: np.ndarray
    labels: tuple[str, ...]

    def index(self, coil: str) -> int:
        return self.labels.index(coil)

    def __getitem__(self, pair) -> float:
        i, j = (self.index(c) if isinstance(c, str) else c for c in pair)
        return float(self.values[i, j])


def inductance_matrix(config: ChamberConfig, gmr_factor: float = UNIFORM_GMR_FACTOR) -> InductanceMatrix:
    ferrite = ferrite_for(config)
    ws = config.windings
    n = len(ws)
    m = np.zeros((n, n))
    for i in range(n):
        m[i, i] = self_inductance(ws[i], ferrite, gmr_factor=gmr_factor)
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = mutual_inductance(ws[i], ws[j], ferrite)
    m.setflags(write=False)
    return InductanceMatrix(m, tuple(w.coil_id for w in ws))


def linked_flux(target: WindingGeometry, sources, currents, ferrite: FerriteBox | None = None) -> float:
    """Flux (Wb) linked by ``target`` from other windings' currents."""
    currents = np.broadcast_to(np.asarray(currents, dtype=float), (len(sources),))
    return float(sum(i * mutual_inductance(target, s, ferrite) for s, i in zip(sources, currents)))


def extract_inductance_vi(terminal_voltages, current: float, omega: float) -> tuple[float, float]:
    """Self and mutual inductance from peak terminal voltages of an excited half.

    ``terminal_voltages`` is (U_driven, U_other): the driven half's own
    voltage and the open-circuit voltage induced in the other half.
    """
    if current <= 0 or omega <= 0:
        raise ValueError("current and omega must be positive")
    u_self, u_other = terminal_voltages
    return u_self / (omega * current), u_other / (omega * current)


def coupling_coefficient(L: InductanceMatrix, i, j) -> float:
    """|M_ij| / sqrt(L_i L_j)."""
    a = L.index(i) if isinstance(i, str) else i
    b = L.index(j) if isinstance(j, str) else j
    v = L.values
    return abs(float(v[a, b])) / math.sqrt(float(v[a, a]) * float(v[b, b]))


def channel_inductance(L: InductanceMatrix, config: ChamberConfig, channel: int) -> float:
    """Total inductance of a channel's halves carrying the same current."""
    idx = [L.index(w.coil_id) for w in config.windings_for(channel)]
    return float(L.values[np.ix_(idx, idx)].sum())


def channel_coupling(L: InductanceMatrix, config: ChamberConfig, a: int = 1, b: int = 2) -> float:
    """Coupling between two channels, each lumped as its halves in synchrony.

    Individual coils of different channels can couple strongly while the
    channel sums cancel; this is the coefficient the lumped circuit sees.
    """
    ia = [L.index(w.coil_id) for w in config.windings_for(a)]
    ib = [L.index(w.coil_id) for w in config.windings_for(b)]
    m = float(L.values[np.ix_(ia, ib)].sum())
    return abs(m) / math.sqrt(channel_inductance(L, config, a) * channel_inductance(L, config, b))
