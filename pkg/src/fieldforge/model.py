"""Domain types shared by every module.

All quantities are SI. Instances are frozen; array-valued fields are stored
read-only so they can be shared between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _frozen_array(values, shape_tail=None) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if shape_tail is not None and arr.shape[1:] != shape_tail:
        raise ValueError(f"expected trailing shape {shape_tail}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChannelSpec:
    id: int
    nominal_frequency: float
    target_field: float
    max_current: float
    max_duty: float
    interleave_submodules: int = 1
    phase: float = 0.0

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.nominal_frequency


@dataclass(frozen=True)
class LitzWireSpec:
    strand_diameter: float
    strand_count: int
    parallel_bundles: int = 1
    conductor_resistivity: float = 1.72e-8
    # copper fill of the bundle cross-section; only sets the bundle radius
    packing_factor: float = 0.5

    @property
    def copper_area(self) -> float:
        return math.pi * self.strand_diameter**2 / 4.0 * self.strand_count * self.parallel_bundles

    @property
    def bundle_radius(self) -> float:
        """Radius of a round bundle holding all strands at ``packing_factor``."""
        return math.sqrt(self.copper_area / (math.pi * self.packing_factor))


@dataclass(frozen=True)
class RectHelixLayout:
    """Declarative rectangular helix.

    ``footprint`` is (a, b) along the two axes transverse to ``axis`` taken in
    cyclic order (x -> y,z; y -> z,x; z -> x,y). ``origin`` is the centre of
    the first turn; later turns advance by ``pitch`` along the axis.
    ``circulation`` +1 gives a moment along +axis for positive current.
    """

    axis: str
    footprint: tuple[float, float]
    turns: int
    pitch: float = 0.0
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    circulation: int = 1


@dataclass(frozen=True, eq=False)
class WindingGeometry:
    """One coil half as a contiguous chain of straight segments.

    ``segments`` has shape (n, 2, 3): start and end point of every segment.
    All turns are explicit, so each segment carries the terminal current once.
    """

    coil_id: str
    channel: int
    segments: np.ndarray
    turns: int
    wire: LitzWireSpec
    layout: RectHelixLayout | None = None

    def __post_init__(self):
        object.__setattr__(self, "segments", _frozen_array(self.segments, (2, 3)))

    def __eq__(self, other):
        if not isinstance(other, WindingGeometry):
            return NotImplemented
        return (
            self.coil_id == other.coil_id
            and self.channel == other.channel
            and self.turns == other.turns
            and self.wire == other.wire
            and self.layout == other.layout
            and np.array_equal(self.segments, other.segments)
        )

    __hash__ = None

    @property
    def starts(self) -> np.ndarray:
        return self.segments[:, 0, :]

    @property
    def ends(self) -> np.ndarray:
        return self.segments[:, 1, :]

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.ends - self.starts, axis=1).sum())

    def closure_gap(self) -> float:
        return float(np.linalg.norm(self.segments[-1, 1] - self.segments[0, 0]))

    def translated(self, offset) -> "WindingGeometry":
        seg = self.segments + np.asarray(offset, dtype=float)
        return WindingGeometry(self.coil_id, self.channel, seg, self.turns, self.wire)


@dataclass(frozen=True)
class ChamberSpec:
    inner_dimensions: tuple[float, float, float] = (0.10, 0.10, 0.06)
    ferrite_enabled: bool = True
    ferrite_gap: float = 0.01
    grid_resolution: tuple[int, int, int] = (21, 21, 13)
    ferrite_calibration: float = 1.0


@dataclass(frozen=True)
class NanoparticleSample:
    name: str
    metal_concentration: float
    medium_heat_capacity: float = 4180.0
    medium_density: float = 1000.0
    # channel id -> W per kg of metal
    sar_per_channel: dict = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class ResonantNetwork:
    channel: int
    coil_half_inductances: tuple[float, float]
    mutual: float
    series_resistance: float
    compensation: tuple[float, float]
    dc_bus_voltage: float = 48.0
    # stock capacitor values available to each half's bank
    capacitor_stock: tuple[tuple[float, ...], tuple[float, ...]] = ((), ())

    def equivalent_inductance(self, half: int = 0) -> float:
        return self.coil_half_inductances[half] + self.mutual


@dataclass(frozen=True)
class ThermalParams:
    copper_resistivity: float = 1.72e-8
    copper_specific_heat: float = 385.0
    copper_density: float = 8960.0
    coolant_sink_conductance: float = 5.0
    ambient: float = 29.3
    wall_rate_limit: float = 0.35
    proximity_factor: float = 1.5
    # share of channel coil loss reaching the enclosure inner wall
    wall_loss_fraction: float = 0.05
    wall_heat_capacity: float = 300.0


@dataclass(frozen=True)
class ChamberConfig:
    channels: tuple[ChannelSpec, ...]
    windings: tuple[WindingGeometry, ...]
    chamber: ChamberSpec
    networks: tuple[ResonantNetwork, ...]
    samples: tuple[NanoparticleSample, ...] = ()
    thermal: ThermalParams = ThermalParams()

    def channel(self, channel_id: int) -> ChannelSpec:
        for ch in self.channels:
            if ch.id == channel_id:
                return ch
        raise KeyError(f"no channel {channel_id}")

    def network(self, channel_id: int) -> ResonantNetwork:
        for net in self.networks:
            if net.channel == channel_id:
                return net
        raise KeyError(f"no network for channel {channel_id}")

    def windings_for(self, channel_id: int) -> tuple[WindingGeometry, ...]:
        return tuple(w for w in self.windings if w.channel == channel_id)

    def winding(self, coil_id: str) -> WindingGeometry:
        for w in self.windings:
            if w.coil_id == coil_id:
                return w
        raise KeyError(f"no winding {coil_id}")

    def sample(self, name: str) -> NanoparticleSample:
        for s in self.samples:
            if s.name == name:
                return s
        raise KeyError(f"no sample {name!r}")
