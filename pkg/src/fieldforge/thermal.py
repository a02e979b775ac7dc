"""Coil losses, lumped coil and wall heating, and nanoparticle SAR."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import ChamberConfig, LitzWireSpec, NanoparticleSample, ResonantNetwork, ThermalParams, WindingGeometry
from .units import MU0


def skin_depth(resistivity: float, frequency: float) -> float:
    if frequency <= 0:
        return math.inf
    return math.sqrt(2.0 * resistivity / (2.0 * math.pi * frequency * MU0))


def skin_factor(strand_diameter: float, resistivity: float, frequency: float) -> float:
    """Low-frequency skin correction ``1 + x^4 / 3`` with ``x = d / (2 delta)``.

    The series only holds while the strand radius is below a skin depth; past
    that, ``x`` is clamped at 1 and a warning is issued.
    """
    x = strand_diameter / (2.0 * skin_depth(resistivity, frequency))
    if x > 1.0:
        warnings.warn(f"strand radius exceeds skin depth (x = {x:.2f}); skin factor clamped", stacklevel=2)
        x = 1.0
    return 1.0 + x**4 / 3.0


def dc_resistance(wire: LitzWireSpec, length: float) -> float:
    return wire.conductor_resistivity * length / wire.copper_area


def litz_resistance(wire: LitzWireSpec, length: float, frequency: float) -> float:
    """AC resistance of a litz conductor, skin effect only."""
    if not length > 0:
        raise ValueError("length must be positive")
    return dc_resistance(wire, length) * skin_factor(wire.strand_diameter, wire.conductor_resistivity, frequency)


@dataclass(frozen=True, eq=False)
class HeatingResult:
    rate: float  # degC/s, mean over the run
    delta_T: float
    duration: float
    subject: str
    times: np.ndarray | None = None
    temperatures: np.ndarray | None = None

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("duration must be positive")


def _rk4_scalar(f, y0: float, duration: float, n: int):
    h = duration / n
    ts = np.arange(n + 1) * h
    ys = np.empty(n + 1)
    y = y0
    ys[0] = y
    for i in range(n):
        t = ts[i]
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[i + 1] = y
    return ts, ys


def coil_loss(wire: LitzWireSpec, geometry: WindingGeometry, current: float, frequency: float, params: ThermalParams) -> float:
    """Mean power in one coil half at peak ``current``, proximity included."""
    r_ac = litz_resistance(wire, geometry.length, frequency) * params.proximity_factor
    return 0.5 * current**2 * r_ac


def copper_mass(wire: LitzWireSpec, geometry: WindingGeometry, params: ThermalParams) -> float:
    return wire.copper_area * geometry.length * params.copper_density


def coil_temperature_rise(
    network: ResonantNetwork,
    wire: LitzWireSpec,
    geometry: WindingGeometry,
    current: float,
    duration: float,
    params: ThermalParams,
    steps: int = 2000,
    initial_temperature: float | None = None,
    half: int = 0,
) -> HeatingResult:
    """Lumped copper temperature of one coil half under sustained drive.

    m c dT/dt = P - G (T - T_coolant), with the coolant held at ambient and
    the drive at the network's resonant frequency.
    """
    if not duration > 0:
        raise ValueError("duration must be positive")
    freq = 1.0 / (2.0 * math.pi * math.sqrt(network.equivalent_inductance(half) * network.compensation[half]))
    p = coil_loss(wire, geometry, current, freq, params)
    mc = copper_mass(wire, geometry, params) * params.copper_specific_heat
    g = params.coolant_sink_conductance
    t0 = params.ambient if initial_temperature is None else initial_temperature

    ts, temps = _rk4_scalar(lambda t, T: (p - g * (T - params.ambient)) / mc, t0, duration, steps)
    dT = float(temps[-1] - temps[0])
    return HeatingResult(dT / duration, dT, duration, geometry.coil_id, ts, temps)


def channel_coil_loss(config: ChamberConfig, channel: int, current: float) -> float:
    """Total copper loss of every half of ``channel`` at peak ``current``."""
    net = config.network(channel)
    total = 0.0
    for half, w in enumerate(config.windings_for(channel)):
        f = 1.0 / (2.0 * math.pi * math.sqrt(net.equivalent_inductance(half) * net.compensation[half]))
        total += coil_loss(w.wire, w, current, f, config.thermal)
    return total


def wall_temperature_rise(channel_loss: float, duration: float, params: ThermalParams) -> HeatingResult:
    """Enclosure inner wall as a constant-rate lump fed by a share of coil loss."""
    rate = params.wall_loss_fraction * channel_loss / params.wall_heat_capacity
    return HeatingResult(rate, rate * duration, duration, "wall")


def sar(sample: NanoparticleSample, delta_T: float, delta_t: float) -> float:
    """Specific absorption rate in W per kg of metal."""
    if not delta_t > 0:
        raise ValueError("delta_t must be positive")
    return sample.medium_heat_capacity * sample.medium_density / sample.metal_concentration * delta_T / delta_t


def heating_curve(sample: NanoparticleSample, channel: int, duration: float) -> HeatingResult:
    """Constant-rate heating of a sample from its tabulated SAR."""
    if channel not in sample.sar_per_channel:
        raise KeyError(f"sample {sample.name!r} has no SAR for channel {channel}")
    rate = sample.sar_per_channel[channel] * sample.metal_concentration / (
        sample.medium_heat_capacity * sample.medium_density
    )
    return HeatingResult(rate, rate * duration, duration, sample.name)


def selectivity_matrix(samples, channels=(1, 2)) -> dict[str, dict[int, float]]:
    """Heating rate (degC/s) per sample and channel."""
    return {s.name: {c: heating_curve(s, c, 1.0).rate for c in channels} for s in samples}


@dataclass(frozen=True)
class SafetyVerdict:
    passed: bool
    margin: float  # limit - rate, degC/s


def safety_check(result: HeatingResult, params: ThermalParams) -> SafetyVerdict:
    return SafetyVerdict(result.rate < params.wall_rate_limit, params.wall_rate_limit - result.rate)
