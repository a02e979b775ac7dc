"""Compensation capacitance, capacitor-bank synthesis and resonance finding."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .drive import DriveWaveformSpec, fundamental_amplitude, simulate_transient, steady_state
from .model import ChamberConfig, ResonantNetwork

FEMTO = 1e-15


class BankError(ValueError):
    """No stock combination lands within tolerance of the target."""


def compensation_capacitance(frequency: float, self_inductance: float, mutual: float = 0.0) -> float:
    """Series capacitance that resonates with ``L + M`` at ``frequency``."""
    if not (frequency > 0 and self_inductance > 0 and mutual >= 0):
        raise ValueError("frequency and inductance must be positive, mutual non-negative")
    omega = 2.0 * math.pi * frequency
    return 1.0 / (omega**2 * (self_inductance + mutual))


def resonant_frequency(inductance: float, capacitance: float) -> float:
    if not (inductance > 0 and capacitance > 0):
        raise ValueError("inductance and capacitance must be positive")
    return 1.0 / (2.0 * math.pi * math.sqrt(inductance * capacitance))


def predicted_resonance(network: ResonantNetwork, half: int = 0) -> float:
    return resonant_frequency(network.equivalent_inductance(half), network.compensation[half])


def calibrate_series_resistance(bus_voltage: float, duty: float, current: float) -> float:
    """Loop resistance at which ``duty`` drives ``current`` at resonance."""
    if not (bus_voltage > 0 and 0 < duty <= 1 and current > 0):
        raise ValueError("bus voltage, duty and current must be positive")
    return fundamental_amplitude(bus_voltage, duty) / current


# ------------------------------------------------------------------ banks ---


@dataclass(frozen=True)
class CapacitorBank:
    """Two identical parallel groups connected in series.

    ``parts`` lists (value, count) for one group, counts >= 1.
    """

    parts: tuple[tuple[float, int], ...]

    def __post_init__(self):
        if not self.parts or any(c < 1 or v <= 0 for v, c in self.parts):
            raise ValueError(f"invalid bank {self.parts}")

    @property
    def group_capacitance(self) -> float:
        return math.fsum(v * c for v, c in self.parts)

    @property
    def effective_capacitance(self) -> float:
        return self.group_capacitance / 2.0

    @property
    def parts_per_group(self) -> int:
        return sum(c for _, c in self.parts)

    @property
    def total_parts(self) -> int:
        return 2 * self.parts_per_group

    def describe(self) -> str:
        group = " + ".join(f"{c} x {_nano(v)} nF" for v, c in self.parts)
        return f"({group}) / 2"


def _nano(v: float) -> str:
    return f"{v * 1e9:.6g}"


def compose_bank(target: float, stock, max_parts_per_group: int = 40, tolerance: float = 0.10) -> CapacitorBank:
    """Exhaustive search for the stock combination closest to ``target``.

    Ties go to fewer parts, then to the lexicographically smallest count
    vector over the stock sorted in descending value. Sums are compared in
    integer femtofarads so equal combinations tie exactly.
    """
    values = sorted({float(v) for v in stock}, reverse=True)
    if not values:
        raise ValueError("stock must not be empty")
    if any(v <= 0 for v in values):
        raise ValueError("stock values must be positive")
    if not target > 0:
        raise ValueError("target must be positive")
    ints = [int(round(v / FEMTO)) for v in values]
    goal = int(round(2.0 * target / FEMTO))  # group sum that hits the target

    best_key, best = None, None
    for counts in itertools.product(range(max_parts_per_group + 1), repeat=len(values)):
        n = sum(counts)
        if n == 0 or n > max_parts_per_group:
            continue
        key = (abs(sum(c * v for c, v in zip(counts, ints)) - goal), n, counts)
        if best_key is None or key < best_key:
            best_key, best = key, counts
    bank = CapacitorBank(tuple((v, c) for v, c in zip(values, best) if c > 0))
    if abs(bank.effective_capacitance - target) > tolerance * target:
        raise BankError(
            f"closest bank {bank.effective_capacitance:.4g} F misses {target:.4g} F by more than {tolerance:.0%}"
        )
    return bank


@dataclass(frozen=True)
class CapDesign:
    channel: int
    half: int
    c_calc: float
    bank: CapacitorBank
    f_predicted: float

    def as_record(self) -> dict:
        return {
            "channel": self.channel,
            "half": self.half,
            "C_calc_F": self.c_calc,
            "bank_parts": [{"value_F": v, "count_per_group": c} for v, c in self.bank.parts],
            "C_bank_F": self.bank.effective_capacitance,
            "f_predicted_Hz": self.f_predicted,
        }


def design_caps(config: ChamberConfig, target: str = "implemented", max_parts_per_group: int = 40) -> list[CapDesign]:
    """Per-half compensation design.

    ``target="implemented"`` rebuilds the configured bank value from stock;
    ``"calculated"`` searches for the stock combination closest to the
    ideal capacitance at the channel's nominal frequency.
    """
    if target not in ("implemented", "calculated"):
        raise ValueError("target must be 'implemented' or 'calculated'")
    rows = []
    for net in sorted(config.networks, key=lambda n: n.channel):
        spec = config.channel(net.channel)
        for half in (0, 1):
            c_calc = compensation_capacitance(spec.nominal_frequency, net.coil_half_inductances[half], net.mutual)
            goal = net.compensation[half] if target == "implemented" else c_calc
            bank = compose_bank(goal, net.capacitor_stock[half], max_parts_per_group)
            f = resonant_frequency(net.equivalent_inductance(half), bank.effective_capacitance)
            rows.append(CapDesign(net.channel, half + 1, c_calc, bank, f))
    return rows


# ------------------------------------------------------------------ sweep ---


@dataclass(frozen=True, eq=False)
class SweepResult:
    frequencies: np.ndarray
    peak_currents: np.ndarray
    f_peak: float

    @property
    def step(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


def settle_duration(network: ResonantNetwork, half: int = 0, time_constants: float = 7.0) -> float:
    """Time for the free response to decay by ``exp(-time_constants)``."""
    if network.series_resistance <= 0:
        raise ValueError("lossless network never settles")
    return time_constants * 2.0 * network.equivalent_inductance(half) / network.series_resistance


def sweep_resonance(
    network: ResonantNetwork,
    drive: DriveWaveformSpec,
    f_range: tuple[float, float],
    steps: int,
    half: int = 0,
    tail_cycles: int = 20,
    workers: int = 1,
) -> SweepResult:
    """Steady-state peak current over a frequency grid; argmax is the resonance.

    Each point is a full transient run long enough for the start-up beat to
    decay, so the result is an independent check on the closed form.
    """
    if steps < 8:
        raise ValueError("steps must be >= 8")
    lo, hi = f_range
    if not 0 < lo < hi:
        raise ValueError("f_range must be an increasing positive interval")
    freqs = np.linspace(lo, hi, steps)
    base = settle_duration(network, half)

    def run(f):
        d = DriveWaveformSpec(f, drive.duty, drive.bus_voltage, drive.interleave_submodules, drive.phase, drive.waveform)
        duration = max(base, 20.0 / f) + tail_cycles / f
        trace = simulate_transient([network], [d], duration=duration, halves=(half,))
        return steady_state(trace, tail_cycles).peak_current[0]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            peaks = np.array(list(pool.map(run, freqs)))
    else:
        peaks = np.array([run(f) for f in freqs])
    return SweepResult(freqs, peaks, float(freqs[int(np.argmax(peaks))]))
