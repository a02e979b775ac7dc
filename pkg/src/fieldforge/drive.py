"""Inverter drive waveforms and coupled series-RLC transient simulation.

Each channel is one series loop: the two coil halves run in synchrony, so a
half behaves as ``L_half + M`` in series with its own bank. The two channel
loops couple through ``M_x = k * sqrt(L1 * L2)``. State is (I, V_cap) per
channel, integrated with fixed-step RK4 and sampled every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .model import ResonantNetwork

WAVEFORMS = ("pwm", "sine")


class SolverError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class DriveWaveformSpec:
    frequency: float
    duty: float
    bus_voltage: float = 48.0
    interleave_submodules: int = 1
    phase: float = 0.0
    # "sine" replaces the pulse train with bus_voltage * sin(wt + phase)
    waveform: str = "pwm"

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"frequency must be > 0, got {self.frequency}")
        if not 0.0 <= self.duty <= 1.0:
            raise ValueError(f"duty must be in [0, 1], got {self.duty}")
        if self.interleave_submodules not in (1, 2):
            raise ValueError(f"submodules must be 1 or 2, got {self.interleave_submodules}")
        if self.waveform not in WAVEFORMS:
            raise ValueError(f"waveform must be one of {WAVEFORMS}")

    @property
    def period(self) -> float:
        return 1.0 / self.frequency

    @property
    def active(self) -> bool:
        if self.waveform == "sine":
            return self.bus_voltage != 0.0
        return self.duty > 0.0 and self.bus_voltage != 0.0


def idle_drive(frequency: float) -> DriveWaveformSpec:
    return DriveWaveformSpec(frequency=frequency, duty=0.0)


def fundamental_amplitude(bus_voltage: float, duty: float) -> float:
    """Peak of the first harmonic of the biphasic pulse train."""
    return 4.0 * bus_voltage / math.pi * math.sin(duty * math.pi / 2.0)


# --------------------------------------------------------------- waveform ---


@numba.njit(cache=True, nogil=True)
def _pulse(t, f, duty, vbus, phase, sub, which):
    """Drive voltage at ``t``; ``which`` selects submodule (-1 = all pulses).

    Pulses are numbered from 1 by half-period; submodule 0 fires the odd ones.
    """
    if duty <= 0.0:
        return 0.0
    tau = t * f + phase / (2.0 * math.pi)
    n = math.floor(2.0 * tau)
    x = 2.0 * tau - n
    if abs(x - 0.5) > 0.5 * duty:
        return 0.0
    if which >= 0 and sub == 2 and (n % 2) != which:
        return 0.0
    if n % 2 == 0:
        return vbus
    return -vbus


@numba.njit(cache=True, nogil=True)
def _drive(t, f, duty, vbus, phase, sub, sine):
    if sine:
        return vbus * math.sin(2.0 * math.pi * f * t + phase)
    if sub == 2:
        return _pulse(t, f, duty, vbus, phase, 2, 0) + _pulse(t, f, duty, vbus, phase, 2, 1)
    return _pulse(t, f, duty, vbus, phase, 1, -1)


@numba.njit(cache=True, nogil=True)
def _drive_array(t, f, duty, vbus, phase, sub, sine, which):
    out = np.empty(t.shape[0])
    for i in range(t.shape[0]):
        if which < 0:
            out[i] = _drive(t[i], f, duty, vbus, phase, sub, sine)
        else:
            out[i] = _pulse(t[i], f, duty, vbus, phase, sub, which)
    return out


def _spec_args(spec: DriveWaveformSpec):
    return (
        float(spec.frequency),
        float(spec.duty),
        float(spec.bus_voltage),
        float(spec.phase),
        int(spec.interleave_submodules),
        spec.waveform == "sine",
    )


def pwm_voltage(spec: DriveWaveformSpec, t) -> np.ndarray:
    """Biphasic pulse train: +V centred in the first half-period, -V in the second.

    Each pulse is ``duty * T / 2`` wide. Scalar in, float out; array in, array out.
    """
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(arr < 0):
        raise ValueError("t must be >= 0")
    out = _drive_array(arr, *_spec_args(spec), -1)
    return float(out[0]) if np.ndim(t) == 0 else out


def interleave_schedule(spec: DriveWaveformSpec, t) -> list[np.ndarray]:
    """Per-submodule voltage trains; their sum is :func:`pwm_voltage`."""
    if spec.interleave_submodules not in (1, 2):
        raise ValueError("submodules must be 1 or 2")
    arr = np.asarray(t, dtype=float)
    args = _spec_args(spec)
    if spec.interleave_submodules == 1:
        return [_drive_array(arr, *args, -1)]
    return [_drive_array(arr, *args, w) for w in (0, 1)]


def transition_count(v: np.ndarray) -> int:
    """Number of level changes in a sampled switching waveform."""
    return int(np.count_nonzero(np.diff(np.asarray(v)) != 0.0))


# ------------------------------------------------------------- simulation ---


@dataclass(frozen=True, eq=False)
class SimTrace:
    time: np.ndarray
    currents: np.ndarray  # (channels, samples)
    coil_voltages: np.ndarray  # inductive voltage across one half
    drive_voltages: np.ndarray
    step: float
    frequencies: tuple[float, ...]
    active: tuple[bool, ...]
    channels: tuple[int, ...] = (1, 2)

    def __post_init__(self):
        n = self.time.shape[0]
        for arr in (self.currents, self.coil_voltages, self.drive_voltages):
            if arr.shape[-1] != n:
                raise ValueError("trace arrays must share the sample count")
        if not self.step > 0:
            raise ValueError("step must be > 0")

    @property
    def n_channels(self) -> int:
        return self.currents.shape[0]


@numba.njit(cache=True, nogil=True)
def _deriv(t, x, linv, r, cinv, f, duty, vbus, phase, sub, sine, vd, dx):
    n = r.shape[0]
    for c in range(n):
        vd[c] = _drive(t, f[c], duty[c], vbus[c], phase[c], sub[c], sine[c])
    for c in range(n):
        acc = 0.0
        for j in range(n):
            acc += linv[c, j] * (vd[j] - r[j] * x[2 * j] - x[2 * j + 1])
        dx[2 * c] = acc
        dx[2 * c + 1] = x[2 * c] * cinv[c]


@numba.njit(cache=True, nogil=True)
def _rk4(x0, linv, r, cinv, f, duty, vbus, phase, sub, sine, h, nsteps):
    n = r.shape[0]
    m = 2 * n
    cur = np.empty((n, nsteps + 1))
    vcoil = np.empty((n, nsteps + 1))
    vdrv = np.empty((n, nsteps + 1))
    x = x0.copy()
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    vd = np.empty(n)
    fail = -1
    for i in range(nsteps + 1):
        t = i * h
        for c in range(n):
            v = _drive(t, f[c], duty[c], vbus[c], phase[c], sub[c], sine[c])
            cur[c, i] = x[2 * c]
            vdrv[c, i] = v
            vcoil[c, i] = v - r[c] * x[2 * c] - x[2 * c + 1]
        if i == nsteps:
            break
        _deriv(t, x, linv, r, cinv, f, duty, vbus, phase, sub, sine, vd, k1)
        for j in range(m):
            tmp[j] = x[j] + 0.5 * h * k1[j]
        _deriv(t + 0.5 * h, tmp, linv, r, cinv, f, duty, vbus, phase, sub, sine, vd, k2)
        for j in range(m):
            tmp[j] = x[j] + 0.5 * h * k2[j]
        _deriv(t + 0.5 * h, tmp, linv, r, cinv, f, duty, vbus, phase, sub, sine, vd, k3)
        for j in range(m):
            tmp[j] = x[j] + h * k3[j]
        _deriv(t + h, tmp, linv, r, cinv, f, duty, vbus, phase, sub, sine, vd, k4)
        ok = True
        for j in range(m):
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            if not math.isfinite(x[j]):
                ok = False
        if not ok:
            fail = i + 1
            break
    return cur, vcoil, vdrv, fail


def natural_frequency(network: ResonantNetwork, half: int = 0) -> float:
    return 1.0 / (2.0 * math.pi * math.sqrt(network.equivalent_inductance(half) * network.compensation[half]))


def default_step(drives, networks=(), halves=None) -> float:
    """T_fast / 400, counting both drive and natural frequencies."""
    halves = halves or (0,) * len(networks)
    freqs = [d.frequency for d in drives] + [natural_frequency(n, h) for n, h in zip(networks, halves)]
    return 1.0 / (400.0 * max(freqs))


def simulate_transient(
    networks,
    drives,
    cross_coupling: float = 0.0,
    duration: float | None = None,
    step: float | None = None,
    halves=None,
    initial_state=None,
    channels=None,
) -> SimTrace:
    """Integrate one or two coupled channel loops.

    ``initial_state`` is (channels, 2) of (current, capacitor voltage).
    Duration defaults to 20 periods of the slowest drive.
    """
    networks = tuple(networks)
    drives = tuple(drives)
    n = len(networks)
    if n not in (1, 2) or len(drives) != n:
        raise ValueError("need one or two networks with one drive each")
    if not 0.0 <= cross_coupling < 1.0:
        raise ValueError(f"cross_coupling must be in [0, 1), got {cross_coupling}")
    halves = tuple(halves) if halves is not None else (0,) * n
    channels = tuple(channels) if channels is not None else tuple(net.channel for net in networks)

    t_fast = min([d.period for d in drives] + [1.0 / natural_frequency(nw, h) for nw, h in zip(networks, halves)])
    t_slow = max(d.period for d in drives)
    if step is None:
        step = default_step(drives, networks, halves)
    if duration is None:
        duration = 20.0 * t_slow
    if not step > 0 or step > t_fast / 200.0 * (1 + 1e-12):
        raise ValueError(f"step {step:.3g} s exceeds T_fast/200 = {t_fast / 200:.3g} s")
    if duration < 20.0 * t_slow * (1 - 1e-12):
        raise ValueError(f"duration {duration:.3g} s is shorter than 20 periods of the slower channel")

    leq = np.array([nw.equivalent_inductance(h) for nw, h in zip(networks, halves)])
    lmat = np.diag(leq)
    if n == 2:
        mx = cross_coupling * math.sqrt(leq[0] * leq[1])
        lmat[0, 1] = lmat[1, 0] = mx
    linv = np.linalg.inv(lmat)
    r = np.array([nw.series_resistance for nw in networks], dtype=float)
    cinv = np.array([1.0 / nw.compensation[h] for nw, h in zip(networks, halves)])
    x0 = np.zeros(2 * n) if initial_state is None else np.asarray(initial_state, dtype=float).reshape(2 * n).copy()

    nsteps = int(round(duration / step))
    f = np.array([d.frequency for d in drives], dtype=float)
    duty = np.array([d.duty for d in drives], dtype=float)
    vbus = np.array([d.bus_voltage for d in drives], dtype=float)
    phase = np.array([d.phase for d in drives], dtype=float)
    sub = np.array([d.interleave_submodules for d in drives], dtype=np.int64)
    sine = np.array([d.waveform == "sine" for d in drives], dtype=np.bool_)

    cur, vcoil, vdrv, fail = _rk4(x0, linv, r, cinv, f, duty, vbus, phase, sub, sine, float(step), nsteps)
    if fail >= 0:
        raise SolverError(f"state diverged at t = {fail * step:.6g} s", time=fail * step)
    time = np.arange(nsteps + 1) * step
    return SimTrace(
        time=time,
        currents=cur,
        coil_voltages=vcoil,
        drive_voltages=vdrv,
        step=float(step),
        frequencies=tuple(float(v) for v in f),
        active=tuple(d.active for d in drives),
        channels=channels,
    )


def lc_energy(trace: SimTrace, networks, halves=None, cross_coupling: float = 0.0) -> np.ndarray:
    """Stored energy 0.5 I^T L I + sum 0.5 C V^2 along the trace."""
    networks = tuple(networks)
    halves = halves or (0,) * len(networks)
    leq = np.array([nw.equivalent_inductance(h) for nw, h in zip(networks, halves)])
    cap = np.array([nw.compensation[h] for nw, h in zip(networks, halves)])
    i = trace.currents
    vcap = trace.drive_voltages - trace.coil_voltages - np.array([nw.series_resistance for nw in networks])[:, None] * i
    e = 0.5 * (leq[:, None] * i**2).sum(axis=0) + 0.5 * (cap[:, None] * vcap**2).sum(axis=0)
    if len(networks) == 2 and cross_coupling:
        e += cross_coupling * math.sqrt(leq[0] * leq[1]) * i[0] * i[1]
    return e


# ----------------------------------------------------------------- metrics ---


@dataclass(frozen=True)
class SteadyStateMetrics:
    peak_current: tuple[float, ...]
    peak_coil_voltage: tuple[float, ...]
    crosstalk_ratio: float
    settle_cycles: int


def _cycle_peaks(trace: SimTrace, c: int) -> np.ndarray:
    period = 1.0 / trace.frequencies[c]
    idx = np.floor(trace.time / period + 1e-9).astype(np.int64)
    full = int(idx[-1])  # last, possibly partial, cycle is dropped
    mag = np.abs(trace.currents[c])
    peaks = np.zeros(full)
    np.maximum.at(peaks, idx[idx < full], mag[idx < full])
    return peaks


def steady_state(trace: SimTrace, tail_cycles: int = 20, settle_tolerance: float = 0.02) -> SteadyStateMetrics:
    """Peaks over the last ``tail_cycles`` periods of the slowest channel.

    ``crosstalk_ratio`` is idle peak / active peak when exactly one channel is
    driven, 0 when none is, and NaN when both are.
    """
    t_slow = 1.0 / min(trace.frequencies)
    window = tail_cycles * t_slow
    t_end = trace.time[-1]
    if window > t_end * (1 + 1e-9):
        raise ValueError(f"trace of {t_end:.3g} s is shorter than {tail_cycles} cycles ({window:.3g} s)")
    mask = trace.time >= t_end - window - 1e-15
    peak_i = tuple(float(np.max(np.abs(trace.currents[c, mask]))) for c in range(trace.n_channels))
    peak_v = tuple(float(np.max(np.abs(trace.coil_voltages[c, mask]))) for c in range(trace.n_channels))

    active = [c for c in range(trace.n_channels) if trace.active[c]]
    if len(active) == 1 and trace.n_channels == 2:
        a = active[0]
        crosstalk = peak_i[1 - a] / peak_i[a] if peak_i[a] > 0 else 0.0
    elif not active or trace.n_channels == 1:
        crosstalk = 0.0
    else:
        crosstalk = float("nan")

    settle = 0
    for c in active:
        peaks = _cycle_peaks(trace, c)
        final = peak_i[c]
        if final <= 0 or len(peaks) == 0:
            continue
        outside = np.nonzero(np.abs(peaks - final) > settle_tolerance * final)[0]
        settle = max(settle, int(outside[-1]) + 1 if len(outside) else 0)
    return SteadyStateMetrics(peak_i, peak_v, crosstalk, settle)


# ------------------------------------------------------------------- power ---


@dataclass(frozen=True)
class InputPower:
    dissipated: float  # W, both halves
    apparent: float  # VA
    line_current: float  # A rms per phase


def line_current(apparent_power: float, line_voltage: float = 208.0) -> float:
    return apparent_power / (math.sqrt(3.0) * line_voltage)


def apparent_power(line_current_rms: float, line_voltage: float = 208.0) -> float:
    return math.sqrt(3.0) * line_voltage * line_current_rms


def estimate_input_power(
    peak_current: float,
    network: ResonantNetwork,
    line_voltage: float = 208.0,
    efficiency: float = 1.0,
    halves: int = 2,
) -> InputPower:
    """Mains draw needed to sustain ``peak_current`` in every coil half.

    Each half dissipates ``0.5 I^2 R``; apparent power is that over
    ``efficiency`` and the per-phase current follows from a balanced
    three-phase supply at ``line_voltage``.
    """
    if not 0.0 < efficiency <= 1.0:
        raise ValueError("efficiency must be in (0, 1]")
    p = halves * 0.5 * peak_current**2 * network.series_resistance
    s = p / efficiency
    return InputPower(p, s, line_current(s, line_voltage))


# ---------------------------------------------------------------- export ---

TRACE_CSV_HEADER = ["t_s", "I1_A", "I2_A", "V1_V", "V2_V", "Vdrive1_V", "Vdrive2_V"]


def trace_columns(trace: SimTrace) -> np.ndarray:
    """(samples, 7) array in :data:`TRACE_CSV_HEADER` order; missing channels are zero."""
    n = trace.time.shape[0]
    out = np.zeros((n, 7))
    out[:, 0] = trace.time
    for c, ch in enumerate(trace.channels):
        if ch not in (1, 2):
            continue
        k = ch - 1
        out[:, 1 + k] = trace.currents[c]
        out[:, 3 + k] = trace.coil_voltages[c]
        out[:, 5 + k] = trace.drive_voltages[c]
    return out


def write_trace_csv(trace: SimTrace, path, decimate: int = 1) -> None:
    cols = trace_columns(trace)[:: max(1, int(decimate))]
    np.savetxt(path, cols, fmt="%.12g", delimiter=",", header=",".join(TRACE_CSV_HEADER), comments="")
