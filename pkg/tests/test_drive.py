import math

import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldforge.drive import (
    DriveWaveformSpec,
    SimTrace,
    SolverError,
    apparent_power,
    estimate_input_power,
    fundamental_amplitude,
    idle_drive,
    interleave_schedule,
    lc_energy,
    line_current,
    pwm_voltage,
    simulate_transient,
    steady_state,
    trace_columns,
    transition_count,
    write_trace_csv,
)
from fieldforge.model import ResonantNetwork
from fieldforge.resonance import predicted_resonance

F1 = 49342.36480832063


# ---------------------------------------------------------------- waveform ---


def test_pulse_placement():
    spec = DriveWaveformSpec(1e3, 0.4, 48.0)
    T = 1e-3
    # +V centred at T/4, -V centred at 3T/4, each 0.4 * T/2 wide
    assert pwm_voltage(spec, 0.25 * T) == 48.0
    assert pwm_voltage(spec, 0.75 * T) == -48.0
    assert pwm_voltage(spec, 0.25 * T + 0.09 * T) == 48.0
    assert pwm_voltage(spec, 0.25 * T + 0.11 * T) == 0.0
    assert pwm_voltage(spec, 0.01 * T) == 0.0


def test_pulse_width_and_mean():
    spec = DriveWaveformSpec(1e3, 0.3, 10.0)
    t = (np.arange(200000) + 0.5) / 200000 * 1e-3
    v = pwm_voltage(spec, t)
    assert np.mean(v > 0) == pytest.approx(0.15, abs=1e-4)
    assert np.mean(v < 0) == pytest.approx(0.15, abs=1e-4)
    assert abs(v.mean()) < 1e-9


@pytest.mark.parametrize("duty", [0.1, 0.4, 0.75, 1.0])
def test_fundamental_amplitude(duty):
    spec = DriveWaveformSpec(1.0, duty, 48.0)
    n = 100000
    t = (np.arange(n) + 0.5) / n
    v = pwm_voltage(spec, t)
    c1 = 2 * np.mean(v * np.sin(2 * np.pi * t))
    assert c1 == pytest.approx(fundamental_amplitude(48.0, duty), rel=1e-3)


def test_zero_duty_is_silent():
    t = np.linspace(0, 1e-3, 1001)
    assert not np.any(pwm_voltage(DriveWaveformSpec(5e3, 0.0), t))


def test_phase_shifts_waveform():
    a = DriveWaveformSpec(1e3, 0.5, phase=math.pi / 2)
    b = DriveWaveformSpec(1e3, 0.5)
    t = np.linspace(0, 2e-3, 977)
    assert np.array_equal(pwm_voltage(a, t), pwm_voltage(b, t + 0.25e-3))


@pytest.mark.parametrize("kwargs", [dict(duty=1.2), dict(duty=-0.1), dict(interleave_submodules=3), dict(frequency=0)])
def test_spec_invariants(kwargs):
    base = dict(frequency=1e3, duty=0.5)
    base.update(kwargs)
    with pytest.raises(ValueError):
        DriveWaveformSpec(**base)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        pwm_voltage(DriveWaveformSpec(1e3, 0.5), -1.0)


def test_interleave_partitions_pulses():
    spec = DriveWaveformSpec(553e3, 0.4, 48.0, interleave_submodules=2)
    t = np.arange(0, 10 / 553e3, 1 / 553e3 / 1000)
    a, b = interleave_schedule(spec, t)
    assert np.array_equal(a + b, pwm_voltage(spec, t))
    # a fires the odd-numbered (positive) pulses, b the even-numbered ones
    assert a.max() == 48.0 and a.min() == 0.0
    assert b.min() == -48.0 and b.max() == 0.0
    assert transition_count(a) * 2 == transition_count(a + b)
    assert transition_count(b) * 2 == transition_count(a + b)


def test_single_submodule_schedule_is_the_train():
    spec = DriveWaveformSpec(50e3, 0.1)
    t = np.linspace(0, 1e-4, 5000)
    (only,) = interleave_schedule(spec, t)
    assert np.array_equal(only, pwm_voltage(spec, t))


# -------------------------------------------------------------- simulation ---


def lossless(L=5.1e-6, C=2040e-9):
    return ResonantNetwork(1, (L, L), 0.0, 0.0, (C, C))


def test_zero_drive_gives_zero_trace(ch1_net, ch2_net):
    tr = simulate_transient([ch1_net, ch2_net], [idle_drive(F1), idle_drive(553e3)], 0.01, duration=20 / F1)
    assert not np.any(tr.currents) and not np.any(tr.coil_voltages) and not np.any(tr.drive_voltages)
    m = steady_state(tr)
    assert m.peak_current == (0.0, 0.0) and m.crosstalk_ratio == 0.0 and m.settle_cycles == 0


def energy_drift(step_fraction):
    net = lossless()
    f0 = predicted_resonance(net)
    tr = simulate_transient([net], [idle_drive(f0)], duration=100 / f0, step=1 / f0 / step_fraction, initial_state=[[10.0, 0.0]])
    e = lc_energy(tr, [net])
    return abs(e[-1] - e[0]) / e[0], tr


def test_lossless_energy_conserved():
    drift, tr = energy_drift(400)
    assert drift < 1e-3
    assert np.max(np.abs(tr.currents)) == pytest.approx(10.0, rel=1e-6)


def test_rk4_order():
    coarse, _ = energy_drift(200)
    fine, _ = energy_drift(400)
    assert coarse > 1e-12
    assert coarse / fine >= 8.0


def test_channel1_operating_point(ch1_net):
    f0 = predicted_resonance(ch1_net)
    tr = simulate_transient([ch1_net], [DriveWaveformSpec(f0, 0.1, 48.0)], duration=8e-3)
    m = steady_state(tr)
    assert m.peak_current[0] == pytest.approx(1000.0, rel=0.10)
    assert m.peak_coil_voltage[0] == pytest.approx(1500.0, rel=0.10)


def test_phasor_oracle(ch1_net):
    f0 = predicted_resonance(ch1_net)
    tr = simulate_transient([ch1_net], [DriveWaveformSpec(f0, 0.0, 10.0, waveform="sine")], duration=8e-3)
    m = steady_state(tr)
    assert m.peak_current[0] == pytest.approx(10.0 / ch1_net.series_resistance, rel=0.02)


def test_amplitude_monotone_in_duty(ch2_net):
    f0 = predicted_resonance(ch2_net)
    peaks = []
    for duty in np.linspace(0, 1, 6):
        tr = simulate_transient([ch2_net], [DriveWaveformSpec(f0, duty)], duration=3e-4)
        peaks.append(steady_state(tr).peak_current[0])
    assert peaks[0] == 0.0
    assert np.all(np.diff(peaks) >= 0)


def test_interleaving_does_not_change_trace(ch1_net, ch2_net):
    f2 = predicted_resonance(ch2_net)
    args = dict(cross_coupling=0.005, duration=20 / F1)
    one = simulate_transient([ch1_net, ch2_net], [DriveWaveformSpec(F1, 0.1), DriveWaveformSpec(f2, 0.4)], **args)
    two = simulate_transient(
        [ch1_net, ch2_net], [DriveWaveformSpec(F1, 0.1), DriveWaveformSpec(f2, 0.4, interleave_submodules=2)], **args
    )
    assert np.array_equal(one.currents, two.currents)
    assert np.array_equal(one.drive_voltages, two.drive_voltages)


@pytest.mark.parametrize("active", [0, 1])
def test_crosstalk_below_one_percent(ch1_net, ch2_net, active):
    f = (predicted_resonance(ch1_net), predicted_resonance(ch2_net))
    duty = (0.1, 0.4)
    drives = [DriveWaveformSpec(f[c], duty[c]) if c == active else idle_drive(f[c]) for c in (0, 1)]
    tr = simulate_transient([ch1_net, ch2_net], drives, cross_coupling=0.005, duration=(7e-3, 1.5e-3)[active])
    m = steady_state(tr)
    assert m.peak_current[active] > 0.9 * (1000, 260)[active]
    assert 0 < m.crosstalk_ratio < 0.01


def test_both_driven_crosstalk_undefined(ch1_net, ch2_net):
    tr = simulate_transient(
        [ch1_net, ch2_net], [DriveWaveformSpec(F1, 0.1), DriveWaveformSpec(553e3, 0.4)], duration=20 / F1
    )
    assert math.isnan(steady_state(tr).crosstalk_ratio)


def test_step_and_duration_preconditions(ch1_net):
    d = DriveWaveformSpec(F1, 0.1)
    with pytest.raises(ValueError):
        simulate_transient([ch1_net], [d], step=1 / F1 / 100)
    with pytest.raises(ValueError):
        simulate_transient([ch1_net], [d], duration=5 / F1)
    with pytest.raises(ValueError):
        simulate_transient([ch1_net], [d, d])


def test_divergence_is_reported(ch1_net):
    unstable = replace(ch1_net, series_resistance=-5.0)
    with pytest.raises(SolverError) as err:
        simulate_transient([unstable], [DriveWaveformSpec(F1, 0.1)], duration=200 / F1)
    assert err.value.time is not None and err.value.time > 0


def test_initial_state_decays_with_resistance(ch1_net):
    f0 = predicted_resonance(ch1_net)
    tr = simulate_transient([ch1_net], [idle_drive(f0)], duration=40 / f0, initial_state=[[100.0, 0.0]])
    tau = 2 * ch1_net.equivalent_inductance() / ch1_net.series_resistance
    late = np.abs(tr.currents[0, tr.time > tr.time[-1] - 1 / f0]).max()
    assert late == pytest.approx(100.0 * math.exp(-tr.time[-1] / tau), rel=0.02)


# ----------------------------------------------------------------- metrics ---


def synthetic(amplitude, f=1e3, n_per=400, cycles=30):
    h = 1 / f / n_per
    t = np.arange(cycles * n_per + 1) * h
    i = amplitude * np.sin(2 * np.pi * f * t + 0.3)
    z = np.zeros_like(t)
    return SimTrace(t, np.stack([i, z]), np.stack([z, z]), np.stack([z, z]), h, (f, f), (True, False))


def test_peak_of_sinusoid():
    A = 7.0
    m = steady_state(synthetic(A))
    assert A * math.cos(math.pi / 400) <= m.peak_current[0] <= A
    assert m.crosstalk_ratio == 0.0


def test_tail_longer_than_trace():
    with pytest.raises(ValueError):
        steady_state(synthetic(1.0, cycles=10), tail_cycles=20)


def test_trace_arrays_must_agree():
    with pytest.raises(ValueError):
        SimTrace(np.zeros(3), np.zeros((1, 4)), np.zeros((1, 3)), np.zeros((1, 3)), 1.0, (1.0,), (False,))


def test_trace_export(tmp_path, ch1_net):
    tr = simulate_transient([ch1_net], [DriveWaveformSpec(F1, 0.1)])
    cols = trace_columns(tr)
    assert cols.shape == (tr.time.size, 7)
    assert not np.any(cols[:, [2, 4, 6]])
    write_trace_csv(tr, tmp_path / "a.csv", decimate=5)
    write_trace_csv(tr, tmp_path / "b.csv", decimate=5)
    text = (tmp_path / "a.csv").read_text()
    assert text.splitlines()[0] == "t_s,I1_A,I2_A,V1_V,V2_V,Vdrive1_V,Vdrive2_V"
    assert text == (tmp_path / "b.csv").read_text()


# ------------------------------------------------------------------- power ---


def test_line_current_for_nine_kva():
    assert line_current(9.0e3, 208.0) == pytest.approx(24.98, abs=0.01)
    assert apparent_power(25.0, 208.0) == pytest.approx(9006.7, rel=1e-4)
    assert apparent_power(14.0, 208.0) == pytest.approx(5043.8, rel=1e-4)
    assert line_current(0.0) == 0.0


def test_input_power_from_current(ch1_net):
    p = estimate_input_power(1000.0, ch1_net, efficiency=0.8)
    assert p.dissipated == pytest.approx(2 * 0.5 * 1000.0**2 * ch1_net.series_resistance)
    assert p.apparent == pytest.approx(p.dissipated / 0.8)
    assert p.line_current == pytest.approx(p.apparent / (math.sqrt(3) * 208.0))
    assert estimate_input_power(0.0, ch1_net).line_current == 0.0
    with pytest.raises(ValueError):
        estimate_input_power(1.0, ch1_net, efficiency=0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1e4), st.floats(100, 1000))
def test_line_current_inverts(s, v):
    assert apparent_power(line_current(s, v), v) == pytest.approx(s, rel=1e-12, abs=1e-9)
