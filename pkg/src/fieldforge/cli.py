"""``fieldforge`` command line: one config, seven subcommands.

Data goes to files under ``--out`` (and tables to stdout); logs go to
stderr. Exit status is 0 on success, 1 when the config is unreadable or
invalid, 2 when a solver or output step fails.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import drive, magnetics, resonance, thermal
from .config import ConfigError, dump_config, load_config, validate_config
from .model import ChamberConfig, ChamberSpec
from .units import UnitError

log = logging.getLogger("fieldforge")

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2

# published quantities the report compares against
MEASURED_RESONANCE = {1: 48.9e3, 2: 543e3}
MEASURED_VOLTAGE = {1: 1.5e3, 2: 1.8e3}
REPORTED_LINE_CURRENT = {1: 25.0, 2: 14.0}


@dataclass
class ScenarioResult:
    name: str
    inputs_digest: str
    outputs: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    acceptance: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        return {
            "scenario": self.name,
            "inputs_digest": self.inputs_digest,
            "outputs": self.outputs,
            "files": sorted(self.files),
            "acceptance": self.acceptance,
        }


def thread_limit() -> int:
    raw = os.environ.get("FIELDFORGE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring FIELDFORGE_THREADS=%r", raw)
    return os.cpu_count() or 1


def config_digest(cfg: ChamberConfig) -> str:
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()


# ----------------------------------------------------------------- export ---


def _clean(obj):
    """JSON-safe copy: NaN/inf become null, numpy scalars become floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=False) + "\n")


def write_rows(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)) and obj and isinstance(obj[0], (dict, list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def export(result: ScenarioResult, out_dir: Path, fmt: str) -> Path:
    """Write the scenario summary next to its data files."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{result.name}.{fmt}"
    record = result.as_record()
    if fmt == "json":
        write_json(path, record)
    else:
        rows = [(k, "" if v is None else v) for k, v in _flatten(_clean(record))]
        write_rows(path, ["key", "value"], rows)
    missing = [f for f in result.files if not (out_dir / f).exists()]
    if missing:
        raise OSError(f"expected output files missing: {missing}")
    return path


# ---------------------------------------------------------------- helpers ---


def _drive_for(cfg: ChamberConfig, channel: int, duty: float | None, frequency: float | None = None):
    spec = cfg.channel(channel)
    net = cfg.network(channel)
    return drive.DriveWaveformSpec(
        frequency=frequency or resonance.predicted_resonance(net),
        duty=spec.max_duty if duty is None else duty,
        bus_voltage=net.dc_bus_voltage,
        interleave_submodules=spec.interleave_submodules,
        phase=spec.phase,
    )


def geometry_coupling(cfg: ChamberConfig) -> tuple[float, magnetics.InductanceMatrix]:
    L = magnetics.inductance_matrix(cfg)
    return magnetics.channel_coupling(L, cfg), L


def _simulate(cfg, active, duty, duration, step, k):
    """Both channels; ``active`` lists the driven channel ids."""
    nets = [cfg.network(1), cfg.network(2)]
    drives = []
    for c in (1, 2):
        d = _drive_for(cfg, c, duty if c in active else 0.0)
        drives.append(d)
    if duration is None:
        duration = max(resonance.settle_duration(cfg.network(c)) for c in active) if active else None
        if duration is not None:
            duration += 20.0 / min(d.frequency for d in drives)
    trace = drive.simulate_transient(nets, drives, cross_coupling=k, duration=duration, step=step)
    return trace, drives


def _metrics_record(m: drive.SteadyStateMetrics) -> dict:
    return {
        "peak_current_A": {str(c + 1): v for c, v in enumerate(m.peak_current)},
        "peak_coil_voltage_V": {str(c + 1): v for c, v in enumerate(m.peak_coil_voltage)},
        "crosstalk_ratio": m.crosstalk_ratio,
        "settle_cycles": m.settle_cycles,
    }


# ------------------------------------------------------------ subcommands ---


def cmd_validate(cfg, args, out):
    report = validate_config(cfg)
    print(f"{len(report)} violations")
    for v in report:
        print(f"  {v}")
    res = ScenarioResult("validate", config_digest(cfg), {"violations": list(report.violations)})
    res.acceptance["valid"] = report.ok
    return res, (EXIT_OK if report.ok else EXIT_INVALID)


def cmd_design_caps(cfg, args, out):
    rows = resonance.design_caps(cfg, target=args.target, max_parts_per_group=args.max_parts)
    records = [r.as_record() for r in rows]
    print(f"{'ch':>2} {'half':>4} {'C_calc nF':>10} {'bank':>34} {'C_bank nF':>10} {'f_pred kHz':>10}")
    for r in rows:
        print(
            f"{r.channel:>2} {r.half:>4} {r.c_calc * 1e9:>10.1f} {r.bank.describe():>34} "
            f"{r.bank.effective_capacitance * 1e9:>10.1f} {r.f_predicted / 1e3:>10.2f}"
        )
    res = ScenarioResult("design_caps", config_digest(cfg), {"rows": records})
    name = f"design_caps_table.{args.format}"
    if args.format == "json":
        write_json(out / name, records)
    else:
        write_rows(
            out / name,
            ["channel", "half", "C_calc_F", "bank_parts", "C_bank_F", "f_predicted_Hz"],
            [
                (r.channel, r.half, repr(r.c_calc), r.bank.describe(), repr(r.bank.effective_capacitance), repr(r.f_predicted))
                for r in rows
            ],
        )
    res.files.append(name)
    return res, EXIT_OK


def cmd_field_map(cfg, args, out):
    if args.no_ferrite:
        ch = cfg.chamber
        cfg = ChamberConfig(
            cfg.channels,
            cfg.windings,
            ChamberSpec(ch.inner_dimensions, False, ch.ferrite_gap, ch.grid_resolution, ch.ferrite_calibration),
            cfg.networks,
            cfg.samples,
            cfg.thermal,
        )
    current = args.current if args.current is not None else cfg.channel(args.channel).max_current
    fmap = magnetics.compute_field_map(cfg, args.channel, current, resolution=args.resolution)
    stats = magnetics.uniformity(fmap)
    center = magnetics.field_at_point(cfg.windings_for(args.channel), current, (0.0, 0.0, 0.0), magnetics.ferrite_for(cfg))
    summary = {
        "channel": args.channel,
        "current_A": current,
        "ferrite": cfg.chamber.ferrite_enabled,
        "center_field_T": float(np.linalg.norm(center)),
        "median_T": stats.median_magnitude,
        "min_T": stats.min,
        "max_T": stats.max,
        "band_fraction": stats.band_fraction,
        "band_halfwidth": stats.band_halfwidth,
    }
    print(
        f"channel {args.channel} at {current:g} A: centre {summary['center_field_T'] * 1e3:.2f} mT, "
        f"median {stats.median_magnitude * 1e3:.2f} mT, range {stats.min * 1e3:.2f}-{stats.max * 1e3:.2f} mT, "
        f"{stats.band_fraction:.1%} within +/-{stats.band_halfwidth:.0%}"
    )
    name = f"field_map_ch{args.channel}.{args.format}"
    if args.format == "csv":
        (out / name).write_text(magnetics.field_map_csv(fmap, stats))
    else:
        coords = fmap.coordinates().reshape(-1, 3)
        write_json(
            out / name,
            {
                "header": magnetics.FIELD_CSV_HEADER,
                "stats": summary,
                "rows": np.column_stack([coords, fmap.samples.reshape(-1, 3), np.linalg.norm(fmap.samples, axis=-1).reshape(-1)]).tolist(),
            },
        )
    res = ScenarioResult("field_map", config_digest(cfg), summary, [name])
    return res, EXIT_OK


def _coupling_arg(cfg, value):
    if value is None or value == "auto":
        k, _ = geometry_coupling(cfg)
        log.info("geometry-derived channel coupling k = %.3g", k)
        return k
    return float(value)


def cmd_simulate(cfg, args, out):
    active = (1, 2) if args.channel == "both" else (int(args.channel),)
    k = _coupling_arg(cfg, args.coupling)
    trace, drives = _simulate(cfg, active, args.duty, args.duration, args.step, k)
    metrics = drive.steady_state(trace, args.tail_cycles)
    summary = {
        "active_channels": list(active),
        "cross_coupling": k,
        "drive_frequency_Hz": [d.frequency for d in drives],
        "duty": [d.duty for d in drives],
        "step_s": trace.step,
        "duration_s": float(trace.time[-1]),
        **_metrics_record(metrics),
    }
    print(
        f"peak current {metrics.peak_current[0]:.4g} / {metrics.peak_current[1]:.4g} A, "
        f"coil voltage {metrics.peak_coil_voltage[0]:.4g} / {metrics.peak_coil_voltage[1]:.4g} V, "
        f"crosstalk {metrics.crosstalk_ratio:.3g}"
    )
    name = f"trace.{args.format}"
    if args.format == "csv":
        drive.write_trace_csv(trace, out / name, args.decimate)
    else:
        cols = drive.trace_columns(trace)[:: max(1, args.decimate)]
        write_json(out / name, {h: cols[:, i].tolist() for i, h in enumerate(drive.TRACE_CSV_HEADER)})
    res = ScenarioResult("simulate", config_digest(cfg), summary, [name])
    return res, EXIT_OK


def cmd_sweep(cfg, args, out):
    net = cfg.network(args.channel)
    f0 = resonance.predicted_resonance(net)
    lo = args.start if args.start is not None else 0.9 * f0
    hi = args.stop if args.stop is not None else 1.1 * f0
    d = _drive_for(cfg, args.channel, args.duty)
    sw = resonance.sweep_resonance(net, d, (lo, hi), args.steps, workers=thread_limit())
    summary = {
        "channel": args.channel,
        "f_predicted_Hz": f0,
        "f_peak_Hz": sw.f_peak,
        "sweep_step_Hz": sw.step,
        "within_one_step": abs(sw.f_peak - f0) <= sw.step,
    }
    print(f"channel {args.channel}: sweep peak {sw.f_peak / 1e3:.3f} kHz, predicted {f0 / 1e3:.3f} kHz (step {sw.step / 1e3:.3f} kHz)")
    name = f"sweep_ch{args.channel}.{args.format}"
    if args.format == "csv":
        write_rows(out / name, ["f_Hz", "I_peak_A"], [(repr(float(f)), repr(float(i))) for f, i in zip(sw.frequencies, sw.peak_currents)])
    else:
        write_json(out / name, {"f_Hz": sw.frequencies.tolist(), "I_peak_A": sw.peak_currents.tolist(), **summary})
    res = ScenarioResult("sweep", config_digest(cfg), summary, [name])
    return res, EXIT_OK


def _coil_heating(cfg, channel, duration):
    spec = cfg.channel(channel)
    w = cfg.windings_for(channel)[0]
    return thermal.coil_temperature_rise(cfg.network(channel), w.wire, w, spec.max_current, duration, cfg.thermal)


def cmd_heat(cfg, args, out):
    th = cfg.thermal
    coil = _coil_heating(cfg, args.channel, args.duration)
    loss = thermal.channel_coil_loss(cfg, args.channel, cfg.channel(args.channel).max_current)
    wall = thermal.wall_temperature_rise(loss, args.duration, th)
    verdict = thermal.safety_check(wall, th)
    summary = {
        "channel": args.channel,
        "duration_s": args.duration,
        "coil_delta_T_degC": coil.delta_T,
        "coil_final_degC": float(coil.temperatures[-1]),
        "channel_loss_W": loss,
        "wall_rate_degC_per_s": wall.rate,
        "wall_delta_T_degC": wall.delta_T,
        "safety_pass": verdict.passed,
        "safety_margin_degC_per_s": verdict.margin,
    }
    sample = None
    if args.sample:
        try:
            sample = cfg.sample(args.sample)
            curve = thermal.heating_curve(sample, args.channel, args.duration)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        summary.update(sample=sample.name, sample_rate_degC_per_s=curve.rate, sample_delta_T_degC=curve.delta_T)
        print(f"sample {sample.name} on channel {args.channel}: {curve.rate:.3g} degC/s, dT {curve.delta_T:.3g} degC over {args.duration:g} s")
    print(f"coil dT {coil.delta_T:.2f} degC over {args.duration:g} s; wall {wall.rate:.3f} degC/s")
    print(f"safety: {'PASS' if verdict.passed else 'FAIL'} (limit {th.wall_rate_limit:g} degC/s, margin {verdict.margin:+.3f})")

    t = coil.times
    cols = {
        "t_s": t,
        "T_coil_degC": coil.temperatures,
        "T_wall_degC": th.ambient + wall.rate * t,
    }
    if sample is not None:
        cols["T_sample_degC"] = th.ambient + curve.rate * t
    name = f"heat_ch{args.channel}.{args.format}"
    if args.format == "csv":
        write_rows(out / name, list(cols), [[repr(float(v)) for v in row] for row in zip(*cols.values())])
    else:
        write_json(out / name, {**{k: v.tolist() for k, v in cols.items()}, "summary": summary})
    res = ScenarioResult("heat", config_digest(cfg), summary, [name])
    res.acceptance["wall_safety"] = verdict.passed
    return res, EXIT_OK


def build_report(cfg: ChamberConfig, workers: int = 1) -> ScenarioResult:
    """Every headline quantity, each computed by a module operation."""
    res = ScenarioResult("report", config_digest(cfg))
    o = res.outputs
    acc = res.acceptance

    caps = resonance.design_caps(cfg)
    o["compensation"] = [r.as_record() for r in caps]

    o["resonance"] = {}
    for c in (1, 2):
        net = cfg.network(c)
        f0 = resonance.predicted_resonance(net)
        d = _drive_for(cfg, c, None)
        sw = resonance.sweep_resonance(net, d, (0.9 * f0, 1.1 * f0), 41, workers=workers)
        o["resonance"][str(c)] = {
            "f_predicted_Hz": f0,
            "f_measured_Hz": MEASURED_RESONANCE[c],
            "relative_to_measured": f0 / MEASURED_RESONANCE[c] - 1.0,
            "f_sweep_peak_Hz": sw.f_peak,
            "sweep_step_Hz": sw.step,
        }
        acc[f"resonance_ch{c}_within_3pct"] = abs(f0 / MEASURED_RESONANCE[c] - 1.0) <= 0.03
        acc[f"sweep_ch{c}_within_one_step"] = abs(sw.f_peak - f0) <= sw.step

    o["coil_voltage"] = {}
    for c in (1, 2):
        net, spec = cfg.network(c), cfg.channel(c)
        v = 2 * math.pi * MEASURED_RESONANCE[c] * net.equivalent_inductance(0) * spec.max_current
        o["coil_voltage"][str(c)] = {"omega_L_I_V": v, "measured_V": MEASURED_VOLTAGE[c]}

    k, L = geometry_coupling(cfg)
    labels = list(L.labels)
    o["inductance"] = {
        "labels": labels,
        "matrix_H": L.values.tolist(),
        "half_coupling": {
            f"{a}-{b}": magnetics.coupling_coefficient(L, a, b)
            for i, a in enumerate(labels)
            for b in labels[i + 1 :]
        },
        "channel_coupling": k,
    }

    o["field"] = {}
    for c in (1, 2):
        current = cfg.channel(c).max_current
        fmap = magnetics.compute_field_map(cfg, c, current)
        st = magnetics.uniformity(fmap)
        centre = magnetics.field_at_point(cfg.windings_for(c), current, (0.0, 0.0, 0.0), magnetics.ferrite_for(cfg))
        o["field"][str(c)] = {
            "current_A": current,
            "center_T": float(np.linalg.norm(centre)),
            "median_T": st.median_magnitude,
            "min_T": st.min,
            "max_T": st.max,
            "band_fraction": st.band_fraction,
        }
    acc["field_ch1_center_in_band"] = 0.062 <= o["field"]["1"]["center_T"] <= 0.114
    acc["field_ch2_center_in_band"] = 0.009 <= o["field"]["2"]["center_T"] <= 0.017

    o["simulation"] = {}
    for c in (1, 2):
        trace, _ = _simulate(cfg, (c,), None, None, None, k)
        m = drive.steady_state(trace, 20)
        rec = _metrics_record(m)
        power = drive.estimate_input_power(m.peak_current[c - 1], cfg.network(c))
        rec["input_power"] = {
            "dissipated_W": power.dissipated,
            "apparent_VA": power.apparent,
            "line_current_A": power.line_current,
            "reported_line_current_A": REPORTED_LINE_CURRENT[c],
            "reported_apparent_VA": drive.apparent_power(REPORTED_LINE_CURRENT[c]),
        }
        o["simulation"][f"ch{c}_active"] = rec
        acc[f"crosstalk_ch{c}_active_below_1pct"] = m.crosstalk_ratio < 0.01

    o["sar_W_per_g"] = {s.name: {str(c): v / 1e3 for c, v in s.sar_per_channel.items()} for s in cfg.samples}
    sel = thermal.selectivity_matrix(cfg.samples)
    o["selectivity_degC_per_s"] = {n: {str(c): r for c, r in row.items()} for n, row in sel.items()}
    for name, row in sel.items():
        on = max(row, key=row.get)
        off = min(row, key=row.get)
        acc[f"selectivity_{name}_above_10x"] = row[off] > 0 and row[on] / row[off] > 10

    o["thermal"] = {}
    for c in (1, 2):
        coil = _coil_heating(cfg, c, 2.0)
        loss = thermal.channel_coil_loss(cfg, c, cfg.channel(c).max_current)
        wall = thermal.wall_temperature_rise(loss, 2.0, cfg.thermal)
        verdict = thermal.safety_check(wall, cfg.thermal)
        o["thermal"][str(c)] = {
            "coil_delta_T_2s_degC": coil.delta_T,
            "channel_loss_W": loss,
            "wall_rate_degC_per_s": wall.rate,
            "safety_pass": verdict.passed,
        }
        acc[f"wall_safety_ch{c}"] = verdict.passed
    acc["coil_ch1_delta_T_within_x2"] = 4.8 <= o["thermal"]["1"]["coil_delta_T_2s_degC"] <= 19.2
    return res


def _print_report(res: ScenarioResult) -> None:
    o = res.outputs
    print("Compensation")
    for r in o["compensation"]:
        print(
            f"  ch{r['channel']} half {r['half']}: C_calc {r['C_calc_F'] * 1e9:.1f} nF, bank {r['C_bank_F'] * 1e9:.1f} nF, "
            f"f {r['f_predicted_Hz'] / 1e3:.2f} kHz"
        )
    print("Resonance")
    for c, r in o["resonance"].items():
        print(
            f"  ch{c}: predicted {r['f_predicted_Hz'] / 1e3:.2f} kHz, sweep {r['f_sweep_peak_Hz'] / 1e3:.2f} kHz, "
            f"measured {r['f_measured_Hz'] / 1e3:.1f} kHz"
        )
    for c, r in o["coil_voltage"].items():
        print(f"  ch{c} coil voltage w(L+M)I = {r['omega_L_I_V'] / 1e3:.2f} kV (measured {r['measured_V'] / 1e3:.1f} kV)")
    print(f"Channel coupling k = {o['inductance']['channel_coupling']:.3g}")
    print("Field")
    for c, r in o["field"].items():
        print(
            f"  ch{c} at {r['current_A']:g} A: centre {r['center_T'] * 1e3:.1f} mT, median {r['median_T'] * 1e3:.1f} mT, "
            f"{r['band_fraction']:.1%} within +/-10%"
        )
    print("Simulation")
    for key, r in o["simulation"].items():
        print(
            f"  {key}: peaks {r['peak_current_A']['1']:.4g} / {r['peak_current_A']['2']:.4g} A, "
            f"crosstalk {r['crosstalk_ratio']:.2e}, line current {r['input_power']['line_current_A']:.1f} A"
        )
    print("SAR (W/g metal)")
    for name, row in o["sar_W_per_g"].items():
        print(f"  {name}: " + ", ".join(f"ch{c} {v:.1f}" for c, v in row.items()))
    print("Thermal (2 s at rated current)")
    for c, r in o["thermal"].items():
        print(
            f"  ch{c}: coil dT {r['coil_delta_T_2s_degC']:.2f} degC, wall {r['wall_rate_degC_per_s']:.3f} degC/s "
            f"{'PASS' if r['safety_pass'] else 'FAIL'}"
        )
    failed = [k for k, v in res.acceptance.items() if not v]
    print(f"Checks: {len(res.acceptance) - len(failed)}/{len(res.acceptance)} pass" + (f"; failed {failed}" if failed else ""))


def cmd_report(cfg, args, out):
    res = build_report(cfg, workers=thread_limit())
    _print_report(res)
    return res, EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "design-caps": cmd_design_caps,
    "field-map": cmd_field_map,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "heat": cmd_heat,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config_path", nargs="?", metavar="CONFIG", help="config file (same as --config)")
    common.add_argument("--config", dest="config", help="config file; 'table1.cfg' falls back to the bundled copy")
    common.add_argument("--out", default="out", type=Path, help="output directory (default ./out)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="fieldforge", description="Dual-channel resonant field chamber twin")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check config invariants")

    s = sub.add_parser("design-caps", parents=[common], help="compensation capacitor banks")
    s.add_argument("--target", choices=("implemented", "calculated"), default="implemented")
    s.add_argument("--max-parts", type=int, default=40)

    s = sub.add_parser("field-map", parents=[common], help="sample |B| over the chamber")
    s.add_argument("--channel", type=int, choices=(1, 2), default=1)
    s.add_argument("--current", type=float, help="peak current per half, A (default: channel rating)")
    s.add_argument("--resolution", type=int, nargs=3, metavar=("NX", "NY", "NZ"))
    s.add_argument("--no-ferrite", action="store_true")

    s = sub.add_parser("simulate", parents=[common], help="transient drive simulation")
    s.add_argument("--channel", choices=("1", "2", "both"), default="1")
    s.add_argument("--duty", type=float, help="duty ratio (default: channel maximum)")
    s.add_argument("--duration", type=float, help="seconds (default: long enough to settle)")
    s.add_argument("--step", type=float, help="seconds (default: T_fast/400)")
    s.add_argument("--coupling", default="auto", help="cross-channel k, or 'auto' for geometry-derived")
    s.add_argument("--tail-cycles", type=int, default=20)
    s.add_argument("--decimate", type=int, default=1, help="write every n-th sample")

    s = sub.add_parser("sweep", parents=[common], help="find resonance by frequency sweep")
    s.add_argument("--channel", type=int, choices=(1, 2), default=1)
    s.add_argument("--start", type=float, help="Hz (default 0.9 f0)")
    s.add_argument("--stop", type=float, help="Hz (default 1.1 f0)")
    s.add_argument("--steps", type=int, default=41)
    s.add_argument("--duty", type=float)

    s = sub.add_parser("heat", parents=[common], help="coil, wall and sample heating")
    s.add_argument("--sample")
    s.add_argument("--channel", type=int, choices=(1, 2), default=1)
    s.add_argument("--duration", type=float, default=2.0)

    sub.add_parser("report", parents=[common], help="consolidated design report")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    path = args.config or args.config_path
    if not path:
        log.error("a config file is required (--config PATH)")
        return EXIT_INVALID
    try:
        cfg = load_config(path)
    except (ConfigError, UnitError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID

    if args.command != "validate":
        report = validate_config(cfg)
        if not report.ok:
            for v in report:
                log.error("invalid config: %s", v)
            return EXIT_INVALID

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        result, status = COMMANDS[args.command](cfg, args, out)
        export(result, out, args.format)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except (drive.SolverError, resonance.BankError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_SOLVER
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
