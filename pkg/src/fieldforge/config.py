"""Config document <-> ChamberConfig, plus invariant validation.

The document is YAML. Every physical number is a string with a unit suffix
(``"50 kHz"``, ``"4.4 uH"``); counts, ids and flags are bare. Dumping writes
SI units with full float precision so ``load(dump(cfg)) == cfg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .geometry import build_winding
from .model import (
    ChamberConfig,
    ChamberSpec,
    ChannelSpec,
    LitzWireSpec,
    NanoparticleSample,
    RectHelixLayout,
    ResonantNetwork,
    ThermalParams,
    WindingGeometry,
)
from .units import UnitError, format_quantity, parse_quantity

BUNDLED = "table1.cfg"


class ConfigError(ValueError):
    """The document cannot be turned into a ChamberConfig at all."""


# dimension of every unit-bearing field, per section
_CHANNEL = {
    "nominal_frequency": "frequency",
    "target_field": "flux_density",
    "max_current": "current",
    "max_duty": "dimensionless",
    "phase": "angle",
}
_WIRE = {"strand_diameter": "length", "conductor_resistivity": "resistivity", "packing_factor": "dimensionless"}
_NETWORK = {"mutual": "inductance", "series_resistance": "resistance", "dc_bus_voltage": "voltage"}
_SAMPLE = {
    "metal_concentration": "density",
    "medium_heat_capacity": "specific_heat",
    "medium_density": "density",
}
_THERMAL = {
    "copper_resistivity": "resistivity",
    "copper_specific_heat": "specific_heat",
    "copper_density": "density",
    "coolant_sink_conductance": "conductance_thermal",
    "ambient": "temperature",
    "wall_rate_limit": "temperature_rate",
    "proximity_factor": "dimensionless",
    "wall_loss_fraction": "dimensionless",
    "wall_heat_capacity": "heat_capacity",
}


def bundled_config_path() -> Path:
    return Path(str(resources.files("fieldforge") / "data" / BUNDLED))


def resolve_config_path(path) -> Path:
    """``table1.cfg`` falls back to the bundled copy when absent locally."""
    p = Path(path)
    if not p.exists() and p.name == BUNDLED:
        return bundled_config_path()
    return p


# ------------------------------------------------------------------ load ---


def _q(section: dict, key: str, dim: str, where: str, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"{where}: missing '{key}'")
        return default
    try:
        return parse_quantity(section[key], dim)
    except UnitError as exc:
        raise ConfigError(f"{where}.{key}: {exc}") from None


def _qlist(values, dim: str, where: str) -> tuple[float, ...]:
    try:
        return tuple(parse_quantity(v, dim) for v in values)
    except UnitError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _wire(doc, wires: dict, where: str) -> LitzWireSpec:
    if isinstance(doc, str):
        if doc not in wires:
            raise ConfigError(f"{where}: unknown wire '{doc}'")
        return wires[doc]
    return LitzWireSpec(
        strand_diameter=_q(doc, "strand_diameter", "length", where),
        strand_count=int(doc["strand_count"]),
        parallel_bundles=int(doc.get("parallel_bundles", 1)),
        conductor_resistivity=_q(doc, "conductor_resistivity", "resistivity", where, 1.72e-8),
        packing_factor=_q(doc, "packing_factor", "dimensionless", where, 0.5),
    )


def _winding(doc: dict, wires: dict, where: str) -> WindingGeometry:
    wire = _wire(doc["wire"], wires, where + ".wire")
    coil_id = str(doc["coil_id"])
    channel = int(doc["channel"])
    if "layout" in doc:
        lay = doc["layout"]
        layout = RectHelixLayout(
            axis=str(lay["axis"]),
            footprint=_qlist(lay["footprint"], "length", where + ".layout.footprint"),
            turns=int(lay["turns"]),
            pitch=_q(lay, "pitch", "length", where + ".layout", 0.0),
            origin=_qlist(lay.get("origin", ["0 m"] * 3), "length", where + ".layout.origin"),
            circulation=int(lay.get("circulation", 1)),
        )
        try:
            return build_winding(layout, wire, coil_id=coil_id, channel=channel)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    if "segments" in doc:
        seg = doc["segments"]
        scale = parse_quantity(f"1 {seg['unit']}", "length")
        data = np.asarray(seg["data"], dtype=float).reshape(-1, 2, 3) * scale
        return WindingGeometry(coil_id, channel, data, int(doc.get("turns", 1)), wire)
    raise ConfigError(f"{where}: winding needs 'layout' or 'segments'")


def _sample(doc: dict, where: str) -> NanoparticleSample:
    from .thermal import sar as sar_from_rate

    base = NanoparticleSample(
        name=str(doc["name"]),
        metal_concentration=_q(doc, "metal_concentration", "density", where),
        medium_heat_capacity=_q(doc, "medium_heat_capacity", "specific_heat", where, 4180.0),
        medium_density=_q(doc, "medium_density", "density", where, 1000.0),
    )
    table = {}
    for ch, v in (doc.get("sar_per_channel") or {}).items():
        table[int(ch)] = _q({"v": v}, "v", "specific_power", f"{where}.sar_per_channel")
    # measured heating rates are converted through the SAR formula
    for ch, v in (doc.get("measured_rates") or {}).items():
        rate = _q({"v": v}, "v", "temperature_rate", f"{where}.measured_rates")
        table[int(ch)] = sar_from_rate(base, rate, 1.0)
    return NanoparticleSample(
        base.name, base.metal_concentration, base.medium_heat_capacity, base.medium_density, dict(sorted(table.items()))
    )


def _network(doc: dict, channels: dict, where: str) -> ResonantNetwork:
    ch = int(doc["channel"])
    bus = _q(doc, "dc_bus_voltage", "voltage", where, 48.0)
    res = doc.get("series_resistance")
    if res == "auto":
        # resistance that makes the rated duty produce the rated current
        from .resonance import calibrate_series_resistance

        # left as NaN when the channel is missing or unusable; validation reports it
        spec = channels.get(ch)
        try:
            r = calibrate_series_resistance(bus, spec.max_duty, spec.max_current) if spec else math.nan
        except ValueError:
            r = math.nan
    else:
        r = _q(doc, "series_resistance", "resistance", where)
    stock = doc.get("capacitor_stock", [[], []])
    return ResonantNetwork(
        channel=ch,
        coil_half_inductances=_qlist(doc["coil_half_inductances"], "inductance", where),
        mutual=_q(doc, "mutual", "inductance", where),
        series_resistance=r,
        compensation=_qlist(doc["compensation"], "capacitance", where),
        dc_bus_voltage=bus,
        capacitor_stock=tuple(_qlist(s, "capacitance", where + ".capacitor_stock") for s in stock),
    )


def parse_config(doc: dict) -> ChamberConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    ch_doc = doc.get("chamber", {})
    res = ch_doc.get("grid_resolution", [21, 21, 13])
    res = tuple(int(r) for r in (res if isinstance(res, (list, tuple)) else [res] * 3))
    chamber = ChamberSpec(
        inner_dimensions=_qlist(ch_doc.get("inner_dimensions", ["0.1 m", "0.1 m", "0.06 m"]), "length", "chamber"),
        ferrite_enabled=bool(ch_doc.get("ferrite_enabled", True)),
        ferrite_gap=_q(ch_doc, "ferrite_gap", "length", "chamber", 0.01),
        grid_resolution=res,
        ferrite_calibration=_q(ch_doc, "ferrite_calibration", "dimensionless", "chamber", 1.0),
    )

    channels = []
    for i, c in enumerate(doc.get("channels", [])):
        where = f"channels[{i}]"
        channels.append(
            ChannelSpec(
                id=int(c["id"]),
                nominal_frequency=_q(c, "nominal_frequency", "frequency", where),
                target_field=_q(c, "target_field", "flux_density", where),
                max_current=_q(c, "max_current", "current", where),
                max_duty=_q(c, "max_duty", "dimensionless", where),
                interleave_submodules=int(c.get("interleave_submodules", 1)),
                phase=_q(c, "phase", "angle", where, 0.0),
            )
        )
    by_id = {c.id: c for c in channels}

    wires = {name: _wire(w, {}, f"wires.{name}") for name, w in (doc.get("wires") or {}).items()}
    windings = tuple(_winding(w, wires, f"windings[{i}]") for i, w in enumerate(doc.get("windings", [])))
    networks = tuple(_network(n, by_id, f"networks[{i}]") for i, n in enumerate(doc.get("networks", [])))
    samples = tuple(_sample(s, f"samples[{i}]") for i, s in enumerate(doc.get("samples", [])))

    th = doc.get("thermal", {}) or {}
    defaults = ThermalParams()
    thermal = ThermalParams(
        **{k: _q(th, k, dim, "thermal", getattr(defaults, k)) for k, dim in _THERMAL.items()}
    )
    return ChamberConfig(tuple(channels), windings, chamber, networks, samples, thermal)


def load_config(path) -> ChamberConfig:
    p = resolve_config_path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from None
    return parse_config(doc)


# ------------------------------------------------------------------ dump ---


def _f(v, dim):
    if dim == "dimensionless":
        return float(v)
    return format_quantity(v, dim)


def _wire_doc(w: LitzWireSpec) -> dict:
    return {
        "strand_diameter": _f(w.strand_diameter, "length"),
        "strand_count": int(w.strand_count),
        "parallel_bundles": int(w.parallel_bundles),
        "conductor_resistivity": _f(w.conductor_resistivity, "resistivity"),
        "packing_factor": float(w.packing_factor),
    }


def _winding_doc(w: WindingGeometry) -> dict:
    d = {"coil_id": w.coil_id, "channel": int(w.channel), "wire": _wire_doc(w.wire)}
    if w.layout is not None:
        lay = w.layout
        d["layout"] = {
            "axis": lay.axis,
            "footprint": [_f(v, "length") for v in lay.footprint],
            "turns": int(lay.turns),
            "pitch": _f(lay.pitch, "length"),
            "origin": [_f(v, "length") for v in lay.origin],
            "circulation": int(lay.circulation),
        }
    else:
        d["turns"] = int(w.turns)
        d["segments"] = {"unit": "m", "data": [[float(x) for x in s.ravel()] for s in w.segments]}
    return d


def config_to_doc(cfg: ChamberConfig) -> dict:
    ch = cfg.chamber
    return {
        "chamber": {
            "inner_dimensions": [_f(v, "length") for v in ch.inner_dimensions],
            "ferrite_enabled": bool(ch.ferrite_enabled),
            "ferrite_gap": _f(ch.ferrite_gap, "length"),
            "ferrite_calibration": float(ch.ferrite_calibration),
            "grid_resolution": [int(r) for r in ch.grid_resolution],
        },
        "channels": [
            {
                "id": c.id,
                **{k: _f(getattr(c, k), dim) for k, dim in _CHANNEL.items()},
                "interleave_submodules": int(c.interleave_submodules),
            }
            for c in cfg.channels
        ],
        "windings": [_winding_doc(w) for w in cfg.windings],
        "networks": [
            {
                "channel": n.channel,
                "coil_half_inductances": [_f(v, "inductance") for v in n.coil_half_inductances],
                **{k: _f(getattr(n, k), dim) for k, dim in _NETWORK.items()},
                "compensation": [_f(v, "capacitance") for v in n.compensation],
                "capacitor_stock": [[_f(v, "capacitance") for v in s] for s in n.capacitor_stock],
            }
            for n in cfg.networks
        ],
        "samples": [
            {
                "name": s.name,
                **{k: _f(getattr(s, k), dim) for k, dim in _SAMPLE.items()},
                "sar_per_channel": {int(k): _f(v, "specific_power") for k, v in s.sar_per_channel.items()},
            }
            for s in cfg.samples
        ],
        "thermal": {k: _f(getattr(cfg.thermal, k), dim) for k, dim in _THERMAL.items()},
    }


def dump_config(cfg: ChamberConfig) -> str:
    return yaml.safe_dump(config_to_doc(cfg), sort_keys=False, allow_unicode=True)


# -------------------------------------------------------------- validate ---


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)


def _positive(obj, names, where, out):
    for name in names:
        v = getattr(obj, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            out.append(f"{where}: {name} must be > 0 (got {v!r})")


def validate_config(cfg: ChamberConfig, closure_tol: float = 1e-9) -> ValidationReport:
    """Check every invariant; violations are returned, never raised."""
    out: list[str] = []

    if len(cfg.channels) != 2:
        out.append(f"exactly 2 channels required (got {len(cfg.channels)})")
    ids = [c.id for c in cfg.channels]
    if len(set(ids)) != len(ids):
        out.append(f"duplicate channel ids {ids}")
    for c in cfg.channels:
        where = f"channel {c.id}"
        _positive(c, ["nominal_frequency", "target_field", "max_current"], where, out)
        if not 0 < c.max_duty <= 1:
            out.append(f"{where}: max_duty must be in (0, 1] (got {c.max_duty})")
        if not 1e3 <= c.nominal_frequency <= 10e6:
            out.append(f"{where}: nominal_frequency {c.nominal_frequency} Hz outside [1 kHz, 10 MHz]")
        if c.target_field >= 1.0:
            out.append(f"{where}: target_field {c.target_field} T is not below 1 T")
        if c.interleave_submodules not in (1, 2):
            out.append(f"{where}: interleave_submodules must be 1 or 2")

    coil_ids = [w.coil_id for w in cfg.windings]
    if len(set(coil_ids)) != len(coil_ids):
        out.append(f"duplicate coil ids {coil_ids}")
    for w in cfg.windings:
        where = f"winding {w.coil_id}"
        if w.channel not in ids:
            out.append(f"{where}: references unknown channel {w.channel}")
        if w.turns < 1:
            out.append(f"{where}: turns must be >= 1")
        _positive(w.wire, ["strand_diameter", "conductor_resistivity", "packing_factor"], where + " wire", out)
        if w.wire.strand_count < 1 or w.wire.parallel_bundles < 1:
            out.append(f"{where}: strand_count and parallel_bundles must be >= 1")
        seg = w.segments
        if len(seg) == 0:
            out.append(f"{where}: no segments")
            continue
        if not np.all(np.isfinite(seg)):
            out.append(f"{where}: non-finite segment coordinates")
        lengths = np.linalg.norm(seg[:, 1] - seg[:, 0], axis=1)
        if np.any(lengths == 0):
            out.append(f"{where}: zero-length segment at index {int(np.argmin(lengths))}")
        if len(seg) > 1:
            jumps = np.linalg.norm(seg[1:, 0] - seg[:-1, 1], axis=1)
            if np.any(jumps > closure_tol):
                out.append(f"{where}: segments not contiguous at index {int(np.argmax(jumps)) + 1}")
        if w.closure_gap() > closure_tol:
            out.append(f"{where}: loop not closed (gap {w.closure_gap():.3g} m)")
    for c in ids:
        n = sum(1 for w in cfg.windings if w.channel == c)
        if n != 2:
            out.append(f"channel {c}: exactly 2 windings required (got {n})")

    ch = cfg.chamber
    if len(ch.inner_dimensions) != 3 or any(not d > 0 for d in ch.inner_dimensions):
        out.append(f"chamber: inner_dimensions must be three positive lengths (got {ch.inner_dimensions})")
    if any(r < 2 for r in ch.grid_resolution):
        out.append(f"chamber: grid_resolution must be >= 2 per axis (got {ch.grid_resolution})")
    if ch.ferrite_gap < 0:
        out.append("chamber: ferrite_gap must be >= 0")
    if not ch.ferrite_calibration > 0:
        out.append("chamber: ferrite_calibration must be > 0")

    net_ch = [n.channel for n in cfg.networks]
    for c in ids:
        if net_ch.count(c) != 1:
            out.append(f"channel {c}: exactly 1 network required (got {net_ch.count(c)})")
    for n in cfg.networks:
        where = f"network {n.channel}"
        if n.channel not in ids:
            out.append(f"{where}: references unknown channel")
        if len(n.coil_half_inductances) != 2 or any(not v > 0 for v in n.coil_half_inductances):
            out.append(f"{where}: coil_half_inductances must be two positive values")
        if len(n.compensation) != 2 or any(not v > 0 for v in n.compensation):
            out.append(f"{where}: compensation must be two positive values")
        if not n.mutual >= 0:
            out.append(f"{where}: mutual must be >= 0")
        if not n.series_resistance >= 0:
            out.append(f"{where}: series_resistance must be >= 0")
        if not n.dc_bus_voltage > 0:
            out.append(f"{where}: dc_bus_voltage must be > 0")

    for s in cfg.samples:
        where = f"sample {s.name}"
        _positive(s, ["metal_concentration", "medium_heat_capacity", "medium_density"], where, out)
        for c, v in s.sar_per_channel.items():
            if c not in ids:
                out.append(f"{where}: SAR entry for unknown channel {c}")
            if not v > 0:
                out.append(f"{where}: SAR for channel {c} must be > 0")

    _positive(cfg.thermal, [f.name for f in fields(ThermalParams) if f.name != "ambient"], "thermal", out)
    return ValidationReport(tuple(out))
