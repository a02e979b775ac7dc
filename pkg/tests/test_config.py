from dataclasses import replace

import numpy as np
import pytest
import yaml

from fieldforge.config import (
    ConfigError,
    bundled_config_path,
    config_to_doc,
    dump_config,
    load_config,
    parse_config,
    validate_config,
)
from fieldforge.geometry import build_winding
from fieldforge.model import WindingGeometry


def test_bundled_config_is_valid(table1):
    report = validate_config(table1)
    assert report.ok, report.violations
    assert len(report) == 0


def test_bundled_values(table1):
    n1, n2 = table1.network(1), table1.network(2)
    assert n1.coil_half_inductances == pytest.approx((4.4e-6, 4.0e-6))
    assert n2.compensation == pytest.approx((46.0e-9, 43.9e-9))
    assert table1.channel(2).interleave_submodules == 2
    # auto resistance: rated duty gives rated current at resonance
    assert n1.series_resistance == pytest.approx(4 * 48 / np.pi * np.sin(0.1 * np.pi / 2) / 1000, rel=1e-12)
    assert table1.sample("Co-IONP").sar_per_channel[1] == pytest.approx(707.4468e3, rel=1e-6)


def test_round_trip_is_lossless(table1):
    again = parse_config(yaml.safe_load(dump_config(table1)))
    assert again == table1
    assert dump_config(again) == dump_config(table1)


def test_explicit_segments_round_trip(table1):
    w = table1.windings[0]
    bare = WindingGeometry(w.coil_id, w.channel, w.segments, w.turns, w.wire)
    cfg = replace(table1, windings=(bare,) + table1.windings[1:])
    doc = config_to_doc(cfg)
    assert "segments" in doc["windings"][0]
    assert parse_config(yaml.safe_load(dump_config(cfg))) == cfg


def test_segments_accept_units(tmp_path):
    doc = yaml.safe_load(bundled_config_path().read_text())
    doc["windings"][0] = {
        "coil_id": "#1",
        "channel": 1,
        "wire": "ch1_litz",
        "segments": {"unit": "mm", "data": [[0, 0, 0, 10, 0, 0], [10, 0, 0, 0, 10, 0], [0, 10, 0, 0, 0, 0]]},
    }
    cfg = parse_config(doc)
    assert np.allclose(cfg.windings[0].segments[0, 1], [0.01, 0, 0])
    assert validate_config(cfg).ok


def test_missing_channel_reported(table1):
    cfg = replace(table1, channels=table1.channels[:1])
    report = validate_config(cfg)
    assert any("exactly 2 channels required" in v for v in report)


def test_open_loop_reported(table1):
    w = table1.windings[0]
    broken = WindingGeometry(w.coil_id, w.channel, w.segments[:-1], w.turns, w.wire)
    report = validate_config(replace(table1, windings=(broken,) + table1.windings[1:]))
    assert any("loop not closed" in v for v in report)


def test_unit_sanity(table1):
    bad = replace(table1.channels[0], nominal_frequency=50.0, target_field=2.0, max_duty=1.5)
    report = validate_config(replace(table1, channels=(bad, table1.channels[1])))
    text = " | ".join(report)
    assert "outside [1 kHz, 10 MHz]" in text
    assert "not below 1 T" in text
    assert "max_duty" in text


def test_violations_accumulate(table1):
    bad_net = replace(table1.networks[0], compensation=(0.0, -1.0), series_resistance=-1.0)
    report = validate_config(replace(table1, networks=(bad_net, table1.networks[1])))
    assert len(report) >= 2


def test_wrong_unit_fails_to_parse():
    doc = yaml.safe_load(bundled_config_path().read_text())
    doc["channels"][0]["nominal_frequency"] = "50 kH"
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_unreadable_path(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


def test_layout_matches_builder(table1):
    w = table1.winding("#3")
    assert w == build_winding(w.layout, w.wire, "#3", 2)
