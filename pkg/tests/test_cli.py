import json
from pathlib import Path

import pytest

from hyperecp.cli import (
    SweepSpec,
    build_parser,
    config_hash,
    load_config_file,
    main,
    serialize_config,
)


def run_cli(*argv) -> int:
    return main(list(argv))


def read_meta(path: Path) -> dict:
    meta = {}
    for line in path.read_text().splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition("=")
        meta[key] = value
    return meta


class TestConfigFile:
    def test_round_trip_is_idempotent(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "scheme = 1\n"
            "gamma = 0.6\n"
            "delta = 0.8\n"
            "seed = 7\n"
            "pol_weights = 0.7,0.1,0.1,0.1\n"
        )
        parsed = load_config_file(cfg)
        text = serialize_config(parsed)
        cfg2 = tmp_path / "again.cfg"
        cfg2.write_text(text)
        assert load_config_file(cfg2) == parsed
        assert serialize_config(load_config_file(cfg2)) == text

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("gammma = 0.6\n")
        assert run_cli("run", "--config", str(cfg)) == 2

    def test_flags_override_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("scheme = 1\ngamma = 0.2\n")
        out = tmp_path / "r.csv"
        assert run_cli(
            "run", "--config", str(cfg), "--gamma", "0.6", "--delta", "0.8",
            "--epsilon", "0.6", "--eta", "0.8", "--out", str(out),
        ) == 0
        meta = read_meta(out)
        assert meta["aggregate.success_probability"] == "0.21233664"

    def test_comments_and_blanks_ignored(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("# a comment\n\nscheme = 2  # trailing\n")
        assert load_config_file(cfg) == {"scheme": "2"}


class TestAmplitudeResolution:
    def test_dependent_amplitude_auto_completed(self, tmp_path):
        out = tmp_path / "r.csv"
        assert run_cli("run", "--scheme", "1", "--gamma", "0.6", "--out", str(out)) == 0
        # completed delta = 0.8 and default epsilon/eta = 1/sqrt(2)
        meta = read_meta(out)
        assert float(meta["aggregate.success_probability"]) == pytest.approx(
            4 * (0.6 * 0.8) ** 2 * 0.25, abs=1e-12
        )

    def test_inconsistent_pair_rejected(self):
        assert run_cli("run", "--gamma", "0.6", "--delta", "0.6") == 2

    def test_modulus_above_one_rejected(self):
        assert run_cli("run", "--gamma", "1.5") == 2

    def test_complex_amplitude_accepted(self, tmp_path):
        out = tmp_path / "r.csv"
        assert run_cli("run", "--gamma", "0.6j", "--out", str(out)) == 0

    def test_unparseable_amplitude_rejected(self):
        assert run_cli("run", "--gamma", "zebra") == 2


class TestRun:
    def test_scheme1_aggregate_and_rows(self, tmp_path):
        out = tmp_path / "run.csv"
        assert run_cli(
            "run", "--scheme", "1", "--gamma", "0.6", "--delta", "0.8",
            "--epsilon", "0.6", "--eta", "0.8", "--out", str(out),
        ) == 0
        lines = out.read_text().splitlines()
        header_at = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[header_at].split(",")[:2] == ["pol_ab", "pol_cd"]
        assert len(lines) - header_at - 1 == 16

    def test_json_format(self, tmp_path):
        out = tmp_path / "run.json"
        assert run_cli("run", "--scheme", "1", "--format", "json", "--out", str(out)) == 0
        payload = json.loads(out.read_text())
        assert payload["aggregate"]["success_probability"] == pytest.approx(0.25)
        assert payload["meta"]["command"] == "run"
        assert len(payload["rows"]) == 16


class TestEnumerate:
    def test_scheme2_has_256_rows_all_unit(self, tmp_path):
        out = tmp_path / "enum.csv"
        assert run_cli("enumerate", "--scheme", "2", "--alpha", "0.6", "--out", str(out)) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        header, rows = lines[0].split(","), lines[1:]
        assert len(rows) == 256
        fid_col = header.index("min_fidelity")
        prob_col = header.index("success_probability")
        for row in rows:
            cells = row.split(",")
            assert float(cells[prob_col]) == pytest.approx(1.0, abs=1e-9)
            assert float(cells[fid_col]) == pytest.approx(1.0, abs=1e-9)

    def test_scheme1_outcome_columns(self, tmp_path):
        out = tmp_path / "enum1.csv"
        assert run_cli("enumerate", "--scheme", "1", "--out", str(out)) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert "p_success" in lines[0] and "p_fail" in lines[0]
        assert len(lines) - 1 == 16


class TestSweep:
    def test_curve_peaks_at_balanced_amplitude(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run_cli(
            "sweep", "--scheme", "1", "--sweep", "gamma:0:1:11", "--out", str(out),
        ) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        header = lines[0].split(",")
        gcol, pcol, acol = header.index("gamma"), header.index("success_probability"), header.index("analytic_success")
        rows = [line.split(",") for line in lines[1:]]
        by_gamma = {float(r[gcol]): float(r[pcol]) for r in rows}
        assert by_gamma[0.0] == 0.0
        assert by_gamma[1.0] == 0.0
        assert max(by_gamma.values()) <= 0.25 + 1e-12
        for r in rows:
            assert float(r[pcol]) == pytest.approx(float(r[acol]), abs=1e-9)

    def test_scheme2_sweep_is_flat_unit(self, tmp_path):
        out = tmp_path / "sweep2.csv"
        assert run_cli(
            "sweep", "--scheme", "2", "--sweep", "gamma:0.2:0.8:4", "--out", str(out),
        ) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        pcol = lines[0].split(",").index("success_probability")
        for line in lines[1:]:
            assert float(line.split(",")[pcol]) == pytest.approx(1.0, abs=1e-9)

    def test_sweep_conflicting_partner_rejected(self):
        assert run_cli("sweep", "--sweep", "gamma:0:1:5", "--delta", "0.8") == 2

    def test_sweep_requires_spec(self):
        assert run_cli("sweep", "--scheme", "1") == 2

    def test_sweep_values_inclusive(self):
        spec = SweepSpec("gamma", 0.0, 1.0, 5)
        assert spec.values() == [0.0, 0.25, 0.5, 0.75, 1.0]


class TestMonteCarlo:
    def test_reports_are_byte_identical_across_reruns(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ("monte-carlo", "--scheme", "1", "--trials", "300", "--seed", "123")
        assert run_cli(*args, "--out", str(a)) == 0
        assert run_cli(*args, "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_different_seed_changes_report(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli("monte-carlo", "--trials", "300", "--seed", "1", "--out", str(a)) == 0
        assert run_cli("monte-carlo", "--trials", "300", "--seed", "2", "--out", str(b)) == 0
        assert a.read_bytes() != b.read_bytes()

    def test_scheme2_always_succeeds(self, tmp_path):
        out = tmp_path / "mc2.csv"
        assert run_cli(
            "monte-carlo", "--scheme", "2", "--trials", "50", "--seed", "5",
            "--pol-weights", "0.4,0.3,0.2,0.1", "--out", str(out),
        ) == 0
        meta = read_meta(out)
        assert meta["aggregate.successes"] == "50"
        assert meta["aggregate.empirical_success_rate"] == "1"

    def test_row_structure(self, tmp_path):
        out = tmp_path / "mc.csv"
        assert run_cli("monte-carlo", "--trials", "10", "--seed", "9", "--out", str(out)) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "trial,case,outcome,success,fidelity"
        assert len(lines) - 1 == 10


class TestVerifyCommand:
    def test_scheme1_verification_passes(self, tmp_path):
        out = tmp_path / "verify.json"
        assert run_cli("verify", "--scheme", "1", "--seed", "31", "--out", str(out)) == 0
        payload = json.loads(out.read_text())
        assert payload["passed"] is True
        assert len(payload["checks"]) == 32


class TestCouplingFile:
    def test_default_layout_round_trips_through_json(self, tmp_path):
        from hyperecp.gadgets import default_qnd1_coupling, default_qnd2_couplings
        from hyperecp.optics import coupling_to_dict

        alice, bob = default_qnd2_couplings()
        layout = tmp_path / "layout.json"
        layout.write_text(
            json.dumps(
                {
                    "qnd1": coupling_to_dict(default_qnd1_coupling()),
                    "qnd2_alice": coupling_to_dict(alice),
                    "qnd2_bob": coupling_to_dict(bob),
                }
            )
        )
        out_with = tmp_path / "with.csv"
        out_without = tmp_path / "without.csv"
        base = ("run", "--scheme", "1", "--gamma", "0.6", "--delta", "0.8")
        assert run_cli(*base, "--coupling-file", str(layout), "--out", str(out_with)) == 0
        assert run_cli(*base, "--out", str(out_without)) == 0
        keep = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("# config_hash")]
        assert keep(out_with) == keep(out_without)

    def test_half_defined_parity_pair_rejected(self, tmp_path):
        from hyperecp.gadgets import default_qnd2_couplings
        from hyperecp.optics import coupling_to_dict

        alice, _ = default_qnd2_couplings()
        layout = tmp_path / "half.json"
        layout.write_text(json.dumps({"qnd2_alice": coupling_to_dict(alice)}))
        assert run_cli("run", "--coupling-file", str(layout)) == 2

    def test_missing_file_rejected(self):
        assert run_cli("run", "--coupling-file", "/nonexistent/x.json") == 2


class TestProvenance:
    def test_config_hash_stable_and_sensitive(self):
        base = {"scheme": "1", "seed": "3"}
        assert config_hash(base) == config_hash(dict(base))
        assert config_hash(base) != config_hash({"scheme": "2", "seed": "3"})

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        out = tmp_path / "sub" / "r.csv"
        assert run_cli("run", "--out", str(out)) == 0
        assert out.exists()
        assert [p.name for p in out.parent.iterdir()] == ["r.csv"]

    def test_parser_lists_subcommands(self):
        parser = build_parser()
        text = parser.format_help()
        for name in ("run", "enumerate", "sweep", "monte-carlo", "verify"):
            assert name in text
