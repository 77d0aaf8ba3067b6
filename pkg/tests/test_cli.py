"""CLI subcommands driven in-process through main(argv)."""

import numpy as np
import pytest

from procmp.cli import main
from procmp.dataio import read_csv
from procmp.errors import VerificationError
from procmp.profile import load_profile, verify_profile

# Small plant: one pump, one backup, one level sensor. The first attack
# stops the pump and masks it with the backup; the second stops only the
# pump while it should be running.
SPEC_TEXT = """\
[run]
n = 600
seed = 5
window = 50
threshold = 0.1

[channel:PUMP-1]
kind = pump
period = 60
duty = 0.5

[channel:BACK-1]
kind = backup

[channel:LVL-1]
kind = level
period = 100
base = 10
amplitude = 5

[attack:1]
start = 300
duration = 60
action = PUMP-1:force_off, BACK-1:force_on
category = SSMP
affects_process = false

[attack:2]
start = 510
duration = 20
action = PUMP-1:force_on
category = SSSP
affects_process = true
"""


@pytest.fixture()
def plant(tmp_path):
    spec = tmp_path / "plant.spec"
    spec.write_text(SPEC_TEXT)
    assert main(["synth", str(spec), "--out", str(tmp_path)]) == 0
    return {
        "dir": tmp_path,
        "spec": spec,
        "log": tmp_path / "plant.csv",
        "attacks": tmp_path / "plant.attacks.csv",
    }


class TestSynth:
    def test_outputs(self, plant):
        assert plant["log"].exists()
        lines = plant["attacks"].read_text().splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("300,359,PUMP-1;BACK-1,SSMP,false")
        log = read_csv(plant["log"])
        assert log.n == 600
        assert log.labels.sum() == 80

    def test_byte_identical_reruns(self, plant, tmp_path):
        again = tmp_path / "again"
        assert main(["synth", str(plant["spec"]), "--out", str(again)]) == 0
        assert (again / "plant.csv").read_bytes() == plant["log"].read_bytes()
        assert (
            again / "plant.attacks.csv"
        ).read_bytes() == plant["attacks"].read_bytes()

    def test_bundled_name_and_stem(self, tmp_path):
        assert main(["synth", "interval3", "--stem", "iv3", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "iv3.csv").exists()
        assert (tmp_path / "iv3.attacks.csv").exists()

    def test_unknown_spec(self, tmp_path, capsys):
        assert main(["synth", "interval99", "--out", str(tmp_path)]) == 1
        assert "no bundled spec" in capsys.readouterr().err

    def test_seed_override_changes_noisy_output(self, tmp_path):
        spec = tmp_path / "noisy.spec"
        spec.write_text(
            "[run]\nn = 400\nseed = 1\n"
            "[channel:P]\nkind = pump\nperiod = 40\nnoise = 0.1\n"
        )
        assert main(["synth", str(spec), "--out", str(tmp_path / "a")]) == 0
        assert main(["synth", str(spec), "--seed", "2", "--out", str(tmp_path / "b")]) == 0
        a = (tmp_path / "a" / "noisy.csv").read_bytes()
        b = (tmp_path / "b" / "noisy.csv").read_bytes()
        assert a != b


class TestProfile:
    def test_all_channels_by_default(self, plant):
        out = plant["dir"] / "profiles"
        assert main(
            ["profile", "--input", str(plant["log"]), "-m", "50", "--out", str(out)]
        ) == 0
        for name, metric in (("PUMP-1", "hamming"), ("BACK-1", "hamming"), ("LVL-1", "znorm")):
            prof, meta = load_profile(out / f"{name}.profile.csv")
            assert meta["metric"] == metric
            assert prof.window == 50
            assert len(prof) == 551

    def test_saved_profile_verifies(self, plant):
        out = plant["dir"] / "pv"
        assert main(
            [
                "profile",
                "--input",
                str(plant["log"]),
                "--channel",
                "PUMP-1",
                "-m",
                "50",
                "--out",
                str(out),
            ]
        ) == 0
        prof, meta = load_profile(out / "PUMP-1.profile.csv")
        log = read_csv(plant["log"])
        verify_profile(log.channel("PUMP-1"), prof)

    def test_verify_flag(self, plant):
        assert main(
            [
                "profile",
                "--input",
                str(plant["log"]),
                "--channel",
                "PUMP-1,LVL-1",
                "-m",
                "50",
                "--verify",
                "--out",
                str(plant["dir"] / "v"),
            ]
        ) == 0

    def test_threads_do_not_change_bytes(self, plant):
        d1 = plant["dir"] / "t1"
        d2 = plant["dir"] / "t2"
        base = ["profile", "--input", str(plant["log"]), "--channel", "PUMP-1", "-m", "50"]
        assert main(base + ["--threads", "1", "--out", str(d1)]) == 0
        assert main(base + ["--threads", "3", "--out", str(d2)]) == 0
        assert (d1 / "PUMP-1.profile.csv").read_bytes() == (
            d2 / "PUMP-1.profile.csv"
        ).read_bytes()

    def test_window_config_and_flag_precedence(self, plant):
        cfgfile = plant["dir"] / "run.cfg"
        cfgfile.write_text("window = 40\nthreads = 1\n")
        out1 = plant["dir"] / "c1"
        assert main(
            [
                "profile",
                "--input",
                str(plant["log"]),
                "--channel",
                "PUMP-1",
                "--config",
                str(cfgfile),
                "--out",
                str(out1),
            ]
        ) == 0
        assert load_profile(out1 / "PUMP-1.profile.csv")[0].window == 40
        out2 = plant["dir"] / "c2"
        assert main(
            [
                "profile",
                "--input",
                str(plant["log"]),
                "--channel",
                "PUMP-1",
                "--config",
                str(cfgfile),
                "-m",
                "30",
                "--out",
                str(out2),
            ]
        ) == 0
        assert load_profile(out2 / "PUMP-1.profile.csv")[0].window == 30

    def test_window_too_large_exits_1(self, plant, capsys):
        code = main(
            ["profile", "--input", str(plant["log"]), "--channel", "PUMP-1", "-m", "601"]
        )
        assert code == 1
        assert "window" in capsys.readouterr().err

    def test_metric_mismatch_exits_1(self, plant, capsys):
        code = main(
            [
                "profile",
                "--input",
                str(plant["log"]),
                "--channel",
                "LVL-1",
                "--metric",
                "hamming",
                "-m",
                "50",
                "--out",
                str(plant["dir"] / "x"),
            ]
        )
        assert code == 1
        assert "hamming" in capsys.readouterr().err

    def test_missing_input_exits_2(self, plant):
        assert main(["profile", "--input", str(plant["dir"] / "nope.csv")]) == 2

    def test_unknown_channel_exits_2(self, plant):
        assert main(
            ["profile", "--input", str(plant["log"]), "--channel", "FIT-999"]
        ) == 2

    def test_corrupt_log_exits_2(self, plant, capsys):
        bad = plant["dir"] / "bad.csv"
        bad.write_text("Timestamp,x\n0,1\n1,wat\n")
        assert main(["profile", "--input", str(bad)]) == 2
        assert "row 3" in capsys.readouterr().err

    def test_verification_failure_exits_3(self, plant, monkeypatch):
        import procmp.cli as cli

        def boom(*a, **k):
            raise VerificationError("forced mismatch")

        monkeypatch.setattr(cli, "compute_profile", boom)
        code = main(
            ["profile", "--input", str(plant["log"]), "--channel", "PUMP-1", "--verify"]
        )
        assert code == 3


@pytest.fixture()
def profiled(plant):
    out = plant["dir"] / "profiles"
    assert main(
        ["profile", "--input", str(plant["log"]), "-m", "50", "--out", str(out)]
    ) == 0
    plant["profiles"] = {
        name: out / f"{name}.profile.csv" for name in ("PUMP-1", "BACK-1", "LVL-1")
    }
    return plant


class TestDetect:
    def test_from_stored_profile(self, profiled):
        out = profiled["dir"] / "det"
        code = main(
            [
                "detect",
                "--profile",
                str(profiled["profiles"]["PUMP-1"]),
                "--threshold",
                "0.1",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        lines = (out / "PUMP-1.events.csv").read_text().splitlines()
        assert lines[0] == "start,end,peak,width,matched_attack"
        assert len(lines) >= 2
        # no ground truth here, so every event is unmatched
        assert all(line.endswith(",-1") for line in lines[1:])

    def test_inline_computation_matches_stored(self, profiled):
        a = profiled["dir"] / "da"
        b = profiled["dir"] / "db"
        assert main(
            [
                "detect",
                "--profile",
                str(profiled["profiles"]["PUMP-1"]),
                "--threshold",
                "0.1",
                "--out",
                str(a),
            ]
        ) == 0
        assert main(
            [
                "detect",
                "--input",
                str(profiled["log"]),
                "--channel",
                "PUMP-1",
                "-m",
                "50",
                "--threshold",
                "0.1",
                "--out",
                str(b),
            ]
        ) == 0
        assert (a / "PUMP-1.events.csv").read_bytes() == (
            b / "PUMP-1.events.csv"
        ).read_bytes()

    def test_threshold_above_max_gives_no_events(self, profiled):
        out = profiled["dir"] / "none"
        assert main(
            [
                "detect",
                "--profile",
                str(profiled["profiles"]["PUMP-1"]),
                "--threshold",
                "1.1",
                "--out",
                str(out),
            ]
        ) == 0
        assert (out / "PUMP-1.events.csv").read_text().splitlines() == [
            "start,end,peak,width,matched_attack"
        ]

    def test_profile_and_input_together_exit_1(self, profiled):
        assert main(
            [
                "detect",
                "--profile",
                str(profiled["profiles"]["PUMP-1"]),
                "--input",
                str(profiled["log"]),
                "--threshold",
                "0.1",
            ]
        ) == 1

    def test_neither_source_exits_1(self, profiled):
        assert main(["detect", "--threshold", "0.1"]) == 1

    def test_negative_threshold_exits_1(self, profiled):
        assert main(
            [
                "detect",
                "--profile",
                str(profiled["profiles"]["PUMP-1"]),
                "--threshold",
                "-0.5",
            ]
        ) == 1

    def test_missing_meta_exits_2(self, profiled, tmp_path):
        orphan = tmp_path / "orphan.profile.csv"
        orphan.write_bytes(profiled["profiles"]["PUMP-1"].read_bytes())
        assert main(["detect", "--profile", str(orphan), "--threshold", "0.1"]) == 2


class TestEval:
    def run_eval(self, profiled, channel, out, extra=()):
        return main(
            [
                "eval",
                "--profile",
                str(profiled["profiles"][channel]),
                "--attacks",
                str(profiled["attacks"]),
                "--threshold",
                "0.1",
                "--out",
                str(out),
                *extra,
            ]
        )

    def test_full_report(self, profiled):
        out = profiled["dir"] / "ev"
        assert self.run_eval(profiled, "PUMP-1", out) == 0
        report = (out / "PUMP-1.report.txt").read_text()
        assert "detected = 2" in report
        assert "missed = 0" in report
        assert "false_positive_events = 0" in report
        assert "[attacks]" in report
        assert (out / "PUMP-1.events.csv").exists()

    def test_level_channel_sees_no_events(self, profiled):
        out = profiled["dir"] / "evl"
        assert self.run_eval(profiled, "LVL-1", out) == 0
        report = (out / "LVL-1.report.txt").read_text()
        assert "events = 0" in report
        assert "detected = 0" in report

    def test_targets_only_filters_attacks(self, profiled):
        out = profiled["dir"] / "evt"
        assert self.run_eval(profiled, "BACK-1", out, ("--targets-only",)) == 0
        report = (out / "BACK-1.report.txt").read_text()
        assert "attacks = 1" in report
        assert "detected = 1" in report
        assert "false_positive_events = 0" in report

    def test_missing_attacks_flag_is_usage_error(self, profiled):
        assert main(
            ["eval", "--profile", str(profiled["profiles"]["PUMP-1"])]
        ) == 1

    def test_empty_attacks_file_counts_all_events_fp(self, profiled, tmp_path):
        empty = tmp_path / "none.csv"
        empty.write_text("start,end,targets,category,affects_process\n")
        out = profiled["dir"] / "evfp"
        assert main(
            [
                "eval",
                "--profile",
                str(profiled["profiles"]["PUMP-1"]),
                "--attacks",
                str(empty),
                "--threshold",
                "0.1",
                "--out",
                str(out),
            ]
        ) == 0
        report = (out / "PUMP-1.report.txt").read_text()
        kv = dict(
            line.split(" = ")
            for line in report.splitlines()
            if " = " in line
        )
        assert kv["attacks"] == "0"
        assert kv["false_positive_events"] == kv["events"]
        assert int(kv["events"]) > 0

    def test_sweep_table(self, profiled):
        out = profiled["dir"] / "evs"
        assert self.run_eval(
            profiled, "PUMP-1", out, ("--sweep", "0.05,0.1,0.5,1.01")
        ) == 0
        lines = (out / "PUMP-1.sweep.csv").read_text().splitlines()
        assert lines[0] == "threshold,detected,false_positives"
        assert len(lines) == 5
        assert lines[4].startswith("1.01,0,")

    def test_bad_sweep_exits_1(self, profiled):
        out = profiled["dir"] / "evb"
        assert self.run_eval(profiled, "PUMP-1", out, ("--sweep", "0.5,0.1")) == 1
        assert self.run_eval(profiled, "PUMP-1", out, ("--sweep", "a,b")) == 1

    def test_report_is_deterministic(self, profiled):
        out1 = profiled["dir"] / "r1"
        out2 = profiled["dir"] / "r2"
        assert self.run_eval(profiled, "PUMP-1", out1) == 0
        assert self.run_eval(profiled, "PUMP-1", out2) == 0
        assert (out1 / "PUMP-1.report.txt").read_bytes() == (
            out2 / "PUMP-1.report.txt"
        ).read_bytes()


class TestPlot:
    def test_svg_deterministic(self, profiled):
        a = profiled["dir"] / "a.svg"
        b = profiled["dir"] / "b.svg"
        argv = [
            "plot",
            "--input",
            str(profiled["log"]),
            "--channel",
            "PUMP-1,BACK-1",
            "--attacks",
            str(profiled["attacks"]),
            "-m",
            "50",
        ]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert b"<svg" in a.read_bytes()[:500]

    def test_stored_profiles(self, profiled):
        out = profiled["dir"] / "stored.svg"
        assert main(
            [
                "plot",
                "--input",
                str(profiled["log"]),
                "--channel",
                "PUMP-1",
                "--profile",
                str(profiled["profiles"]["PUMP-1"]),
                "--out",
                str(out),
            ]
        ) == 0
        assert out.exists()

    def test_profile_count_mismatch_exits_1(self, profiled):
        assert main(
            [
                "plot",
                "--input",
                str(profiled["log"]),
                "--channel",
                "PUMP-1,BACK-1",
                "--profile",
                str(profiled["profiles"]["PUMP-1"]),
                "--out",
                str(profiled["dir"] / "x.svg"),
            ]
        ) == 1

    def test_bad_suffix_exits_1(self, profiled):
        assert main(
            [
                "plot",
                "--input",
                str(profiled["log"]),
                "--out",
                str(profiled["dir"] / "fig.bmp"),
            ]
        ) == 1


class TestConfigAndUsage:
    def test_no_subcommand_exits_1(self, capsys):
        assert main([]) == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag_exits_1(self, plant):
        assert main(["profile", "--input", str(plant["log"]), "--wat"]) == 1

    def test_unknown_config_key_exits_1(self, plant, capsys):
        cfg = plant["dir"] / "bad.cfg"
        cfg.write_text("wibble = 3\n")
        assert main(
            ["profile", "--input", str(plant["log"]), "--config", str(cfg)]
        ) == 1
        assert "wibble" in capsys.readouterr().err

    def test_bad_config_value_exits_1(self, plant):
        cfg = plant["dir"] / "bad2.cfg"
        cfg.write_text("window = big\n")
        assert main(
            ["profile", "--input", str(plant["log"]), "--config", str(cfg)]
        ) == 1

    def test_missing_config_file_exits_2(self, plant):
        assert main(
            [
                "profile",
                "--input",
                str(plant["log"]),
                "--config",
                str(plant["dir"] / "ghost.cfg"),
            ]
        ) == 2

    def test_hyphenated_config_keys(self, profiled):
        cfg = profiled["dir"] / "gaps.cfg"
        cfg.write_text("merge-gap = 5\nmin-width = 2\n")
        out = profiled["dir"] / "cfgdet"
        assert main(
            [
                "detect",
                "--profile",
                str(profiled["profiles"]["PUMP-1"]),
                "--threshold",
                "0.1",
                "--config",
                str(cfg),
                "--out",
                str(out),
            ]
        ) == 0
