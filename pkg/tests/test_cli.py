import json
import os

import cli
from system import config_loader

SMALL_SEMD = ["verify", "--algorithm", "semd", "--enqueuers", "1", "--dequeuers", "1",
              "--enq-ops", "1", "--deq-ops", "1", "--mode", "exhaustive"]


def read_report(out_dir):
    with open(os.path.join(out_dir, "report.jsonl"), encoding="utf-8") as f:
        return [json.loads(line) for line in f]


def test_exhaustive_verify_passes(tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(SMALL_SEMD + ["--out", out]) == cli.EXIT_OK
    summary = read_report(out)[0]
    assert summary["record"] == "summary"
    assert summary["passed"] is True
    assert summary["bounds"] == {"enq": 5, "deq": 14}
    assert summary["schedules"] == summary["histories_checked"] > 1
    assert summary["mutants_checked"] == summary["oracle_checks"]
    assert 0 < summary["mutants_rejected"] <= summary["mutants_checked"]


def test_sesd_exhaustive_counts_every_interleaving(tmp_path):
    out = str(tmp_path / "out")
    argv = ["verify", "--algorithm", "sesd", "--enqueuers", "1", "--dequeuers", "1", "--enq-ops", "2",
            "--deq-ops", "1", "--mode", "exhaustive", "--out", out]
    assert cli.main(argv) == cli.EXIT_OK
    assert read_report(out)[0]["schedules"] == 3


def test_random_reports_are_reproducible(tmp_path):
    reports = []
    for name in ("one", "two"):
        out = str(tmp_path / name)
        argv = ["verify", "--algorithm", "temd", "--enqueuers", "2", "--dequeuers", "1", "--enq-ops", "1",
                "--deq-ops", "2", "--mode", "random", "--random-schedules", "20", "--seed", "9", "--out", out]
        assert cli.main(argv) == cli.EXIT_OK
        with open(os.path.join(out, "report.jsonl"), "rb") as f:
            reports.append(f.read())
    assert reports[0] == reports[1]


def test_role_limit_is_a_usage_error(tmp_path):
    argv = SMALL_SEMD + ["--enqueuers", "2", "--out", str(tmp_path)]
    assert cli.main(argv) == cli.EXIT_USAGE


def test_missing_command_and_missing_trace(tmp_path):
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(["replay", str(tmp_path / "absent.jsonl")]) == cli.EXIT_USAGE
    assert cli.main(["--config", str(tmp_path / "absent.json"), "verify"]) == cli.EXIT_USAGE


def test_replay_of_a_kept_trace(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert cli.main(SMALL_SEMD + ["--out", out, "--keep-passing", "2"]) == cli.EXIT_OK
    traces = sorted(os.listdir(os.path.join(out, "traces")))
    assert len(traces) == 2
    path = os.path.join(out, "traces", traces[0])
    assert cli.main(["replay", path, "--annotate"]) == cli.EXIT_OK
    printed = capsys.readouterr().out
    assert "Linearizable: True" in printed
    assert "orderpt" in printed


def test_tampered_trace_is_a_divergence(tmp_path):
    out = str(tmp_path / "out")
    cli.main(SMALL_SEMD + ["--out", out, "--keep-passing", "1"])
    folder = os.path.join(out, "traces")
    path = os.path.join(folder, os.listdir(folder)[0])
    with open(path, encoding="utf-8") as f:
        header, *events = f.read().splitlines()
    respond = max(i for i, line in enumerate(events) if '"kind":"respond"' in line)
    record = json.loads(events[respond])
    record["ret"] = "forged"
    events[respond] = json.dumps(record)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join([header] + events) + "\n")
    assert cli.main(["replay", path]) == cli.EXIT_VIOLATION
    assert os.path.exists(config_loader.ERROR_LOG)


def test_sample_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(["--sample"]) == cli.EXIT_OK
    with open(tmp_path / "sample_config.json", encoding="utf-8") as f:
        sample = json.load(f)
    assert set(sample) == set(config_loader.SETTING_KEYS)


def test_config_file_settings(tmp_path):
    config_path = tmp_path / "settings.json"
    config_path.write_text(json.dumps({"ALGORITHM": "sesd", "ENQUEUERS": 1, "DEQUEUERS": 1, "ENQ_OPS": 1,
                                       "DEQ_OPS": 1, "MODE": "exhaustive", "OUT_DIR": str(tmp_path / "o")}),
                           encoding="utf-8")
    assert cli.main(["--config", str(config_path), "verify"]) == cli.EXIT_OK
    assert read_report(str(tmp_path / "o"))[0]["schedules"] == 2


def test_stress_native_command(tmp_path):
    argv = ["stress-native", "--algorithm", "semd", "--dequeuers", "2", "--ops-per-thread", "12",
            "--window-size", "6", "--out", str(tmp_path)]
    assert cli.main(argv) == cli.EXIT_OK
    with open(tmp_path / "native_report.jsonl", encoding="utf-8") as f:
        assert json.loads(f.readline())["passed"] is True


def test_stress_native_refuses_the_single_dequeuer_queue(tmp_path):
    config_path = tmp_path / "settings.json"
    config_path.write_text(json.dumps({"ALGORITHM": "sesd", "OUT_DIR": str(tmp_path / "o")}), encoding="utf-8")
    assert cli.main(["--config", str(config_path), "stress-native", "--ops-per-thread", "4"]) == cli.EXIT_USAGE
    assert not (tmp_path / "o" / "native_report.jsonl").exists()


def test_two_enqueuer_random_verify_passes(tmp_path):
    out = str(tmp_path / "out")
    argv = ["verify", "--algorithm", "temd", "--enqueuers", "2", "--dequeuers", "1", "--enq-ops", "1",
            "--deq-ops", "1", "--mode", "random", "--random-schedules", "30", "--out", out]
    assert cli.main(argv) == cli.EXIT_OK
    summary = read_report(out)[0]
    assert summary["passed"] is True
    assert summary["order_checks"] == 30
