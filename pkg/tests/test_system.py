import json

import openpyxl
import pytest

from system import config_loader, file_operations, report_export
from system.step_statistics import StepStatistics
from harness.history import HistoryError
from harness.sim_scheduler import RunConfig, random_run


def test_trace_files_round_trip(tmp_path):
    config = RunConfig.build("semd", 1, 1, 1, 1)
    schedule, history = random_run(config, 0)
    path = file_operations.save_counterexample(config, schedule, history, {"linearizable": True}, str(tmp_path))
    assert path.startswith(str(tmp_path / "counterexamples"))
    header, loaded_config, loaded_schedule, loaded = file_operations.load_trace(path)
    assert header["verdict"] == {"linearizable": True}
    assert loaded_config == config
    assert loaded_schedule == schedule
    assert loaded == history
    # the name is a hash of the contents
    assert file_operations.save_counterexample(config, schedule, history, {"linearizable": True},
                                               str(tmp_path)) == path


def test_load_trace_without_header(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps({"t": 0}) + "\n", encoding="utf-8")
    with pytest.raises(HistoryError):
        file_operations.load_trace(str(path))


def test_report_and_error_log(tmp_path):
    path = file_operations.write_report([{"record": "summary", "passed": True}], out_dir=str(tmp_path))
    assert open(path, encoding="utf-8").read() == '{"record":"summary","passed":true}\n'
    file_operations.log_error("verify", "boom")
    assert "boom" in open(config_loader.ERROR_LOG, encoding="utf-8").read()


def test_step_statistics_summary():
    config = RunConfig.build("semd", 1, 2, 2, 1)
    stats = StepStatistics()
    for seed in range(5):
        stats.add(random_run(config, seed)[1], config)
    assert len(stats) == 20
    records = {row["op"]: row for row in stats.records()}
    assert set(records) == {"semd enq", "semd deq"}
    assert records["semd enq"]["operations"] == 10
    assert records["semd deq"]["max_steps"] <= records["semd deq"]["bound"] == 14
    assert StepStatistics().summary().empty


def test_excel_export(tmp_path):
    config = RunConfig.build("semd", 1, 1, 1, 1)
    stats = StepStatistics()
    stats.add(random_run(config, 0)[1], config)
    filename = str(tmp_path / "report.xlsx")
    violations = [{"kind": "order", "detail": "keys tie", "trace": None}]
    assert report_export.export_to_excel({"algorithm": "semd"}, stats.summary(), violations, filename)
    workbook = openpyxl.load_workbook(filename)
    assert workbook.sheetnames == ["summary", "step statistics", "violations"]
    assert workbook["violations"]["B2"].value == "keys tie"


def test_settings_cover_every_key():
    settings = config_loader.current_settings()
    assert set(settings) == set(config_loader.SETTING_KEYS)
    assert config_loader.ALGORITHM in config_loader.ALGORITHM_CHOICES
