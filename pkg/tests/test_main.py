import csv
import json
import pytest
from pathlib import Path
from unittest.mock import MagicMock
from config import TOOLKIT_VERSION, ConfigManager
from log_manager import LogManager
from main import DOCUMENT_KINDS, TropMapApp, build_parser, main

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"system": {"log_file": str(tmp_path / "tropmap.log")}}), encoding="utf-8")
    return path


@pytest.fixture
def run_verb(config_file, tmp_path):
    async def run(*argv):
        output = tmp_path / "report.json"
        args = build_parser().parse_args(["--config", str(config_file), "--output", str(output), *argv])
        code = await TropMapApp(args).run()
        report = json.loads(output.read_text(encoding="utf-8")) if output.exists() else None
        return code, report
    return run


def sample(name):
    return str(SAMPLES / f"{name}.json")


@pytest.mark.asyncio
async def test_homology_report(run_verb):
    code, report = await run_verb("homology", "--fan", sample("line_fan"), "--p", "1")
    assert code == 0
    assert report["verb"] == "homology"
    assert report["version"] == TOOLKIT_VERSION
    assert report["result"]["ranks"] == {"(1,0)": 0, "(1,1)": 1}
    assert sample("line_fan") in report["inputs"]
    assert "timing" not in report


@pytest.mark.asyncio
async def test_timing_is_opt_in(run_verb):
    code, report = await run_verb("--timing", "kgroup", "--fan", sample("p2_fan"), "--p", "2")
    assert code == 0
    assert report["result"]["dim"] == 1
    assert report["timing"]["seconds"] >= 0


@pytest.mark.asyncio
async def test_unbalanced_cycle_is_reported(run_verb):
    code, report = await run_verb("balance", "--cycle", sample("unbalanced_cycle"))
    assert code == 0
    assert report["result"]["balanced"] is False


@pytest.mark.asyncio
async def test_circle_log_integral(run_verb):
    code, report = await run_verb("logint", "--chain", sample("circle"), "--monomials", sample("unit_monomial"))
    assert code == 0
    assert report["result"]["rational"] == "-1"


@pytest.mark.asyncio
async def test_refinement_report(run_verb):
    code, report = await run_verb("refine", "--fan", sample("blowup_fan"), "--other", sample("p1xp1_fan"))
    assert code == 0
    assert report["result"]["maximal_cone_count"] == 6
    assert report["result"]["ray_count"] == 6


@pytest.mark.asyncio
async def test_limit_writes_csv(run_verb, tmp_path):
    table = tmp_path / "sweep.csv"
    code, report = await run_verb("limit", "--chain", sample("gm_chain"), "--form", sample("gm_bump_form"),
                                  "--levels", "2", "--csv", str(table))
    assert code == 0
    assert len(report["result"]["levels"]) == 2
    with open(table, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["eps", "value_real", "value_imag", "error"]
    assert len(rows) == 3


@pytest.mark.asyncio
async def test_exit_codes(run_verb, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert (await run_verb("check", "--document", str(broken)))[0] == 1
    assert (await run_verb("homology", "--fan", str(tmp_path / "missing.json"), "--p", "0"))[0] == 1
    assert (await run_verb("homology", "--fan", sample("line_fan"), "--p", "-1"))[0] == 2
    assert (await run_verb("expcone", "--point", "0.1", "0.1", "--N", "0", "--h", "0.5"))[0] == 2
    assert (await run_verb("limit", "--chain", sample("gm_chain"), "--form", sample("gm_bump_form"),
                           "--levels", "60"))[0] == 2


@pytest.mark.asyncio
async def test_schema_error_is_a_document_error(run_verb, tmp_path, capsys):
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"kind": "fan", "lattice_rank": -1}), encoding="utf-8")
    code, report = await run_verb("check", "--document", str(wrong))
    assert code == 1
    assert report is None
    assert "error:" in capsys.readouterr().err


@pytest.mark.asyncio
@pytest.mark.parametrize("path", sorted(SAMPLES.glob("*.json")), ids=lambda p: p.stem)
async def test_every_sample_validates(run_verb, path):
    code, report = await run_verb("check", "--document", str(path))
    assert code == 0
    assert report["result"]["kind"] in DOCUMENT_KINDS


def test_main_prints_report(config_file, capsys):
    code = main(["--config", str(config_file), "expcone", "--point", "1e-4", "0.1", "--N", "2", "--h", "0.5"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["result"] == {"member": True}


def test_log_manager_filters_disabled_modules(capsys):
    config = MagicMock(spec=ConfigManager)
    config.get = MagicMock(side_effect=lambda key, default=None: None if key == "system.log_file" else default)
    config.get_module_logging = MagicMock(side_effect=lambda name: name != "satrop")
    manager = LogManager(config)
    try:
        manager.info("main", "shown message")
        manager.info("satrop", "hidden message")
    finally:
        manager.close()
    err = capsys.readouterr().err
    assert "shown message" in err
    assert "hidden message" not in err


@pytest.mark.asyncio
async def test_tropical_hypersurface_report_carries_balance(run_verb):
    code, report = await run_verb("trophyp", "--poly", sample("conic_poly"))
    assert code == 0
    assert report["result"]["balance"]["balanced"] is True
