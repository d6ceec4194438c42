import json

import pytest

from kequiv import cli


def _run(argv, capsys):
    code, report = cli.run(argv)
    out = capsys.readouterr()
    return code, report, out


@pytest.mark.parametrize(
    "argv",
    [
        ["genus", "P2"],
        ["genus", "Bl_pt P2", "--kind", "chi_y", "--k", "0"],
        ["verify", "elliptic-fe", "--xorder", "5", "--qorder", "2"],
        ["verify", "blowup-motive"],
        ["stringy-e"],
        ["zeta", "compare"],
        ["arcs", "verify"],
        ["gallery", "list"],
    ],
)
def test_commands_succeed(argv, capsys):
    code, report, out = _run(argv, capsys)
    assert code == 0, out.out + out.err
    assert report.claims or report.data
    assert out.out.startswith("$ kequiv")


def test_change_of_variable_command(capsys):
    code, report, _ = _run(["verify", "cov", "--format", "machine"], capsys)
    assert code == 0
    assert len(report.claims) == 27
    todd = [c for c in report.claims if c.id.endswith("todd/change-of-variable")]
    assert len(todd) == 3 and all(c.witness["jacobian_is_one"] for c in todd)


def test_refuted_claim_exits_one(capsys):
    code, report, _ = _run(["zeta", "compare", "--spaces", "P2", "P1xP1", "--q", "2"], capsys)
    assert code == 1
    assert report.claims[0].status == "refuted"


def test_budget_refusal_exits_three(capsys):
    code, report, _ = _run(["arcs", "verify", "--m", "6", "--q", "5", "--budget", "1000000"], capsys)
    assert code == 3
    assert any(c.status == "refused" for c in report.claims)
    code, _, _ = _run(["zeta", "compare", "--spaces", "quadric-P3", "P1xP1", "--q", "9", "--R", "2", "--budget", "100000"], capsys)
    assert code == 3


def test_regime_refusal_exits_three(capsys):
    code, _, _ = _run(["arcs", "verify", "--m", "1", "--kmax", "1"], capsys)
    assert code == 3


def test_gap_fan_is_malformed(tmp_path, capsys):
    path = tmp_path / "gap.json"
    path.write_text(json.dumps({"name": "gap", "dim": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "cones": [[0, 1], [0, 2]]}))
    code, report, out = _run(["genus", "--fan", str(path)], capsys)
    assert code == 2 and report is None
    assert "CompletenessError" in out.err and str(path) in out.err


def test_fan_file_genus(tmp_path, capsys):
    path = tmp_path / "p2.json"
    path.write_text(json.dumps({"name": "plane", "dim": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "cones": [[0, 1], [1, 2], [0, 2]]}))
    code, report, _ = _run(["genus", "--fan", str(path), "--format", "machine"], capsys)
    assert code == 0
    assert str(path) in report.inputs


def test_control_below_its_horizon_fails(capsys):
    code, report, _ = _run(["verify", "elliptic-fe", "--xorder", "4", "--qorder", "1"], capsys)
    assert code == 1
    ctl = next(c for c in report.claims if c.id == "fe/negative-control")
    assert ctl.status == "refuted" and "note" in ctl.witness


def test_unknown_config_key(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"x_order": 4, "colour": "blue"}))
    code, _, out = _run(["verify", "elliptic-fe", "--config", str(path)], capsys)
    assert code == 2
    assert "colour" in out.err


def test_config_file_sets_orders(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"x_order": 5, "q_order": 1, "format": "machine"}))
    code, _, out = _run(["verify", "elliptic-fe", "--config", str(path)], capsys)
    assert code == 0
    doc = json.loads(out.out)
    assert doc["exit_status"] == 0 and str(path) in doc["inputs"]


def test_malformed_arguments(capsys):
    assert cli.main(["genus", "Grassmannian"]) == 2
    assert cli.main(["zeta", "compare", "--q", "2,x"]) == 2
    assert cli.main(["zeta", "compare", "--q", "6"]) == 2
    assert cli.main(["nonsense"]) == 2


def test_machine_reports_are_deterministic(tmp_path, capsys):
    outputs = []
    path = tmp_path / "run.json"
    for _ in range(2):
        code = cli.main(["verify", "cov", "--space", "Bl_pt P2", "--format", "machine", "--output", str(path)])
        assert code == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    doc = json.loads(outputs[0])
    assert [c["id"] for c in doc["claims"]] == sorted(c["id"] for c in doc["claims"])
