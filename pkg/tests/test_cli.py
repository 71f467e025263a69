import io
import json

import pytest

from topometric.cli import run


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {"min": "min 0 1\n", "glue": "exampleglue\n", "mm": "max 0 1\nmin 0 1\n", "bad": "min 1 0\n",
                       "fam": "gen coord(0)\ndepth 1\n", "fam4": "gen coord(0)\ndepth 4\n",
                       "dfam": "".join(f"gen dist([{j}/8,{j}/8])\n" for j in range(9))}.items():
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
    return paths


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    text = out.getvalue()
    data = json.loads(text.split("---\n", 1)[1]) if "---\n" in text else None
    return code, text, data


def test_star_star_failure_scenario_exits_zero():
    code, text, data = call("examples", "run", "star-star-failure")
    assert code == 0 and data["verdict"] == "PASS" and all(data["assertions"].values())


def test_unknown_scenario_is_usage_error():
    assert call("examples", "run", "nope")[0] == 2


@pytest.mark.parametrize("name", ["min", "glue", "mm"])
def test_check_axioms_on_catalog(files, name):
    code, _, data = call("check-axioms", "--space", files[name], "--samples", "16")
    assert code == 0 and data["verdict"] == "PASS"


def test_malformed_space_file(files, capsys):
    assert call("check-axioms", "--space", files["bad"])[0] == 2
    assert call("check-axioms", "--space", "/nonexistent")[0] == 2
    assert "cannot read" in capsys.readouterr().err


def test_missing_subcommand_is_usage_error():
    assert call()[0] == 2
    assert call("frobnicate")[0] == 2


def test_ball(files):
    code, _, data = call("ball", "--space", files["min"], "--set", "[0.2,0.4]", "--radius", "0.3")
    assert code == 0 and data["ball"] == "[0,7/10]"


def test_separate(files):
    code, _, data = call("separate", "--space", files["min"], "--K", "[0,0.2]", "--L", "[0.8,1]")
    assert code == 0 and data["distance"] == "3/5"
    assert call("separate", "--space", files["min"], "--K", "[0,1/2]", "--L", "[1/2,1]")[0] == 1


def test_star_checks(files):
    assert call("check-star", "--space", files["min"], "--open", "(0.4,0.6)", "--radius", "0.1")[0] == 0
    code, _, data = call("check-star-star", "--space", files["glue"], "--open", "L(0,1)", "--radius", "1/2")
    assert code == 1 and data["witness"] == "(L:0)" and data["escapes"][0].startswith("(R:")


def test_urysohn_values_and_refusal(files, capsys):
    code, _, data = call("urysohn", "--space", files["min"], "--F", "[0,0.2]", "--G", "[0.8,1]", "--r", "0.5",
                         "--at", "0.2; 0.8", "--prec", "5")
    assert code == 0 and list(data["values"].values()) == [["0", "0"], ["1/2", "1/2"]]
    code, _, _ = call("urysohn", "--space", files["min"], "--F", "[0,0.2]", "--G", "[0.8,1]", "--r", "0.6")
    assert code == 2 and "3/5" in capsys.readouterr().err


def test_urysohn_dump_replays(files):
    from topometric.approximation import load_approx
    from topometric.space import Space
    code, _, data = call("urysohn", "--space", files["min"], "--F", "[0,0.2]", "--G", "[0.8,1]", "--r", "0.5",
                         "--prec", "2", "--dump")
    A = load_approx(Space.parse("min 0 1"), data["approximation"])
    assert code == 0 and A.is_total() and len(A.alphas) >= 3


def test_tietze(files):
    code, _, data = call("tietze", "--space", files["min"], "--Y", "[0,1/4] | [3/4,1]",
                         "--f", "pieces([0,1/4]: 0, [3/4,1]: 1/4)", "--c", "1/2", "--cprime", "1", "--prec", "4",
                         "--at", "0; 1")
    assert code == 0 and len(data["values"]) == 2
    assert call("tietze", "--space", files["min"], "--Y", "all", "--f", "coord(0)", "--c", "1", "--cprime", "1")[0] == 2


def test_family_commands(files):
    assert call("embed", "--space", files["min"], "--family", files["dfam"], "--grid", "8")[0] == 0
    assert call("embed", "--space", files["mm"], "--family", files["fam"], "--grid", "4")[0] == 1
    assert call("stone-cech", "--space", files["min"], "--family", files["dfam"], "--samples", "8")[0] == 0
    assert call("sufficient", "--space", files["mm"], "--family", files["fam"], "--samples", "4", "--grid", "4")[0] == 1


def test_dense_extend(files):
    assert call("dense-extend", "--space", files["min"], "--dense", "grid:64", "--f", "coord(0)",
                "--samples", "4")[0] == 0
    code, _, data = call("dense-extend", "--space", files["glue"], "--dense", "glue", "--f", "leftind(0)",
                         "--at", "L0")
    assert code == 1 and "witness" in data
    assert call("dense-extend", "--space", files["min"], "--dense", "cloud", "--f", "coord(0)")[0] == 2


def test_l1_commands(files):
    code, _, data = call("l1", "refute", "--space", files["min"], "--family", files["fam"], "--f", "coord(0, 2, 0)",
                         "--eps", "1/2")
    assert code == 1 and data["verdict"] == "REFUTED"
    code, _, data = call("l1", "refute", "--space", files["min"], "--family", files["fam"], "--f", "coord(0)")
    assert code == 0 and data["verdict"] == "NONE"
    code, _, data = call("l1", "lemma-check", "--space", files["min"], "--family", files["fam4"], "--point", "0.5",
                         "--set", "[0,0.2] | [0.8,1]")
    assert code == 0 and data["separation"] == "PASS" and data["r"] != "0"
    code, _, data = call("l1", "roundtrip", "--space", files["min"], "--family", files["fam"], "--grid", "8",
                         "--sufficient")
    assert code == 0 and data["final_gap"] == "0"


def test_reports_are_deterministic(files):
    argv = ("check-axioms", "--space", files["mm"], "--samples", "16", "--seed", "3")
    assert call(*argv)[1] == call(*argv)[1]
