import csv
import json

import pytest

from morselab.cli import main
from morselab.config import config_from_text, load_config, parse_config_text
from morselab.errors import ConfigError
from morselab.report import RunReport, emit_plotdata


def write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def run(tmp_path, text, *extra):
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    code = main(["run", "--config", str(cfg), "--out", str(out), *extra])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


def test_parse_values():
    got = parse_config_text('# c\nexperiment = profile\nradius = 6\nt = ["1/4"]\ngroup = free(a,b)  # note\n')
    assert got == {"experiment": "profile", "radius": 6, "t": ["1/4"], "group": "free(a,b)"}
    with pytest.raises(ConfigError):
        parse_config_text("radius 6")
    with pytest.raises(ConfigError):
        parse_config_text("a = 1\na = 2")


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        config_from_text("experiment = bogus")
    with pytest.raises(ConfigError):
        config_from_text("experiment = profile\ngroup = free(a,b)\nradius = 3\nwat = 1")
    with pytest.raises(ConfigError):
        config_from_text("experiment = profile\ngroup = free(a,b)")
    with pytest.raises(ConfigError):
        config_from_text("experiment = lemma-suite\nnode_budget = 0")
    with pytest.raises(ConfigError):
        config_from_text("experiment = catalog\ngroup_file = nope.txt\nradius = 3", tmp_path)
    write(tmp_path, "kind=free\ngenerators=a,b\n", "g.txt")
    cfg = config_from_text("experiment = catalog\ngroup_file = g.txt\nradius = 3\nD = 2", tmp_path)
    assert cfg.group.to_expr() == "free(a,b)"
    assert load_config(write(tmp_path, "experiment = exitpoints\nseed = 5"), 9).seed == 9


def test_config_error_exit_status(tmp_path, capsys):
    code, report, _ = run(tmp_path, "experiment = profile\n")
    assert code == 2 and report is None
    assert "config error" in capsys.readouterr().err


def test_profile_run(tmp_path):
    code, report, out = run(tmp_path, """experiment = profile
group = free(a,b)
radius = 6
paths = ["a b a"]
grid = [[1, 0], [2, 0], [3, 0], [3, 2]]
seed = 4
""")
    assert code == 0 and report["exhaustive"]
    assert report["schema"] == "report/v1" and report["seed"] == 4
    rows = list(csv.DictReader((out / "profile.csv").open()))
    assert [r["mu_star"] for r in rows] == ["0", "0", "0", "3"]
    assert all(r["exhaustive"] == "true" for r in rows)
    plot = list(csv.reader((out / "plotdata.csv").open()))
    assert plot[0] == ["fixture", "n", "quantity", "value"] and len(plot) == 5
    assert json.loads((out / "timing.json").read_text())["seconds"] >= 0


def test_empty_grid(tmp_path):
    code, report, out = run(tmp_path, "experiment = profile\ngroup = free(a,b)\nradius = 4\npaths = [\"a\"]\ngrid = []\n")
    assert code == 0 and report["results"] == []
    assert (out / "plotdata.csv").read_text() == "fixture,n,quantity,value\n"


def test_budget_exhaustion_status(tmp_path):
    code, report, _ = run(tmp_path, """experiment = profile
group = abelian(a,b)
radius = 14
paths = ["a a a a a a"]
grid = [[3, 0]]
node_budget = 10
""")
    assert code == 3 and not report["exhaustive"] and report["results"]
    code, report, _ = run(tmp_path, "experiment = catalog\ngroup = free(a,b)\nradius = 20\nD = 2\n"
                                    "weak_morse = [1, 0, 0]\nvertex_budget = 100\n")
    assert code == 3 and "error" in report["summary"]


def test_margin_problem_is_config_error(tmp_path):
    code, _, _ = run(tmp_path, 'experiment = profile\ngroup = abelian(a,b)\nradius = 4\npaths = ["a a a"]\ngrid = [[3, 0]]\n')
    assert code == 2


def test_middle_and_catalog(tmp_path):
    code, report, _ = run(tmp_path, """experiment = middle
group = abelian(a,b)
radius = 20
paths = ["a a a a", "a a a a a a a a"]
t = ["1/4"]
c = [2]
""")
    assert code == 0
    assert [r["m_hat"] for r in report["results"]] == [1, 2]
    code, report, out = run(tmp_path, """experiment = catalog
group = free(a,b)
radius = 8
D = 3
weak_morse = [3, 0, 1]
catalog_file = cat.txt
""")
    assert code == 0 and report["results"][0]["count"] == 53
    assert (out / "cat.txt").read_text().startswith("# morselab-catalog v1")


def test_certify(tmp_path):
    code, report, _ = run(tmp_path, """experiment = certify
group = free(a,b)
radius = 8
D = 3
weak_morse = [3, 0, 1]
paths = ["a b a b", "a b b^-1"]
combing = shortlex
""")
    assert code == 0
    assert [r["overall"] for r in report["results"]] == ["certified", "not-certified"]


def test_counterexample(tmp_path):
    code, report, _ = run(tmp_path, "experiment = counterexample\ncycle = 20\nD = 9\n")
    assert code == 0 and report["violations"] == []
    cert = report["results"][0]["certificate"]
    assert cert["overall"] == "certified" and cert["fitted_params"] is None
    # a cycle short enough for a global fit is flagged
    code, report, _ = run(tmp_path, "experiment = counterexample\ncycle = 8\nD = 3\n")
    assert code == 1 and report["violations"]


def test_lemma_suite_and_seed_override(tmp_path):
    text = "experiment = lemma-suite\nseed = 3\nreverse_inclusion = 10\nconcatenation = 10\nexit_points = 5\nqg_stay = 5\n"
    code, report, _ = run(tmp_path, text, "--seed-override", "12")
    assert code == 0 and report["seed"] == 12 and report["config"]["seed"] == 12
    assert len(report["summary"]["formulas"]) == 20


def test_emit_plotdata_sorts_rows():
    rep = RunReport("x", {}, 0, plot_rows=[("b", 2, "q", 1), ("a", 1, "q", 2)])
    assert emit_plotdata(rep).splitlines()[1:] == ["a,1,q,2", "b,2,q,1"]
