import json

import numpy as np
import pytest

from khankel import cli


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def _header(path):
    return path.read_text().splitlines()[0].split(",")


# --- config -----------------------------------------------------------------


def test_defaults():
    cfg = cli.load_config(None)
    assert cfg.context.N == 1 and cfg.context.k == (1.0,)
    assert cfg.seed == 0 and cfg.suites == tuple(cli.suites.SUITES)


def test_config_k_broadcast_and_overrides(tmp_path):
    path = _write(tmp_path, "c.json", {"context": {"N": 2, "k": 0.8}, "seed": 7,
                                       "tolerances": {"sigma_mass": 1e-7}, "suites": ["specfun"]})
    cfg = cli.load_config(path)
    assert cfg.context.k == (0.8, 0.8) and cfg.seed == 7
    assert cfg.tolerances == {"sigma_mass": 1e-7} and cfg.suites == ("specfun",)
    assert cfg.sigma_point == ((1.3, 0.4), 0.6)


@pytest.mark.parametrize("doc,needle", [
    ({"contxt": {}}, "'contxt': unknown field"),
    ({"context": {"N": 0}}, "context.N"),
    ({"context": {"k": "one"}}, "context.k"),
    ({"context": {"group": "rotations"}}, "context.group"),
    ({"context": {"N": 2, "k": [1, 2, 3]}}, "'context'"),
    ({"suites": ["nope"]}, "unknown suite 'nope'"),
    ({"seed": -1}, "'seed'"),
    ({"tolerances": {"bogus": 1.0}}, "tolerances.bogus"),
    ({"tolerances": {"sigma_mass": -1}}, "tolerances.sigma_mass"),
    ({"sigma_point": {"x": [1.0, 2.0]}}, "sigma_point.x"),
])
def test_config_field_errors(doc, needle):
    with pytest.raises(cli.ConfigError, match=needle):
        cli.parse_config(doc)


def test_json_syntax_error_reports_line_and_column(tmp_path):
    path = _write(tmp_path, "bad.json", '{\n  "seed": 1,,\n}')
    with pytest.raises(cli.ConfigError, match=r"bad\.json:2:13"):
        cli.load_config(path)


# --- exit codes -------------------------------------------------------------


def test_exit_code_config_error(tmp_path, capsys):
    path = _write(tmp_path, "c.json", {"contxt": {}})
    assert cli.main(["check", "--config", path]) == 2
    assert "unknown field" in capsys.readouterr().err


def test_exit_code_inadmissible(tmp_path, capsys):
    path = _write(tmp_path, "c.json", {"context": {"N": 1, "k": 0.1}})
    assert cli.main(["kernel", "--config", path]) == 2
    assert "-0.8 must be > 0" in capsys.readouterr().err


def test_exit_code_missing_file_and_bad_suite(tmp_path):
    assert cli.main(["check", "--config", str(tmp_path / "none.json")]) == 2
    assert cli.main(["check", "--suite", "nope", "--out", str(tmp_path)]) == 2
    assert cli.main(["check", "--seed", "-3", "--out", str(tmp_path)]) == 2


def test_exit_code_check_failure(tmp_path):
    # a zero tolerance on a check with a positive residual must fail
    path = _write(tmp_path, "c.json", {"tolerances": {"bessel_ode": 0.0}})
    assert cli.main(["check", "--config", path, "--suite", "specfun", "--out", str(tmp_path)]) == 1
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["pass"] is False


# --- outputs ----------------------------------------------------------------


def test_check_outputs_and_node_dump(tmp_path):
    assert cli.main(["check", "--suite", "specfun", "--suite", "sphmean", "--emit", "nodes",
                     "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["pass"] is True
    assert [s["suite"] for s in summary["suites"]] == ["specfun", "sphmean"]
    assert summary["config"]["suites"] == ["specfun", "sphmean"]
    assert _header(tmp_path / "checks.csv") == ["suite", "check", "residual", "tolerance", "pass"]
    assert _header(tmp_path / "sigma_nodes.csv") == ["xi_1", "weight"]
    nodes = np.loadtxt(tmp_path / "sigma_nodes.csv", delimiter=",", skiprows=1)
    assert nodes[:, -1].sum() == pytest.approx(1.0, abs=1e-8)


def test_check_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert cli.main(["check", "--suite", "specfun", "--suite", "translation", "--seed", "5",
                         "--out", str(d)]) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert (a / "checks.csv").read_bytes() == (b / "checks.csv").read_bytes()


@pytest.mark.parametrize("command,files", [
    ("kernel", {"kernel.csv": ["x_scale", "xi_scale", "value", "error_estimate", "eigen_residual"]}),
    ("transform", {"transform.csv": ["r", "f", "Ff", "FFf", "residual"]}),
    ("translate", {"translate.csv": ["y_1", "tau_f"], "rho_nodes.csv": ["radius", "weight"]}),
    ("sphmean", {"sigma_nodes.csv": ["xi_1", "weight"], "product_formula.csv": None,
                 "positivity.json": None}),
    ("geodesic", {"geodesic.csv": ["pair", "x_1", "x_2", "x0_1", "x0_2", "sqrt2_d", "graph", "gap"]}),
    ("wave", {"wave.csv": ["t", "r", "u"]}),
    ("huygens", {"huygens.json": None}),
    ("energy", {"energy.csv": ["t", "multiplier_energy"]}),
])
def test_subcommands_write_tables(tmp_path, command, files):
    assert cli.main([command, "--emit", "nodes", "--out", str(tmp_path)]) == 0
    for name, header in files.items():
        path = tmp_path / name
        assert path.exists(), name
        if header is not None:
            assert _header(path) == header
        if name.endswith(".json"):
            json.loads(path.read_text())


def test_full_precision_floats(tmp_path):
    cli.write_csv(tmp_path / "t.csv", ["a"], [[1 / 3]])
    assert float((tmp_path / "t.csv").read_text().splitlines()[1]) == 1 / 3
