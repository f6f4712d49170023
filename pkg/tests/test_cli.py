import io
import math

import numpy as np
import pytest

import lsq.selftest
from lsq.cli import main
from lsq.harness import ResultTable
from lsq.selftest import CriterionResult

QUBIT_GAP = 0.5676676416183064

DAVIES_TOML = """
kind = "davies"
seed = 1

[model]
hamiltonian = [[1.0, 0.0], [0.0, -1.0]]
couplings = [[[0.0, 1.0], [1.0, 0.0]]]
beta = 1.0
"""

PRODUCT_TOML = """
kind = "product"

[model]
copies = 1
beta = 1.0
"""


@pytest.fixture
def davies_config(tmp_path):
    path = tmp_path / "davies.toml"
    path.write_text(DAVIES_TOML)
    return str(path)


@pytest.fixture
def product_config(tmp_path):
    path = tmp_path / "product.toml"
    path.write_text(PRODUCT_TOML)
    return str(path)


def test_run_davies_to_stdout(davies_config, capsys):
    assert main(["run", "--config", davies_config]) == 0
    table = ResultTable.from_csv(capsys.readouterr().out)
    assert table.n_rows == 1
    assert table.column("gap")[0] == pytest.approx(QUBIT_GAP, rel=1e-9)
    assert table.column("reversible")[0] == 1.0
    assert table.column("primitive")[0] == 1.0
    s = 1.0 + math.exp(2.0)
    assert table.column("sigma_inv_norm")[0] == pytest.approx(s, rel=1e-10)
    want = QUBIT_GAP / (math.log(s) + 2.0)
    assert table.column("alpha_lower_eq30")[0] == pytest.approx(want, rel=1e-9)
    assert table.get_meta("tag.alpha_lower_eq30") == "Eq.30"
    assert table.get_meta("kind") == "davies"
    assert table.get_meta("seed") == 1


def test_run_out_file_round_trips(davies_config, tmp_path, capsys):
    out = tmp_path / "result.csv"
    assert main(["run", "--config", davies_config, "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    reloaded = ResultTable.load_csv(out)
    assert main(["run", "--config", davies_config]) == 0
    direct = ResultTable.from_csv(capsys.readouterr().out)
    assert reloaded.names == direct.names
    for name in direct.names:
        # %.17g preserves doubles exactly
        assert reloaded.column(name) == direct.column(name)
    assert reloaded.metadata == direct.metadata


def test_unknown_model_key_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text(DAVIES_TOML + "gamma_typo = 2.0\n")
    assert main(["run", "--config", str(path)]) == 2
    assert capsys.readouterr().err.startswith("config error:")


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.toml")]) == 2
    assert "config error:" in capsys.readouterr().err


def test_nonprimitive_model_exits_3(tmp_path, capsys):
    path = tmp_path / "closed.toml"
    path.write_text(
        'kind = "lindblad"\n\n[model]\nhamiltonian = [[1.0, 0.0], [0.0, -1.0]]\n'
    )
    assert main(["run", "--config", str(path)]) == 3
    err = capsys.readouterr().err
    assert err.startswith("verification failure:")
    assert "NotPrimitive" in err


def test_negative_seed_exits_2(davies_config, capsys):
    assert main(["run", "--config", davies_config, "--seed", "-1"]) == 2
    assert "config error:" in capsys.readouterr().err


def test_sweep_product_copies(product_config, capsys):
    rc = main(["sweep", "--config", product_config, "--param", "copies",
               "--values", "1,2,3"])
    assert rc == 0
    table = ResultTable.from_csv(capsys.readouterr().out)
    assert table.column("copies") == [1.0, 2.0, 3.0]
    alphas = table.column("alpha_lower_eq38")
    assert alphas[0] == pytest.approx(0.03817227950869115, rel=1e-9)
    assert alphas[1] == alphas[0] and alphas[2] == alphas[0]
    for gap in table.column("gap"):
        assert gap == pytest.approx(QUBIT_GAP, rel=1e-9)
    assert table.get_meta("sweep.parameter") == "copies"


def test_sweep_rejects_unknown_parameter(davies_config, capsys):
    rc = main(["sweep", "--config", davies_config, "--param", "copies",
               "--values", "1,2"])
    assert rc == 2
    assert "config error:" in capsys.readouterr().err


def test_sweep_refuses_decay_mode(tmp_path, capsys):
    path = tmp_path / "decay.toml"
    path.write_text(DAVIES_TOML + "\n[analysis]\ndecay = true\n")
    rc = main(["sweep", "--config", str(path), "--param", "beta", "--values", "1,2"])
    assert rc == 2
    assert "config error:" in capsys.readouterr().err


def test_sweep_integer_parameter_rejects_fractions(product_config, capsys):
    rc = main(["sweep", "--config", product_config, "--param", "copies",
               "--values", "1.5"])
    assert rc == 2
    assert "config error:" in capsys.readouterr().err


def test_plotdata_decay_columns(tmp_path, capsys):
    path = tmp_path / "decay.toml"
    path.write_text(DAVIES_TOML + "\n[analysis]\ndecay = true\n")
    rc = main(["plotdata", "--config", str(path), "--columns", "t,trace_distance"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "# t trace_distance"
    data = np.loadtxt(io.StringIO(out))
    assert data.shape == (6, 2)
    np.testing.assert_allclose(data[:, 0], [0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
    # distances decrease along the semigroup
    assert all(a >= b - 1e-12 for a, b in zip(data[:, 1], data[1:, 1]))


def test_plotdata_unknown_column_exits_2(davies_config, capsys):
    rc = main(["plotdata", "--config", davies_config, "--columns", "gap,nope"])
    assert rc == 2
    assert "config error:" in capsys.readouterr().err


def test_fermion_complex_couplings(tmp_path, capsys):
    path = tmp_path / "fermion.toml"
    path.write_text(
        'kind = "fermion"\n\n[model]\nfrequencies = [1.0, 2.0]\nbeta = 0.5\n\n'
        "[model.couplings]\nre = [[0.6, 0.0]]\nim = [[0.0, 0.3]]\n"
    )
    assert main(["run", "--config", str(path)]) == 0
    table = ResultTable.from_csv(capsys.readouterr().out)
    assert table.column("gap_lower")[0] > 0.0
    assert table.column("alpha_lower_eq137")[0] > 0.0
    assert table.get_meta("tag.alpha_lower_eq137") == "Eq.137"


def test_graphstate_edge_sources_conflict(tmp_path, capsys):
    path = tmp_path / "graph.toml"
    path.write_text(
        'kind = "graphstate"\n\n[model]\nvertices = 2\nedges = [[0, 1]]\n'
        'edge_file = "edges.txt"\nbeta = 1.0\n'
    )
    assert main(["run", "--config", str(path)]) == 2
    assert "config error:" in capsys.readouterr().err


def test_graphstate_edge_file(tmp_path, capsys):
    (tmp_path / "edges.txt").write_text("0 1\n1 2\n")
    path = tmp_path / "graph.toml"
    path.write_text(
        'kind = "graphstate"\n\n[model]\nvertices = 3\n'
        'edge_file = "edges.txt"\nbeta = 1.0\n'
    )
    assert main(["run", "--config", str(path)]) == 0
    table = ResultTable.from_csv(capsys.readouterr().out)
    assert table.column("vertices")[0] == 3.0
    assert table.column("alpha_lower_eq76")[0] == pytest.approx(
        0.035199986087219706, rel=1e-9
    )
    assert table.get_meta("tag.alpha_lower_eq76") == "Eq.76"


def test_selftest_exit_codes(monkeypatch, capsys):
    def passing(params):
        return CriterionResult(index=1, name="stub pass", passed=True, detail="ok")

    def failing(params):
        return CriterionResult(index=2, name="stub fail", passed=False, detail="bad")

    monkeypatch.setattr(lsq.selftest, "CRITERIA", (passing,))
    assert main(["selftest", "--fast"]) == 0
    assert "[PASS] criterion 1: stub pass -- ok" in capsys.readouterr().out

    monkeypatch.setattr(lsq.selftest, "CRITERIA", (passing, failing))
    assert main(["selftest"]) == 3
    out = capsys.readouterr().out
    assert "[FAIL] criterion 2: stub fail -- bad" in out
