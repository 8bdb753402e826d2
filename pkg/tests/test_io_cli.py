import json

import numpy as np
import pytest

from rejectlab import FiniteDistribution, ValidationError, make_sparse_class
from rejectlab import io
from rejectlab.cli import main


def test_distribution_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    w = rng.dirichlet(np.ones(7))
    d = FiniteDistribution(w, rng.random(7))
    path = io.write_json(tmp_path / "d.json", io.distribution_to_json(d))
    back = io.load_distribution(path)
    assert back.weights.tobytes() == d.weights.tobytes()
    assert back.eta1.tobytes() == d.eta1.tobytes()


def test_class_roundtrip(tmp_path):
    cls = make_sparse_class(2, 5)
    path = io.write_json(tmp_path / "c.json", io.class_to_json(cls))
    assert io.load_class(path).strings() == cls.strings()


def test_malformed_inputs(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"m": 2, "members": ["01", "0x"]}')
    with pytest.raises(ValidationError, match="0/1 string"):
        io.load_class(p)
    p.write_text("{not json")
    with pytest.raises(ValidationError, match="not valid JSON"):
        io.load_class(p)
    p.write_text('{"m": 3, "weights": [0.5, 0.5], "eta1": [0, 1]}')
    with pytest.raises(ValidationError, match="length m=3"):
        io.load_distribution(p)
    with pytest.raises(ValidationError, match="not found"):
        io.load_class(tmp_path / "missing.json")


def test_atomic_write_leaves_no_temp_files(tmp_path):
    io.atomic_write_text(tmp_path / "a.txt", "x")
    io.atomic_write_text(tmp_path / "a.txt", "y")
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
    assert (tmp_path / "a.txt").read_text() == "y"


def test_config_hash_is_order_independent():
    assert io.config_hash({"a": 1, "b": 2}) == io.config_hash({"b": 2, "a": 1})
    assert io.config_hash({"a": 1}) != io.config_hash({"a": 2})


@pytest.fixture
def files(tmp_path):
    c = tmp_path / "class.json"
    d = tmp_path / "dist.json"
    io.write_json(c, {"m": 4, "members": ["0000", "0011", "1100", "1111"]})
    io.write_json(d, {"m": 4, "weights": [0.25] * 4, "eta1": [0.75, 0.75, 0.25, 0.25]})
    return tmp_path, str(c), str(d)


def test_cli_diameter(tmp_path, capsys):
    path = io.write_json(tmp_path / "f2.json", io.class_to_json(make_sparse_class(2, 5)))
    assert main(["diameter", "--class", str(path)]) == 0
    assert capsys.readouterr().out.strip() == '{"d":2,"D":4}'


def test_cli_diameter_with_marginal(tmp_path, capsys):
    c = io.write_json(tmp_path / "c.json", {"m": 4, "members": ["0000", "1111"]})
    d = io.write_json(tmp_path / "d.json", {"m": 4, "weights": [0.25] * 4, "eta1": [1, 1, 1, 1]})
    assert main(["diameter", "--class", str(c), "--dist", str(d), "--n", "4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["D_PX"] == 3.0 and out["D_PX_exact"] is True


def test_cli_learn_clamped_p_gives_identical_models(files, capsys):
    tmp, c, d = files
    outs = []
    for p in ("0.3", "0.25"):
        assert main(["learn", "--class", c, "--dist", d, "--learner", "abstain", "--p", p,
                     "--n", "40", "--seed", "3", "--out", str(tmp / p)]) == 0
        model = [f for f in (tmp / p).iterdir() if not f.name.endswith(".meta.json")]
        assert len(model) == 1
        outs.append(model[0].read_bytes())
    assert outs[0] == outs[1]
    body = json.loads(outs[0])
    assert body["model"]["p"] == 0.25
    assert body["constants"] == {"c": 1.0, "c1": 1 / 128, "c2": 128.0, "delta": 0.05}


def test_cli_malformed_distribution_exit_2(tmp_path, files, capsys):
    _, c, _ = files
    bad = io.write_json(tmp_path / "bad.json", {"m": 4, "weights": [0.3, 0.2, 0.2, 0.2],
                                                "eta1": [0, 0, 0, 0]})
    assert main(["learn", "--class", c, "--dist", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "weights must sum to 1" in err and len(err.strip().splitlines()) == 1


def test_cli_budget_exit_3(tmp_path, capsys):
    c = io.write_json(tmp_path / "c.json", {"m": 22, "members": ["0" * 22, "1" * 22]})
    d = io.write_json(tmp_path / "d.json", {"m": 22, "weights": [1 / 22] * 22, "eta1": [1] * 22})
    assert main(["diameter", "--class", str(c), "--dist", str(d)]) == 3
    assert "budget" in capsys.readouterr().err


def test_cli_experiment_csv_deterministic(files, capsys):
    tmp, c, d = files
    args = ["experiment", "--class", c, "--dist", d, "--learner", "abstain", "--p", "0.1",
            "--risk", "Rp", "--n-grid", "20,40,80", "--reps", "20", "--seed", "1"]
    bodies = []
    for k in range(2):
        out = tmp / f"run{k}"
        assert main(args + ["--out", str(out)]) == 0
        csv = list(out.glob("*.csv"))
        assert len(csv) == 1 and csv[0].with_suffix(".json").exists()
        bodies.append(csv[0].read_text())
        side = json.loads(csv[0].with_suffix(".json").read_text())
        assert side["constants"]["c2"] == 128.0 and "created" in side
    assert bodies[0] == bodies[1]
    assert bodies[0].splitlines()[0] == "n,mean_excess,stderr,abstain_mass,reps"


def test_cli_config_file_and_flag_override(files, capsys):
    tmp, c, d = files
    cfg = io.write_json(tmp / "cfg.json", {"class_path": c, "dist_path": d, "learner": "erm",
                                           "n_grid": [10, 20, 30], "reps": 4, "seed": 2})
    assert main(["experiment", "--config", str(cfg), "--reps", "3", "--out", str(tmp / "o")]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert [r.split(",")[-1] for r in rows] == ["3", "3", "3"]
    bad = io.write_json(tmp / "bad.json", {"colour": "red"})
    assert main(["experiment", "--config", str(bad)]) == 2


def test_cli_family_experiment(tmp_path, capsys):
    fam = json.dumps({"type": "two_function_sequence", "tau_coef": 0.2, "eps_coef": 0.45,
                      "atoms_b": 2, "atoms_c": 2, "m": 6, "h": 1.0})
    assert main(["experiment", "--family", fam, "--learner", "finite_diameter",
                 "--n-grid", "30,60,90", "--reps", "5", "--out", str(tmp_path)]) == 0
    assert main(["experiment", "--family", '{"type": "nope"}', "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("check", ["identity", "membership", "ratio", "excess_loss", "bernstein"])
def test_cli_verify(files, capsys, check):
    tmp, c, d = files
    assert main(["verify", "--class", c, "--dist", d, "--check", check, "--trials", "10",
                 "--n", "30", "--out", str(tmp / "v")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["check"] == check
    assert {"params", "trials", "quantiles", "pass_criteria_if_any", "constants"} <= set(rep)
    if check == "bernstein":
        assert rep["B"] == 2.0
