import numpy as np
import pytest

from layerflow.cli import main
from layerflow.config import ConfigError, SolverConfig, parse_config


def write_config(path, **kw):
    lines = [f"{k} = {v}" for k, v in kw.items()]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def test_parse_config_defaults_and_overrides(tmp_path):
    p = write_config(tmp_path / "c.cfg", dim=2, n_horizontal=8, n_vertical=9,
                     tau=0.1, initial_data="zero")
    cfg = parse_config(p)
    assert cfg.n_horizontal == 8
    assert cfg.tau == 0.1
    assert cfg.initial_data == "zero"
    assert cfg.mu == 1.0  # default


def test_parse_config_comments_and_blanks(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# a comment\n\nmu = 2.0  # inline\n")
    assert parse_config(str(p)).mu == 2.0


@pytest.mark.parametrize("text", [
    "unknown_key = 3\n",
    "dim 2\n",
    "dim = notanint\n",
    "n_horizontal = 7\n",
])
def test_parse_config_rejects(tmp_path, text):
    p = tmp_path / "bad.cfg"
    p.write_text(text)
    with pytest.raises(ConfigError):
        parse_config(str(p))


def test_exit_code_2_on_bad_config(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("bogus = 1\n")
    code = main(["verify-kernels", "--config", str(p), "--out", str(tmp_path / "o")])
    assert code == 2


def test_verify_kernels_scenario(tmp_path):
    out = tmp_path / "out"
    code = main(["verify-kernels", "--out", str(out)])
    assert code == 0
    csv_text = (out / "verify-kernels.csv").read_text()
    header = csv_text.splitlines()[0].split(",")
    assert header == ["a", "xi_mag", "closed_form_1", "quadrature_1", "rel_err_1",
                      "closed_form_2", "quadrature_2", "rel_err_2"]
    assert len(csv_text.splitlines()) == 26  # header + 5x5 grid
    assert (out / "kernels.csv").read_text() == csv_text
    summary = (out / "summary.txt").read_text().splitlines()
    assert all(line.startswith("CHECK ") for line in summary)
    assert all(" PASS " in line for line in summary)


def test_semigroup_decay_scenario(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=8, n_vertical=9,
                       horizon=3.0, initial_data="random_solenoidal")
    code = main(["semigroup-decay", "--config", cfg, "--out", str(out)])
    assert code == 0
    decay = (out / "decay.csv").read_text().splitlines()
    assert decay[0] == "t,l2_norm,lq_norm"
    assert decay == (out / "semigroup-decay.csv").read_text().splitlines()
    values = np.array([[float(x) for x in line.split(",")] for line in decay[1:]])
    assert values[-1, 1] < values[0, 1]  # norms decayed


def test_helmholtz_scenario(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=16, n_vertical=17)
    assert main(["helmholtz", "--config", cfg, "--out", str(out)]) == 0


def test_weak_dn_scenario(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=32, n_vertical=33)
    assert main(["weak-dn", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "weak-dn.csv").exists()


def test_resolvent_sweep_scenario(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=16, n_vertical=17)
    assert main(["resolvent-sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "resolvent-sweep.csv").read_text().splitlines()
    assert rows[0].startswith("lam_re,lam_im")
    assert len(rows) == 13  # header + 10 ray points + 2 small positive


def test_linear_mr_scenario(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=16, n_vertical=17,
                       horizon=1.0, tau=0.05)
    assert main(["linear-mr", "--config", cfg, "--out", str(out)]) == 0
    summary = (out / "summary.txt").read_text()
    assert "CHECK decomposition_agreement PASS" in summary


def test_global_solve_zero_data(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=8, n_vertical=9,
                       horizon=1.0, initial_data="zero")
    code = main(["global-solve", "--config", cfg, "--out", str(out)])
    assert code == 0
    summary = (out / "summary.txt").read_text()
    assert "CHECK picard_converged PASS" in summary


def test_csv_determinism(tmp_path):
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=8, n_vertical=9,
                       horizon=2.0, initial_data="random_solenoidal")
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["semigroup-decay", "--config", cfg, "--out", str(out),
                     "--seed", "99"]) == 0
        outs.append((out / "semigroup-decay.csv").read_bytes())
    assert outs[0] == outs[1]


def test_global_solve_determinism(tmp_path):
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=8, n_vertical=9,
                       horizon=1.5, tau=0.05, max_iter=6, tolerance="1e-9",
                       initial_data="random_solenoidal")
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        main(["global-solve", "--config", cfg, "--out", str(out)])
        blobs.append((out / "global-solve.csv").read_bytes()
                     + (out / "summary.txt").read_bytes())
    assert blobs[0] == blobs[1]


def test_seed_changes_output(tmp_path):
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=8, n_vertical=9,
                       horizon=2.0, initial_data="random_solenoidal")
    blobs = []
    for seed in ("1", "2"):
        out = tmp_path / ("s" + seed)
        main(["semigroup-decay", "--config", cfg, "--out", str(out), "--seed", seed])
        blobs.append((out / "semigroup-decay.csv").read_bytes())
    assert blobs[0] != blobs[1]


def test_float_formatting_17_digits(tmp_path):
    out = tmp_path / "out"
    main(["verify-kernels", "--out", str(out)])
    row = (out / "verify-kernels.csv").read_text().splitlines()[13]
    k1 = row.split(",")[2]
    assert len(k1.replace("-", "").replace(".", "").replace("e", "").lstrip("0")) >= 15


def test_exit_code_1_on_failed_check(tmp_path):
    # too coarse vertically for the 1e-8 manufactured-recovery gate
    out = tmp_path / "out"
    cfg = write_config(tmp_path / "c.cfg", n_horizontal=8, n_vertical=5)
    code = main(["weak-dn", "--config", cfg, "--out", str(out)])
    assert code == 1
    summary = (out / "summary.txt").read_text()
    assert " FAIL " in summary


def test_config_validation():
    with pytest.raises(ConfigError):
        SolverConfig(dim=5).validate()
    with pytest.raises(ConfigError):
        SolverConfig(initial_data="bogus").validate()
