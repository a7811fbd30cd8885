import json
import subprocess
import sys

import pytest

from erasedcm.cli import main


def read(path):
    return path.read_bytes()


def test_generate_forced_single_edge(tmp_path, capsys):
    out = tmp_path / "g"
    assert main(["generate", "--degrees", "1,1", "--gamma", "2.5", "--seed", "1", "--out", str(out)]) == 0
    assert (tmp_path / "g.simple.txt").read_text() == "1 2 1\n"
    assert (tmp_path / "g.multigraph.txt").read_text() == "1 2 1\n"
    stats = json.loads((tmp_path / "g.stats.json").read_text())
    assert stats["total_erased"] == 0 and stats["erased_fraction"] == 0.0
    assert json.loads(capsys.readouterr().out)["L_n"] == 2


def test_generate_is_deterministic(tmp_path):
    args = ["generate", "--gamma", "1.5", "--n", "2000", "--seed", "9"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for suffix in (".degrees.txt", ".multigraph.txt", ".simple.txt", ".stats.json"):
        assert read(tmp_path / f"a{suffix}") == read(tmp_path / f"b{suffix}")
    assert (tmp_path / "a.degrees.txt").read_text().startswith("# n=2000 gamma=1.5 k_min=1 seed=9\n")


def test_generate_rejects_bad_params(tmp_path, capsys):
    assert main(["generate", "--gamma", "0.8", "--n", "10", "--out", str(tmp_path / "x")]) == 2
    assert main(["generate", "--gamma", "2.0", "--out", str(tmp_path / "x")]) == 2
    assert "error:" in capsys.readouterr().err


def test_sweep_empty_grid_fails(tmp_path, capsys):
    assert main(["sweep", "--gamma", "2.5", "--n", "", "--reps", "2", "--out", str(tmp_path / "s.csv")]) == 2
    assert "n_grid is empty" in capsys.readouterr().err


def test_sweep_writes_records_fits_and_plots(tmp_path, capsys):
    csv = tmp_path / "s.csv"
    args = ["sweep", "--gamma", "2.5,3", "--n", "100,1000,10000", "--reps", "10", "--seed", "4",
            "--threads", "1", "--out", str(csv)]
    assert main(args) == 0
    lines = csv.read_text().splitlines()
    assert len(lines) == 1 + 2 * 3 * 10
    fits = json.loads((tmp_path / "s.fits.json").read_text())
    assert [f["gamma"] for f in fits] == [2.5, 3.0]
    assert all("theoretical_slope" in f for f in fits)
    assert sorted(p.name for p in (tmp_path / "s_plot").iterdir()) == ["plot_gamma_2.5.txt", "plot_gamma_3.0.txt"]
    before = {p: read(p) for p in (csv, tmp_path / "s.fits.json")}
    # resuming a complete sweep recomputes nothing and changes nothing
    assert main(args) == 0
    assert all(read(p) == data for p, data in before.items())


def test_fit_command(tmp_path):
    csv = tmp_path / "s.csv"
    main(["sweep", "--gamma", "2.5", "--n", "100,1000,10000", "--reps", "10", "--threads", "1", "--out", str(csv)])
    (tmp_path / "s.fits.json").unlink()
    assert main(["fit", str(csv)]) == 0
    assert json.loads((tmp_path / "s.fits.json").read_text())[0]["points_used"] == 3
    assert main(["fit", str(tmp_path / "nope.csv")]) == 2


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"gamma_grid": [2.5], "n_grid": [50, 500], "replications": 2,
                               "master_seed": 1, "output_path": str(tmp_path / "cfg.csv")}))
    assert main(["sweep", "--config", str(cfg), "--reps", "3", "--threads", "1", "--min-reps", "1"]) == 0
    assert len((tmp_path / "cfg.csv").read_text().splitlines()) == 1 + 2 * 3
    assert main(["sweep", "--config", str(tmp_path / "missing.json")]) == 2


def test_oracle_output(capsys):
    assert main(["oracle", "2,2"]) == 0
    out = capsys.readouterr().out
    payload = json.loads(out[: out.index("\n}") + 2])
    assert payload["expected_erased_fraction"] == "1/3"
    assert payload["no_edge_prob"]["1,2"] == "1/3"
    assert "PASS self_loops" in out and "PASS multi_edges" in out


def test_oracle_limit_message(capsys):
    assert main(["oracle", "8,8"]) == 2
    assert "L_n <= 14" in capsys.readouterr().err


def test_bounds_command(capsys):
    assert main(["bounds", "--degrees", "2,2"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["lemma1_bound"] == pytest.approx(2.5)
    assert payload["identity_value"] == pytest.approx(0.5)
    assert main(["bounds", "--gamma", "1.5", "--n", "1000", "--seed", "2"]) == 0
    assert set(json.loads(capsys.readouterr().out)) == {
        "lemma1_bound", "pairwise_exp_sum", "identity_value", "second_moment_ratio", "n", "L_n"
    }


def test_tauberian_command(capsys, tmp_path):
    assert main(["tauberian", "--gamma", "1.5", "--t", "100,1000", "--out", str(tmp_path / "t.json")]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["value"]) == 2 and payload["loglog_slope"] < 0
    assert json.loads((tmp_path / "t.json").read_text()) == payload
    assert main(["tauberian", "--gamma", "2.5"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "erasedcm", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("generate", "sweep", "fit", "oracle", "bounds", "tauberian"):
        assert cmd in proc.stdout
