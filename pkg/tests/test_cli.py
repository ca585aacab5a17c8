import json
import math

import numpy as np
import pytest

from zetagof import __version__
from zetagof.cli import format_sample, main, parse_sample, write_sample
from zetagof.distributions import RngStream, ZetaModel, Zigzag, sample_alt, sample_zeta
from zetagof.estimation import fisher_information


@pytest.fixture
def zeta_file(tmp_path):
    path = tmp_path / "zeta.txt"
    write_sample(path, sample_zeta(ZetaModel(2.0), 100, RngStream(12, 0)))
    return path


def _study(tmp_path, **extra):
    cfg = {"n": 60, "replications": 25, "alternatives": ["Zeta(2)", "Geom(3)"],
           "statistics": ["stein:0", "cvm", "ben"], "seed": 4}
    cfg.update(extra)
    path = tmp_path / "study.json"
    path.write_text(json.dumps(cfg))
    return path


@pytest.mark.parametrize("fmt", ["lines", "csv"])
def test_sample_round_trip(fmt):
    x = np.array([1, 5, 2, 2, 40, 1])
    np.testing.assert_array_equal(parse_sample(format_sample(x, fmt)), x)


def test_parse_variants():
    assert parse_sample("x\n3\n1\n").tolist() == [3, 1]
    assert parse_sample("id,x\na,4\nb,2\n").tolist() == [4, 2]
    assert parse_sample("# comment\n2\n\n7\n").tolist() == [2, 7]


def test_fit(zeta_file, capsys):
    assert main(["fit", str(zeta_file), "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["schema"] == 1 and rep["version"] == __version__
    assert rep["std_error"] == pytest.approx(1 / math.sqrt(100 * fisher_information(rep["s_hat"])))


def test_fit_large_sample(tmp_path, capsys):
    path = tmp_path / "big.csv"
    n = 10**5
    write_sample(path, sample_zeta(ZetaModel(2.5), n, RngStream(3, 0)), "csv")
    assert main(["fit", str(path), "--format", "json"]) == 0
    s_hat = json.loads(capsys.readouterr().out)["s_hat"]
    assert abs(s_hat - 2.5) < 3 / math.sqrt(n * fisher_information(2.5))


@pytest.mark.parametrize("content", ["1\n0\n3\n", "2\n-4\n", "abc\n", "", "y\n3\n"])
def test_fit_bad_input(tmp_path, capsys, content):
    path = tmp_path / "bad.txt"
    path.write_text(content)
    assert main(["fit", str(path)]) == 2
    assert "error" in capsys.readouterr().err


def test_fit_missing_file(tmp_path):
    assert main(["fit", str(tmp_path / "nope.txt")]) == 2


def test_fit_degenerate(tmp_path, capsys):
    path = tmp_path / "ones.txt"
    path.write_text("1\n1\n1\n")
    assert main(["fit", str(path)]) == 3
    assert "degenerate sample" in capsys.readouterr().err


def test_test_command_json(zeta_file, capsys):
    code = main(["test", str(zeta_file), "--b", "99", "--seed", "5"])
    out = json.loads(capsys.readouterr().out)
    assert code == (10 if out["reject"] else 0)
    assert out["seed"] == 5 and out["b"] == 99 and out["version"] == __version__


def test_test_command_reproducible(zeta_file, capsys):
    main(["test", str(zeta_file), "--b", "50", "--seed", "2", "--format", "csv"])
    first = capsys.readouterr().out
    main(["test", str(zeta_file), "--b", "50", "--seed", "2", "--format", "csv"])
    assert capsys.readouterr().out == first
    assert first.splitlines()[0].startswith("schema,kind,statistic")


def test_test_rejects_zigzag(tmp_path):
    path = tmp_path / "zz.txt"
    write_sample(path, sample_alt(Zigzag(2.0, 0.5), 100, RngStream(0, 0)))
    assert main(["test", str(path), "--b", "199"]) == 10


def test_test_unknown_statistic(zeta_file):
    assert main(["test", str(zeta_file), "--stat", "foo"]) == 2
    assert main(["test", str(zeta_file), "--stat", "stein:-2"]) == 2


@pytest.mark.slow
def test_test_level_over_seeds(tmp_path):
    m = ZetaModel(2.0)
    rejections = 0
    for seed in range(40):
        path = tmp_path / f"z{seed}.txt"
        write_sample(path, sample_zeta(m, 100, RngStream(1000, seed)))
        rejections += main(["test", str(path), "--b", "500", "--seed", str(seed)]) == 10
    assert rejections <= 4


@pytest.mark.slow
def test_test_half_level(tmp_path):
    m = ZetaModel(2.0)
    rejections = 0
    for seed in range(60):
        path = tmp_path / f"z{seed}.txt"
        write_sample(path, sample_zeta(m, 100, RngStream(2000, seed)))
        rejections += main(["test", str(path), "--b", "99", "--alpha", "0.5", "--seed", str(seed)]) == 10
    # binomial(60, 0.5) lies in [17, 43] with probability above 0.999
    assert 17 <= rejections <= 43


def test_simulate_outputs(tmp_path, caplog):
    out = tmp_path / "out"
    with caplog.at_level("INFO", logger="zetagof"):
        assert main(["-v", "simulate", "--config", str(_study(tmp_path)), "--out", str(out)]) == 0
    csv = (out / "power.csv").read_text()
    assert csv.splitlines()[0] == "alternative,stein:0,cvm,ben"
    meta = json.loads((out / "power.json").read_text())["metadata"]
    assert meta["seed"] == 4 and meta["version"] == __version__
    assert any("se" in r.message for r in caplog.records)


def test_simulate_threads_identical(tmp_path, monkeypatch):
    cfg = _study(tmp_path)
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a"), "--threads", "1"])
    monkeypatch.setenv("GOF_THREADS", "2")
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "power.csv").read_bytes() == (tmp_path / "b" / "power.csv").read_bytes()


def test_simulate_smoke_single_replication(tmp_path):
    cfg = _study(tmp_path, replications=1)
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
    body = (tmp_path / "a" / "power.csv").read_text().splitlines()[1:]
    cells = [c.split("±")[0] for line in body for c in line.split(",")[1:]]
    assert set(cells) <= {"0.00", "100.00"}


@pytest.mark.parametrize("bad", [{"n": 1}, {"alternatives": ["Bogus(1)"]}, {"statistics": ["x"]},
                                 {"colour": "red"}, {"alternatives": "Zeta(2)"}])
def test_simulate_bad_config(tmp_path, bad):
    assert main(["simulate", "--config", str(_study(tmp_path, **bad)), "--out", str(tmp_path / "o")]) == 2


def test_simulate_invalid_json(tmp_path):
    path = tmp_path / "s.json"
    path.write_text("{not json")
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_eigen(tmp_path, capsys):
    out = tmp_path / "eig.json"
    assert main(["eigen", "--s0", "2", "--beta", "0", "--dim", "20", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    lam = np.array(rep["eigenvalues"])
    assert np.all(lam >= 0) and np.all(np.diff(lam) <= 0)
    assert rep["trace_residual"] < 1e-4
    assert main(["eigen", "--s0", "2", "--dim", "1"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["eigenvalues"][0] <= rep["trace"]


def test_eigen_invalid():
    assert main(["eigen", "--s0", "1.0"]) == 2
    assert main(["eigen", "--s0", "2", "--beta", "-1"]) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["test"])
    assert exc.value.code == 2


@pytest.mark.slow
def test_simulate_reference_cells(tmp_path):
    cfg = _study(tmp_path, n=100, replications=2000, seed=31,
                 alternatives=["Zeta(2)", "Geom(3)", "Zigzag(2,0.5)"], statistics=["stein:0", "cvm", "ben"])
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "t")]) == 0
    table = json.loads((tmp_path / "t" / "power.json").read_text())
    rates = dict(zip(table["alternatives"], table["rates"]))
    cols = {name: j for j, name in enumerate(table["statistics"])}
    reference = [("Zeta(2)", "stein:0", 5), ("Geom(3)", "stein:0", 77), ("Geom(3)", "cvm", 80),
                 ("Geom(3)", "ben", 73), ("Zigzag(2,0.5)", "stein:0", 96), ("Zigzag(2,0.5)", "cvm", 93),
                 ("Zigzag(2,0.5)", "ben", 98)]
    for alt, stat, target in reference:
        se = 100 * math.sqrt(target / 100 * (1 - target / 100) / 2000)
        assert abs(rates[alt][cols[stat]] - target) < 3 * se, (alt, stat)
