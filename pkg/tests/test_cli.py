import csv
import json

import pytest

from hardy_spectral.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, mask_header, rho_values


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg) if not isinstance(cfg, str) else cfg)
    return str(path)


def load(path):
    return json.loads(path.read_text())


class TestTasks:
    def test_delta_interval(self, tmp_path):
        assert main(["delta", "--config", "interval", "--h", "0.25", "--out", str(tmp_path)]) == EXIT_OK
        rows = list(csv.DictReader(open(tmp_path / "delta.csv")))
        assert sum(r["flag"] == "inside" for r in rows) == 3
        doc = load(tmp_path / "delta.json")
        assert doc["seed"] == 0 and doc["result"]["interior_points"] == 3

    def test_lieb_square_sweep(self, tmp_path):
        rc = main(["lieb", "--config", "square", "--h", "0.03125", "--rho", "0.2", "0.5", "0.8", "1.0",
                   "--samples", "20000", "--seed", "9", "--out", str(tmp_path)])
        assert rc == EXIT_OK
        doc = load(tmp_path / "lieb.json")
        assert isinstance(doc["reports"], list) and len(doc["reports"]) == 4
        assert all(r["pass"] for r in doc["reports"])
        assert doc["seed"] == 9

    def test_spectrum_csv(self, tmp_path):
        assert main(["spectrum", "--config", "square", "--h", "0.0625", "--k", "4", "--out", str(tmp_path)]) == 0
        rows = list(csv.reader(open(tmp_path / "spectrum.csv")))
        assert rows[0] == ["index", "eigenvalue"] and len(rows) == 5

    def test_count_and_riesz(self, tmp_path):
        assert main(["count", "--config", "square", "--h", "0.03125", "--lambda", "100", "--out", str(tmp_path)]) == 0
        assert load(tmp_path / "count.json")["result"]["count"] == 6  # (1,1), (1,2)x2, (2,2), (1,3)x2
        assert main(["riesz", "--config", "square", "--h", "0.03125", "--lambda", "100",
                     "--out", str(tmp_path)]) == EXIT_OK
        assert load(tmp_path / "riesz.json")["reports"][0]["chain_count_ok"]

    def test_failed_bound_exits_one(self, tmp_path):
        rc = main(["floss", "--config", "square", "--h", "0.03125", "--lambda", "100", "--constant", "1e-6",
                   "--out", str(tmp_path)])
        assert rc == EXIT_FAIL
        assert load(tmp_path / "floss.json")["status"] == "fail"

    def test_rozenblum(self, tmp_path):
        rc = main(["rozenblum", "--config", "square", "--h", "0.0078125", "--lambda", "200", "--out", str(tmp_path)])
        assert rc == EXIT_OK
        assert (tmp_path / "packing.csv").exists() and (tmp_path / "packing_lattice.json").exists()

    def test_rho_theta(self, tmp_path):
        rc = main(["rho-theta", "--config", "square", "--rho-grid", "0.78", "0.82", "0.01", "--samples", "20000",
                   "--out", str(tmp_path)])
        assert rc == EXIT_OK
        assert load(tmp_path / "rho-theta.json")["result"]["rho_theta"] == pytest.approx(0.8)


class TestErrors:
    def test_missing_dim(self, tmp_path, capsys):
        rc = main(["delta", "--config", write(tmp_path, {"tree": {"box": [[0, 1]]}}), "--h", "0.25"])
        assert rc == EXIT_USAGE
        assert "'dim'" in capsys.readouterr().err

    def test_bad_json_position(self, tmp_path, capsys):
        rc = main(["delta", "--config", write(tmp_path, '{"dim": 1,\n "tree": {"box": [[0,1]}\n}'), "--h", "0.25"])
        assert rc == EXIT_USAGE
        assert "line 2, column" in capsys.readouterr().err

    def test_missing_parameter(self, tmp_path, capsys):
        rc = main(["count", "--config", write(tmp_path, {"dim": 1, "tree": {"box": [[0, 1]]}}), "--h", "0.1"])
        assert rc == EXIT_USAGE
        assert "lambda" in capsys.readouterr().err

    def test_empty_domain_report(self, tmp_path):
        cfg = {"dim": 2, "bbox": [[0, 3], [0, 1]],
               "tree": {"op": "intersection", "args": [{"box": [[0, 1], [0, 1]]}, {"box": [[2, 3], [0, 1]]}]},
               "params": {"h": 0.1, "lambda": 10, "rho_grid": [0.1, 0.3, 0.1]}}
        assert main(["report", "--config", write(tmp_path, cfg), "--out", str(tmp_path)]) == EXIT_USAGE

    def test_unknown_task_and_file(self, tmp_path):
        assert main(["bogus", "--config", "square"]) == EXIT_USAGE
        assert main(["delta", "--config", str(tmp_path / "nope.json"), "--h", "0.1"]) == EXIT_USAGE

    def test_bad_theta(self):
        assert main(["rozenblum", "--config", "square", "--h", "0.01", "--lambda", "200", "--theta", "0"]) == EXIT_USAGE


def test_rho_values():
    assert rho_values([0.7, 0.9, 0.1]).tolist() == [0.7, 0.8, 0.9]
    assert rho_values([0.1, 0.2, 0.4, 0.8]).tolist() == [0.1, 0.2, 0.4, 0.8]


def test_mask_header():
    a = json.dumps({"header": {"timestamp": "x"}, "v": 1})
    b = json.dumps({"header": {"timestamp": "y"}, "v": 1})
    assert mask_header(a) == mask_header(b)
