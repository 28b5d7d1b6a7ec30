import json

import numpy as np
import pytest
from click.testing import CliRunner

from bosonsim import (assemble_transfer_matrix, distribution,
                      simulate_one_photon, simulate_two_photon_data)
from bosonsim import io as bio
from bosonsim.cli import main

from conftest import haar_unitary

BEAMSPLITTER = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def matrix_file(tmp_path):
    path = tmp_path / "bs.json"
    bio.write_matrix(BEAMSPLITTER, path)
    return path


def test_distribution_hom(runner, matrix_file, tmp_path):
    out = tmp_path / "dist.csv"
    result = runner.invoke(main, [
        "distribution", "--matrix", str(matrix_file), "--input", "11",
        "--out", str(out),
    ])
    assert result.exit_code == 0
    dist = bio.distribution_from_csv(out)
    assert dist.prob_of((2, 0)) == pytest.approx(0.5, abs=1e-12)
    assert dist.prob_of((1, 1)) == pytest.approx(0.0, abs=1e-12)


def test_distribution_collision_free_row_count(runner, tmp_path):
    path = tmp_path / "u6.json"
    bio.write_matrix(haar_unitary(6, seed=1), path)
    out = tmp_path / "dist.csv"
    result = runner.invoke(main, [
        "distribution", "--matrix", str(path), "--input", "011010",
        "--collision-free", "--out", str(out),
    ])
    assert result.exit_code == 0
    assert len(bio.distribution_from_csv(out)) == 20  # C(6, 3)


def test_distribution_json_format(runner, matrix_file, tmp_path):
    out = tmp_path / "dist.json"
    result = runner.invoke(main, [
        "distribution", "--matrix", str(matrix_file), "--input", "11",
        "--out", str(out), "--format", "json",
    ])
    assert result.exit_code == 0
    data = json.loads(out.read_text())
    assert data["schema_version"] == 1
    assert data["outcomes"] == ["20", "11", "02"]


def test_distribution_output_is_byte_identical(runner, matrix_file, tmp_path):
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out_a, out_b):
        result = runner.invoke(main, [
            "distribution", "--matrix", str(matrix_file), "--input", "11",
            "--out", str(out),
        ])
        assert result.exit_code == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_distribution_rejects_mode_mismatch(runner, matrix_file, tmp_path):
    result = runner.invoke(main, [
        "distribution", "--matrix", str(matrix_file), "--input", "110",
        "--out", str(tmp_path / "x.csv"),
    ])
    assert result.exit_code == 3
    assert "error:" in result.output


def test_distribution_rejects_malformed_matrix(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    result = runner.invoke(main, [
        "distribution", "--matrix", str(bad), "--input", "11",
        "--out", str(tmp_path / "x.csv"),
    ])
    assert result.exit_code == 3


def test_missing_required_option_is_usage_error(runner):
    result = runner.invoke(main, ["distribution", "--input", "11"])
    assert result.exit_code == 2


def test_sample_deterministic_bytes(runner, matrix_file, tmp_path):
    out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (out_a, out_b):
        result = runner.invoke(main, [
            "sample", "--matrix", str(matrix_file), "--input", "11",
            "--samples", "200", "--seed", "7", "--out", str(out),
        ])
        assert result.exit_code == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    record = bio.sample_record_from_json(out_a)
    assert record.total == 200
    assert sum(record.counts.values()) == 200
    assert record.counts.get((1, 1), 0) == 0  # suppressed outcome


def test_sample_embeds_matrix_digest(runner, matrix_file, tmp_path):
    out = tmp_path / "s.json"
    result = runner.invoke(main, [
        "sample", "--matrix", str(matrix_file), "--input", "11",
        "--samples", "10", "--out", str(out),
    ])
    assert result.exit_code == 0
    data = json.loads(out.read_text())
    assert data["matrix_sha256"] == bio.matrix_digest(matrix_file)


def test_sample_different_seeds_differ(runner, tmp_path):
    path = tmp_path / "u4.json"
    bio.write_matrix(haar_unitary(4, seed=2), path)
    outs = []
    for seed in (1, 2):
        out = tmp_path / f"s{seed}.json"
        result = runner.invoke(main, [
            "sample", "--matrix", str(path), "--input", "1100",
            "--samples", "500", "--seed", str(seed), "--out", str(out),
        ])
        assert result.exit_code == 0
        outs.append(bio.sample_record_from_json(out).counts)
    assert outs[0] != outs[1]


def test_characterize_round_trip(runner, tmp_path):
    lam = haar_unitary(5, seed=3)
    one_path, two_path = tmp_path / "one.csv", tmp_path / "two.csv"
    bio.one_photon_to_csv(simulate_one_photon(lam), one_path)
    bio.two_photon_to_csv(simulate_two_photon_data(lam), two_path)
    out = tmp_path / "rec.json"
    result = runner.invoke(main, [
        "characterize", "--one-photon", str(one_path),
        "--two-photon", str(two_path), "--out", str(out),
    ])
    assert result.exit_code == 0
    data = json.loads(out.read_text())
    assert data["residual"] <= 1e-10
    lam_hat = assemble_transfer_matrix(np.array(data["tau"]),
                                       np.array(data["phi"]))
    t = (1, 1, 0, 1, 0)
    expected = distribution(lam, t, collision_free=True)
    got = distribution(lam_hat, t, collision_free=True)
    np.testing.assert_allclose(got.probs, expected.probs, atol=1e-6)


def test_characterize_underdetermined_exits_4(runner, tmp_path):
    lam = haar_unitary(3, seed=4)
    one_path, two_path = tmp_path / "one.csv", tmp_path / "two.csv"
    bio.one_photon_to_csv(simulate_one_photon(lam), one_path)
    two = simulate_two_photon_data(lam)
    bio.two_photon_to_csv(type(two)(two.records[:1]), two_path)
    result = runner.invoke(main, [
        "characterize", "--one-photon", str(one_path),
        "--two-photon", str(two_path), "--out", str(tmp_path / "rec.json"),
    ])
    assert result.exit_code == 4


def _write_noise_config(tmp_path, **extra):
    lam = 0.85 * haar_unitary(6, seed=11)
    bio.write_matrix(lam, tmp_path / "lam.json")
    cfg = {
        "matrix": "lam.json",
        "input": "011010",
        "sources": [{"lambda2": 0.011, "modes": [1, 2]},
                    {"lambda2": 0.011, "modes": [4]}],
        "alpha": 0.974,
        "postselect_N": 3,
    }
    cfg.update(extra)
    path = tmp_path / "noise.json"
    path.write_text(json.dumps(cfg))
    return path


def test_noise_sweep_zero_point_and_monotonic(runner, tmp_path):
    cfg = _write_noise_config(tmp_path)
    out = tmp_path / "sweep.csv"
    result = runner.invoke(main, [
        "noise-sweep", "--config", str(cfg), "--sweep", "0,0.011,0.023",
        "--alphas", "1.0", "--out", str(out),
    ])
    assert result.exit_code == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "lambda2,alpha,d"
    ds = [float(r.split(",")[2]) for r in rows[1:]]
    assert ds[0] == pytest.approx(0.0, abs=1e-12)
    assert ds[0] < ds[1] < ds[2]


def test_noise_sweep_alpha_axis(runner, tmp_path):
    cfg = _write_noise_config(tmp_path)
    out = tmp_path / "sweep.csv"
    result = runner.invoke(main, [
        "noise-sweep", "--config", str(cfg), "--sweep", "0",
        "--alphas", "1.0,0.974,0.9", "--out", str(out),
    ])
    assert result.exit_code == 0
    rows = out.read_text().strip().splitlines()[1:]
    ds = [float(r.split(",")[2]) for r in rows]
    assert ds[0] < ds[1] < ds[2]


def test_noise_sweep_missing_key_exits_3(runner, tmp_path):
    path = tmp_path / "noise.json"
    path.write_text(json.dumps({"input": "11"}))
    result = runner.invoke(main, [
        "noise-sweep", "--config", str(path), "--out", str(tmp_path / "o.csv"),
    ])
    assert result.exit_code == 3


def test_bench_writes_table_and_cross_checks(runner, tmp_path):
    out = tmp_path / "bench.csv"
    result = runner.invoke(main, [
        "bench", "--sizes", "3,5,12", "--seed", "1", "--out", str(out),
    ])
    assert result.exit_code == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "n,naive_seconds,ryser_seconds,speedup"
    assert len(rows) == 4
    assert rows[3].startswith("12,,")  # no naive column beyond its limit


def test_bench_prints_to_stdout_without_out(runner):
    result = runner.invoke(main, ["bench", "--sizes", "2,3"])
    assert result.exit_code == 0
    assert result.output.startswith("n,naive_seconds,ryser_seconds,speedup")


def test_matrix_round_trip(tmp_path):
    lam = haar_unitary(4, seed=5)
    path = tmp_path / "m.json"
    bio.write_matrix(lam, path)
    np.testing.assert_allclose(bio.read_matrix(path), lam, atol=1e-15)


def test_distribution_csv_round_trip(tmp_path):
    dist = distribution(haar_unitary(4, seed=6), (1, 1, 0, 0))
    path = tmp_path / "d.csv"
    bio.distribution_to_csv(dist, path)
    back = bio.distribution_from_csv(path)
    assert back.outcomes == dist.outcomes
    np.testing.assert_array_equal(back.probs, dist.probs)  # repr is lossless


def test_occupation_string_round_trip():
    occ = (0, 3, 1, 0, 2)
    assert bio.occupation_from_string(bio.occupation_to_string(occ)) == occ
    with pytest.raises(Exception):
        bio.occupation_to_string((10, 0))
