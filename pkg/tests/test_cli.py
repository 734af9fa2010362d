import math

import numpy as np
import pytest

from angtri import synth
from angtri.cli import EXIT_OK, EXIT_PARSE, EXIT_SPEC, EXIT_VERIFY, main
from angtri.formats import read_correspondences, read_results, write_correspondences, write_poses


@pytest.fixture
def noiseless(tmp_path):
    path = tmp_path / "scene.txt"
    assert main(["gen", "--n", "200", "--seed", "3", "--output", str(path)]) == EXIT_OK
    return path, tmp_path / "scene.txt.poses"


@pytest.fixture
def noisy(tmp_path):
    path = tmp_path / "noisy.txt"
    assert main(["gen", "--n", "300", "--seed", "4", "--sigma-deg", "0.5", "--output", str(path)]) == EXIT_OK
    return path, tmp_path / "noisy.txt.poses"


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["gen", "--n", "50", "--seed", "1", "--sigma-deg", "0.2", "--output", str(a)])
    main(["gen", "--n", "50", "--seed", "1", "--sigma-deg", "0.2", "--output", str(b), "--poses", str(tmp_path / "bp")])
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.poses").read_bytes() == (tmp_path / "bp").read_bytes()


def test_gen_invalid_spec(tmp_path):
    code = main(["gen", "--depth-min", "5", "--depth-max", "1", "--output", str(tmp_path / "x")])
    assert code == EXIT_SPEC


def test_all_methods_agree_on_noiseless_data(noiseless, tmp_path):
    path, poses = noiseless
    out = tmp_path / "res"
    assert main(["triangulate", str(path), "--poses", str(poses), "--method", "all", "--output", str(out)]) == EXIT_OK
    results = read_results(out)
    assert len(results) == 4 * 200
    gt = [r.ground_truth for r in read_correspondences(path)]
    for i in range(200):
        rows = [r for r in results[4 * i: 4 * i + 4]]
        assert {r.index for r in rows} == {i}
        assert [r.method for r in rows] == ["l1", "l2", "linf", "midpoint"]
        for r in rows:
            np.testing.assert_allclose(r.point, rows[0].point, atol=1e-9)
            np.testing.assert_allclose(r.point, gt[i], atol=1e-9 * gt[i][2])
            assert r.status == "ok"
            assert r.observation in ("inlier", "low_parallax")


def test_triangulate_to_stdout(noiseless, capsys):
    path, poses = noiseless
    assert main(["triangulate", str(path), "--poses", str(poses), "--method", "linf"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 200 and lines[0].split()[1] == "linf"


@pytest.mark.parametrize("kind", ["ray0", "ray1", "both"])
def test_behind_camera_fixture_flagged(tmp_path, kind):
    recs = synth.behind_camera_preset(kind, n=15)
    write_correspondences(tmp_path / "c", recs)
    write_poses(tmp_path / "p", recs[0].pose)
    out = tmp_path / "r"
    main(["triangulate", str(tmp_path / "c"), "--poses", str(tmp_path / "p"), "--method", "all", "--output", str(out)])
    for r in read_results(out):
        assert r.status == "cheirality_violation"
        assert r.observation == "cheirality_fail"


def test_parse_error_exit_code(noiseless, tmp_path):
    _, poses = noiseless
    bad = tmp_path / "bad"
    bad.write_text("0 0 1 0 0 1\n0 0 1 oops 0 1\n")
    assert main(["triangulate", str(bad), "--poses", str(poses)]) == EXIT_PARSE
    assert main(["triangulate", str(bad), "--poses", str(poses), "--lenient", "--output", str(tmp_path / "r")]) == EXIT_OK
    assert len(read_results(tmp_path / "r")) == 1


def test_missing_file_exit_code(tmp_path):
    assert main(["triangulate", str(tmp_path / "nope"), "--poses", str(tmp_path / "nope")]) == EXIT_PARSE


def test_non_rotation_pose_rejected(noiseless, tmp_path):
    path, _ = noiseless
    p = tmp_path / "p"
    p.write_text(" ".join(["2"] + ["0"] * 3 + ["1"] + ["0"] * 3 + ["1", "1", "0", "0", "0", "0", "0"]) + "\n")
    assert main(["triangulate", str(path), "--poses", str(p)]) == EXIT_SPEC


def test_verify_noiseless(noiseless, capsys):
    path, poses = noiseless
    assert main(["verify", str(path), "--poses", str(poses), "--grid", "1024"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[0] for line in out] == ["l1", "l2", "linf"]
    for line in out:
        assert float(line.split("\t")[2]) <= 1e-12


def test_verify_noisy(noisy, capsys):
    path, poses = noisy
    assert main(["verify", str(path), "--poses", str(poses)]) == EXIT_OK
    for line in capsys.readouterr().out.splitlines():
        assert float(line.split("\t")[2]) <= 1e-6


def test_verify_result_file_and_negative_control(noisy, tmp_path):
    path, poses = noisy
    res = tmp_path / "res"
    main(["triangulate", str(path), "--poses", str(poses), "--method", "all", "--output", str(res)])
    assert main(["verify", str(path), "--poses", str(poses), "--results", str(res)]) == EXIT_OK

    lines = res.read_text().splitlines()
    fields = lines[4].split()
    assert fields[1] == "l1"
    fields[7] = repr(float(fields[7]) + math.radians(0.01))
    lines[4] = " ".join(fields)
    bad = tmp_path / "bad"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["verify", str(path), "--poses", str(poses), "--results", str(bad)]) == EXIT_VERIFY


def test_bench_table(tmp_path):
    out = tmp_path / "bench.tsv"
    code = main(["bench", "--n", "300", "--sigma-deg", "0,0.5", "--repeats", "1", "--oracle-points", "20", "--output", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].split("\t")[0] == "method"
    assert len(lines) == 1 + 2 * 5


def test_extreme_bearing_magnitudes(tmp_path):
    (tmp_path / "c").write_text("-1e-200 0 1e-200 1e-200 0 1e-200\n-1e300 0 1e300 1e300 0 1e300\n")
    write_poses(tmp_path / "p", synth.Pose(np.eye(3), np.array([1.0, 0, 0]), np.zeros(3)))
    out = tmp_path / "r"
    assert main(["triangulate", str(tmp_path / "c"), "--poses", str(tmp_path / "p"), "--output", str(out)]) == EXIT_OK
    for r in read_results(out):
        np.testing.assert_allclose(r.point, [0.5, 0.0, 0.5], atol=1e-12)
        assert r.status == "ok"
