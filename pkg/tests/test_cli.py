"""End-to-end CLI tests, run in-process through main(argv).

A small scene is synthesized once per module and shared; every subcommand
is exercised against it, including the failure paths and their exit codes:
2 for input problems, 3 for degenerate camera motion, 4 for registration
degeneracy during evaluation.
"""

import json

import pytest

from scenes import SMALL
from trajrec.cli import main
from trajrec.dataio import load_reconstruction
from trajrec.trajectory import load_trajectory

SMALL_FLAGS = [
    "--frame-count", str(SMALL.frame_count),
    "--frame-width", str(SMALL.frame_width),
    "--frame-height", str(SMALL.frame_height),
    "--focal", str(SMALL.focal),
    "--object-point-count", str(SMALL.object_point_count),
    "--ground-point-count", str(SMALL.ground_point_count),
    "--wall-point-count", str(SMALL.wall_point_count),
]


@pytest.fixture(scope="module")
def scene_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("scene")
    assert main(["synth", "--out", str(out), "--seed", "5"] + SMALL_FLAGS) == 0
    return out


@pytest.fixture(scope="module")
def reconstructed(scene_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "trajectory.json"
    rc = main(
        [
            "reconstruct",
            "--object-sfm", str(scene_dir / "object.json"),
            "--background-sfm", str(scene_dir / "background.json"),
            "--labels-dir", str(scene_dir / "labels"),
            "--semantic-config", str(scene_dir / "semantic.json"),
            "--out", str(out),
        ]
    )
    assert rc == 0
    return out


def reconstruct_args(scene_dir, out, *extra):
    return [
        "reconstruct",
        "--object-sfm", str(scene_dir / "object.json"),
        "--background-sfm", str(scene_dir / "background.json"),
        "--labels-dir", str(scene_dir / "labels"),
        "--semantic-config", str(scene_dir / "semantic.json"),
        "--out", str(out),
        *extra,
    ]


def evaluate_args(scene_dir, trajectory, out):
    return [
        "evaluate",
        "--trajectory", str(trajectory),
        "--object-sfm", str(scene_dir / "object.json"),
        "--background-sfm", str(scene_dir / "background.json"),
        "--gt", str(scene_dir / "gt.json"),
        "--out", str(out),
    ]


class TestSynth:
    def test_layout_validates_under_ingest(self, scene_dir):
        recon = load_reconstruction(scene_dir / "object.json")
        assert recon.frame_size == (SMALL.frame_width, SMALL.frame_height)
        assert sorted(p.name for p in scene_dir.iterdir()) == sorted(
            ["object.json", "background.json", "semantic.json", "object.obj",
             "gt.json", "labels", "run-manifest.json"]
        )
        assert len(list((scene_dir / "labels").iterdir())) == SMALL.frame_count

    def test_same_seed_byte_identical(self, scene_dir, tmp_path):
        assert main(["synth", "--out", str(tmp_path), "--seed", "5"] + SMALL_FLAGS) == 0
        for name in ["object.json", "background.json", "semantic.json", "object.obj", "gt.json"]:
            assert (tmp_path / name).read_bytes() == (scene_dir / name).read_bytes()
        for pgm in sorted((tmp_path / "labels").iterdir()):
            assert pgm.read_bytes() == (scene_dir / "labels" / pgm.name).read_bytes()

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        rc = main(["synth", "--out", str(tmp_path / "bad"), "--frame-count", "1"])
        assert rc == 2
        assert "error=invalid-config" in capsys.readouterr().err

    def test_config_file_with_flag_override(self, tmp_path):
        cfg_path = tmp_path / "scene-config.json"
        cfg_path.write_text(json.dumps({"frame_count": 2, "frame_width": 32, "frame_height": 32}))
        rc = main(
            ["synth", "--config", str(cfg_path), "--out", str(tmp_path / "s"),
             "--seed", "1", "--frame-count", "3"]
        )
        assert rc == 0
        recon = load_reconstruction(tmp_path / "s" / "background.json")
        assert len(recon.cameras) == 3  # the flag wins over the file
        assert recon.frame_size == (32, 32)

    def test_manifest_records_the_run(self, scene_dir):
        manifest = json.loads((scene_dir / "run-manifest.json").read_text())
        assert manifest["command"] == "synth"
        assert manifest["parameters"]["seed"] == 5
        assert manifest["parameters"]["frame_count"] == SMALL.frame_count
        assert set(manifest["versions"]) == {"trajrec", "python", "numpy", "scipy"}
        assert all(t >= 0 for t in manifest["timings"].values())


class TestReconstruct:
    def test_recovers_scale_and_writes_outputs(self, scene_dir, reconstructed, capsys):
        loaded = load_trajectory(reconstructed)
        assert loaded.method == "constant-distance"
        assert loaded.scale_ratio == pytest.approx(2.5, rel=1e-9)
        assert len(loaded.frames) == SMALL.frame_count
        manifest = json.loads((reconstructed.parent / "run-manifest.json").read_text())
        assert manifest["command"] == "reconstruct"
        assert manifest["parameters"]["method"] == "constant-distance"
        assert manifest["parameters"]["num_b"] == 50
        assert "pipeline.estimate_scale" in manifest["timings"]

    def test_byte_identical_across_runs(self, scene_dir, reconstructed, tmp_path):
        again = tmp_path / "trajectory.json"
        assert main(reconstruct_args(scene_dir, again)) == 0
        assert again.read_bytes() == reconstructed.read_bytes()

    def test_intersection_method(self, scene_dir, tmp_path):
        out = tmp_path / "trajectory.json"
        assert main(reconstruct_args(scene_dir, out, "--method", "intersection")) == 0
        loaded = load_trajectory(out)
        assert loaded.method == "intersection"
        assert loaded.chosen_pair is None
        # No ground contact in this scene: the baseline lands above r*.
        assert loaded.scale_ratio > 2.5

    def test_ply_output(self, scene_dir, tmp_path):
        out = tmp_path / "trajectory.json"
        ply_dir = tmp_path / "ply"
        assert main(reconstruct_args(scene_dir, out, "--ply-dir", str(ply_dir))) == 0
        plys = sorted(ply_dir.iterdir())
        assert [p.name for p in plys] == [f"frame{f:05d}.ply" for f in range(SMALL.frame_count)]
        header = plys[0].read_text().splitlines()
        assert header[0] == "ply"

    def test_missing_required_flag_exits_2(self, scene_dir, capsys):
        rc = main(["reconstruct", "--object-sfm", str(scene_dir / "object.json")])
        assert rc == 2
        assert "required" in capsys.readouterr().err

    def test_missing_input_file_exits_2(self, scene_dir, tmp_path, capsys):
        args = reconstruct_args(scene_dir, tmp_path / "t.json")
        args[args.index("--object-sfm") + 1] = str(scene_dir / "nope.json")
        assert main(args) == 2
        assert "error=" in capsys.readouterr().err

    def test_degenerate_motion_exits_3(self, tmp_path, capsys):
        degen = tmp_path / "degen"
        assert main(
            ["synth", "--out", str(degen), "--seed", "5", "--degenerate-parallel"]
            + SMALL_FLAGS
        ) == 0
        rc = main(reconstruct_args(degen, tmp_path / "t.json"))
        assert rc == 3
        assert "error=degenerate-camera-motion" in capsys.readouterr().err


class TestEvaluate:
    def test_scores_its_own_scene(self, scene_dir, reconstructed, tmp_path, capsys):
        out = tmp_path / "eval.json"
        assert main(evaluate_args(scene_dir, reconstructed, out)) == 0
        raw = json.loads(out.read_text())
        # Evaluating against the generating GT: deviations vanish.
        assert raw["scale_ratio_deviation"] < 1e-9
        assert raw["trajectory_error_mean"] < 1e-9
        assert len(raw["per_frame"]) == SMALL.frame_count
        manifest = json.loads((tmp_path / "run-manifest.json").read_text())
        assert manifest["command"] == "evaluate"

    def test_byte_identical_eval(self, scene_dir, reconstructed, tmp_path):
        a, b = tmp_path / "a" / "eval.json", tmp_path / "b" / "eval.json"
        assert main(evaluate_args(scene_dir, reconstructed, a)) == 0
        assert main(evaluate_args(scene_dir, reconstructed, b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_frame_mismatch_exits_2_with_diff(self, scene_dir, reconstructed, tmp_path, capsys):
        raw = json.loads(reconstructed.read_text())
        raw["frames"][0]["frame"] = 99  # no longer in the ground truth
        bad = tmp_path / "trajectory.json"
        bad.write_text(json.dumps(raw))
        rc = main(evaluate_args(scene_dir, bad, tmp_path / "eval.json"))
        assert rc == 2
        err = capsys.readouterr().err
        assert "error=frame-mismatch" in err
        assert "missing=99" in err

    def test_registration_degeneracy_exits_4(self, scene_dir, reconstructed, tmp_path, capsys):
        # Trim both the trajectory and the GT to two frames: frame sets then
        # agree, but two cameras cannot anchor a similarity registration.
        traj = json.loads(reconstructed.read_text())
        traj["frames"] = traj["frames"][:2]
        short_traj = tmp_path / "trajectory.json"
        short_traj.write_text(json.dumps(traj))

        gt = json.loads((scene_dir / "gt.json").read_text())
        gt["frames"] = gt["frames"][:2]
        (tmp_path / "gt.json").write_text(json.dumps(gt))
        (tmp_path / "object.obj").write_bytes((scene_dir / "object.obj").read_bytes())

        args = evaluate_args(scene_dir, short_traj, tmp_path / "eval.json")
        args[args.index("--gt") + 1] = str(tmp_path / "gt.json")
        rc = main(args)
        assert rc == 4
        assert "error=registration-degenerate" in capsys.readouterr().err


class TestTopLevel:
    def test_help_exits_0(self, capsys):
        assert main(["--help"]) == 0
        assert "reconstruct" in capsys.readouterr().out

    def test_no_command_exits_2(self, capsys):
        assert main([]) == 2

    def test_unknown_command_exits_2(self, capsys):
        assert main(["frobnicate"]) == 2
