import json
import os

import numpy as np
import pytest

import motrace


def sine_image(w, h, dx=0.0, dy=0.0):
    y, x = np.mgrid[0:h, 0:w].astype(float)
    x -= dx
    y -= dy
    v = (np.sin(x / 7.0) * np.cos(y / 5.0) + 0.5 * np.sin((x + 2 * y) / 11.0)) / 3.0
    return 0.5 + v


def write_scene(tmp_path, seed, block):
    scene = motrace.make_demo_scene(seed, block)
    a, b, truth = motrace.generate_pair(scene)
    motrace.write_frame(tmp_path / motrace.frame_file_name(1), a)
    motrace.write_frame(tmp_path / motrace.frame_file_name(2), b)
    return scene, truth


def test_frame_timestamp():
    assert motrace.frame_timestamp(4) == pytest.approx(4 / 29.97)
    assert motrace.frame_timestamp(30, 30.0) == pytest.approx(1.0)
    with pytest.raises(motrace.Error) as info:
        motrace.frame_timestamp(0)
    assert info.value.code == "InvalidIndex"


def test_default_params_are_json():
    params = motrace.default_params()
    assert params["ts"] == 3.5
    assert json.loads(json.dumps(params)) == params


def test_features_and_subpixel_tracking():
    a = sine_image(200, 150)
    b = sine_image(200, 150, 0.5, 0.25)
    feats = motrace.detect_features(a)
    assert feats.shape[1] == 3 and len(feats) > 20
    inside = feats[(feats[:, 0] > 20) & (feats[:, 0] < 180) & (feats[:, 1] > 20) & (feats[:, 1] < 130)]
    out = motrace.track_features(a, b, inside[:, :2])
    ok = np.array([s == "tracked" for s in out["status"]])
    assert ok.mean() > 0.9
    err = np.linalg.norm(out["p2"][ok] - inside[ok, :2] - [0.5, 0.25], axis=1)
    assert np.median(err) < 0.15


def test_homography_recovers_exact_transform():
    rng = np.random.default_rng(3)
    h = np.array([[1.01, -0.02, 4.0], [0.015, 0.99, -3.0], [1e-5, -2e-5, 1.0]])
    p1 = rng.uniform([0, 0], [640, 360], size=(200, 2))
    hom = np.c_[p1, np.ones(len(p1))] @ h.T
    p2 = hom[:, :2] / hom[:, 2:]
    p2[:40] = rng.uniform([0, 0], [640, 360], size=(40, 2))
    fit = motrace.estimate_homography(p1, p2, seed=7)
    assert fit["inliers"][40:].all()
    assert np.linalg.norm(fit["h"] - h) / np.linalg.norm(h) < 1e-6
    np.testing.assert_allclose(motrace.apply_homography(fit["h"], p1[40:]), p2[40:], atol=1e-6)


def test_warp_identity_is_lossless():
    img = sine_image(64, 48)
    np.testing.assert_allclose(motrace.warp_image(img, np.eye(3)), img, atol=1e-12)


def test_analyze_block_scene(tmp_path):
    scene, truth = write_scene(tmp_path, 6, True)
    result = motrace.analyze_pair(str(tmp_path), 1, 2, out_dir=str(tmp_path / "runs"))
    assert result["run_dir"] is not None
    with open(os.path.join(result["run_dir"], "result.json")) as f:
        on_disk = json.load(f)
    assert on_disk["run_id"] == result["run_id"]
    filtered = result["filtered"]["vectors"]
    assert filtered
    block = truth["blocks"][0]["rect"]
    inside = [
        v for v in filtered
        if block["x0"] <= v["origin"]["x"] < block["x0"] + block["width"]
        and block["y0"] <= v["origin"]["y"] < block["y0"] + block["height"]
    ]
    assert len(inside) / len(filtered) >= 0.9


def test_sweep_matches_filter(tmp_path):
    write_scene(tmp_path, 9, True)
    result = motrace.analyze_pair(str(tmp_path), 1, 2)
    field = result["field"]
    sweep = motrace.threshold_sweep(field, "0:1:6")
    counts = [e["surviving_count"] for e in sweep["entries"]]
    assert counts == sorted(counts, reverse=True)
    for e in sweep["entries"]:
        expected = sum(1 for v in field["vectors"] if v["magnitude"] >= e["ts"])
        assert e["surviving_count"] == expected
        assert len(motrace.filter_by_threshold(field, e["ts"])["vectors"]) == expected


def test_errors_carry_codes(tmp_path):
    with pytest.raises(motrace.Error) as info:
        motrace.analyze_pair(str(tmp_path), 1, 2)
    assert info.value.code == "EmptyFrameStore"
    write_scene(tmp_path, 2, False)
    with pytest.raises(motrace.Error) as info:
        motrace.analyze_pair(str(tmp_path), 2, 2)
    assert info.value.code == "InvalidPair"
    with pytest.raises(motrace.Error) as info:
        motrace.analyze_pair(str(tmp_path), 1, 2, params={"ts": -1})
    assert info.value.code == "NegativeThreshold"
