import numpy as np
import pytest

from rfrdenoise.cli import main
from rfrdenoise.data import load_image, save_image
from rfrdenoise.net import NetConfig, init_net, save_checkpoint
from rfrdenoise.noise import add_awgn


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Generated corpus + a tiny trained checkpoint, shared by CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "clean"
    main(["gen-data", "--count", "3", "--size", "96", "--kind", "texture",
          "--seed", "1", "--out", str(data)])
    ckpt = root / "net.rfrd"
    main(["pretrain", "--data", str(data), "--out", str(ckpt),
          "--steps", "30", "--batch", "2", "--crop", "32",
          "--depth", "3", "--width", "4", "--lr-start", "1e-3"])
    noisy_png = root / "noisy.png"
    clean = load_image(sorted(data.glob("*.png"))[0])
    noisy = np.clip(add_awgn(clean, 25 / 255, np.random.default_rng(2)), 0, 1)
    save_image(noisy, noisy_png)
    return root, data, ckpt, noisy_png


def test_gen_data_deterministic(tmp_path):
    for d in ("a", "b"):
        main(["gen-data", "--count", "1", "--size", "64", "--kind", "texture",
              "--seed", "9", "--out", str(tmp_path / d)])
    fa = sorted((tmp_path / "a").glob("*.png"))[0]
    fb = sorted((tmp_path / "b").glob("*.png"))[0]
    assert fa.read_bytes() == fb.read_bytes()


def test_gen_data_recurrence_sidecar(tmp_path):
    main(["gen-data", "--count", "1", "--size", "160", "--kind", "recurrence",
          "--seed", "3", "--out", str(tmp_path)])
    assert list(tmp_path.glob("*.layout"))


def test_pretrain_writes_artifacts(workdir):
    root, _, ckpt, _ = workdir
    assert ckpt.exists()
    assert ckpt.with_name(ckpt.name + ".loss.csv").exists()
    assert ckpt.with_name(ckpt.name + ".config.ini").exists()


def test_denoise_identity_checkpoint(tmp_path, workdir):
    _, _, _, noisy_png = workdir
    net = init_net(NetConfig(depth=2, width=1, kernel=1), seed=0)
    net.layers[-1].weight[...] = 0
    ckpt = tmp_path / "id.rfrd"
    save_checkpoint(net, ckpt)
    out = tmp_path / "out.png"
    main(["denoise", "--checkpoint", str(ckpt), "--input", str(noisy_png),
          "--output", str(out)])
    np.testing.assert_array_equal(load_image(out), load_image(noisy_png))


def test_rfr_iters0_matches_denoise(tmp_path, workdir):
    _, _, ckpt, noisy_png = workdir
    d_out = tmp_path / "d.png"
    r_out = tmp_path / "r.png"
    main(["denoise", "--checkpoint", str(ckpt), "--input", str(noisy_png),
          "--output", str(d_out)])
    main(["rfr", "--checkpoint", str(ckpt), "--input", str(noisy_png),
          "--output", str(r_out), "--iters", "0", "--sigma", "25"])
    assert d_out.read_bytes() == r_out.read_bytes()


def test_rfr_outputs_and_scores(tmp_path, workdir):
    _, data, ckpt, noisy_png = workdir
    clean_png = sorted(data.glob("*.png"))[0]
    out = tmp_path / "rfr.png"
    main(["rfr", "--checkpoint", str(ckpt), "--input", str(noisy_png),
          "--output", str(out), "--iters", "2", "--sigma", "25",
          "--seed", "4", "--clean", str(clean_png)])
    assert out.exists()
    loss_csv = out.with_name(out.name + ".loss.csv")
    assert len(loss_csv.read_text().strip().splitlines()) == 3  # header + 2
    scores = out.with_name(out.name + ".scores.csv").read_text()
    assert "baseline" in scores and "fine_tuned" in scores


def test_rfr_seed_reruns_identical(tmp_path, workdir):
    _, _, ckpt, noisy_png = workdir
    outs = []
    for name in ("x.png", "y.png"):
        out = tmp_path / name
        main(["rfr", "--checkpoint", str(ckpt), "--input", str(noisy_png),
              "--output", str(out), "--iters", "2", "--sigma", "25",
              "--seed", "7"])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_selfsim_csv(tmp_path, workdir):
    _, _, ckpt, _ = workdir
    out = tmp_path / "table.csv"
    main(["selfsim", "--checkpoint", str(ckpt), "--k", "1,4", "--sigma", "25",
          "--seeds", "2", "--size", "112", "--patch", "16", "--out", str(out)])
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "k,seed,psnr_before,psnr_after,ssim_before,ssim_after"
    # per-k: seeds rows + one mean row
    assert len(lines) == 1 + 2 * 3
    k1_mean = [l for l in lines if l.startswith("1,mean")][0]
    before, after = map(float, k1_mean.split(",")[2:4])
    assert before == after  # k=1: averaging changes nothing


def test_selfsim_passthrough_averaging_law(tmp_path):
    out = tmp_path / "pt.csv"
    main(["selfsim", "--k", "1,16", "--sigma", "25", "--seeds", "3",
          "--size", "208", "--out", str(out)])
    lines = out.read_text().strip().splitlines()
    k1 = [l for l in lines if l.startswith("1,mean")][0].split(",")
    k16 = [l for l in lines if l.startswith("16,mean")][0].split(",")
    # averaging 16 iid-noise patches cuts noise power 16x: +12.04 dB
    gain = float(k16[3]) - float(k1[3])
    assert abs(gain - 12.04) < 12.04 * 0.15


def test_eval_identical_dirs(tmp_path, workdir):
    _, data, _, _ = workdir
    out = tmp_path / "eval.csv"
    main(["eval", "--dir-a", str(data), "--dir-b", str(data), "--out", str(out)])
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 1 + 3 + 1  # header + 3 pairs + mean
    assert all("inf" in l for l in lines[1:-1])


def test_eval_unmatched_names(tmp_path, workdir):
    _, data, _, _ = workdir
    other = tmp_path / "other"
    other.mkdir()
    save_image(np.zeros((16, 16, 1), dtype=np.float32), other / "lonely.png")
    with pytest.raises(SystemExit, match="lonely.png"):
        main(["eval", "--dir-a", str(data), "--dir-b", str(other),
              "--out", str(tmp_path / "e.csv")])


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[gen-data]\ncount = 2\nsize = 64\nseed = 5\n"
                   f"out = {tmp_path / 'imgs'}\n")
    main(["gen-data", "--config", str(cfg), "--count", "1"])  # flag wins
    assert len(list((tmp_path / "imgs").glob("*.png"))) == 1


def test_snapshot_rerun_reproduces(tmp_path):
    out1 = tmp_path / "s1"
    main(["gen-data", "--count", "1", "--size", "64", "--seed", "8",
          "--out", str(out1)])
    snap = out1 / "resolved_config.ini"
    assert snap.exists()
    # rerun purely from the snapshot into a second directory
    text = snap.read_text().replace(str(out1), str(tmp_path / "s2"))
    snap2 = tmp_path / "snap2.ini"
    snap2.write_text(text)
    main(["gen-data", "--config", str(snap2)])
    f1 = sorted(out1.glob("*.png"))[0]
    f2 = sorted((tmp_path / "s2").glob("*.png"))[0]
    assert f1.read_bytes() == f2.read_bytes()


def test_missing_required_option(tmp_path):
    with pytest.raises(SystemExit, match="--out"):
        main(["gen-data", "--count", "1"])
