import re

import numpy as np
import pytest

from shearmark import synthetic
from shearmark.cli import main
from shearmark.imageio import read_image, write_image


@pytest.fixture
def files(tmp_path):
    write_image(tmp_path / "host.png", synthetic.host("scene", 128))
    write_image(tmp_path / "logo.png", synthetic.logo(64))
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_embed_prints_transparency(files, capsys):
    code, out, _ = run(capsys, "embed", "--host", files / "host.png", "--wm", files / "logo.png",
                       "--alpha", "0.008", "--out", files / "wmk.png", "--key", files / "k.smk")
    assert code == 0
    psnr = float(re.search(r"PSNR: (\S+) dB", out).group(1))
    assert psnr >= 55
    assert (files / "wmk.png").exists() and (files / "k.smk").exists()


def test_lossless_roundtrip_via_cli(files, capsys):
    assert run(capsys, "embed", "--host", files / "host.png", "--wm", files / "logo.png",
               "--scheme", "DWT_ONLY", "--out", files / "wmk.npy", "--key", files / "k.smk")[0] == 0
    code, out, _ = run(capsys, "extract", "--in", files / "wmk.npy", "--key", files / "k.smk",
                       "--ref", files / "logo.png", "--out", files / "ext.png")
    assert code == 0
    assert re.fullmatch(r"NC: \d\.\d{4}\n", out)
    assert float(out.split()[1]) >= 0.999
    assert read_image(files / "ext.png").shape == (64, 64)


@pytest.mark.xfail(strict=True, reason="the hybrid embedding change is below 8-bit quantization, "
                   "so the PNG output carries no watermark")
def test_default_scheme_roundtrip_through_png(files, capsys):
    run(capsys, "embed", "--host", files / "host.png", "--wm", files / "logo.png",
        "--out", files / "wmk.png", "--key", files / "k.smk")
    _, out, _ = run(capsys, "extract", "--in", files / "wmk.png", "--key", files / "k.smk",
                    "--ref", files / "logo.png")
    assert float(out.split()[1]) >= 0.999


def test_missing_watermark(files, capsys):
    code, _, err = run(capsys, "embed", "--host", files / "host.png", "--wm", files / "nope.png",
                       "--out", files / "o.png", "--key", files / "k.smk")
    assert code == 2 and "file not found" in err


def test_zero_alpha(files, capsys):
    code, _, err = run(capsys, "embed", "--host", files / "host.png", "--wm", files / "logo.png",
                       "--alpha", "0", "--out", files / "o.png", "--key", files / "k.smk")
    assert code == 2 and "config error" in err


def test_corrupt_key(files, capsys):
    run(capsys, "embed", "--host", files / "host.png", "--wm", files / "logo.png",
        "--out", files / "wmk.png", "--key", files / "k.smk")
    data = bytearray((files / "k.smk").read_bytes())
    data[50] ^= 0xFF
    (files / "bad.smk").write_bytes(bytes(data))
    code, _, err = run(capsys, "extract", "--in", files / "wmk.png", "--key", files / "bad.smk")
    assert code == 2 and "key format error" in err


def test_attack_determinism_and_flip(files, capsys):
    src = files / "host.png"
    for name in ("a1.png", "a2.png"):
        assert run(capsys, "attack", "--in", src, "--spec", "SP 0.04", "--seed", "7",
                   "--out", files / name)[0] == 0
    assert (files / "a1.png").read_bytes() == (files / "a2.png").read_bytes()
    run(capsys, "attack", "--in", src, "--spec", "FL h", "--out", files / "f1.png")
    run(capsys, "attack", "--in", files / "f1.png", "--spec", "FL h", "--out", files / "f2.png")
    np.testing.assert_array_equal(read_image(files / "f2.png"), read_image(src))


def test_attack_seed_from_environment(files, capsys, monkeypatch):
    monkeypatch.setenv("SHEARMARK_SEED", "7")
    run(capsys, "attack", "--in", files / "host.png", "--spec", "SP 0.04", "--out", files / "e.png")
    monkeypatch.delenv("SHEARMARK_SEED")
    run(capsys, "attack", "--in", files / "host.png", "--spec", "SP 0.04", "--seed", "7",
        "--out", files / "s.png")
    assert (files / "e.png").read_bytes() == (files / "s.png").read_bytes()


def test_attack_crop_half(files, capsys):
    write_image(files / "white.png", np.full((128, 128), 255.0))
    run(capsys, "attack", "--in", files / "white.png", "--spec", "CR 0.5", "--out", files / "c.png")
    out = read_image(files / "c.png")
    assert abs(np.mean(out > 0) - 0.5) <= 128 / out.size
    kept = np.argwhere(out > 0)
    assert abs(kept[:, 0].min() - (127 - kept[:, 0].max())) <= 1


def test_attack_register_flag(files, capsys):
    run(capsys, "attack", "--in", files / "host.png", "--spec", "TR 5,5", "--register",
        "--out", files / "t.png")
    host, out = read_image(files / "host.png"), read_image(files / "t.png")
    np.testing.assert_array_equal(out[:-5, :-5], host[:-5, :-5])


def test_bad_attack_spec(files, capsys):
    code, _, err = run(capsys, "attack", "--in", files / "host.png", "--spec", "JPEG 0",
                       "--out", files / "x.png")
    assert code == 2 and "quality" in err


def test_metrics(files, capsys):
    code, out, _ = run(capsys, "metrics", files / "host.png", files / "host.png")
    assert code == 0 and "PSNR: inf dB" in out and "SSIM: 1.000000" in out
    code, out, _ = run(capsys, "metrics", files / "host.png", files / "logo.png")
    assert code == 2


def test_color_input_rejected(files, capsys):
    from PIL import Image
    Image.new("RGB", (128, 128)).save(files / "rgb.png")
    code, _, err = run(capsys, "embed", "--host", files / "rgb.png", "--wm", files / "logo.png",
                       "--out", files / "o.png", "--key", files / "k.smk")
    assert code == 2 and "color" in err


def test_bench_small(files, capsys):
    code, out, _ = run(capsys, "bench", "--hosts", "synthetic:scene", "--schemes", "DWT_ONLY",
                       "--size", "64", "--out-dir", files / "b", "--x100")
    assert code == 0
    assert (files / "b" / "bench.csv").exists() and (files / "b" / "bench.json").exists()
    assert "synthetic:scene/DWT_ONLY" in out


def test_bench_missing_host(files, capsys):
    code, _, err = run(capsys, "bench", "--hosts", files / "none.png", "--out-dir", files / "b")
    assert code == 2 and "file not found" in err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "shearmark" in capsys.readouterr().out
