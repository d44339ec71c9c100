"""Command-line harness: data generation, pretraining, denoising, test-time
fine-tuning, the patch-recurrence study, and corpus scoring.

Every subcommand accepts --config FILE (INI-style, one section per
subcommand, key = value); explicit flags override the file. Each run writes
a resolved-config snapshot next to its outputs, and rerunning from that
snapshot reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import data as data_mod
from . import metrics
from .engine import FinetuneConfig, rfr_finetune
from .net import NetConfig, denoise, load_checkpoint, save_checkpoint
from .noise import GaussianBlind, GaussianKnown, Isp, add_awgn
from .selfsim import average_recurring_patches, extract_patches, make_recurrence_image
from .train import PretrainConfig, load_corpus, pretrain

# option name -> (type, default, help); defaults live here, not in argparse,
# so config-file values can slot in between flags and defaults.
_SPECS = {
    "gen-data": {
        "count": (int, 8, "number of images"),
        "size": (int, 160, "image side length"),
        "kind": (str, "texture", "texture | recurrence"),
        "channels": (int, 1, "1 or 3"),
        "recurrence_k": (int, 25, "patch copies per recurrence image"),
        "seed": (int, 0, "rng seed"),
        "out": (str, None, "output directory"),
    },
    "pretrain": {
        "data": (str, None, "clean PNG directory"),
        "out": (str, None, "checkpoint path"),
        "steps": (int, 30000, "training steps"),
        "batch": (int, 8, "crops per step"),
        "crop": (int, 64, "crop side"),
        "depth": (int, 8, "conv layers"),
        "width": (int, 32, "hidden channels"),
        "kernel": (int, 3, "kernel side (odd)"),
        "channels": (int, 1, "image channels"),
        "padding": (str, "zero", "zero | circular"),
        "residual": (int, 1, "1 = predict noise + skip"),
        "lr_start": (float, 1e-4, "initial learning rate"),
        "lr_end": (float, 1e-6, "final learning rate"),
        "sigma_hi": (float, 50.0, "blind AWGN upper sigma, 0-255 scale"),
        "loss": (str, "l1", "l1 | l2"),
        "seed": (int, 0, "rng seed"),
    },
    "denoise": {
        "checkpoint": (str, None, "checkpoint path"),
        "input": (str, None, "noisy PNG"),
        "output": (str, None, "output PNG"),
        "clean": (str, "", "optional clean reference PNG"),
    },
    "rfr": {
        "checkpoint": (str, None, "checkpoint path"),
        "input": (str, None, "noisy PNG"),
        "output": (str, None, "output PNG"),
        "iters": (int, 40, "fine-tuning steps M"),
        "lr": (float, 1e-5, "fine-tuning learning rate"),
        "noise": (str, "gaussian", "gaussian | blind | isp"),
        "sigma": (float, 25.0, "known sigma (0-255 scale)"),
        "sigma_hi": (float, 50.0, "blind-mode upper sigma (0-255 scale)"),
        "loss": (str, "l2", "l2 | l1"),
        "optimizer": (str, "adam", "adam | sgd"),
        "augment": (int, 1, "1 = dihedral augmentation"),
        "seed": (int, 0, "rng seed"),
        "clean": (str, "", "optional clean reference PNG"),
    },
    "selfsim": {
        "checkpoint": (str, "", "optional checkpoint (else pass-through)"),
        "k": (str, "1,4,9,16,25", "comma list of copy counts"),
        "sigma": (float, 25.0, "AWGN sigma (0-255 scale)"),
        "seeds": (int, 10, "noise seeds per k"),
        "size": (int, 208, "canvas side"),
        "patch": (int, 32, "patch side"),
        "margin": (int, 8, "min gap between copies and canvas border"),
        "seed": (int, 0, "rng seed"),
        "channels": (int, 1, "image channels"),
        "out": (str, None, "output CSV"),
    },
    "eval": {
        "dir_a": (str, None, "restored image directory"),
        "dir_b": (str, None, "clean image directory"),
        "out": (str, None, "output CSV"),
    },
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rfr-denoise",
        description="single-image denoising with test-time fine-tuning",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in _SPECS.items():
        p = sub.add_parser(cmd)
        p.add_argument("--config", default=None, help="INI config file")
        for name, (typ, _default, help_) in opts.items():
            p.add_argument(f"--{name.replace('_', '-')}", type=typ, default=None,
                           dest=name, help=help_)
    return parser


def _resolve(cmd: str, args) -> dict:
    """Merge flags over config-file values over built-in defaults."""
    spec = _SPECS[cmd]
    resolved = {}
    file_vals = {}
    if args.config:
        ini = configparser.ConfigParser()
        ini.read(args.config)
        if ini.has_section(cmd):
            file_vals = dict(ini.items(cmd))
    for name, (typ, default, _help) in spec.items():
        flag = getattr(args, name)
        if flag is not None:
            resolved[name] = flag
        elif name in file_vals:
            resolved[name] = typ(file_vals[name])
        else:
            resolved[name] = default
        if resolved[name] is None:
            raise SystemExit(f"missing required option --{name.replace('_', '-')}")
    return resolved

def _write_snapshot(cmd: str, resolved: dict, near: Path):
    """Resolved-config snapshot, itself loadable via --config."""
    if near.suffix:
        snap = near.with_name(near.name + ".config.ini")
    else:
        near.mkdir(parents=True, exist_ok=True)
        snap = near / "resolved_config.ini"
    lines = [f"[{cmd}]"] + [f"{k} = {v}" for k, v in resolved.items()]
    snap.write_text("\n".join(lines) + "\n")


def _load_gray_or_rgb(path, channels):
    img = data_mod.load_image(path)
    if channels == 1 and img.shape[2] == 3:
        img = img.mean(axis=2, keepdims=True).astype(np.float32)
    return img


def cmd_gen_data(cfg: dict):
    out = Path(cfg["out"])
    paths = data_mod.gen_corpus(
        count=cfg["count"], size=cfg["size"], kind=cfg["kind"], seed=cfg["seed"],
        out_dir=out, channels=cfg["channels"], recurrence_k=cfg["recurrence_k"],
    )
    _write_snapshot("gen-data", cfg, out)
    print(f"wrote {len(paths)} {cfg['kind']} images to {out}")


def cmd_pretrain(cfg: dict):
    images, _ = load_corpus(cfg["data"], channels=cfg["channels"])
    net_cfg = NetConfig(
        depth=cfg["depth"], width=cfg["width"], kernel=cfg["kernel"],
        in_channels=cfg["channels"], padding=cfg["padding"],
        residual=bool(cfg["residual"]),
    )
    train_cfg = PretrainConfig(
        steps=cfg["steps"], batch=cfg["batch"], crop=cfg["crop"],
        lr_start=cfg["lr_start"], lr_end=cfg["lr_end"],
        sigma=GaussianBlind(0.0, cfg["sigma_hi"] / 255.0),
        loss=cfg["loss"], seed=cfg["seed"],
    )
    net, losses = pretrain(images, net_cfg, train_cfg)
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(net, out)
    with open(out.with_name(out.name + ".loss.csv"), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "loss"])
        writer.writerows((i, f"{v:.8f}") for i, v in enumerate(losses))
    _write_snapshot("pretrain", cfg, out)
    print(f"checkpoint: {out} (final loss {losses[-1]:.5f})")


def _print_scores(label, restored, clean):
    p = metrics.psnr(restored, clean)
    s = metrics.ssim(restored, clean)
    p_txt = "inf" if math.isinf(p) else f"{p:.4f}"
    print(f"{label}: psnr={p_txt} dB  ssim={s:.4f}")
    return p, s


def cmd_denoise(cfg: dict):
    net = load_checkpoint(cfg["checkpoint"])
    img = _load_gray_or_rgb(cfg["input"], net.config.in_channels)
    restored = denoise(net, img)
    out = Path(cfg["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    data_mod.save_image(restored, out)
    _write_snapshot("denoise", cfg, out)
    if cfg["clean"]:
        clean = _load_gray_or_rgb(cfg["clean"], net.config.in_channels)
        _print_scores("denoised", np.clip(restored, 0, 1), clean)
    print(f"wrote {out}")


def _noise_spec(cfg: dict):
    if cfg["noise"] == "gaussian":
        return GaussianKnown(cfg["sigma"] / 255.0)
    if cfg["noise"] == "blind":
        return GaussianBlind(0.0, cfg["sigma_hi"] / 255.0)
    if cfg["noise"] == "isp":
        return Isp()
    raise SystemExit(f"unknown noise mode {cfg['noise']!r}")


def cmd_rfr(cfg: dict):
    net = load_checkpoint(cfg["checkpoint"])
    img = _load_gray_or_rgb(cfg["input"], net.config.in_channels)
    ft = FinetuneConfig(
        iters=cfg["iters"], lr=cfg["lr"], loss=cfg["loss"],
        noise=_noise_spec(cfg), augment=bool(cfg["augment"]),
        seed=cfg["seed"], optimizer=cfg["optimizer"],
    )
    tuned, final, losses = rfr_finetune(net, img, ft)
    out = Path(cfg["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    data_mod.save_image(final, out)
    with open(out.with_name(out.name + ".loss.csv"), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "loss"])
        writer.writerows((i, f"{v:.8f}") for i, v in enumerate(losses))
    _write_snapshot("rfr", cfg, out)
    if cfg["clean"]:
        clean = _load_gray_or_rgb(cfg["clean"], net.config.in_channels)
        rows = [
            metrics.ScoreRow("baseline", *_print_scores(
                "baseline", np.clip(denoise(net, img), 0, 1), clean)),
            metrics.ScoreRow("fine_tuned", *_print_scores(
                "fine-tuned", np.clip(final, 0, 1), clean)),
        ]
        for r in rows:
            r.tags = {"sigma_255": f"{cfg['sigma']:g}", "M": str(cfg["iters"]),
                      "mode": cfg["noise"]}
        metrics.write_score_csv(rows, out.with_name(out.name + ".scores.csv"))
    print(f"wrote {out}")


def cmd_selfsim(cfg: dict):
    net = load_checkpoint(cfg["checkpoint"]) if cfg["checkpoint"] else None
    sigma = cfg["sigma"] / 255.0
    k_list = [int(v) for v in cfg["k"].split(",")]
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = [["k", "seed", "psnr_before", "psnr_after", "ssim_before", "ssim_after"]]
    for k in k_list:
        agg = np.zeros(4)
        for s in range(cfg["seeds"]):
            # layout depends only on the seed so every k sees the same patch
            rng = np.random.default_rng([cfg["seed"], s])
            layout = data_mod.make_recurrence_layout(
                k, rng, patch_size=cfg["patch"], canvas_size=cfg["size"],
                channels=cfg["channels"], margin=cfg["margin"],
            )
            clean = make_recurrence_image(layout)
            noisy = add_awgn(clean, sigma, rng)
            restored = denoise(net, noisy) if net is not None else noisy
            avg, p_before, p_after = average_recurring_patches(restored, layout)
            patches = extract_patches(restored, layout)
            s_before = float(np.mean([metrics.ssim(q, layout.patch) for q in patches]))
            s_after = metrics.ssim(avg, layout.patch)
            agg += (p_before, p_after, s_before, s_after)
            rows.append([k, s, f"{p_before:.4f}", f"{p_after:.4f}",
                         f"{s_before:.4f}", f"{s_after:.4f}"])
        mean = agg / cfg["seeds"]
        rows.append([k, "mean"] + [f"{v:.4f}" for v in mean])
    with open(out, "w", newline="") as f:
        csv.writer(f).writerows(rows)
    _write_snapshot("selfsim", cfg, out)
    print(f"wrote {out}")


def cmd_eval(cfg: dict):
    dir_a, dir_b = Path(cfg["dir_a"]), Path(cfg["dir_b"])
    names_a = {p.name for p in dir_a.glob("*.png")}
    names_b = {p.name for p in dir_b.glob("*.png")}
    unmatched = sorted(names_a ^ names_b)
    if unmatched:
        raise SystemExit(f"unmatched filenames: {', '.join(unmatched)}")
    if not names_a:
        raise SystemExit("no PNG pairs found")
    names = sorted(names_a)
    pairs = [
        (data_mod.load_image(dir_a / n), data_mod.load_image(dir_b / n))
        for n in names
    ]
    rows = metrics.evaluate_corpus(pairs, [Path(n).stem for n in names])
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    metrics.write_score_csv(rows, out)
    _write_snapshot("eval", cfg, out)
    print(f"wrote {out}")


_HANDLERS = {
    "gen-data": cmd_gen_data,
    "pretrain": cmd_pretrain,
    "denoise": cmd_denoise,
    "rfr": cmd_rfr,
    "selfsim": cmd_selfsim,
    "eval": cmd_eval,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    resolved = _resolve(args.command, args)
    _HANDLERS[args.command](resolved)


if __name__ == "__main__":
    main()
