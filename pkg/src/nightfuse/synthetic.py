"""Deterministic, seeded test scenes with known ground truth.

A scene is a static IR background with a warm pedestrian-shaped block
walking left to right over it, paired with a dark textured visible stream.
Optional distractors: isolated warm specks and a horizontal warm bar, both
moving so the background estimate never absorbs them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .frame_io import GrayFrame, RgbFrame, save_frame

DATASET_FRAMES = 527
DATASET_FPS = 23.96


@dataclass
class SyntheticScene:
    ir: list[GrayFrame]
    vis: list[RgbFrame]
    background: GrayFrame
    truth: list[list[tuple[int, int, int, int]]]  # per frame, pedestrian (x, y, w, h)
    frame_rate: float | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.ir)


def gradient_background(width: int, height: int, base: int = 30, span: int = 100) -> np.ndarray:
    """Horizontal ramp, non-decreasing in x and constant in y.

    Such a ramp is a fixed point of any odd square median filter, so it is
    recovered exactly even when the background is built from filtered frames.
    """
    ramp = base + (np.arange(width, dtype=np.int32) * span) // max(width - 1, 1)
    return np.broadcast_to(ramp.astype(np.uint8), (height, width)).copy()


def _near(box, x, y, gap):
    bx, by, bw, bh = box
    return bx - gap <= x < bx + bw + gap and by - gap <= y < by + bh + gap


def walking_block_scene(
    n_frames: int = 40,
    width: int = 320,
    height: int = 240,
    seed: int = 0,
    block_size: tuple[int, int] = (6, 14),
    speed: int = 2,
    warmth: int = 80,
    n_specks: int = 0,
    bar: bool = False,
    frame_rate: float | None = None,
) -> SyntheticScene:
    """Pedestrian block walking ``speed`` px/frame; wraps around past the right margin."""
    rng = np.random.default_rng(seed)
    bw, bh = block_size
    margin = 10
    if width < bw + 2 * margin + speed or height < 2 * bh + 8:
        raise ValueError(f"frame {width}x{height} too small for the walking-block scene")

    bg = gradient_background(width, height, base=20 + int(rng.integers(0, 20)))
    texture = rng.integers(0, 90, size=(height, width, 3), dtype=np.uint8)

    track = width - bw - 2 * margin
    block_y = max(1, height // 4 - bh // 2 + int(rng.integers(-3, 4)))
    bar_w, bar_h = 20, 4
    bar_y = (3 * height) // 4
    bar_track = width - bar_w - 2 * margin

    ir_frames, vis_frames, truth = [], [], []
    for i in range(n_frames):
        ir = bg.astype(np.int16)
        bx = margin + (speed * i) % track
        box = (bx, block_y, bw, bh)
        ir[block_y : block_y + bh, bx : bx + bw] += warmth

        avoid = [box]
        if bar:
            barx = margin + bar_track - 1 - (3 * i) % bar_track
            ir[bar_y : bar_y + bar_h, barx : barx + bar_w] += warmth
            avoid.append((barx, bar_y, bar_w, bar_h))
        placed: list[tuple[int, int]] = []
        while len(placed) < n_specks:
            x, y = int(rng.integers(0, width)), int(rng.integers(0, height))
            if any(_near(b, x, y, 2) for b in avoid):
                continue
            if any(abs(x - px) <= 2 and abs(y - py) <= 2 for px, py in placed):
                continue
            placed.append((x, y))
        for x, y in placed:
            ir[y, x] += warmth

        ir_frames.append(GrayFrame(np.clip(ir, 0, 255).astype(np.uint8)))
        vis_frames.append(RgbFrame(np.roll(texture, i, axis=1)))
        truth.append([box])

    return SyntheticScene(
        ir=ir_frames,
        vis=vis_frames,
        background=GrayFrame(bg),
        truth=truth,
        frame_rate=frame_rate,
        meta={
            "scenario": "walking",
            "seed": seed,
            "width": width,
            "height": height,
            "n_frames": n_frames,
            "n_specks": n_specks,
            "bar": bar,
        },
    )


def paired_dataset(seed: int = 0, width: int = 320, height: int = 240, n_frames: int = DATASET_FRAMES) -> SyntheticScene:
    """The 527-frame, 23.96 fps stand-in for the paper's IR/visible pair."""
    scene = walking_block_scene(n_frames=n_frames, width=width, height=height, seed=seed, frame_rate=DATASET_FPS)
    scene.meta["scenario"] = "dataset"
    return scene


def moving_block_sequence(seed: int) -> tuple[list[GrayFrame], GrayFrame]:
    """Small random scene for background-recovery checks.

    Returns (frames, true_background).  The block's trajectory is redrawn
    until no pixel is covered in half or more of the frames.
    """
    rng = np.random.default_rng(seed)
    width = int(rng.integers(16, 49))
    height = int(rng.integers(16, 49))
    n = int(rng.integers(9, 32))
    if seed % 2:
        bg = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    else:
        gx, gy = rng.integers(1, 5, size=2)
        yy, xx = np.mgrid[0:height, 0:width]
        bg = ((xx * gx + yy * gy) % 256).astype(np.uint8)
    hot = np.uint8(rng.integers(180, 256))
    while True:
        bw, bh = (int(v) for v in rng.integers(2, 7, size=2))
        x0 = rng.integers(0, width - bw + 1)
        y0 = rng.integers(0, height - bh + 1)
        vx, vy = (int(v) for v in rng.integers(-4, 5, size=2))
        if vx == 0 and vy == 0:
            continue
        cover = np.zeros((height, width), dtype=np.int32)
        frames = []
        for i in range(n):
            x = int((x0 + vx * i) % (width - bw + 1))
            y = int((y0 + vy * i) % (height - bh + 1))
            f = bg.copy()
            f[y : y + bh, x : x + bw] = hot
            cover[y : y + bh, x : x + bw] += 1
            frames.append(GrayFrame(f))
        if 2 * cover.max() < n:
            return frames, GrayFrame(bg)


def write_scene(scene: SyntheticScene, out_dir: str | Path, image_format: str = "pnm") -> Path:
    """Write ``ir/`` and ``vis/`` frame directories plus ``truth.json``."""
    out_dir = Path(out_dir)
    ir_dir, vis_dir = out_dir / "ir", out_dir / "vis"
    ir_dir.mkdir(parents=True, exist_ok=True)
    vis_dir.mkdir(parents=True, exist_ok=True)
    gray_ext, rgb_ext = (".pgm", ".ppm") if image_format == "pnm" else (".png", ".png")
    for i, (ir, vis) in enumerate(zip(scene.ir, scene.vis)):
        save_frame(ir, ir_dir / f"ir_{i:06d}{gray_ext}")
        save_frame(vis, vis_dir / f"vis_{i:06d}{rgb_ext}")
    truth = {
        "meta": scene.meta,
        "frame_rate": scene.frame_rate,
        "truth": [[list(b) for b in boxes] for boxes in scene.truth],
    }
    (out_dir / "truth.json").write_text(json.dumps(truth, indent=2) + "\n")
    return out_dir
