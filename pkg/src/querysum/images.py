"""Procedural shot thumbnails.

Videos here are synthetic, so frames are rendered from the video's thumbnail
seed instead of decoded: a colored background per shot plus one glyph block
per tag.  Rendering is deterministic given (thumbnail_seed, shot index,
tags), which makes the frame/GIF endpoints byte-stable.
"""

import io

import numpy as np
from PIL import Image, ImageDraw

FRAME_SIZE = (160, 120)
GIF_FRAMES = 8
GIF_DURATION_MS = 120


def _shot_rng(thumbnail_seed, shot):
    return np.random.default_rng([int(thumbnail_seed), int(shot)])


def _tag_color(tag):
    rng = np.random.default_rng(list(tag.encode("utf-8")))
    return tuple(int(c) for c in rng.integers(60, 240, size=3))


def render_frame(thumbnail_seed, shot, tags, phase=0):
    """One frame of the shot; ``phase`` shifts the glyphs for GIF animation."""
    rng = _shot_rng(thumbnail_seed, shot)
    bg = tuple(int(c) for c in rng.integers(20, 120, size=3))
    img = Image.new("RGB", FRAME_SIZE, bg)
    draw = ImageDraw.Draw(img)
    w, h = FRAME_SIZE
    n = max(len(tags), 1)
    for i, tag in enumerate(sorted(tags)):
        jitter = int(rng.integers(0, 12))
        x0 = int((i + 0.15) * w / n) + (phase * 7 + jitter) % 15
        y0 = 20 + (i * 13 + phase * 5) % (h - 60)
        draw.rectangle([x0, y0, x0 + w // (n + 1), y0 + 30], fill=_tag_color(tag))
        draw.text((x0 + 2, y0 + 2), tag, fill=(255, 255, 255))
    draw.text((4, h - 16), f"shot {shot}", fill=(255, 255, 255))
    return img


def frame_png(thumbnail_seed, shot, tags):
    buf = io.BytesIO()
    render_frame(thumbnail_seed, shot, tags).save(buf, format="PNG")
    return buf.getvalue()


def shot_gif(thumbnail_seed, shot, tags):
    frames = [
        render_frame(thumbnail_seed, shot, tags, phase=p) for p in range(GIF_FRAMES)
    ]
    buf = io.BytesIO()
    frames[0].save(
        buf,
        format="GIF",
        save_all=True,
        append_images=frames[1:],
        duration=GIF_DURATION_MS,
        loop=0,
    )
    return buf.getvalue()
