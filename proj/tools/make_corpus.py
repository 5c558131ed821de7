#!/usr/bin/env python3
"""Builds the natural-image luma corpus used by the desk-scale evaluation.

Images come from the sample data shipped with scikit-image, scikit-learn
and matplotlib.
Each is converted to BT.601 luma, scaled so its short side is at most 256,
center-cropped and written as binary PGM. Two manifests are written next to
the images: train.manifest and holdout.manifest (disjoint image sets).
"""

import argparse
import os
import sys

import numpy as np
from PIL import Image

TRAIN = [
    "astronaut.png", "brick.png", "cell.png", "clock_motion.png", "coins.png",
    "grass.png", "gravel.png", "hubble_deep_field.jpg", "ihc.png", "moon.png",
    "motorcycle_left.png", "motorcycle_right.png", "retina.jpg",
    "microaneurysms.png", "page.png", "text.png", "china.jpg", "flower.jpg",
    "camera.png", "grace_hopper.jpg",
]
HOLDOUT = ["chelsea.png", "coffee.png", "rocket.jpg"]

# 19 x 289 + 121 (microaneurysms is 96x96) = 5612 training contexts per QP,
# 3 x 361 = 1083 holdout contexts.
TRAIN_CROP = 144
HOLDOUT_CROP = 160
MAX_SHORT_SIDE = 256


def source_dirs():
    import matplotlib
    import skimage.data
    import sklearn.datasets

    return [
        os.path.dirname(skimage.data.__file__),
        os.path.join(os.path.dirname(sklearn.datasets.__file__), "images"),
        os.path.join(matplotlib.get_data_path(), "sample_data"),
    ]


def find(name, dirs):
    for d in dirs:
        path = os.path.join(d, name)
        if os.path.isfile(path):
            return path
    raise FileNotFoundError(name)


def luma(path):
    img = Image.open(path)
    if img.mode in ("RGBA", "P"):
        img = img.convert("RGB")
    short = min(img.size)
    if short > MAX_SHORT_SIDE:
        scale = MAX_SHORT_SIDE / short
        img = img.resize((round(img.width * scale), round(img.height * scale)), Image.LANCZOS)
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 3:
        a = 0.299 * a[..., 0] + 0.587 * a[..., 1] + 0.114 * a[..., 2]
    return np.clip(np.rint(a), 0, 255).astype(np.uint8)


def center_crop(a, size):
    size = min(size, (min(a.shape) // 8) * 8)
    y = (a.shape[0] - size) // 2
    x = (a.shape[1] - size) // 2
    return a[y:y + size, x:x + size]


def write_pgm(path, a):
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (a.shape[1], a.shape[0]))
        f.write(np.ascontiguousarray(a).tobytes())


def write_set(out_dir, names, crop, manifest, dirs, header):
    lines = [header]
    for name in names:
        a = center_crop(luma(find(name, dirs)), crop)
        stem = os.path.splitext(name)[0] + ".pgm"
        write_pgm(os.path.join(out_dir, stem), a)
        lines.append("%s pgm %d %d 0" % (stem, a.shape[1], a.shape[0]))
    with open(os.path.join(out_dir, manifest), "w") as f:
        f.write("\n".join(lines) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    dirs = source_dirs()
    qps = "@qp 22 27 32 37\n@seed 1"
    # a fan-in draw on the output layer swamps the small residuals of this
    # corpus before training can pull it back; start that layer at zero
    train_header = "# training images\n" + qps + "\n@set output_init zero"
    write_set(args.out_dir, TRAIN, TRAIN_CROP, "train.manifest", dirs, train_header)
    write_set(args.out_dir, HOLDOUT, HOLDOUT_CROP, "holdout.manifest", dirs, "# holdout images\n" + qps)
    return 0


if __name__ == "__main__":
    sys.exit(main())
