#!/usr/bin/env python3
"""Build the 512x512 real-image test corpus from scikit-image's bundled photos.

Writes PNG files plus a manifest (name, sha256, source) consumed by
`wsmn fetch-dataset`. Rerunning produces byte-identical files.
"""
import argparse
import hashlib
import os

import numpy as np
import skimage
import skimage.io
import skimage.transform

COLOR = ["astronaut.png", "coffee.png", "chelsea.png", "rocket.jpg",
         "motorcycle_left.png", "ihc.png", "retina.jpg", "hubble_deep_field.jpg"]
GRAY = ["camera.png", "moon.png", "coins.png", "brick.png", "grass.png",
        "gravel.png", "cell.png"]


def square_512(img):
    h, w = img.shape[:2]
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    img = img[top:top + s, left:left + s]
    if s != 512:
        img = skimage.transform.resize(img, (512, 512) + img.shape[2:], order=3,
                                       anti_aliasing=s > 512, preserve_range=True)
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", help="output directory")
    args = ap.parse_args()
    src = os.path.join(os.path.dirname(skimage.__file__), "data")
    os.makedirs(args.out, exist_ok=True)
    lines = ["# name sha256 source"]
    for name in COLOR + GRAY:
        img = skimage.io.imread(os.path.join(src, name))
        if img.ndim == 3:
            img = img[..., :3]
            if name in GRAY:
                img = img[..., 0]
        out = square_512(img)
        stem = os.path.splitext(name)[0]
        path = os.path.join(args.out, stem + ".png")
        skimage.io.imsave(path, out, check_contrast=False)
        digest = hashlib.sha256(open(path, "rb").read()).hexdigest()
        lines.append(f"{stem}.png {digest} {stem}.png")
    with open(os.path.join(args.out, "manifest.txt"), "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
