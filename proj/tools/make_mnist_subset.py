#!/usr/bin/env python3
"""Write a class-balanced MNIST subset as IDX files.

The source is the 5000-sample MNIST CSV bundled with the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, 500 images per digit). Each row holds
784 pixel bytes followed by the label.

    pip download mlxtend --no-deps -d /tmp/mlx
    python3 -m zipfile -e /tmp/mlx/mlxtend-*.whl /tmp/mlx
    python3 tools/make_mnist_subset.py /tmp/mlx/mlxtend/data/data/mnist_5k.csv.gz data/ --per-class 200
"""
import argparse
import gzip
import struct
from pathlib import Path

import numpy as np


def write_idx_images(path, images):
    n, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv_gz")
    ap.add_argument("out_dir")
    ap.add_argument("--per-class", type=int, default=200)
    ap.add_argument("--prefix", default="mnist2k")
    args = ap.parse_args()

    raw = np.genfromtxt(gzip.open(args.csv_gz), delimiter=",")
    pixels, labels = raw[:, :-1].astype(np.uint8), raw[:, -1].astype(np.int64)
    keep = np.concatenate(
        [np.flatnonzero(labels == c)[: args.per_class] for c in range(10)])
    keep.sort()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_idx_images(out / f"{args.prefix}-images-idx3-ubyte",
                     pixels[keep].reshape(-1, 28, 28))
    write_idx_labels(out / f"{args.prefix}-labels-idx1-ubyte", labels[keep])
    print(f"wrote {len(keep)} samples to {out}")


if __name__ == "__main__":
    main()
