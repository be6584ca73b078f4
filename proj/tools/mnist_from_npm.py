#!/usr/bin/env python3
"""Convert the digit JSON files of the npm `mnist` package into IDX files.

Usage: mnist_from_npm.py <package>/src/digits <out_dir>

Each input file N.json holds {"data": [...]} with 784 values per image
scaled to [0, 1]. The images of all digits are shuffled with a fixed seed
and written as train-images-idx3-ubyte / train-labels-idx1-ubyte.
"""
import json
import struct
import sys
from pathlib import Path

import numpy as np


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    images, labels = [], []
    for digit in range(10):
        flat = np.asarray(json.loads((src / f"{digit}.json").read_text())["data"], dtype=np.float64)
        if flat.size % 784:
            sys.exit(f"{digit}.json: {flat.size} values is not a multiple of 784")
        block = np.clip(np.rint(flat.reshape(-1, 784) * 255.0), 0, 255).astype(np.uint8)
        images.append(block)
        labels.append(np.full(len(block), digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(0).permutation(len(labels))
    images, labels = images[order], labels[order]

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "train-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        f.write(images.tobytes())
    with open(out / "train-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.tobytes())
    print(f"wrote {len(labels)} images to {out}")


if __name__ == "__main__":
    main()
