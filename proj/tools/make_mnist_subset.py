#!/usr/bin/env python3
"""Write a 5000-image MNIST subset as IDX files.

The subset ships inside the mlxtend wheel (mlxtend/data/data/mnist_5k.csv.gz).
The rows are grouped by label; each digit contributes its first 450 rows to
the train split and its last 50 to the test split, interleaved by label.

    python3 tools/make_mnist_subset.py --wheel mlxtend-*.whl --out data/mnist

Without --wheel the wheel is fetched with `pip download mlxtend --no-deps`.
"""
import argparse
import glob
import gzip
import os
import struct
import subprocess
import tempfile
import zipfile

CSV_MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"
PER_CLASS_TRAIN = 450


def write_idx_images(path, rows):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        for r in rows:
            f.write(bytes(r))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel")
    ap.add_argument("--out", default="data/mnist")
    args = ap.parse_args()

    wheel = args.wheel
    if wheel is None:
        tmp = tempfile.mkdtemp()
        subprocess.check_call(["pip", "download", "mlxtend", "--no-deps", "-d", tmp])
        wheel = glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]

    text = gzip.decompress(zipfile.ZipFile(wheel).read(CSV_MEMBER)).decode()
    pixels, labels = [], []
    for line in text.splitlines():
        vals = [int(float(v)) for v in line.split(",")]
        pixels.append(vals[:784])
        labels.append(vals[784])

    by_label = {}
    for px, lb in zip(pixels, labels):
        by_label.setdefault(lb, []).append(px)
    train, test = [], []
    for lb in sorted(by_label):
        rows = by_label[lb]
        train.append([(lb, r) for r in rows[:PER_CLASS_TRAIN]])
        test.append([(lb, r) for r in rows[PER_CLASS_TRAIN:]])

    def interleave(groups):
        out = []
        for i in range(max(len(g) for g in groups)):
            out.extend(g[i] for g in groups if i < len(g))
        return out

    train, test = interleave(train), interleave(test)
    os.makedirs(args.out, exist_ok=True)
    write_idx_images(os.path.join(args.out, "train-images-idx3-ubyte"), [r for _, r in train])
    write_idx_labels(os.path.join(args.out, "train-labels-idx1-ubyte"), [l for l, _ in train])
    write_idx_images(os.path.join(args.out, "t10k-images-idx3-ubyte"), [r for _, r in test])
    write_idx_labels(os.path.join(args.out, "t10k-labels-idx1-ubyte"), [l for l, _ in test])
    print(f"wrote {len(train)} train / {len(test)} test images to {args.out}")


if __name__ == "__main__":
    main()
