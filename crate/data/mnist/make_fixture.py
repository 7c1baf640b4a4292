"""Build the bundled MNIST IDX fixture from the `mnist` npm package (v1.1.0).

The npm package ships real MNIST digits as JSON arrays of 784 floats in [0, 1]
rounded to three decimals. This script re-quantizes them to bytes and writes a
standard IDX image/label pair containing 350 zeros, 350 ones and 40 of every
other digit, interleaved so that label filtering is exercised.

usage: python3 make_fixture.py <path-to-extracted-package>/src/digits
"""
import json
import struct
import sys
from pathlib import Path

PER_DIGIT = {0: 350, 1: 350}
OTHER = 40


def main(src: Path, out: Path) -> None:
    pools = {}
    for d in range(10):
        flat = json.loads((src / f"{d}.json").read_text())["data"]
        n = len(flat) // 784
        take = PER_DIGIT.get(d, OTHER)
        pools[d] = [flat[k * 784:(k + 1) * 784] for k in range(min(n, take))]

    order = []
    cursor = {d: 0 for d in range(10)}
    while any(cursor[d] < len(pools[d]) for d in range(10)):
        for d in range(10):
            if cursor[d] < len(pools[d]):
                order.append((d, pools[d][cursor[d]]))
                cursor[d] += 1

    images = bytearray(struct.pack(">IIII", 0x00000803, len(order), 28, 28))
    labels = bytearray(struct.pack(">II", 0x00000801, len(order)))
    for d, img in order:
        images.extend(min(255, max(0, round(v * 255))) for v in img)
        labels.append(d)
    (out / "subset-images-idx3-ubyte").write_bytes(images)
    (out / "subset-labels-idx1-ubyte").write_bytes(labels)
    print(f"wrote {len(order)} digits")


if __name__ == "__main__":
    main(Path(sys.argv[1]), Path(__file__).resolve().parent)
