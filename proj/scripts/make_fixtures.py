"""Writes the 64x64 natural-image crops used by the test suites.

The crops come from scikit-image's bundled sample photographs, so the
fixtures can be regenerated bit-exactly:  python3 scripts/make_fixtures.py
"""
import pathlib

import numpy as np
import skimage.data
from PIL import Image

CROPS = [
    ("astronaut", 100, 200),
    ("chelsea", 120, 180),
    ("coffee", 150, 250),
    ("rocket", 200, 300),
]


def main() -> None:
    out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"
    out.mkdir(parents=True, exist_ok=True)
    for i, (name, y, x) in enumerate(CROPS):
        pixels = getattr(skimage.data, name)()[y : y + 64, x : x + 64, :3]
        Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8), "RGB").save(out / f"crop{i}_{name}.png")


if __name__ == "__main__":
    main()
