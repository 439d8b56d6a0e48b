"""Write train/test directories of the synthetic square-vs-ring glyph images."""

import argparse
from pathlib import Path

from freesupport.imaging import write_glyph_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path, help="parent directory; train/ and test/ are created inside")
    ap.add_argument("--per-class", type=int, default=50)
    ap.add_argument("--size", type=int, default=28)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    write_glyph_dataset(args.out / "train", args.per_class, seed=2 * args.seed + 1, size=args.size)
    write_glyph_dataset(args.out / "test", args.per_class, seed=2 * args.seed + 2, size=args.size)
    print(f"wrote {args.out / 'train'} and {args.out / 'test'}")


if __name__ == "__main__":
    main()
