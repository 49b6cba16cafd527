#!/usr/bin/env python3
"""Write a small demo data set for trying the command line: a synthetic
texture volume, a random observation mask, and the degraded tensor."""

import argparse
from pathlib import Path

import numpy as np

from nlfctn.synthetic import tiled_texture_volume
from nlfctn.tensor_io import make_mask, save_mask, save_tensor


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", type=Path, default=Path("demo_data"))
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--bands", type=int, default=8)
    p.add_argument("--mr", type=float, default=0.9, help="missing rate")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    truth = tiled_texture_volume(args.height, args.width, args.bands, seed=args.seed)
    mask = make_mask(truth.shape, args.mr, seed=args.seed)
    degraded = np.where(mask, truth, 0.0)

    save_tensor(args.out_dir / "truth.npy", truth)
    save_mask(args.out_dir / "mask.npy", mask)
    save_tensor(args.out_dir / "degraded.npy", degraded)
    observed = int(mask.sum())
    print(f"wrote {args.out_dir}/truth.npy, mask.npy, degraded.npy "
          f"({truth.shape[0]}x{truth.shape[1]}x{truth.shape[2]}, "
          f"{observed} of {mask.size} entries observed)")


if __name__ == "__main__":
    main()
