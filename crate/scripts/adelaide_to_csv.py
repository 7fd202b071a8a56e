#!/usr/bin/env python3
"""Convert AdelaideRMF homography .mat files into progx scene CSV files.

Each .mat holds `data` (6 x N homogeneous correspondences x1,y1,1,x2,y2,1)
and `label` (N, 0 marks an outlier). The output keeps labels, with outliers
as 0 and instances numbered from 1.
"""
import argparse
import pathlib
import sys

import numpy as np
from scipy.io import loadmat


def convert(mat_path: pathlib.Path) -> str:
    mat = loadmat(mat_path)
    data = np.asarray(mat["data"], dtype=float)
    labels = np.asarray(mat["label"]).ravel().astype(int)
    if data.shape[0] != 6 and data.shape[1] == 6:
        data = data.T
    if data.shape[0] != 6 or data.shape[1] != labels.size:
        raise ValueError(f"{mat_path}: unexpected shapes data={data.shape} label={labels.shape}")
    x1 = data[0] / data[2]
    y1 = data[1] / data[2]
    x2 = data[3] / data[5]
    y2 = data[4] / data[5]
    rows = ["homography,4,labeled"]
    for a, b, c, d, lab in zip(x1, y1, x2, y2, labels):
        rows.append(",".join(repr(float(v)) for v in (a, b, c, d)) + f",{lab}")
    return "\n".join(rows) + "\n"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("inputs", nargs="+", type=pathlib.Path, help=".mat files or directories")
    ap.add_argument("--out", type=pathlib.Path, required=True, help="output directory")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    files = []
    for p in args.inputs:
        files.extend(sorted(p.glob("*.mat")) if p.is_dir() else [p])
    for f in files:
        target = args.out / (f.stem + ".csv")
        target.write_text(convert(f))
        print(target)
    return 0


if __name__ == "__main__":
    sys.exit(main())
