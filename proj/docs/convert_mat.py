#!/usr/bin/env python3
# Copyright (c) 2026, hsiaccel authors.
#
#    Licensed under the Apache License, Version 2.0 (the "License");
#    you may not use this file except in compliance with the License.
#    You may obtain a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS,
#    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#    See the License for the specific language governing permissions and
#    limitations under the License.
"""Convert a scene stored as MATLAB rows x cols x bands arrays to HSIC/HSIL.

    convert_mat.py Indian_pines_corrected.mat Indian_pines_gt.mat out/indian_pines

writes out/indian_pines.hsic and out/indian_pines.hsil. The variable name is
picked automatically when the file holds a single array, otherwise pass
--cube-var / --labels-var.
"""

import argparse
import pathlib
import struct

import numpy as np
import scipy.io

VERSION = 1
DTYPE_F32 = 1


def pick(mat_path, name, ndim):
    mat = {k: v for k, v in scipy.io.loadmat(mat_path).items() if not k.startswith("__")}
    if name:
        return mat[name]
    arrays = [v for v in mat.values() if isinstance(v, np.ndarray) and v.ndim == ndim]
    if len(arrays) != 1:
        raise SystemExit(f"{mat_path}: expected one {ndim}-d array, found {sorted(mat)}; name it explicitly")
    return arrays[0]


def write_cube(cube, path):
    rows, cols, bands = cube.shape
    data = np.ascontiguousarray(np.transpose(cube, (2, 0, 1)), dtype="<f4")
    if not np.isfinite(data).all():
        raise SystemExit("cube holds non-finite values")
    with open(path, "wb") as f:
        f.write(b"HSIC" + struct.pack("<IIIIB", VERSION, cols, rows, bands, DTYPE_F32))
        f.write(data.tobytes())


def write_labels(labels, path):
    rows, cols = labels.shape
    if labels.min() < 0 or labels.max() > 0xFFFF:
        raise SystemExit("labels must fit in u16")
    with open(path, "wb") as f:
        f.write(b"HSIL" + struct.pack("<III", VERSION, cols, rows))
        f.write(np.ascontiguousarray(labels, dtype="<u2").tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("cube_mat")
    ap.add_argument("labels_mat")
    ap.add_argument("out_stem")
    ap.add_argument("--cube-var")
    ap.add_argument("--labels-var")
    a = ap.parse_args()

    cube = pick(a.cube_mat, a.cube_var, 3).astype(np.float64)
    labels = pick(a.labels_mat, a.labels_var, 2).astype(np.int64)
    if cube.shape[:2] != labels.shape:
        raise SystemExit(f"cube {cube.shape[:2]} and labels {labels.shape} disagree")
    stem = pathlib.Path(a.out_stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    write_cube(cube, stem.with_suffix(".hsic"))
    write_labels(labels, stem.with_suffix(".hsil"))
    print(f"{stem}: {cube.shape[1]}x{cube.shape[0]} pixels, {cube.shape[2]} bands, {labels.max()} classes")


if __name__ == "__main__":
    main()
