"""Binary per-trajectory snapshot dumps for debugging.

Layout (little endian):

    8 bytes   magic b"SLSNAP01"
    uint32    header length H
    H bytes   UTF-8 JSON header: grid, nu, dt, T, alphas, levels, sample,
              seed and a sha256 "params_hash" over those fields, u0 and the
              noise amplitudes
    blocks    int64 step index, then complex128 coefficients of the
              transported velocities, shape (levels, 2, N, N), C order

Level 0 is the Navier-Stokes reference, level i the i-th alpha.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

MAGIC = b"SLSNAP01"


def params_hash(params) -> str:
    h = hashlib.sha256()
    g = params.grid
    meta = dict(L=g.L, N=g.N, dealias_fraction=g.dealias_fraction, galerkin_cutoff=g.galerkin_cutoff,
                nu=params.nu, dt=params.dt, T=params.T, alphas=list(params.alphas))
    h.update(json.dumps(meta, sort_keys=True).encode())
    for arr in (params.u0, params.noise.a, params.noise.b, params.noise.modes):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


class SnapshotWriter:
    def __init__(self, path, params, seed: int = 0, sample: int = 0, stride: int = 1):
        g = params.grid
        self.stride = stride
        self.shape = (len(params.alphas) + 1,) + g.shape
        header = dict(
            grid=dict(L=g.L, N=g.N, dealias_fraction=g.dealias_fraction, galerkin_cutoff=g.galerkin_cutoff),
            nu=params.nu, dt=params.dt, T=params.T, alphas=list(params.alphas),
            levels=self.shape[0], sample=sample, seed=seed, stride=stride,
            params_hash=params_hash(params),
        )
        blob = json.dumps(header, sort_keys=True).encode()
        self._fh = open(path, "wb")
        self._fh.write(MAGIC + struct.pack("<I", len(blob)) + blob)

    def write(self, step: int, U: np.ndarray) -> None:
        if step % self.stride:
            return
        self._fh.write(struct.pack("<q", step))
        self._fh.write(np.ascontiguousarray(U, dtype="<c16").tobytes())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_snapshots(path):
    """Return (header, steps, coefficients) with coefficients of shape (blocks, levels, 2, N, N)."""
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError("not a snapshot file")
        (n,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(n).decode())
        N = header["grid"]["N"]
        shape = (header["levels"], 2, N, N)
        size = int(np.prod(shape)) * 16
        steps, blocks = [], []
        while True:
            raw = fh.read(8)
            if not raw:
                break
            steps.append(struct.unpack("<q", raw)[0])
            blocks.append(np.frombuffer(fh.read(size), dtype="<c16").reshape(shape))
    return header, np.array(steps), np.array(blocks)
