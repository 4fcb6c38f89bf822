"""Counter-based random streams keyed by ``(seed, tag, path)``.

A draw is a pure function of its key and counter, so a path's randomness does
not depend on how paths are batched or in which order they are generated.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import _kernels

_GAMMA2 = 0xD1B54A32D192ED03


def _tag_hash(tag: str) -> int:
    return int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class Stream:
    seed: int
    tag: str = "root"

    @property
    def key(self) -> int:
        return _kernels.mix64_int(_kernels.mix64_int(self.seed) ^ _tag_hash(self.tag))

    def child(self, tag: str) -> "Stream":
        return Stream(self.seed, f"{self.tag}/{tag}")

    def path_keys(self, paths) -> np.ndarray:
        ids = _as_ids(paths)
        offs = (ids.astype(np.uint64) + np.uint64(1)) * np.uint64(_GAMMA2)
        return _kernels._mix64_np(np.uint64(self.key) + offs)

    def uniforms(self, paths, count: int, offset: int = 0) -> np.ndarray:
        return _kernels.uniform_block(self.path_keys(paths), int(offset), int(count))

    def normals(self, paths, count: int, offset: int = 0) -> np.ndarray:
        return _kernels.normal_block(self.path_keys(paths), int(offset), int(count))


def _as_ids(paths) -> np.ndarray:
    if np.isscalar(paths):
        return np.arange(int(paths))
    return np.asarray(paths, dtype=np.int64)
