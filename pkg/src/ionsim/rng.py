"""Deterministic, scheduling-independent random streams for shot sampling.

Every shot gets its own stream id, a 64-bit hash of
(master_seed, setting_index, shot_index).  All random variates a shot
consumes are pure functions of its stream id and a fixed column number, so
results are bit-identical no matter how shots are batched or distributed
across workers, and any worker can regenerate any slice.

The hash chain is splitmix64 (Steele/Lea/Burton), a full-period 64-bit
mixer; columns are separated by multiples of the odd golden-ratio constant,
which is a bijection mod 2^64.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4B7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64
_TO_UNIT = 1.0 / 9007199254740992.0  # 2^-53


def _finalize(x: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps silently for arrays; inputs are always >= 1-d
    x = (x ^ (x >> _U64(30))) * _MIX_1
    x = (x ^ (x >> _U64(27))) * _MIX_2
    return x ^ (x >> _U64(31))


def _as_u64(value) -> np.ndarray:
    return np.atleast_1d(np.asarray(value, dtype=np.uint64))


def stream_ids(master_seed: int, setting_index: int, shot_indices) -> np.ndarray:
    """Per-shot stream ids: hash(master_seed, setting_index, shot_index)."""
    seed = _finalize(_as_u64(master_seed % (1 << 64)) + _GOLDEN)
    setting = _finalize(seed + _as_u64(setting_index + 1) * _GOLDEN)
    shots = _as_u64(shot_indices)
    return _finalize(setting + (shots + _U64(1)) * _GOLDEN)


def uniforms(ids: np.ndarray, column: int) -> np.ndarray:
    """Column'th uniform [0, 1) variate of each stream."""
    raw = _finalize(_as_u64(ids) + _as_u64(column + 1) * _GOLDEN)
    return (raw >> _U64(11)).astype(np.float64) * _TO_UNIT


def normals(ids: np.ndarray, column: int) -> np.ndarray:
    """One standard normal per stream via Box-Muller on columns (column, column+1)."""
    u1 = uniforms(ids, column)
    u2 = uniforms(ids, column + 1)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


# Fixed column layout for experiment shots.  Keeping the allocation static
# (independent of which noise/readout models are active) is what makes the
# outputs invariant under scheduling.
COL_OUTCOME = 0
COL_FLIP_BASE = 1  # columns 1..4, one per ion
COL_PHOTON = 5
COL_ZETA = 6  # 6,7 for Box-Muller; 6,7,8 for ambient harmonics
COL_DEPOLARIZE = 10  # coin for the first entangling gate
COL_DEPOLARIZE_STATE = 11  # replacement basis state for the first gate
COL_DEPOLARIZE_2 = 12  # coin for the second entangling gate (decode)
COL_DEPOLARIZE_STATE_2 = 13

# Reserved pseudo-setting index space for per-run draws (Bell phase jitter).
RUN_SETTING_BASE = 1 << 40
