"""Pure-Python kernel fallbacks.

Reference semantics for the compiled extension: both implementations must
produce bit-identical results (IEEE-754 double division, 64-bit FNV-1a
mixing), so sampling and threshold cuts never depend on which one loaded.
"""

from __future__ import annotations

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF
_SEP = 0x1F


def pair_priority(seed: int, subject: bytes, relation: bytes) -> int:
    """Stable 64-bit sampling priority for a (subject, relation) pair.

    FNV-1a over the little-endian seed, the subject bytes, a separator,
    and the relation bytes. Samplers keep the smallest keys, which makes
    the sample independent of encounter order and worker count.
    """
    h = _FNV_OFFSET
    s = seed & _MASK
    for i in range(8):
        h = ((h ^ ((s >> (8 * i)) & 0xFF)) * _FNV_PRIME) & _MASK
    for b in subject:
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    h = ((h ^ _SEP) * _FNV_PRIME) & _MASK
    for b in relation:
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def pair_priorities(seed: int, pairs: list[tuple[bytes, bytes]]) -> list[int]:
    """Batch form of :func:`pair_priority`."""
    return [pair_priority(seed, subject, relation) for subject, relation in pairs]


def prefix_cut(correct: bytes, target_precision: float, first_dip: bool = False) -> tuple[int, int]:
    """Largest prefix of a ranked 0/1 sequence whose precision meets target.

    ``correct`` holds one byte per ranked prediction (1 = correct), already
    sorted by descending probability. Returns (prefix_length, n_correct);
    (0, 0) when no prefix qualifies. With ``first_dip`` the scan stops at the
    first prefix whose precision falls below target instead of continuing.
    """
    best_len = 0
    best_correct = 0
    n_correct = 0
    for i, flag in enumerate(correct, 1):
        n_correct += flag
        if n_correct / i >= target_precision:
            best_len = i
            best_correct = n_correct
        elif first_dip:
            break
    return best_len, best_correct
