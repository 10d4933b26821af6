# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels; semantics mirror ``_pure`` exactly."""

from libc.stdint cimport uint64_t

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL
cdef unsigned char SEP = 0x1F


cdef inline uint64_t _feed(uint64_t h, const unsigned char[:] data) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(data.shape[0]):
        h = (h ^ data[i]) * FNV_PRIME
    return h


cdef uint64_t _pair_priority(uint64_t seed, const unsigned char[:] subject,
                             const unsigned char[:] relation) noexcept nogil:
    cdef uint64_t h = FNV_OFFSET
    cdef int i
    for i in range(8):
        h = (h ^ ((seed >> (8 * i)) & 0xFF)) * FNV_PRIME
    h = _feed(h, subject)
    h = (h ^ SEP) * FNV_PRIME
    h = _feed(h, relation)
    return h


def pair_priority(seed, bytes subject, bytes relation):
    """Stable 64-bit sampling priority for a (subject, relation) pair."""
    cdef uint64_t s = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    return _pair_priority(s, subject, relation)


def pair_priorities(seed, list pairs):
    """Batch form of :func:`pair_priority`."""
    cdef uint64_t s = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef list out = []
    cdef tuple pair
    for pair in pairs:
        out.append(_pair_priority(s, <bytes> pair[0], <bytes> pair[1]))
    return out


def prefix_cut(bytes correct, double target_precision, bint first_dip=False):
    """Largest prefix of a ranked 0/1 sequence whose precision meets target."""
    cdef const unsigned char[:] flags = correct
    cdef Py_ssize_t i, n = flags.shape[0]
    cdef Py_ssize_t best_len = 0, best_correct = 0, n_correct = 0
    for i in range(n):
        n_correct += flags[i]
        if (<double> n_correct) / (<double> (i + 1)) >= target_precision:
            best_len = i + 1
            best_correct = n_correct
        elif first_dip:
            break
    return best_len, best_correct
