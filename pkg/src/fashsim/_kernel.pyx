# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled decision kernel.

Must stay arithmetically identical to _pykernel.decide_round: same
elementwise double operations in the same order (the build also disables
FMA contraction). Releases the GIL so ensemble threads overlap.
"""

from libc.stdint cimport int64_t, uint8_t


def decide_round(
    double[:, ::1] liking,
    double[::1] tolerance,
    double[::1] advertisement,
    double[::1] pen,
    int64_t[:, ::1] nbr_counts,
    int64_t[::1] degrees,
    uint8_t[:, ::1] consumed,
    double gamma,
    bint blend_liking,
    Py_ssize_t n_items,
    double min_utility,
    bint has_min,
    int64_t[::1] out,
):
    """Fill out[i] with agent i's chosen item id, or -1 for abstention."""
    cdef Py_ssize_t n = tolerance.shape[0]
    cdef Py_ssize_t i, a, best_a
    cdef double omg = 1.0 - gamma
    cdef double s, score, best, tol_i
    cdef int64_t deg

    with nogil:
        for i in range(n):
            deg = degrees[i]
            tol_i = tolerance[i]
            best_a = -1
            best = 0.0
            for a in range(n_items):
                if consumed[i, a]:
                    continue
                if deg > 0:
                    s = (<double> nbr_counts[i, a]) / (<double> deg)
                else:
                    s = 0.0
                score = gamma * s
                if blend_liking:
                    score = score + omg * liking[i, a]
                score = score + tol_i * advertisement[a]
                score = score - pen[a]
                if best_a < 0 or score > best:
                    best = score
                    best_a = a
            if has_min and best_a >= 0 and best < min_utility:
                best_a = -1
            out[i] = best_a
