# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled day loop.

Performs exactly the same draw sequence and double-precision operation
order as the pure-Python kernel, against the same state arrays and the
same underlying bit generators, so runs are bit-identical across the two
implementations.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp
from libc.stdlib cimport free, malloc

cimport numpy as cnp
from numpy.random cimport bitgen_t

import numpy as np

KERNEL_NAME = "cython"

cdef int GENRE_RESAMPLE_CAP = 1024


cdef inline double _next(bitgen_t *bg) noexcept nogil:
    return bg.next_double(bg.state)


cdef inline bint _contains(cnp.int32_t *arr, int n, cnp.int32_t v) noexcept nogil:
    cdef int i
    for i in range(n):
        if arr[i] == v:
            return True
    return False


def run_days(state, int day_start, int day_end):
    """Simulate days [day_start, day_end) in place on the run state."""
    cdef int L = state.list_size
    cdef int F = state.n_genres
    cdef int n_cons = state.n_consumers
    cdef int n_recs = state.n_recs
    cdef double beta = state.beta
    cdef double alpha = state.alpha
    cdef double explore_prob = state.explore_prob
    cdef double F_d = <double> F
    cdef double L_d = <double> L

    cdef cnp.int32_t[::1] current = state.current_rec
    cdef double[:, ::1] prefs = state.prefs
    cdef double[:, ::1] scores = state.scores
    cdef cnp.int64_t[:, :, ::1] counts = state.counts
    cdef cnp.int64_t[:, :, ::1] cumulative = state.cumulative
    cdef cnp.uint64_t[:, ::1] clicked_mask = state.clicked_mask
    cdef cnp.int64_t[:, ::1] displays = state.displays
    cdef cnp.int64_t[:, ::1] clicks = state.clicks
    cdef cnp.uint64_t[::1] masks = state.table.masks
    cdef cnp.int32_t[::1] flag_ptr = state.table.flag_ptr
    cdef cnp.int32_t[::1] flag_idx = state.table.flag_idx
    cdef cnp.int32_t[::1] provider_of = state.table.providers
    cdef cnp.int32_t[::1] view_ptr = state.view_ptr
    cdef cnp.int32_t[::1] view_items = state.view_items
    cdef cnp.int32_t[::1] pop_ptr = state.pop_ptr
    cdef cnp.int32_t[::1] pop_items = state.pop_items
    cdef cnp.int32_t[:, ::1] out_rec = state.out_rec
    cdef cnp.int32_t[:, :, ::1] out_items = state.out_items
    cdef cnp.int32_t[:, ::1] out_click = state.out_click
    cdef double[:, ::1] out_util = state.out_util

    # per-stream raw bit generators, shared with the Python-side Generators
    cdef bitgen_t **rec_bg = <bitgen_t **> malloc(n_recs * sizeof(bitgen_t *))
    cdef bitgen_t **cons_bg = <bitgen_t **> malloc(n_cons * sizeof(bitgen_t *))
    cdef cnp.int32_t *chosen = <cnp.int32_t *> malloc(L * sizeof(cnp.int32_t))
    cdef cnp.int32_t *scratch = <cnp.int32_t *> malloc(len(state.table) * sizeof(cnp.int32_t))
    cdef double *us = <double *> malloc(L * sizeof(double))
    cdef double *es = <double *> malloc(L * sizeof(double))
    if rec_bg == NULL or cons_bg == NULL or chosen == NULL or scratch == NULL or us == NULL or es == NULL:
        free(rec_bg); free(cons_bg); free(chosen); free(scratch); free(us); free(es)
        raise MemoryError("kernel scratch allocation failed")
    cdef int i
    for i in range(n_recs):
        rec_bg[i] = <bitgen_t *> PyCapsule_GetPointer(state.rec_bitgens[i].capsule, "BitGenerator")
    for i in range(n_cons):
        cons_bg[i] = <bitgen_t *> PyCapsule_GetPointer(state.cons_bitgens[i].capsule, "BitGenerator")

    cdef int t0, j, k, slot, vi, n_rem, kk, attempt, gg, g, pi, fi, ci, base, end
    cdef cnp.int32_t idx, picked, clicked_idx
    cdef cnp.uint64_t cm
    cdef cnp.int64_t running
    cdef double u1, u2, u3, r, cdf, total, s, lu, m, acc, e, S
    cdef bitgen_t *bgr
    cdef bitgen_t *bgc

    try:
        with nogil:
            for t0 in range(day_start, day_end):
                for j in range(n_cons):
                    k = current[j]
                    bgr = rec_bg[k]
                    bgc = cons_bg[j]
                    cm = clicked_mask[k, j]
                    total = <double> cumulative[k, j, F - 1] + alpha * F_d

                    for slot in range(L):
                        u1 = _next(bgr)
                        if u1 < explore_prob:
                            u2 = _next(bgr)
                            n_rem = 0
                            for vi in range(view_ptr[k], view_ptr[k + 1]):
                                idx = view_items[vi]
                                if cm != 0 and (masks[idx] & cm) == 0:
                                    continue
                                if _contains(chosen, slot, idx):
                                    continue
                                scratch[n_rem] = idx
                                n_rem += 1
                            if n_rem == 0:
                                # every familiar-genre candidate already listed
                                for vi in range(view_ptr[k], view_ptr[k + 1]):
                                    idx = view_items[vi]
                                    if _contains(chosen, slot, idx):
                                        continue
                                    scratch[n_rem] = idx
                                    n_rem += 1
                            kk = <int> (u2 * n_rem)
                            if kk >= n_rem:
                                kk = n_rem - 1
                            picked = scratch[kk]
                        else:
                            picked = -1
                            for attempt in range(GENRE_RESAMPLE_CAP):
                                u3 = _next(bgr)
                                r = u3 * total
                                g = F - 1
                                for gg in range(F):
                                    cdf = <double> cumulative[k, j, gg] + alpha * (gg + 1)
                                    if r < cdf:
                                        g = gg
                                        break
                                base = pop_ptr[k * F + g]
                                end = pop_ptr[k * F + g + 1]
                                for pi in range(base, end):
                                    idx = pop_items[pi]
                                    if not _contains(chosen, slot, idx):
                                        picked = idx
                                        break
                                if picked >= 0:
                                    break
                            if picked < 0:
                                u2 = _next(bgr)
                                n_rem = 0
                                for vi in range(view_ptr[k], view_ptr[k + 1]):
                                    idx = view_items[vi]
                                    if _contains(chosen, slot, idx):
                                        continue
                                    scratch[n_rem] = idx
                                    n_rem += 1
                                kk = <int> (u2 * n_rem)
                                if kk >= n_rem:
                                    kk = n_rem - 1
                                picked = scratch[kk]
                        chosen[slot] = picked

                    lu = 0.0
                    for slot in range(L):
                        idx = chosen[slot]
                        s = 0.0
                        for fi in range(flag_ptr[idx], flag_ptr[idx + 1]):
                            s += prefs[j, flag_idx[fi]]
                        us[slot] = s / F_d
                    for slot in range(L):
                        lu += us[slot]
                    lu /= L_d

                    m = us[0]
                    for slot in range(L):
                        if us[slot] > m:
                            m = us[slot]
                    S = 0.0
                    for slot in range(L):
                        e = exp(us[slot] - m)
                        es[slot] = e
                        S += e
                    r = _next(bgc) * S
                    ci = L - 1
                    acc = 0.0
                    for slot in range(L):
                        acc += es[slot]
                        if r < acc:
                            ci = slot
                            break
                    clicked_idx = chosen[ci]

                    scores[j, k] = (scores[j, k] * beta + lu) / (1.0 + beta)

                    for fi in range(flag_ptr[clicked_idx], flag_ptr[clicked_idx + 1]):
                        counts[k, j, flag_idx[fi]] += 1
                    running = 0
                    for gg in range(F):
                        running += counts[k, j, gg]
                        cumulative[k, j, gg] = running
                    clicked_mask[k, j] = clicked_mask[k, j] | masks[clicked_idx]

                    for slot in range(L):
                        displays[provider_of[chosen[slot]], k] += 1
                    clicks[provider_of[clicked_idx], k] += 1

                    for slot in range(L):
                        out_items[t0, j, slot] = chosen[slot]
                    out_click[t0, j] = clicked_idx
                    out_util[t0, j] = lu
                for j in range(n_cons):
                    out_rec[t0, j] = current[j]
    finally:
        free(rec_bg)
        free(cons_bg)
        free(chosen)
        free(scratch)
        free(us)
        free(es)
