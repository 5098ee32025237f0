"""Pure-Python day loop.

Fallback for environments without the compiled extension. Scalar math
deliberately goes through :mod:`math` (libm) and sequential accumulation
so the compiled kernel, which performs the identical operation sequence
in C, produces bit-identical runs from the same random substreams.
"""

from __future__ import annotations

import math

KERNEL_NAME = "python"


def run_days(state, day_start: int, day_end: int) -> None:
    """Simulate days [day_start, day_end) in place on the run state."""
    L = state.list_size
    F = float(state.n_genres)
    beta = state.beta
    n_cons = state.n_consumers
    current = state.current_rec
    scores = state.scores
    prefs_rows = state.prefs_rows
    flags_list = state.table.flags_list
    provider_of = state.provider_of
    displays = state.displays
    clicks = state.clicks
    recs = state.recommenders
    rec_gens = state.rec_gens
    cons_gens = state.cons_gens
    out_items = state.out_items
    out_click = state.out_click
    out_util = state.out_util
    out_rec = state.out_rec
    exp = math.exp

    for t0 in range(day_start, day_end):
        for j in range(n_cons):
            k = int(current[j])
            rec = recs[k]
            items = rec._recommend(j, L, rec_gens[k])

            prow = prefs_rows[j]
            us = []
            for idx in items:
                s = 0.0
                for g in flags_list[idx]:
                    s += prow[g]
                us.append(s / F)
            lu = 0.0
            for u in us:
                lu += u
            lu /= L

            m = us[0]
            for u in us:
                if u > m:
                    m = u
            total = 0.0
            es = []
            for u in us:
                e = exp(u - m)
                es.append(e)
                total += e
            r = cons_gens[j].random() * total
            ci = L - 1
            acc = 0.0
            for slot in range(L):
                acc += es[slot]
                if r < acc:
                    ci = slot
                    break
            clicked = items[ci]

            scores[j, k] = (float(scores[j, k]) * beta + lu) / (1.0 + beta)
            rec._observe_click_index(j, clicked)
            for idx in items:
                displays[provider_of[idx], k] += 1
            clicks[provider_of[clicked], k] += 1

            out_items[t0, j, :] = items
            out_click[t0, j] = clicked
            out_util[t0, j] = lu
        out_rec[t0, :] = current
