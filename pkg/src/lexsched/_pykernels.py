"""Pure-Python node-evaluation kernel for the branch-and-bound search.

This is the fallback twin of the compiled kernel in ``_ckernels.pyx``; both
must produce bit-identical results.  One call evaluates one search node:
LPT primal vector, interleaved per-machine lower/upper bounds, and the
fathom decision against the incumbent.

All arithmetic is exact.  Fractional bound components are kept as raw
(numerator, denominator) integer pairs; the upper bounds fed back into the
lower-bound requirement are rounded up to integers and the lower bounds fed
into the upper-bound requirement are rounded down, which keeps every
intermediate quantity an integer (and both roundings only loosen the bound,
never break its soundness).
"""

from __future__ import annotations

BACKEND = "pure"


def lpt_vector(loads, ps, ell):
    """Completion vector (sorted desc) of LPT run from `loads` over ps[ell:]."""
    work = sorted(loads)
    m = len(work)
    for j in range(ell, len(ps)):
        p = ps[j]
        # smallest load; vector outcome is independent of which tied machine wins
        best = 0
        bl = work[0]
        for q in range(1, m):
            if work[q] < bl:
                bl = work[q]
                best = q
        work[best] = bl + p
    work.sort(reverse=True)
    return tuple(work)


def evaluate_node(loads, ps, ell, inc, use_bounds=True, use_heuristic=True):
    """Evaluate one non-leaf node.

    loads: m partial machine loads (any order)
    ps:    all processing times, sorted nonincreasingly
    ell:   number of assigned jobs (ps[:ell] are fixed)
    inc:   incumbent completion vector or None; negative entries compare
           literally in the fathom test but never clamp an upper bound
    Returns (lpt_vec, prune, lnum, lden, uceil).
    """
    m = len(loads)
    n = len(ps)

    vec = lpt_vector(loads, ps, ell) if use_heuristic else None

    if vec is not None and (inc is None or _lex_less(vec, inc)):
        eff = vec
    else:
        eff = inc

    if not use_bounds:
        return vec, False, None, None, None

    t = sorted(loads, reverse=True)
    pref_t = [0] * (m + 1)
    for q in range(m):
        pref_t[q + 1] = pref_t[q] + t[q]
    total_t = pref_t[m]

    nrem = n - ell
    rp = [0] * (nrem + 1)
    for j in range(nrem):
        rp[j + 1] = rp[j] + ps[ell + j]
    total_rem = rp[nrem]
    p_rem_max = ps[ell] if ell < n else 0
    tmin = t[m - 1]

    lnum = [0] * m
    lden = [1] * m
    uceil = [0] * m
    req_l = 0  # sum of max(ceil(U_q) - t_q, 0) over q < i
    req_u = 0  # sum of max(floor(L_q) - t_q, 0) over q < i
    hj = 0

    for k in range(m):
        mm = m - k
        # lower bound component: reject jobs into the [t_q, U_q] prefix gaps,
        # then water-fill the rest over the suffix machines
        if req_l <= 0:
            h = ell
        else:
            while hj < nrem and rp[hj] < req_l:
                hj += 1
            h = ell + hj if rp[hj] >= req_l else n
        lam_l = total_rem - rp[h - ell]
        p_next = ps[h] if h < n else 0
        c_int = tmin + p_next
        if t[k] > c_int:
            c_int = t[k]
        fnum = (total_t - pref_t[k]) + lam_l
        if fnum > c_int * mm:
            ln, ld = fnum, mm
            if ln % ld == 0:
                ln, ld = ln // ld, 1
        else:
            ln, ld = c_int, 1
        lnum[k] = ln
        lden[k] = ld
        lfloor = ln // ld

        # upper bound component: fill the prefix machines down to L_q, then
        # even-fill the suffix; the desc suffix reversed is already ascending
        lam_u = total_rem - req_u
        if lam_u < 0:
            lam_u = 0
        s = 0
        cnt = 0
        level_num = 0
        for j in range(mm):
            s += t[m - 1 - j]
            cnt = j + 1
            level_num = s + lam_u
            if j == mm - 1 or level_num <= t[m - 2 - j] * cnt:
                break
        wceil = -((-level_num) // cnt)
        uc = wceil + p_rem_max
        if t[k] > uc:
            uc = t[k]
        if eff is not None and eff[k] >= 0 and eff[k] < uc:
            uc = eff[k]
        uceil[k] = uc

        d = uc - t[k]
        if d > 0:
            req_l += d
        d = lfloor - t[k]
        if d > 0:
            req_u += d

    prune = False
    if eff is not None:
        prune = True
        for k in range(m):
            lhs = eff[k] * lden[k]
            if lhs != lnum[k]:
                prune = lhs < lnum[k]
                break

    return vec, prune, tuple(lnum), tuple(lden), tuple(uceil)


def _lex_less(a, b):
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return False
