# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled node-evaluation kernel; bit-identical twin of ``_pykernels``.

Works in C int64 throughout.  Callers must respect MAX_MACHINES and the
magnitude guard in ``lexsched.kernels`` (products stay far below 2**63 for
any instance admitted there).
"""

BACKEND = "cython"
MAX_MACHINES = 64

cdef inline long long _floordiv(long long a, long long b):
    # Python floor semantics for possibly negative numerators
    cdef long long q = a / b
    if a % b != 0 and ((a < 0) != (b < 0)):
        q -= 1
    return q


def lpt_vector(loads, ps, ell):
    """Completion vector (sorted desc) of LPT run from `loads` over ps[ell:]."""
    cdef long long work[64]
    cdef Py_ssize_t m = len(loads)
    cdef Py_ssize_t n = len(ps)
    cdef Py_ssize_t q, j, best
    cdef long long bl, p
    for q in range(m):
        work[q] = loads[q]
    for j in range(ell, n):
        p = ps[j]
        best = 0
        bl = work[0]
        for q in range(1, m):
            if work[q] < bl:
                bl = work[q]
                best = q
        work[best] = bl + p
    return _sorted_desc_tuple(work, m)


cdef _sorted_desc_tuple(long long * arr, Py_ssize_t m):
    cdef Py_ssize_t i, j
    cdef long long key
    for i in range(1, m):  # insertion sort; m is small
        key = arr[i]
        j = i - 1
        while j >= 0 and arr[j] < key:
            arr[j + 1] = arr[j]
            j -= 1
        arr[j + 1] = key
    return tuple([arr[i] for i in range(m)])


def evaluate_node(loads, ps, ell_arg, inc, use_bounds=True, use_heuristic=True):
    """Same contract as ``_pykernels.evaluate_node``."""
    cdef Py_ssize_t m = len(loads)
    cdef Py_ssize_t n = len(ps)
    cdef Py_ssize_t ell = ell_arg
    cdef Py_ssize_t nrem = n - ell

    if m > MAX_MACHINES:
        raise ValueError("compiled kernel supports at most %d machines" % MAX_MACHINES)

    cdef long long work[64]
    cdef long long t[64]
    cdef long long pref_t[65]
    cdef long long eff[64]
    cdef long long lnum[64]
    cdef long long lden[64]
    cdef long long ucl[64]
    cdef bint have_eff = 0

    cdef Py_ssize_t q, j, k, best, hj, h, cnt, mm
    cdef long long bl, p, total_t, total_rem, p_rem_max, tmin
    cdef long long req_l, req_u, lam_l, lam_u, p_next, c_int, fnum
    cdef long long ln, ld, lfloor, s, level_num, wceil, uc, d, lhs

    # LPT primal vector
    vec = None
    if use_heuristic:
        for q in range(m):
            work[q] = loads[q]
        for j in range(ell, n):
            p = ps[j]
            best = 0
            bl = work[0]
            for q in range(1, m):
                if work[q] < bl:
                    bl = work[q]
                    best = q
            work[best] = bl + p
        vec = _sorted_desc_tuple(work, m)

    # effective incumbent: lex-min of heuristic vector and caller incumbent
    if vec is not None and inc is None:
        for q in range(m):
            eff[q] = vec[q]
        have_eff = 1
    elif vec is not None:
        have_eff = 1
        use_vec = False
        for q in range(m):
            eff[q] = inc[q]
        for q in range(m):
            if vec[q] != eff[q]:
                use_vec = vec[q] < eff[q]
                break
        if use_vec:
            for q in range(m):
                eff[q] = vec[q]
    elif inc is not None:
        have_eff = 1
        for q in range(m):
            eff[q] = inc[q]

    if not use_bounds:
        return vec, False, None, None, None

    for q in range(m):
        t[q] = loads[q]
    # sort desc (insertion)
    for j in range(1, m):
        bl = t[j]
        k = j - 1
        while k >= 0 and t[k] < bl:
            t[k + 1] = t[k]
            k -= 1
        t[k + 1] = bl
    pref_t[0] = 0
    for q in range(m):
        pref_t[q + 1] = pref_t[q] + t[q]
    total_t = pref_t[m]

    rp = [0] * (nrem + 1)
    cdef long long acc = 0
    for j in range(nrem):
        acc += ps[ell + j]
        rp[j + 1] = acc
    total_rem = acc
    p_rem_max = ps[ell] if ell < n else 0
    tmin = t[m - 1]

    req_l = 0
    req_u = 0
    hj = 0

    for k in range(m):
        mm = m - k
        if req_l <= 0:
            h = ell
        else:
            while hj < nrem and <long long>rp[hj] < req_l:
                hj += 1
            h = ell + hj if <long long>rp[hj] >= req_l else n
        lam_l = total_rem - <long long>rp[h - ell]
        p_next = ps[h] if h < n else 0
        c_int = tmin + p_next
        if t[k] > c_int:
            c_int = t[k]
        fnum = (total_t - pref_t[k]) + lam_l
        if fnum > c_int * mm:
            ln = fnum
            ld = mm
            if ln % ld == 0:
                ln = ln // ld
                ld = 1
        else:
            ln = c_int
            ld = 1
        lnum[k] = ln
        lden[k] = ld
        lfloor = _floordiv(ln, ld)

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
        wceil = -_floordiv(-level_num, cnt)
        uc = wceil + p_rem_max
        if t[k] > uc:
            uc = t[k]
        if have_eff and eff[k] >= 0 and eff[k] < uc:
            uc = eff[k]
        ucl[k] = uc

        d = uc - t[k]
        if d > 0:
            req_l += d
        d = lfloor - t[k]
        if d > 0:
            req_u += d

    cdef bint prune = 0
    if have_eff:
        prune = 1
        for k in range(m):
            lhs = eff[k] * lden[k]
            if lhs != lnum[k]:
                prune = lhs < lnum[k]
                break

    return (
        vec,
        bool(prune),
        tuple([lnum[k] for k in range(m)]),
        tuple([lden[k] for k in range(m)]),
        tuple([ucl[k] for k in range(m)]),
    )
