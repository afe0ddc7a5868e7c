"""Numba-compiled kernel-growing crossover.

One child is grown piece by piece on an unbounded plane, Prim-style: at each
step every feasible candidate edge emanating from the kernel is considered,
with strict phase priority (shared parent edge, then best-buddy edge found in
either parent, then globally minimal weight).  All state is kept in flat
arrays so the whole operator JIT-compiles; a child's random stream is derived
from a single 64-bit seed, which makes results independent of scheduling.

Flat edge index convention: ``piece_index * E + label`` with labels 0..3 =
a..d (front, clockwise from top) and 4..7 = a'..d' (flipped face).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# label -> boundary position on its own face raster (0 top, 1 right, 2 bottom, 3 left)
LABEL_POS = np.array([0, 1, 2, 3, 0, 3, 2, 1], dtype=np.int8)
# (face, position) -> label
LABEL_AT = np.array([[0, 1, 2, 3], [4, 7, 6, 5]], dtype=np.int8)
# boundary position -> neighbor cell offset
DROW = np.array([-1, 0, 1, 0], dtype=np.int8)
DCOL = np.array([0, 1, 0, -1], dtype=np.int8)

U64 = np.uint64


@njit(cache=True, inline="always")
def _rng_next(state):
    state[0] = state[0] + U64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _rng_below(state, bound):
    return np.int64(_rng_next(state) % U64(bound))


@njit(cache=True, inline="always")
def _rng_unit(state):
    return np.float64(_rng_next(state) >> U64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _pose_legal(label, qbar, type_code):
    if type_code == 1:
        return label == qbar
    return True


@njit(cache=True)
def _heap_push(hkey, hm, hseam, hcur, size, key, m, seam, cur):
    i = size
    hkey[i] = key
    hm[i] = m
    hseam[i] = seam
    hcur[i] = cur
    while i > 0:
        p = (i - 1) >> 1
        if (hkey[p] < hkey[i]
                or (hkey[p] == hkey[i]
                    and (hm[p] < hm[i] or (hm[p] == hm[i] and hseam[p] <= hseam[i])))):
            break
        hkey[p], hkey[i] = hkey[i], hkey[p]
        hm[p], hm[i] = hm[i], hm[p]
        hseam[p], hseam[i] = hseam[i], hseam[p]
        hcur[p], hcur[i] = hcur[i], hcur[p]
        i = p
    return size + 1


@njit(cache=True)
def _heap_pop(hkey, hm, hseam, hcur, size):
    size -= 1
    hkey[0], hkey[size] = hkey[size], hkey[0]
    hm[0], hm[size] = hm[size], hm[0]
    hseam[0], hseam[size] = hseam[size], hseam[0]
    hcur[0], hcur[size] = hcur[size], hcur[0]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        best = i
        if l < size and (hkey[l] < hkey[best]
                         or (hkey[l] == hkey[best]
                             and (hm[l] < hm[best]
                                  or (hm[l] == hm[best] and hseam[l] < hseam[best])))):
            best = l
        if r < size and (hkey[r] < hkey[best]
                         or (hkey[r] == hkey[best]
                             and (hm[r] < hm[best]
                                  or (hm[r] == hm[best] and hseam[r] < hseam[best])))):
            best = r
        if best == i:
            break
        hkey[best], hkey[i] = hkey[i], hkey[best]
        hm[best], hm[i] = hm[i], hm[best]
        hseam[best], hseam[i] = hseam[i], hseam[best]
        hcur[best], hcur[i] = hcur[i], hcur[best]
        i = best
    return size


@njit(cache=True, inline="always")
def _box_feasible(r, c, minr, maxr, minc, maxc, type_code, N, M):
    r0 = minr if minr < r else r
    r1 = maxr if maxr > r else r
    c0 = minc if minc < c else c
    c1 = maxc if maxc > c else c
    rext = r1 - r0 + 1
    cext = c1 - c0 + 1
    if type_code == 1:
        # fixed orientation: the grid cannot end up transposed
        return rext <= N and cext <= M
    nmin = min(N, M)
    nmax = max(N, M)
    if rext > nmax or cext > nmax:
        return False
    if rext > nmin and cext > nmin:
        return False
    return True


@njit(cache=True)
def grow_child(n, E, type_code, N, M,
               scores, sorted_partners, bb, p1, p2,
               mutation_rate, seed,
               out_piece, out_rot, out_face,
               trace_phase, trace_a, trace_b):
    """Grow one offspring; writes an (N, M) grid into the out arrays.

    Returns 0 on success, nonzero on an internal geometry failure (which the
    wrapper treats as a bug, not a recoverable condition).
    """
    nmin = min(N, M)
    nmax = max(N, M)
    n_edges = n * E
    P = 2 * nmax + 1
    state = np.empty(1, dtype=np.uint64)
    state[0] = U64(seed)
    # warm the stream so tiny seeds do not correlate
    _rng_next(state)

    plane = np.full((P, P), -1, dtype=np.int32)
    placed = np.zeros(n, dtype=np.uint8)
    prow = np.empty(n, dtype=np.int32)
    pcol = np.empty(n, dtype=np.int32)
    prot = np.zeros(n, dtype=np.int8)
    pface = np.zeros(n, dtype=np.int8)

    unplaced = np.arange(n).astype(np.int32)
    upos = np.arange(n).astype(np.int32)
    un_count = n

    cap = 4 * n + 8
    seam_r = np.empty(cap, dtype=np.int32)
    seam_c = np.empty(cap, dtype=np.int32)
    seam_q = np.empty(cap, dtype=np.int8)
    seam_flat = np.empty(cap, dtype=np.int32)
    ns = 0

    pool1_seam = np.empty(cap, dtype=np.int32)
    pool1_m = np.empty(cap, dtype=np.int32)
    np1 = 0
    pool2_seam = np.empty(cap, dtype=np.int32)
    pool2_m = np.empty(cap, dtype=np.int32)
    np2 = 0

    hkey = np.empty(cap, dtype=np.float64)
    hm = np.empty(cap, dtype=np.int32)
    hseam = np.empty(cap, dtype=np.int32)
    hcur = np.empty(cap, dtype=np.int32)
    hsize = 0

    minr = maxr = minc = maxc = nmax  # updated at seed placement

    step = 0
    # seed piece: uniform random, rotation 0, front face, plane center
    piece = unplaced[_rng_below(state, un_count)]
    rot = 0
    face = 0
    r = nmax
    c = nmax
    phase = 0
    rel_a = -1
    rel_b = -1

    while True:
        # place `piece` at (r, c) with pose (rot, face)
        plane[r, c] = piece
        placed[piece] = 1
        prow[piece] = r
        pcol[piece] = c
        prot[piece] = rot
        pface[piece] = face
        # swap-remove from unplaced
        pos = upos[piece]
        last = unplaced[un_count - 1]
        unplaced[pos] = last
        upos[last] = pos
        un_count -= 1
        if step == 0:
            minr = maxr = r
            minc = maxc = c
        else:
            if r < minr:
                minr = r
            if r > maxr:
                maxr = r
            if c < minc:
                minc = c
            if c > maxc:
                maxc = c
        trace_phase[step] = phase
        trace_a[step] = rel_a
        trace_b[step] = rel_b
        step += 1
        if un_count == 0:
            break

        # open boundaries become frontier seams + phase candidates
        for q in range(4):
            nr = r + DROW[q]
            nc = c + DCOL[q]
            if plane[nr, nc] >= 0:
                continue
            orig = (q + rot) & 3
            lbl = LABEL_AT[face, orig]
            flat = piece * E + lbl
            seam_r[ns] = r
            seam_c[ns] = c
            seam_q[ns] = q
            seam_flat[ns] = flat
            si = ns
            ns += 1
            t1 = p1[flat]
            if t1 >= 0 and p2[flat] == t1 and placed[t1 // E] == 0:
                pool1_seam[np1] = si
                pool1_m[np1] = t1
                np1 += 1
            tb = bb[flat]
            if tb >= 0 and placed[tb // E] == 0 and (p1[flat] == tb or p2[flat] == tb):
                pool2_seam[np2] = si
                pool2_m[np2] = tb
                np2 += 1
            # initial greedy entry: first legal unplaced partner in sorted order
            qbar = q ^ 2
            cur = 0
            while cur < n_edges:
                m0 = sorted_partners[flat, cur]
                if (placed[m0 // E] == 0
                        and _pose_legal(m0 % E, qbar, type_code)
                        and np.isfinite(scores[flat, m0])):
                    hsize = _heap_push(hkey, hm, hseam, hcur, hsize,
                                       scores[flat, m0], m0, si, cur)
                    break
                cur += 1

        # ---- select the next edge by phase priority ----
        sel_seam = -1
        sel_m = -1
        phase = -1

        # Phase 1: edges present in both parents (uniform among qualifiers)
        while np1 > 0:
            idx = _rng_below(state, np1)
            si = pool1_seam[idx]
            m0 = pool1_m[idx]
            tr = seam_r[si] + DROW[seam_q[si]]
            tc = seam_c[si] + DCOL[seam_q[si]]
            ok = (placed[m0 // E] == 0 and plane[tr, tc] < 0
                  and _box_feasible(tr, tc, minr, maxr, minc, maxc, type_code, N, M))
            np1 -= 1
            pool1_seam[idx] = pool1_seam[np1]
            pool1_m[idx] = pool1_m[np1]
            if ok:
                sel_seam = si
                sel_m = m0
                phase = 1
                break

        # Phase 2: best-buddy edges found in either parent
        if sel_seam < 0:
            while np2 > 0:
                idx = _rng_below(state, np2)
                si = pool2_seam[idx]
                m0 = pool2_m[idx]
                tr = seam_r[si] + DROW[seam_q[si]]
                tc = seam_c[si] + DCOL[seam_q[si]]
                ok = (placed[m0 // E] == 0 and plane[tr, tc] < 0
                      and _box_feasible(tr, tc, minr, maxr, minc, maxc, type_code, N, M))
                np2 -= 1
                pool2_seam[idx] = pool2_seam[np2]
                pool2_m[idx] = pool2_m[np2]
                if ok:
                    sel_seam = si
                    sel_m = m0
                    phase = 2
                    break

        # Phase 3 with optional mutation: a random feasible edge instead of
        # the minimal one
        if sel_seam < 0 and mutation_rate > 0.0 and _rng_unit(state) < mutation_rate:
            for _attempt in range(64):
                si = _rng_below(state, ns)
                tr = seam_r[si] + DROW[seam_q[si]]
                tc = seam_c[si] + DCOL[seam_q[si]]
                if plane[tr, tc] < 0 and _box_feasible(tr, tc, minr, maxr,
                                                       minc, maxc, type_code, N, M):
                    j = unplaced[_rng_below(state, un_count)]
                    qbar = seam_q[si] ^ 2
                    if type_code == 1:
                        f = qbar
                    elif type_code == 2:
                        f = _rng_below(state, 4)
                    else:
                        f = _rng_below(state, 8)
                    sel_seam = si
                    sel_m = j * E + f
                    phase = 4
                    break

        # Phase 3 proper: lazy Prim pop
        if sel_seam < 0:
            while hsize > 0:
                key = hkey[0]
                m0 = hm[0]
                si = hseam[0]
                cur = hcur[0]
                hsize = _heap_pop(hkey, hm, hseam, hcur, hsize)
                tr = seam_r[si] + DROW[seam_q[si]]
                tc = seam_c[si] + DCOL[seam_q[si]]
                if plane[tr, tc] >= 0 or not _box_feasible(tr, tc, minr, maxr,
                                                           minc, maxc, type_code, N, M):
                    continue   # seam is dead for good
                if placed[m0 // E] == 0:
                    sel_seam = si
                    sel_m = m0
                    phase = 3
                    break
                # stale candidate: advance the cursor along the sorted row
                flat = seam_flat[si]
                qbar = seam_q[si] ^ 2
                cur += 1
                while cur < n_edges:
                    m1 = sorted_partners[flat, cur]
                    if (placed[m1 // E] == 0
                            and _pose_legal(m1 % E, qbar, type_code)
                            and np.isfinite(scores[flat, m1])):
                        hsize = _heap_push(hkey, hm, hseam, hcur, hsize,
                                           scores[flat, m1], m1, si, cur)
                        break
                    cur += 1
            if sel_seam < 0 and phase < 0:
                return 1   # no feasible edge left: geometry bug

        # decode the selected candidate into a concrete placement
        q = seam_q[sel_seam]
        qbar = q ^ 2
        f = sel_m % E
        piece = sel_m // E
        face = f >> 2
        rot = (LABEL_POS[f] - qbar) & 3
        r = seam_r[sel_seam] + DROW[q]
        c = seam_c[sel_seam] + DCOL[q]
        rel_a = seam_flat[sel_seam]
        rel_b = sel_m

    # ---- normalize the finished kernel into an (N, M) grid ----
    rext = maxr - minr + 1
    cext = maxc - minc + 1
    if rext == N and cext == M:
        for rr in range(N):
            for cc in range(M):
                pp = plane[minr + rr, minc + cc]
                if pp < 0:
                    return 2
                out_piece[rr, cc] = pp
                out_rot[rr, cc] = prot[pp]
                out_face[rr, cc] = pface[pp]
    elif rext == M and cext == N:
        # rotate the assembly one quarter turn CCW
        for rr in range(M):
            for cc in range(N):
                pp = plane[minr + rr, minc + cc]
                if pp < 0:
                    return 2
                out_piece[N - 1 - cc, rr] = pp
                out_rot[N - 1 - cc, rr] = (prot[pp] + 1) & 3
                out_face[N - 1 - cc, rr] = pface[pp]
    else:
        return 3
    return 0


@njit(cache=True, nogil=True)
def grow_children_range(lo, hi, n, E, type_code, N, M,
                        scores, sorted_partners, bb,
                        pop_partner, parent_a, parent_b, seeds, mutation_rate,
                        out_piece, out_rot, out_face):
    """Grow children [lo, hi); used for chunked multithreaded offspring."""
    trace_phase = np.empty(n, dtype=np.int8)
    trace_a = np.empty(n, dtype=np.int32)
    trace_b = np.empty(n, dtype=np.int32)
    for k in range(lo, hi):
        rc = grow_child(n, E, type_code, N, M,
                        scores, sorted_partners, bb,
                        pop_partner[parent_a[k]], pop_partner[parent_b[k]],
                        mutation_rate, seeds[k],
                        out_piece[k], out_rot[k], out_face[k],
                        trace_phase, trace_a, trace_b)
        if rc != 0:
            return rc
    return 0
