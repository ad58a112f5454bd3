"""Compiled one-box growth for large n.

The addable corners x_1 > ... > x_k (their α-contents) and the maxima
y_1 > ... > y_{k-1} of the profile (y = content of a removable cell + α − 1)
interlace, and the transition probabilities are the residues of
G(z) = Π(z − y) / Π(z − x) at the x's.  Adding a box at x multiplies G by
(z − x)(z − x − α + 1) / ((z − x − α)(z − x + 1)), so each surviving residue
is rescaled by r(d) = d(d − α + 1) / ((d − α)(d + 1)), d = x_m − x, and the
residues of the (at most two) new corners are ±α/(α+1)·G_old at x + α and
x − 1.  One step therefore costs O(k) with k ≈ sqrt(n) corners.

Slots are unordered; ``nxt``/``prv`` link them in row order.  The last
(bottom) corner stores ys = xs so its factor in the product is 1 and is
divided out separately.
"""
import numba as nb
import numpy as np

# nnan/ninf are deliberately absent: the overflow guard relies on isfinite
_FAST = {"nsz", "arcp", "contract", "reassoc"}
_JIT = dict(cache=True, fastmath=_FAST, boundscheck=False, error_model="numpy", nogil=True)


@nb.njit(**_JIT)
def _g_pair_safe(zr, zb, xs, ys, k):
    gr = 1.0
    gb = 1.0
    for m in range(k):
        gr *= (zr - ys[m]) / (zr - xs[m])
        gb *= (zb - ys[m]) / (zb - xs[m])
    return gr, gb


@nb.njit(**_JIT)
def grow(n, alpha, u, rr, cc, nxt, prv, xs, ys, ps, contents, record):
    """Grow n boxes driven by uniforms ``u``; returns (Σ(col−1), Σ(row−1), k, head).

    Work arrays need length ≥ n + 2.  When ``record`` is true, ``contents[j]``
    receives the α-content of the j-th box.
    """
    k = 1
    rr[0] = 1
    cc[0] = 1
    nxt[0] = -1
    prv[0] = -1
    xs[0] = 0.0
    ys[0] = 0.0
    ps[0] = 1.0
    last = 0
    head = 0
    scol = 0
    srow = 0
    f = alpha / (alpha + 1.0)
    am1 = alpha - 1.0
    total = 1.0
    for step in range(n):
        target = u[step] * total
        acc = 0.0
        b = 0
        while b + 8 <= k:
            s8 = ps[b] + ps[b + 1] + ps[b + 2] + ps[b + 3] + ps[b + 4] + ps[b + 5] + ps[b + 6] + ps[b + 7]
            if acc + s8 > target:
                break
            acc += s8
            b += 8
        i = -1
        for m in range(b, k):
            acc += ps[m]
            if acc > target:
                i = m
                break
        if i < 0:
            # rounding left u·total past the last slot: residual goes to the largest corner
            i = 0
            for m in range(1, k):
                if ps[m] > ps[i]:
                    i = m
        x = xs[i]
        r = rr[i]
        c = cc[i]
        scol += c - 1
        srow += r - 1
        if record:
            contents[step] = alpha * (c - 1) - (r - 1)
        pi = prv[i]
        ni = nxt[i]
        right = (pi < 0) or (cc[pi] >= c + 2)
        below = (ni < 0) or (rr[ni] >= r + 2)
        zr = x + alpha
        zb = x - 1.0
        nr = 1.0
        dr = 1.0
        nb_ = 1.0
        db = 1.0
        tot = 0.0
        for m in range(k):
            xm = xs[m]
            ym = ys[m]
            nr *= zr - ym
            dr *= zr - xm
            nb_ *= zb - ym
            db *= zb - xm
            d = xm - x
            q = d * (d - am1)
            p = ps[m] * (q / (q - alpha))
            ps[m] = p
            tot += p
        gr = nr / dr
        gb = nb_ / db
        if not (np.isfinite(gr) and np.isfinite(gb) and dr != 0.0 and db != 0.0):
            gr, gb = _g_pair_safe(zr, zb, xs, ys, k)
        gr /= zr - xs[last]
        gb /= zb - xs[last]
        ynew = x + am1
        if right and below:
            j = k
            k += 1
            cc[i] = c + 1
            xs[i] = zr
            ps[i] = f * gr
            rr[j] = r + 1
            cc[j] = c
            xs[j] = zb
            ps[j] = -f * gb
            ys[j] = ys[i]
            ys[i] = ynew
            nxt[j] = ni
            prv[j] = i
            nxt[i] = j
            if ni >= 0:
                prv[ni] = j
            else:
                last = j
                ys[j] = zb
            tot += f * gr - f * gb
        elif right:
            cc[i] = c + 1
            xs[i] = zr
            ps[i] = f * gr
            ys[i] = ynew
            tot += f * gr
        elif below:
            rr[i] = r + 1
            xs[i] = zb
            ps[i] = -f * gb
            ys[pi] = ynew
            if ni < 0:
                ys[i] = zb
            tot -= f * gb
        else:
            ys[pi] = ynew
            nxt[pi] = ni
            prv[ni] = pi
            k -= 1
            if i != k:
                rr[i] = rr[k]
                cc[i] = cc[k]
                xs[i] = xs[k]
                ys[i] = ys[k]
                ps[i] = ps[k]
                a = prv[k]
                bb = nxt[k]
                prv[i] = a
                nxt[i] = bb
                if a >= 0:
                    nxt[a] = i
                if bb >= 0:
                    prv[bb] = i
                if last == k:
                    last = i
                if head == k:
                    head = i
        total = tot
    return scol, srow, k, head


def work_arrays(n):
    m = n + 2
    ints = [np.empty(m, np.int64) for _ in range(4)]
    floats = [np.empty(m) for _ in range(3)]
    return ints + floats


@nb.njit(cache=True, nogil=True)
def content_sums(n, alpha, U, out_col, out_row):
    """Batch growth: one path per row of ``U``; stores Σ(col−1) and Σ(row−1)."""
    m = n + 2
    rr = np.empty(m, np.int64)
    cc = np.empty(m, np.int64)
    nx = np.empty(m, np.int64)
    pv = np.empty(m, np.int64)
    xs = np.empty(m)
    ys = np.empty(m)
    ps = np.empty(m)
    dummy = np.empty(1)
    for j in range(U.shape[0]):
        sc, sr, _, _ = grow(n, alpha, U[j], rr, cc, nx, pv, xs, ys, ps, dummy, False)
        out_col[j] = sc
        out_row[j] = sr


@nb.njit(cache=True)
def corner_table(k, head, rr, cc, nxt, ps):
    """Corners in row order as (row, col, unnormalized probability)."""
    rows = np.empty(k, np.int64)
    cols = np.empty(k, np.int64)
    prob = np.empty(k)
    s = head
    for t in range(k):
        rows[t] = rr[s]
        cols[t] = cc[s]
        prob[t] = ps[s]
        s = nxt[s]
    return rows, cols, prob


def final_parts(rows, cols):
    """Rebuild the partition: rows r_t .. r_{t+1}−1 have length c_t − 1."""
    parts = []
    for t in range(len(rows) - 1):
        parts.extend([int(cols[t]) - 1] * int(rows[t + 1] - rows[t]))
    return tuple(parts)


@nb.njit(cache=True, nogil=True)
def final_shapes(n, alpha, U, out):
    """Batch growth recording each final partition as a zero-padded row of ``out``."""
    m = n + 2
    rr = np.empty(m, np.int64)
    cc = np.empty(m, np.int64)
    nx = np.empty(m, np.int64)
    pv = np.empty(m, np.int64)
    xs = np.empty(m)
    ys = np.empty(m)
    ps = np.empty(m)
    dummy = np.empty(1)
    for j in range(U.shape[0]):
        _, _, k, head = grow(n, alpha, U[j], rr, cc, nx, pv, xs, ys, ps, dummy, False)
        out[j, :] = 0
        s = head
        pos = 0
        for _ in range(k - 1):
            t = nxt_slot = nx[s]
            for _ in range(rr[t] - rr[s]):
                out[j, pos] = cc[s] - 1
                pos += 1
            s = nxt_slot
