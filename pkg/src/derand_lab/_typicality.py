"""Compiled kernels for joint-typicality decoding and Monte Carlo.

Every typicality decision, in Python and in the kernels, goes through
``marginal_ok`` / ``joint_ok`` on integer symbol counts, so the fast and the
reference paths agree bit for bit.
"""
import numpy as np
from numba import njit, types
from numba.extending import intrinsic

from .streams import trial_key, uniform_at

_NEG_INF = -np.inf
FLAT_CACHE_LIMIT = 1 << 27


@intrinsic
def _ctpop(typingctx, x):
    sig = types.uint64(types.uint64)

    def codegen(context, builder, signature, args):
        return builder.ctpop(args[0])

    return sig, codegen


@njit(cache=True)
def marginal_ok(counts, logp, h, eps, n):
    s = 0.0
    for a in range(counts.shape[0]):
        c = counts[a]
        if c > 0:
            if logp[a] == _NEG_INF:
                return False
            s += c * logp[a]
    return abs(-s / n - h) < eps


@njit(cache=True)
def joint_ok(counts, logp, h, eps, n):
    s = 0.0
    for a in range(counts.shape[0]):
        for b in range(counts.shape[1]):
            c = counts[a, b]
            if c > 0:
                if logp[a, b] == _NEG_INF:
                    return False
                s += c * logp[a, b]
    return abs(-s / n - h) < eps


@njit(cache=True)
def typical_from_counts(jcounts, lpx, lpy, lpxy, hx, hy, hxy, eps, n):
    xc = jcounts.sum(axis=1)
    yc = jcounts.sum(axis=0)
    return (
        marginal_ok(xc, lpx, hx, eps, n)
        and marginal_ok(yc, lpy, hy, eps, n)
        and joint_ok(jcounts, lpxy, hxy, eps, n)
    )


@njit(cache=True)
def draw_symbol(cdf_row, u):
    k = 0
    for j in range(cdf_row.shape[0]):
        if cdf_row[j] <= u:
            k += 1
    if k > cdf_row.shape[0] - 1:
        k = cdf_row.shape[0] - 1
    return k


@njit(cache=True)
def pack_masks(words, nsym, chunks):
    """masks[v, a, c] has bit i set iff words[v, 64*c + i] == a."""
    m, n = words.shape
    masks = np.zeros((m, nsym, chunks), dtype=np.uint64)
    for v in range(m):
        for i in range(n):
            masks[v, words[v, i], i >> 6] |= np.uint64(1) << np.uint64(i & 63)
    return masks


@njit(cache=True)
def _transmit_trial(row, cdf, key, out):
    for i in range(row.shape[0]):
        out[i] = draw_symbol(cdf[row[i]], uniform_at(key, i))


@njit(cache=True)
def decode_counts_all(words, y, nx, ny, lpx, lpy, lpxy, hx, hy, hxy, eps):
    """Reference per-codeword typicality flags by direct counting."""
    m, n = words.shape
    flags = np.zeros(m, dtype=np.bool_)
    jc = np.zeros((nx, ny), dtype=np.int64)
    for v in range(m):
        jc[:, :] = 0
        for i in range(n):
            jc[words[v, i], y[i]] += 1
        flags[v] = typical_from_counts(jc, lpx, lpy, lpxy, hx, hy, hxy, eps, n)
    return flags


@njit(cache=True)
def error_kernel_general(words, cdf, nx, ny, lpx, lpy, lpxy, hx, hy, hxy, eps,
                         key, trials, decoded):
    m, n = words.shape
    chunks = (n + 63) // 64
    xm = pack_masks(words, nx, chunks)
    x_ok = np.zeros(m, dtype=np.bool_)
    xc = np.zeros(nx, dtype=np.int64)
    for v in range(m):
        xc[:] = 0
        for i in range(n):
            xc[words[v, i]] += 1
        x_ok[v] = marginal_ok(xc, lpx, hx, eps, n)
    record = decoded.shape[0] > 0
    errors = np.zeros(m, dtype=np.int64)
    y = np.empty(n, dtype=np.int64)
    ym = np.zeros((ny, chunks), dtype=np.uint64)
    yc = np.zeros(ny, dtype=np.int64)
    jc = np.zeros((nx, ny), dtype=np.int64)
    for w in range(m):
        for t in range(trials):
            _transmit_trial(words[w], cdf, trial_key(key, w, t), y)
            ym[:, :] = 0
            yc[:] = 0
            for i in range(n):
                ym[y[i], i >> 6] |= np.uint64(1) << np.uint64(i & 63)
                yc[y[i]] += 1
            found = 0
            hit = -1
            if marginal_ok(yc, lpy, hy, eps, n):
                for v in range(m):
                    if not x_ok[v]:
                        continue
                    for a in range(nx):
                        for b in range(ny):
                            s = np.uint64(0)
                            for c in range(chunks):
                                s += _ctpop(xm[v, a, c] & ym[b, c])
                            jc[a, b] = np.int64(s)
                    if joint_ok(jc, lpxy, hxy, eps, n):
                        found += 1
                        hit = v
                        if found > 1:
                            break
            out = hit + 1 if found == 1 else 0
            if record:
                decoded[w, t] = out
            if out != w + 1:
                errors[w] += 1
    return errors


@njit(cache=True)
def _binary_row(wy, n, lpx, lpy, lpxy, hx, hy, hxy, eps, lo, hi):
    """Fill lo/hi[wx] with the typical range of N11 for output weight wy.

    Returns False if some row is not an interval (then the caller must use
    the general kernel).
    """
    xc = np.zeros(2, dtype=np.int64)
    yc = np.zeros(2, dtype=np.int64)
    jc = np.zeros((2, 2), dtype=np.int64)
    yc[0] = n - wy
    yc[1] = wy
    y_ok = marginal_ok(yc, lpy, hy, eps, n)
    for wx in range(n + 1):
        lo[wx] = 1
        hi[wx] = 0
        if not y_ok:
            continue
        xc[0] = n - wx
        xc[1] = wx
        if not marginal_ok(xc, lpx, hx, eps, n):
            continue
        first = -1
        last = -1
        gap = False
        for n11 in range(max(0, wx + wy - n), min(wx, wy) + 1):
            jc[1, 1] = n11
            jc[1, 0] = wx - n11
            jc[0, 1] = wy - n11
            jc[0, 0] = n - wx - wy + n11
            if joint_ok(jc, lpxy, hxy, eps, n):
                if first < 0:
                    first = n11
                elif last != n11 - 1:
                    gap = True
                last = n11
        if gap:
            return False
        if first >= 0:
            lo[wx] = first
            hi[wx] = last
    return True


@njit(cache=True)
def _overlap(packed, r, ypk):
    s = np.uint64(0)
    for c in range(ypk.shape[0]):
        s += _ctpop(packed[r, c] & ypk[c])
    return np.int64(s)


@njit(cache=True)
def _flat_count(col, y0, lo, hi):
    """(number of typical codewords, index of the last one); branch-free."""
    cnt = np.uint64(0)
    idx = np.uint64(0)
    for r in range(col.shape[0]):
        s = _ctpop(col[r] & y0)
        f = np.uint64(s >= np.uint64(lo[r])) & np.uint64(s <= np.uint64(hi[r]))
        cnt += f
        idx += f * np.uint64(r)
    return np.int64(cnt), np.int64(idx)


@njit(cache=True)
def error_kernel_binary(words, cdf, lpx, lpy, lpxy, hx, hy, hxy, eps, key, trials, decoded):
    """Binary-alphabet kernel.  Returns (errors, ok); ok=False means fall back."""
    m, n = words.shape
    chunks = (n + 63) // 64
    weights = np.zeros(m, dtype=np.int64)
    for v in range(m):
        for i in range(n):
            weights[v] += words[v, i]
    order = np.argsort(weights, kind="mergesort")
    packed = np.zeros((m, chunks), dtype=np.uint64)
    for r in range(m):
        v = order[r]
        for i in range(n):
            if words[v, i] == 1:
                packed[r, i >> 6] |= np.uint64(1) << np.uint64(i & 63)
    starts = np.zeros(n + 2, dtype=np.int64)
    for r in range(m):
        starts[weights[order[r]] + 1] += 1
    for g in range(n + 1):
        starts[g + 1] += starts[g]

    lo = np.zeros((n + 1, n + 1), dtype=np.int64)
    hi = np.zeros((n + 1, n + 1), dtype=np.int64)
    done = np.zeros(n + 1, dtype=np.bool_)
    # single-word codewords: per-codeword bounds cached per output weight
    flat = chunks == 1 and (n + 1) * m <= FLAT_CACHE_LIMIT
    col = packed[:, 0].copy()
    flo = np.zeros((n + 1 if flat else 0, m), dtype=np.uint8)
    fhi = np.zeros((n + 1 if flat else 0, m), dtype=np.uint8)
    sorted_w = np.empty(m, dtype=np.int64)
    for r in range(m):
        sorted_w[r] = weights[order[r]]
    record = decoded.shape[0] > 0
    errors = np.zeros(m, dtype=np.int64)
    y = np.empty(n, dtype=np.int64)
    ypk = np.zeros(chunks, dtype=np.uint64)
    for w in range(m):
        for t in range(trials):
            _transmit_trial(words[w], cdf, trial_key(key, w, t), y)
            ypk[:] = 0
            wy = 0
            for i in range(n):
                if y[i] == 1:
                    ypk[i >> 6] |= np.uint64(1) << np.uint64(i & 63)
                    wy += 1
            if not done[wy]:
                if not _binary_row(wy, n, lpx, lpy, lpxy, hx, hy, hxy, eps, lo[wy], hi[wy]):
                    return errors, False
                done[wy] = True
                if flat:
                    for r in range(m):
                        a = lo[wy, sorted_w[r]]
                        b = hi[wy, sorted_w[r]]
                        if a > b:
                            flo[wy, r] = 1
                            fhi[wy, r] = 0
                        else:
                            flo[wy, r] = a
                            fhi[wy, r] = b
            found = 0
            hit = -1
            if flat:
                found, hit = _flat_count(col, ypk[0], flo[wy], fhi[wy])
            else:
                for g in range(n + 1):
                    a = lo[wy, g]
                    b = hi[wy, g]
                    if a > b:
                        continue
                    for r in range(starts[g], starts[g + 1]):
                        s = _overlap(packed, r, ypk)
                        if s >= a and s <= b:
                            found += 1
                            hit = r
                    if found > 1:
                        break
            out = order[hit] + 1 if found == 1 else 0
            if record:
                decoded[w, t] = out
            if out != w + 1:
                errors[w] += 1
    return errors, True


@njit(cache=True)
def aep_kernel(qcdf, cdf, ycdf, lpx, lpy, lpxy, hx, hy, hxy, eps, n, key, trials, independent):
    """Count trials whose (x, y) pair is jointly typical.

    Dependent trials draw x from Q, then y through the channel; independent
    trials draw y from the output marginal instead.  Uniforms 0..n-1 of the
    trial stream feed x, uniforms n..2n-1 feed y.
    """
    nx = qcdf.shape[0]
    ny = ycdf.shape[0]
    jc = np.zeros((nx, ny), dtype=np.int64)
    hits = 0
    for t in range(trials):
        k = trial_key(key, 0, t)
        jc[:, :] = 0
        for i in range(n):
            x = draw_symbol(qcdf, uniform_at(k, i))
            if independent:
                yv = draw_symbol(ycdf, uniform_at(k, n + i))
            else:
                yv = draw_symbol(cdf[x], uniform_at(k, n + i))
            jc[x, yv] += 1
        if typical_from_counts(jc, lpx, lpy, lpxy, hx, hy, hxy, eps, n):
            hits += 1
    return hits
