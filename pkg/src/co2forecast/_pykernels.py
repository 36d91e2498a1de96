"""Pure-Python kernels. Mirrors _ckernels.pyx operation for operation.

Any edit here must be repeated there; tests assert the two backends agree
bit for bit.
"""
import math


def best_split(xs, ys, min_leaf):
    """Best SSE split of a node whose samples are sorted by x.

    Returns ``(k, sse)``: left child is ``[0..k]``, right is ``[k+1..n)``.
    ``k == -1`` when no admissible cut exists. Cuts are only placed between
    distinct x values; on exact ties the earliest (smallest threshold) wins.
    """
    xs = list(xs)
    ys = list(ys)
    n = len(ys)
    if n < 2:
        return -1, math.inf
    total = 0.0
    for k in range(n):
        total += ys[k]
    mean = total / n
    c = [ys[k] - mean for k in range(n)]
    suf1 = [0.0] * (n + 1)
    suf2 = [0.0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suf1[k] = suf1[k + 1] + c[k]
        suf2[k] = suf2[k + 1] + c[k] * c[k]

    best_k = -1
    best = math.inf
    s1 = 0.0
    s2 = 0.0
    for k in range(n - 1):
        s1 += c[k]
        s2 += c[k] * c[k]
        if xs[k] == xs[k + 1]:
            continue
        nl = k + 1
        nr = n - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        r1 = suf1[k + 1]
        sse = (s2 - s1 * s1 / nl) + (suf2[k + 1] - r1 * r1 / nr)
        if sse < best:
            best = sse
            best_k = k
    return best_k, best


def smo_solve(K, y, C, eps, tol, max_iter, delta, grad, history=None):
    """Maximal-violating-pair SMO on the epsilon-SVR dual in delta = alpha - alpha*.

    ``delta`` (start point) and ``grad`` are float64 arrays updated in place;
    on return ``grad = y - K @ delta``. ``history`` (rows x n) if given
    receives delta after each of the first ``rows`` updates. Returns
    ``(iterations, gap, n_recorded)`` where ``gap`` is the final KKT gap.
    """
    n = len(y)
    Kl = K.tolist()
    yl = list(y)
    d = list(delta)
    g = [0.0] * n
    for i in range(n):
        acc = 0.0
        row = Kl[i]
        for j in range(n):
            acc += row[j] * d[j]
        g[i] = yl[i] - acc
    rows = 0 if history is None else history.shape[0]
    recorded = 0
    neg_inf = -math.inf

    it = 0
    gap = neg_inf
    while True:
        i = -1
        j = -1
        up_max = neg_inf
        dn_max = neg_inf
        for k in range(n):
            dk = d[k]
            gk = g[k]
            if dk < C:
                v = gk - eps if dk >= 0.0 else gk + eps
                if v > up_max:
                    up_max = v
                    i = k
            if dk > -C:
                v = -gk - eps if dk <= 0.0 else -gk + eps
                if v > dn_max:
                    dn_max = v
                    j = k
        if i < 0 or j < 0:
            gap = neg_inf
            break
        gap = up_max + dn_max
        if gap <= tol or it >= max_iter:
            break

        di = d[i]
        dj = d[j]
        s = di + dj
        lo = s - C
        if lo < -C:
            lo = -C
        hi = s + C
        if hi > C:
            hi = C
        Ki = Kl[i]
        Kj = Kl[j]
        eta = Ki[i] + Kj[j] - 2.0 * Ki[j]
        gd = g[i] - g[j]
        base = abs(di) + abs(dj)

        cands = [lo, hi]
        if lo <= 0.0 <= hi:
            cands.append(0.0)
        if lo <= s <= hi:
            cands.append(s)
        if eta > 1e-12:
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    u = di + (gd - eps * si + eps * sj) / eta
                    if u < lo:
                        u = lo
                    elif u > hi:
                        u = hi
                    cands.append(u)
        best_u = di
        best_val = 0.0
        for u in cands:
            t = u - di
            val = gd * t - 0.5 * eta * t * t - eps * (abs(u) + abs(s - u) - base)
            if val > best_val:
                best_val = val
                best_u = u
        new_i = best_u
        new_j = s - new_i
        if new_j > C:
            new_j = C
        elif new_j < -C:
            new_j = -C
        ti = new_i - di
        tj = new_j - dj
        if ti == 0.0 and tj == 0.0:
            break
        for k in range(n):
            row = Kl[k]
            g[k] = g[k] - (row[i] * ti + row[j] * tj)
        d[i] = new_i
        d[j] = new_j
        it += 1
        if recorded < rows:
            history[recorded, :] = d
            recorded += 1

    delta[:] = d
    grad[:] = g
    return it, gap, recorded
