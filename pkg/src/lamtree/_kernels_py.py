"""Pure-Python versions of the subset kernels."""


def inner_sums(n, us, vs, ws):
    weight = [[0.0] * n for _ in range(n)]
    for u, v, w in zip(us, vs, ws):
        weight[u][v] += w
        weight[v][u] += w
    out = [0.0] * (1 << n)
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        row = weight[low]
        acc = out[rest]
        r = rest
        while r:
            u = (r & -r).bit_length() - 1
            acc += row[u]
            r &= r - 1
        out[mask] = acc
    return out


def cut_sums(n, us, vs, ws):
    inner = inner_sums(n, us, vs, ws)
    degree = [0.0] * n
    for u, v, w in zip(us, vs, ws):
        degree[u] += w
        degree[v] += w
    out = [0.0] * (1 << n)
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        out[mask] = out[mask & (mask - 1)] + degree[low]
    return [out[m] - 2.0 * inner[m] for m in range(1 << n)]


def matching_dp(k, dist):
    full = (1 << k) - 1
    inf = float("inf")
    best = [inf] * (1 << k)
    choice = [None] * (1 << k)
    best[0] = 0.0
    for mask in range(1 << k):
        if best[mask] == inf or mask == full:
            continue
        i = (~mask & (mask + 1)).bit_length() - 1
        for j in range(i + 1, k):
            if not (mask >> j) & 1:
                nxt = mask | (1 << i) | (1 << j)
                cand = best[mask] + dist[i][j]
                if cand < best[nxt]:
                    best[nxt] = cand
                    choice[nxt] = (i, j)
    pairs = []
    mask = full
    while mask:
        i, j = choice[mask]
        pairs.append((i, j))
        mask ^= (1 << i) | (1 << j)
    return best[full], sorted(pairs)
