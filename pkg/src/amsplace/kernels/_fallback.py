"""NumPy implementations of the hot geometry kernels.

Used when the compiled extension is unavailable or disabled; semantics match
``_native.pyx`` exactly (up to floating-point summation order).
"""
import numpy as np

BACKEND = "python"


def hpwl(cx, cy, ptr, idx, cost):
    total = 0.0
    for e in range(len(ptr) - 1):
        members = idx[ptr[e]:ptr[e + 1]]
        if len(members) < 2:
            continue
        mx = cx[members]
        my = cy[members]
        total += cost[e] * ((mx.max() - mx.min()) + (my.max() - my.min()))
    return float(total)


def _violations(x, y, w, h, dist):
    # v[k, i, j] for the four relative-position rows with rectangle i before j
    v1 = x[:, None] + w[:, None] + dist - x[None, :]
    v2 = y[:, None] + h[:, None] + dist - y[None, :]
    v3 = x[None, :] + w[None, :] + dist - x[:, None]
    v4 = y[None, :] + h[None, :] + dist - y[:, None]
    return np.stack([v1, v2, v3, v4])


def separation_deficit(x, y, w, h, dist, tol):
    """Pairs (i < j) whose smallest separation violation exceeds ``tol``.

    Returns arrays (I, J, magnitude).
    """
    n = len(x)
    if n < 2:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), np.zeros(0)
    best = _violations(x, y, w, h, dist).min(axis=0)
    iu, ju = np.triu_indices(n, k=1)
    mag = best[iu, ju]
    bad = mag > tol
    return iu[bad].astype(np.int64), ju[bad].astype(np.int64), mag[bad]


def least_violated(x, y, w, h, dist):
    """Matrix R with R[i, j] in {1..4} (i < j) naming the least violated relation."""
    n = len(x)
    out = np.zeros((n, n), dtype=np.int8)
    if n < 2:
        return out
    # argmin returns the first minimum, which is the smallest relation index
    rel = _violations(x, y, w, h, dist).argmin(axis=0) + 1
    iu, ju = np.triu_indices(n, k=1)
    out[iu, ju] = rel[iu, ju]
    return out


def proximity(px, py, x, y, w, h):
    return np.maximum.reduce([
        np.abs(x - px), np.abs(x + w - px), np.abs(y - py), np.abs(y + h - py)
    ])


def fdgd_run(pos, half, gap, ptr, node, off, netw, iterations, step, decay, k_att):
    """Spring-embedder iterations over sized nodes; returns the final positions.

    ``pos``/``half`` are (k, 2) node centres and half extents, ``gap`` the
    (k, k) extra clearance between nodes. Net member m sits at
    ``pos[node[m]] + off[m]``.
    """
    pos = np.array(pos, dtype=float)
    k = len(pos)
    n_nets = len(ptr) - 1
    counts = np.diff(ptr)
    net_of_member = np.repeat(np.arange(n_nets), counts)
    usable = counts > 0
    sign_tie = np.where(np.arange(k)[:, None] < np.arange(k)[None, :], -1.0, 1.0)
    for _ in range(int(iterations)):
        force = np.zeros((k, 2))
        if len(node):
            mc = pos[node] + off
            sums = np.zeros((n_nets, 2))
            np.add.at(sums, net_of_member, mc)
            netc = np.zeros((n_nets, 2))
            netc[usable] = sums[usable] / counts[usable, None]
            pull = k_att * netw[net_of_member, None] * (netc[net_of_member] - mc)
            np.add.at(force, node, pull)
        if k > 1:
            dx = pos[:, 0][:, None] - pos[:, 0][None, :]
            dy = pos[:, 1][:, None] - pos[:, 1][None, :]
            ox = half[:, 0][:, None] + half[:, 0][None, :] + gap - np.abs(dx)
            oy = half[:, 1][:, None] + half[:, 1][None, :] + gap - np.abs(dy)
            hit = (ox > 0) & (oy > 0)
            np.fill_diagonal(hit, False)
            along_x = hit & (ox <= oy)
            along_y = hit & (ox > oy)
            sx = np.where(dx > 0, 1.0, np.where(dx < 0, -1.0, sign_tie))
            sy = np.where(dy > 0, 1.0, np.where(dy < 0, -1.0, sign_tie))
            force[:, 0] += np.where(along_x, 0.5 * ox * sx, 0.0).sum(axis=1)
            force[:, 1] += np.where(along_y, 0.5 * oy * sy, 0.0).sum(axis=1)
        norm = np.hypot(force[:, 0], force[:, 1])
        scale = np.where(norm > step, step / np.where(norm > 0, norm, 1.0), 1.0)
        pos += force * scale[:, None]
        step *= decay
    return pos
