# cython: language_level=3
"""Compiled versions of the geometry kernels (see ``_fallback.py``)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND = "cython"


def hpwl(double[::1] cx, double[::1] cy, const cnp.int64_t[::1] ptr,
         const cnp.int64_t[::1] idx, double[::1] cost):
    cdef Py_ssize_t e, m, i
    cdef double total = 0.0, xmin, xmax, ymin, ymax
    for e in range(ptr.shape[0] - 1):
        if ptr[e + 1] - ptr[e] < 2:
            continue
        i = idx[ptr[e]]
        xmin = xmax = cx[i]
        ymin = ymax = cy[i]
        for m in range(ptr[e] + 1, ptr[e + 1]):
            i = idx[m]
            if cx[i] < xmin:
                xmin = cx[i]
            elif cx[i] > xmax:
                xmax = cx[i]
            if cy[i] < ymin:
                ymin = cy[i]
            elif cy[i] > ymax:
                ymax = cy[i]
        total += cost[e] * ((xmax - xmin) + (ymax - ymin))
    return total


cdef inline int _least(double xi, double yi, double wi, double hi,
                       double xj, double yj, double wj, double hj,
                       double a, double* best) noexcept nogil:
    cdef double v
    cdef int k = 1
    best[0] = xi + wi + a - xj
    v = yi + hi + a - yj
    if v < best[0]:
        best[0] = v
        k = 2
    v = xj + wj + a - xi
    if v < best[0]:
        best[0] = v
        k = 3
    v = yj + hj + a - yi
    if v < best[0]:
        best[0] = v
        k = 4
    return k


def separation_deficit(double[::1] x, double[::1] y, double[::1] w, double[::1] h,
                       double[:, ::1] dist, double tol):
    cdef Py_ssize_t n = x.shape[0], i, j
    cdef double best
    out_i = []
    out_j = []
    out_m = []
    for i in range(n):
        for j in range(i + 1, n):
            _least(x[i], y[i], w[i], h[i], x[j], y[j], w[j], h[j], dist[i, j], &best)
            if best > tol:
                out_i.append(i)
                out_j.append(j)
                out_m.append(best)
    return (np.asarray(out_i, dtype=np.int64), np.asarray(out_j, dtype=np.int64),
            np.asarray(out_m, dtype=float))


def least_violated(double[::1] x, double[::1] y, double[::1] w, double[::1] h,
                   double[:, ::1] dist):
    cdef Py_ssize_t n = x.shape[0], i, j
    cdef double best
    out = np.zeros((n, n), dtype=np.int8)
    cdef cnp.int8_t[:, ::1] r = out
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                r[i, j] = _least(x[i], y[i], w[i], h[i], x[j], y[j], w[j], h[j],
                                 dist[i, j], &best)
    return out


def proximity(double px, double py, double[::1] x, double[::1] y,
              double[::1] w, double[::1] h):
    cdef Py_ssize_t n = x.shape[0], i
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double m, v
    for i in range(n):
        m = fabs(x[i] - px)
        v = fabs(x[i] + w[i] - px)
        if v > m:
            m = v
        v = fabs(y[i] - py)
        if v > m:
            m = v
        v = fabs(y[i] + h[i] - py)
        if v > m:
            m = v
        o[i] = m
    return out


def fdgd_run(pos_in, double[:, ::1] half, double[:, ::1] gap,
             const cnp.int64_t[::1] ptr, const cnp.int64_t[::1] node,
             double[:, ::1] off, double[::1] netw, long iterations,
             double step, double decay, double k_att):
    pos_arr = np.array(pos_in, dtype=float, order="C")
    cdef double[:, ::1] pos = pos_arr
    cdef Py_ssize_t k = pos.shape[0], n_nets = ptr.shape[0] - 1
    cdef Py_ssize_t it, i, j, e, m, cnt
    cdef double[:, ::1] force = np.zeros((k, 2))
    cdef double cxs, cys, dx, dy, ox, oy, sx, sy, nrm, sc, mx, my
    with nogil:
        for it in range(iterations):
            for i in range(k):
                force[i, 0] = 0.0
                force[i, 1] = 0.0
            for e in range(n_nets):
                cnt = ptr[e + 1] - ptr[e]
                if cnt == 0:
                    continue
                cxs = 0.0
                cys = 0.0
                for m in range(ptr[e], ptr[e + 1]):
                    cxs += pos[node[m], 0] + off[m, 0]
                    cys += pos[node[m], 1] + off[m, 1]
                cxs /= cnt
                cys /= cnt
                for m in range(ptr[e], ptr[e + 1]):
                    mx = pos[node[m], 0] + off[m, 0]
                    my = pos[node[m], 1] + off[m, 1]
                    force[node[m], 0] += k_att * netw[e] * (cxs - mx)
                    force[node[m], 1] += k_att * netw[e] * (cys - my)
            for i in range(k):
                for j in range(k):
                    if i == j:
                        continue
                    dx = pos[i, 0] - pos[j, 0]
                    dy = pos[i, 1] - pos[j, 1]
                    ox = half[i, 0] + half[j, 0] + gap[i, j] - fabs(dx)
                    oy = half[i, 1] + half[j, 1] + gap[i, j] - fabs(dy)
                    if ox <= 0 or oy <= 0:
                        continue
                    if ox <= oy:
                        if dx > 0:
                            sx = 1.0
                        elif dx < 0:
                            sx = -1.0
                        else:
                            sx = -1.0 if i < j else 1.0
                        force[i, 0] += 0.5 * ox * sx
                    else:
                        if dy > 0:
                            sy = 1.0
                        elif dy < 0:
                            sy = -1.0
                        else:
                            sy = -1.0 if i < j else 1.0
                        force[i, 1] += 0.5 * oy * sy
            for i in range(k):
                nrm = sqrt(force[i, 0] * force[i, 0] + force[i, 1] * force[i, 1])
                sc = step / nrm if nrm > step else 1.0
                pos[i, 0] += force[i, 0] * sc
                pos[i, 1] += force[i, 1] * sc
            step *= decay
    return pos_arr
