# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the per-pixel hot loops.

Each function has a numpy twin in ``aepm.kernels._numpy`` that must produce
bit-identical output; ``aepm.kernels`` picks whichever backend is available.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def hist256(const double[:, ::1] img):
    """Count pixels per gray level, bin q = floor(v*255 + 0.5)."""
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(256, dtype=np.int64)
    cdef long long[::1] o = out
    cdef Py_ssize_t y, x
    cdef int q
    for y in range(h):
        for x in range(w):
            q = <int>floor(img[y, x] * 255.0 + 0.5)
            o[q] += 1
    return out


def apply_lut(const double[:, ::1] img, const double[::1] lut, out=None):
    """Map each pixel v to lut[floor(v*255 + 0.5)]; img must be in [0, 1]."""
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] res
    if out is None:
        res = np.empty((h, w), dtype=np.float64)
    else:
        res = out
    cdef double[:, ::1] o = res
    cdef Py_ssize_t y, x
    for y in range(h):
        for x in range(w):
            o[y, x] = lut[<int>floor(img[y, x] * 255.0 + 0.5)]
    return res


def edge_pair_samples(const double[:, ::1] g, const long long[::1] cols, int offset):
    """Pixel pairs g[i, c-offset], g[i, c+offset] around 0-based edge columns.

    Rows whose sample columns fall outside the image or hit a zero pixel
    are dropped. Returns (left, right) float64 arrays.
    """
    cdef Py_ssize_t n = cols.shape[0], w = g.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] left = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] right = np.empty(n, dtype=np.float64)
    cdef double[::1] lv = left
    cdef double[::1] rv = right
    cdef Py_ssize_t i, m = 0
    cdef long long c
    cdef double l, r
    for i in range(n):
        c = cols[i]
        if c - offset < 0 or c + offset >= w:
            continue
        l = g[i, c - offset]
        r = g[i, c + offset]
        if l > 0.0 and r > 0.0:
            lv[m] = l
            rv[m] = r
            m += 1
    return left[:m].copy(), right[:m].copy()


cdef inline int _find_root(int* parent, int i) nogil:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def label_components(const cnp.uint8_t[:, ::1] mask, int connectivity):
    """Two-pass union-find labeling of nonzero pixels.

    Final labels are 1..L in order of each component's first pixel in a
    row-major scan. Returns (labels int32 array, sizes int64 array of len L).
    """
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] labels = np.zeros((h, w), dtype=np.int32)
    cdef int[:, ::1] lab = labels
    # provisional labels; checkerboard is the worst case
    cdef cnp.ndarray[cnp.int32_t, ndim=1] parent_arr = np.zeros(h * w // 2 + 2, dtype=np.int32)
    cdef int* parent = <int*>cnp.PyArray_DATA(parent_arr)
    cdef int next_label = 1
    cdef int cur, best, r1, r2
    cdef Py_ssize_t y, x

    for y in range(h):
        for x in range(w):
            if mask[y, x] == 0:
                continue
            best = 0
            if x > 0 and lab[y, x - 1] != 0:
                best = lab[y, x - 1]
            if y > 0:
                if lab[y - 1, x] != 0:
                    cur = lab[y - 1, x]
                    if best == 0:
                        best = cur
                    elif cur != best:
                        r1 = _find_root(parent, best)
                        r2 = _find_root(parent, cur)
                        if r1 < r2:
                            parent[r2] = r1
                        else:
                            parent[r1] = r2
                if connectivity == 8:
                    if x > 0 and lab[y - 1, x - 1] != 0:
                        cur = lab[y - 1, x - 1]
                        if best == 0:
                            best = cur
                        elif cur != best:
                            r1 = _find_root(parent, best)
                            r2 = _find_root(parent, cur)
                            if r1 < r2:
                                parent[r2] = r1
                            else:
                                parent[r1] = r2
                    if x + 1 < w and lab[y - 1, x + 1] != 0:
                        cur = lab[y - 1, x + 1]
                        if best == 0:
                            best = cur
                        elif cur != best:
                            r1 = _find_root(parent, best)
                            r2 = _find_root(parent, cur)
                            if r1 < r2:
                                parent[r2] = r1
                            else:
                                parent[r1] = r2
            if best == 0:
                parent[next_label] = next_label
                lab[y, x] = next_label
                next_label += 1
            else:
                lab[y, x] = best

    # second pass: resolve roots, renumber by first row-major appearance
    cdef cnp.ndarray[cnp.int32_t, ndim=1] final_arr = np.zeros(next_label, dtype=np.int32)
    cdef int* final = <int*>cnp.PyArray_DATA(final_arr)
    cdef list sizes = []
    cdef int n_final = 0
    cdef int root, f
    for y in range(h):
        for x in range(w):
            cur = lab[y, x]
            if cur == 0:
                continue
            root = _find_root(parent, cur)
            f = final[root]
            if f == 0:
                n_final += 1
                f = n_final
                final[root] = f
                sizes.append(0)
            lab[y, x] = f
            sizes[f - 1] += 1

    return labels, np.asarray(sizes, dtype=np.int64)


def rough_edge_scan(const double[:, ::1] g, double mu):
    """Per-row first column x (1-based) with 0 < g < mu.

    Stops before the first row with no qualifying pixel or with a selected
    x <= 2; that row is not included. Returns int32 column array.
    """
    cdef Py_ssize_t h = g.shape[0], w = g.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] xs = np.empty(h, dtype=np.int32)
    cdef int[::1] xv = xs
    cdef Py_ssize_t y, x
    cdef int sel, found
    cdef Py_ssize_t n = 0
    cdef double v
    for y in range(h):
        found = 0
        sel = 0
        for x in range(w):
            v = g[y, x]
            if v > 0.0 and v < mu:
                sel = <int>x + 1
                found = 1
                break
        if not found or sel <= 2:
            break
        xv[n] = sel
        n += 1
    return xs[:n].copy()
