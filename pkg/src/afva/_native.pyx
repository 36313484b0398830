# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_reference``.

Must stay bit-identical to the NumPy fallback: same neighbor order and
comparison for the pattern codes, same operation grouping for the resize.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

from afva._reference import UNIFORM_CODE_MAP

cdef cnp.int64_t[::1] _CODE_MAP = np.ascontiguousarray(UNIFORM_CODE_MAP)

# Same offsets as _reference.NEIGHBOR_OFFSETS: east first, counter-clockwise.
cdef int[8] _DR = [0, -1, -1, -1, 0, 1, 1, 1]
cdef int[8] _DC = [1, 1, 0, -1, -1, -1, 0, 1]


def lbp_counts(cnp.ndarray[cnp.float64_t, ndim=2] gray):
    cdef Py_ssize_t h = gray.shape[0]
    cdef Py_ssize_t w = gray.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(59, dtype=np.int64)
    cdef double[:, ::1] img = np.ascontiguousarray(gray)
    cdef cnp.int64_t[::1] out = counts
    cdef Py_ssize_t r, c
    cdef int k, code
    cdef double center

    for r in range(1, h - 1):
        for c in range(1, w - 1):
            center = img[r, c]
            code = 0
            for k in range(8):
                if img[r + _DR[k], c + _DC[k]] >= center:
                    code |= 1 << k
            out[_CODE_MAP[code]] += 1
    return counts


def resize_bilinear(cnp.ndarray[cnp.float64_t, ndim=2] src, Py_ssize_t width, Py_ssize_t height):
    cdef Py_ssize_t src_h = src.shape[0]
    cdef Py_ssize_t src_w = src.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((height, width), dtype=np.float64)
    cdef double[:, ::1] s = np.ascontiguousarray(src)
    cdef double[:, ::1] o = out
    cdef double scale_x = src_w / <double>width
    cdef double scale_y = src_h / <double>height
    cdef Py_ssize_t x, y, x0, y0, x1, y1
    cdef double sx, sy, fx, fy, top, bottom

    for y in range(height):
        sy = (y + 0.5) * scale_y - 0.5
        if sy < 0.0:
            sy = 0.0
        if sy > src_h - 1.0:
            sy = src_h - 1.0
        y0 = <Py_ssize_t>sy
        y1 = y0 + 1
        if y1 > src_h - 1:
            y1 = src_h - 1
        fy = sy - y0
        for x in range(width):
            sx = (x + 0.5) * scale_x - 0.5
            if sx < 0.0:
                sx = 0.0
            if sx > src_w - 1.0:
                sx = src_w - 1.0
            x0 = <Py_ssize_t>sx
            x1 = x0 + 1
            if x1 > src_w - 1:
                x1 = src_w - 1
            fx = sx - x0
            # Grouping mirrors the fallback: weights first, then row pairs.
            top = s[y0, x0] * ((1.0 - fy) * (1.0 - fx)) + s[y0, x1] * ((1.0 - fy) * fx)
            bottom = s[y1, x0] * (fy * (1.0 - fx)) + s[y1, x1] * (fy * fx)
            o[y, x] = top + bottom
    return out
