# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled oracle-pass kernel. Same contract as _kernels_py.segment_pass."""

BACKEND = "compiled"


cdef void _x_sweep(double complex[::1] psi, const unsigned char[::1] xb,
                   int m, int cache_dim, Py_ssize_t p_pad, int d_w) nogil:
    cdef Py_ssize_t idx, i0, c, j, a, b
    cdef int r, mask
    cdef Py_ssize_t row = 2 * d_w           # one (index, answer, work) row
    cdef Py_ssize_t cstride = p_pad * row   # one cache block
    cdef double complex tmp
    for idx in range(xb.shape[0]):
        if xb[idx]:
            i0 = idx // m
            r = <int>(idx % m)
            mask = 1 << (m - 1 - r)
            for c in range(cache_dim):
                if c < (c ^ mask):
                    a = c * cstride + i0 * row
                    b = (c ^ mask) * cstride + i0 * row
                    for j in range(row):
                        tmp = psi[a + j]
                        psi[a + j] = psi[b + j]
                        psi[b + j] = tmp


def segment_pass(double complex[::1] psi, const unsigned char[::1] xb,
                 const long long[::1] yv, int m, int d_w,
                 const unsigned char[:, ::1] gflip):
    cdef int cache_dim = <int>gflip.shape[0]
    cdef Py_ssize_t row = 2 * d_w
    cdef Py_ssize_t p_pad = psi.shape[0] // (cache_dim * row)
    cdef Py_ssize_t cstride = p_pad * row
    cdef Py_ssize_t i0, c, w, a
    cdef long long v
    cdef double complex tmp
    with nogil:
        _x_sweep(psi, xb, m, cache_dim, p_pad, d_w)
        for i0 in range(yv.shape[0]):
            v = yv[i0]
            for c in range(cache_dim):
                if gflip[c, v]:
                    a = c * cstride + i0 * row
                    for w in range(d_w):
                        tmp = psi[a + w]
                        psi[a + w] = psi[a + d_w + w]
                        psi[a + d_w + w] = tmp
        _x_sweep(psi, xb, m, cache_dim, p_pad, d_w)
