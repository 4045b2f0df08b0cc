# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot loops for discrete-channel trials (see _pycore.py)."""


cdef Py_ssize_t _bisect_right(tuple seq, object x):
    cdef Py_ssize_t lo = 0, hi = len(seq), mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if x < seq[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef Py_ssize_t _bisect_right_f(tuple row, double u):
    cdef Py_ssize_t lo = 0, hi = len(row), mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if u < <double>row[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


cdef Py_ssize_t _bisect_left(tuple seq, object x):
    cdef Py_ssize_t lo = 0, hi = len(seq), mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if seq[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def dmc_encode(theta, list vs, list us, modulus, tuple thresholds, tuple cum_rows,
               tuple tables):
    cdef Py_ssize_t n = len(vs), j, x, y
    cdef tuple row, seg
    cdef list thetas = [theta], xs = [], ys = []
    for j in range(n):
        x = _bisect_right(thresholds, theta) - 1
        row = <tuple>cum_rows[x]
        y = _bisect_right_f(row, <double>us[j])
        if y >= len(row):
            y = len(row) - 1
        seg = <tuple>(<tuple>tables[y])[x]
        theta = ((seg[0] * theta + seg[1]) // seg[2] + vs[j]) % modulus
        xs.append(x)
        ys.append(y)
        thetas.append(theta)
    return thetas, xs, ys


cdef object _lower_inverse(object target, tuple values, tuple segs, tuple thresholds):
    cdef Py_ssize_t j = _bisect_left(values, target)
    cdef tuple seg
    if j == 0:
        return 0
    seg = <tuple>segs[j - 1]
    a = seg[0]
    if a == 0:
        return thresholds[j]
    c = -((seg[1] - target * seg[2]) // a)
    t = thresholds[j]
    return c if c < t else t


def dmc_decode(start, length, list ys, list vs, modulus, tuple thresholds, tuple values,
               tuple tables):
    cdef Py_ssize_t n = len(ys), k, j
    cdef list lengths = [length]
    cdef tuple vals, segs
    for k in range(n):
        j = n - 1 - k
        y = ys[j]
        vals = <tuple>values[y]
        segs = <tuple>tables[y]
        s = (start - vs[j]) % modulus
        e = s + length
        gs = _lower_inverse(s, vals, segs, thresholds)
        if e <= modulus:
            length = _lower_inverse(e, vals, segs, thresholds) - gs
        else:
            length = modulus - gs + _lower_inverse(e - modulus, vals, segs, thresholds)
        start = gs % modulus
        if length <= 0:
            return start, lengths, k
        lengths.append(length)
    return start, lengths, -1
