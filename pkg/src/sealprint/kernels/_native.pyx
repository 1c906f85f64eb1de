# cython: language_level=3
"""Compiled hot-path kernels.

Mirrors kernels/pure.py exactly; see that file for the contract.  Keep the
arithmetic order identical so both backends return bit-identical floats
(the extension is built with -ffp-contract=off for that reason).
"""

from cpython cimport array
from libc.math cimport ceil, sqrt

import array


def resample_polyline(coords, bint closed, double interval):
    cdef array.array buf = array.array("d", [float(v) for v in coords])
    cdef double[::1] flat = buf
    cdef Py_ssize_t npts = flat.shape[0] // 2
    if npts < 2:
        raise ValueError("resample_polyline needs at least 2 points")
    if interval <= 0.0:
        raise ValueError("interval must be positive")

    cdef Py_ssize_t seg_count = npts - 1 + (1 if closed else 0)
    cdef array.array cum_buf = array.array("d", bytes(8 * (seg_count + 1)))
    cdef double[::1] cum = cum_buf
    cdef double total = 0.0
    cdef double dx, dy
    cdef Py_ssize_t s, a, b
    cum[0] = 0.0
    for s in range(seg_count):
        a = s
        b = (s + 1) % npts
        dx = flat[2 * b] - flat[2 * a]
        dy = flat[2 * b + 1] - flat[2 * a + 1]
        total += sqrt(dx * dx + dy * dy)
        cum[s + 1] = total

    cdef Py_ssize_t n = <Py_ssize_t> ceil(total / interval)
    if n < 1:
        n = 1

    out = [flat[0], flat[1]]
    cdef Py_ssize_t seg = 0
    cdef Py_ssize_t k
    cdef double target, seglen, t
    for k in range(1, n):
        target = total * k / n
        while seg < seg_count - 1 and cum[seg + 1] < target:
            seg += 1
        a = seg
        b = (seg + 1) % npts
        seglen = cum[seg + 1] - cum[seg]
        t = (target - cum[seg]) / seglen if seglen > 0.0 else 0.0
        out.append(flat[2 * a] + t * (flat[2 * b] - flat[2 * a]))
        out.append(flat[2 * a + 1] + t * (flat[2 * b + 1] - flat[2 * a + 1]))
    if closed:
        out.append(flat[0])
        out.append(flat[1])
    else:
        out.append(flat[2 * (npts - 1)])
        out.append(flat[2 * (npts - 1) + 1])
    return out


def scan_line(line):
    cdef unicode text = line
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0
    cdef Py_UCS4 c, ch, cj

    while i < n and (text[i] == u" " or text[i] == u"\t"):
        i += 1
    if i >= n:
        return None
    c = text[i]
    if c == u"G" or c == u"g":
        letter = "G"
    elif c == u"M" or c == u"m":
        letter = "M"
    else:
        return None
    i += 1

    cdef long code = 0
    cdef int digits = 0
    while i < n:
        c = text[i]
        if c < u"0" or c > u"9":
            break
        code = code * 10 + (<long> c - 48)
        digits += 1
        i += 1
    if digits == 0 or digits > 4:
        return None

    words = []
    comment = None
    cdef Py_ssize_t j
    cdef int ndigits
    cdef bint saw_dot
    while True:
        while i < n and (text[i] == u" " or text[i] == u"\t"):
            i += 1
        if i >= n:
            break
        ch = text[i]
        if ch == u";":
            comment = text[i + 1 :]
            break
        if u"a" <= ch <= u"z":
            ch = <Py_UCS4> (<long> ch - 32)
        elif not (u"A" <= ch <= u"Z"):
            return None
        i += 1
        j = i
        if j < n and (text[j] == u"+" or text[j] == u"-"):
            j += 1
        ndigits = 0
        saw_dot = False
        while j < n:
            cj = text[j]
            if u"0" <= cj <= u"9":
                ndigits += 1
                j += 1
            elif cj == u"." and not saw_dot:
                saw_dot = True
                j += 1
            else:
                break
        if ndigits == 0:
            return None
        try:
            value = float(text[i:j])
        except ValueError:
            return None
        words.append((chr(ch), value))
        i = j

    return (letter, code, tuple(words), comment)
