"""Pure-Python reference implementation of the hot kernels.

Keep this file and _native.pyx in lockstep: same accepted inputs, same
arithmetic, same results.  tests/test_kernels.py enforces the equivalence.
"""

from __future__ import annotations

from math import ceil, sqrt

__all__ = ["resample_polyline", "scan_line"]


def resample_polyline(coords, closed, interval):
    """Resample a polyline at even arc-length steps.

    ``coords`` is a flat [x0, y0, x1, y1, ...] sequence.  The whole polyline
    (closing segment included when ``closed``) is divided into
    ceil(L / interval) equal arc-length steps, so consecutive samples are
    never farther apart than ``interval`` and the first/last points are
    exact.  Closed polylines get the start point appended at the end.

    Returns a flat list [x0, y0, ...].
    """
    flat = [float(v) for v in coords]
    npts = len(flat) // 2
    if npts < 2:
        raise ValueError("resample_polyline needs at least 2 points")
    if interval <= 0.0:
        raise ValueError("interval must be positive")

    seg_count = npts - 1 + (1 if closed else 0)
    cum = [0.0] * (seg_count + 1)
    total = 0.0
    for s in range(seg_count):
        a = s
        b = (s + 1) % npts
        dx = flat[2 * b] - flat[2 * a]
        dy = flat[2 * b + 1] - flat[2 * a + 1]
        total += sqrt(dx * dx + dy * dy)
        cum[s + 1] = total

    n = int(ceil(total / interval))
    if n < 1:
        n = 1

    out = [flat[0], flat[1]]
    seg = 0
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
    """Tokenize one G-code line into (letter, code, words, comment).

    Accepts ``G``/``M`` commands with an integer code of 1-4 digits followed
    by letter+number words and an optional ``;`` comment.  Word numbers are
    plain decimals (sign and one dot, no exponent: in G-code an ``E`` after
    digits starts the extrusion word, it is never scientific notation).

    Returns None when the line does not scan; callers keep such lines
    verbatim.
    """
    n = len(line)
    i = 0
    while i < n and (line[i] == " " or line[i] == "\t"):
        i += 1
    if i >= n:
        return None
    c = line[i]
    if c == "G" or c == "g":
        letter = "G"
    elif c == "M" or c == "m":
        letter = "M"
    else:
        return None
    i += 1

    code = 0
    digits = 0
    while i < n and "0" <= line[i] <= "9":
        code = code * 10 + (ord(line[i]) - 48)
        digits += 1
        i += 1
    if digits == 0 or digits > 4:
        return None

    words = []
    comment = None
    while True:
        while i < n and (line[i] == " " or line[i] == "\t"):
            i += 1
        if i >= n:
            break
        ch = line[i]
        if ch == ";":
            comment = line[i + 1 :]
            break
        if "a" <= ch <= "z":
            ch = chr(ord(ch) - 32)
        elif not ("A" <= ch <= "Z"):
            return None
        i += 1
        j = i
        if j < n and (line[j] == "+" or line[j] == "-"):
            j += 1
        ndigits = 0
        saw_dot = False
        while j < n:
            cj = line[j]
            if "0" <= cj <= "9":
                ndigits += 1
                j += 1
            elif cj == "." and not saw_dot:
                saw_dot = True
                j += 1
            else:
                break
        if ndigits == 0:
            return None
        try:
            value = float(line[i:j])
        except ValueError:  # pragma: no cover - token shape prevents this
            return None
        words.append((ch, value))
        i = j

    return (letter, code, tuple(words), comment)
