"""Pure-Python hot loops for discrete-channel trials.

Mirrors ``_ccore.pyx`` line for line; used when the extension is not built
or when ``PMFEEDBACK_PURE_PYTHON`` is set.
"""

from bisect import bisect_left, bisect_right


def dmc_encode(theta, vs, us, modulus, thresholds, cum_rows, tables):
    """Run the randomized encoder on the integer grid.

    ``vs`` are grid shifts, ``us`` uniform floats driving the channel.
    Returns ``(thetas, xs, ys)`` where ``thetas`` holds the n + 1 states
    including the initial one.
    """
    n = len(vs)
    thetas = [theta]
    xs = []
    ys = []
    for j in range(n):
        x = bisect_right(thresholds, theta) - 1
        row = cum_rows[x]
        y = bisect_right(row, us[j])
        if y >= len(row):
            y = len(row) - 1
        a, b, d = tables[y][x]
        theta = ((a * theta + b) // d + vs[j]) % modulus
        xs.append(x)
        ys.append(y)
        thetas.append(theta)
    return thetas, xs, ys


def _lower_inverse(target, values, segs, thresholds):
    j = bisect_left(values, target)
    if j == 0:
        return 0
    a, b, d = segs[j - 1]
    if a == 0:
        return thresholds[j]
    c = -((b - target * d) // a)
    t = thresholds[j]
    return c if c < t else t


def dmc_decode(start, length, ys, vs, modulus, thresholds, values, tables):
    """Backward interval recursion on the integer grid.

    Returns ``(start, lengths, failed)``: the final start, the lengths
    |J_0| .. |J_k| reached, and the index of the step that collapsed the
    interval to zero length (``-1`` if none did).
    """
    n = len(ys)
    lengths = [length]
    for k in range(n):
        j = n - 1 - k
        y = ys[j]
        vals = values[y]
        segs = tables[y]
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
