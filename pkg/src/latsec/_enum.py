"""Numba kernels for Fincke-Pohst enumeration.

The quadratic form is given in Cholesky shape: for an integer vector z and a
real offset u, the squared norm is

    sum_i d[i] * (z[i] + u[i] + sum_{j>i} mu[i, j] * (z[j] + u[j]))**2

so that levels are visited from m-1 down to 0.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def enumerate_ball(mu, d, u, bound, half, skip_zero, want_coords, cap):
    """Depth-first enumeration of all integer z with norm <= bound.

    half: keep only one of each +-z pair (requires u == 0); the origin is
    never returned in that mode.
    Returns (coords, norms, overflow). coords has zero rows unless
    want_coords; overflow is True when more than cap points were found.
    """
    m = d.shape[0]
    z = np.zeros(m, np.int64)
    hi = np.zeros(m, np.int64)
    ctr = np.zeros(m)
    part = np.zeros(m + 1)
    nz_above = np.zeros(m + 1, np.bool_)

    capacity = 1024
    norms = np.empty(capacity)
    coords = np.empty((capacity if want_coords else 0, m), np.int64)
    count = 0

    k = m - 1
    entering = True
    while True:
        if entering:
            s = u[k]
            for j in range(k + 1, m):
                s += mu[k, j] * (z[j] + u[j])
            c = -s
            ctr[k] = c
            rem = bound - part[k + 1]
            if rem < 0.0:
                rem = 0.0
            w = math.sqrt(rem / d[k])
            lo = math.ceil(c - w - 1e-12)
            hi[k] = math.floor(c + w + 1e-12)
            if half and not nz_above[k + 1] and lo < 0:
                lo = 0
            z[k] = lo
            entering = False

        if z[k] > hi[k]:
            k += 1
            if k == m:
                break
            z[k] += 1
            continue

        diff = z[k] - ctr[k]
        p = part[k + 1] + d[k] * diff * diff
        if p > bound:
            z[k] += 1
            continue
        part[k] = p
        nz_above[k] = nz_above[k + 1] or z[k] != 0

        if k == 0:
            if nz_above[0] or not (half or skip_zero):
                if count >= cap:
                    return coords[:count], norms[:count], True
                if count == capacity:
                    capacity *= 2
                    new_norms = np.empty(capacity)
                    new_norms[:count] = norms[:count]
                    norms = new_norms
                    if want_coords:
                        new_coords = np.empty((capacity, m), np.int64)
                        new_coords[:count] = coords[:count]
                        coords = new_coords
                norms[count] = p
                if want_coords:
                    for j in range(m):
                        coords[count, j] = z[j]
                count += 1
            z[0] += 1
        else:
            k -= 1
            entering = True

    if want_coords:
        return coords[:count], norms[:count], False
    return coords[:0], norms[:count], False
