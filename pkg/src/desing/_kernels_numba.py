"""Numba-jitted twins of the hot tensor kernels.

Same contracts as ``_kernels_numpy``; explicit loops with on-the-fly
base-m digit decoding of the flattened multi-indices.  Importing this
module requires numba; the backend module guards the import.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def contract_full_flat(a, b, m, s2, t2, s1, t1):
    npts = a.shape[0]
    ms2 = m**s2
    mt2 = m**t2
    ms1 = m**s1
    mt1 = m**t1
    out = np.zeros((npts, ms2, mt2))
    for p in range(npts):
        for i2 in range(ms2):
            for j2 in range(mt2):
                acc = 0.0
                for i1 in range(ms1):
                    for j1 in range(mt1):
                        acc += a[p, i2 * mt1 + j1, j2 * ms1 + i1] * b[p, i1, j1]
                out[p, i2, j2] = acc
    return out


@njit(cache=True)
def apply_metric_slot(arr, mat, m, pos, nslots):
    npts = arr.shape[0]
    total = arr.shape[1]
    stride = m**(nslots - 1 - pos)
    out = np.zeros((npts, total))
    for p in range(npts):
        for idx in range(total):
            e = (idx // stride) % m
            base = idx - e * stride
            acc = 0.0
            for d in range(m):
                acc += mat[p, e, d] * arr[p, base + d * stride]
            out[p, idx] = acc
    return out


@njit(cache=True)
def norm_sq_flat(a, g, ginv, m, sigma, tau):
    nslots = sigma + tau
    c = a
    for n in range(sigma):
        c = apply_metric_slot(c, g, m, n, nslots)
    for n in range(tau):
        c = apply_metric_slot(c, ginv, m, sigma + n, nslots)
    npts = a.shape[0]
    out = np.zeros(npts)
    for p in range(npts):
        acc = 0.0
        for idx in range(a.shape[1]):
            acc += a[p, idx] * c[p, idx]
        out[p] = acc
    return out


@njit(cache=True)
def christoffel_flat(ginv, dg):
    npts = ginv.shape[0]
    m = ginv.shape[1]
    gamma = np.zeros((npts, m, m, m))
    for p in range(npts):
        for c in range(m):
            for i in range(m):
                for j in range(m):
                    acc = 0.0
                    for l in range(m):
                        acc += ginv[p, c, l] * (dg[p, j, l, i] + dg[p, i, l, j]
                                                - dg[p, i, j, l])
                    gamma[p, c, i, j] = 0.5 * acc
    return gamma


@njit(cache=True)
def covd_correction_flat(a, gamma, m, sigma, tau):
    npts = a.shape[0]
    nslots = sigma + tau
    total = a.shape[1]
    corr = np.zeros((npts, total, m))
    for n in range(nslots):
        stride = m**(nslots - 1 - n)
        contra = n < sigma
        for p in range(npts):
            for idx in range(total):
                e = (idx // stride) % m
                base = idx - e * stride
                for k in range(m):
                    acc = 0.0
                    if contra:
                        for l in range(m):
                            acc += gamma[p, e, k, l] * a[p, base + l * stride]
                        corr[p, idx, k] += acc
                    else:
                        for l in range(m):
                            acc += gamma[p, l, k, e] * a[p, base + l * stride]
                        corr[p, idx, k] -= acc
    return corr
