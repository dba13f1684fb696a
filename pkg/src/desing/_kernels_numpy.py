"""Pure-numpy reference implementations of the hot tensor kernels.

All kernels operate on point-flattened arrays: the leading axis enumerates
grid points, multi-index slot groups are flattened row-major (contravariant
slots first), matching the lexicographic enumeration used by the tensor
layer.  The numba twins in ``_kernels_numba`` implement identical math.
"""

from __future__ import annotations

import numpy as np


def contract_full_flat(a: np.ndarray, b: np.ndarray, m: int,
                       s2: int, t2: int, s1: int, t1: int) -> np.ndarray:
    """Complete contraction of a (s2+t1, t2+s1) block with a (s1, t1) block.

    a has shape (npts, m**(s2+t1), m**(t2+s1)), b (npts, m**s1, m**t1);
    the trailing t1 contravariant slots of a pair with b's covariant slots
    and the trailing s1 covariant slots of a pair with b's contravariant
    slots.  Returns (npts, m**s2, m**t2).
    """
    npts = a.shape[0]
    ms2, mt1, mt2, ms1 = m**s2, m**t1, m**t2, m**s1
    a5 = a.reshape(npts, ms2, mt1, mt2, ms1)
    return np.einsum("pabcd,pdb->pac", a5, b, optimize=True).reshape(npts, ms2, mt2)


def apply_metric_slot(arr: np.ndarray, mat: np.ndarray, m: int,
                      pos: int, nslots: int) -> np.ndarray:
    """Contract a per-point (m, m) matrix against slot ``pos`` of ``arr``.

    arr has shape (npts, m**nslots); out[p, ..e..] = sum_d mat[p,e,d] *
    arr[p, ..d..] with e,d in slot position pos.
    """
    npts = arr.shape[0]
    pre, post = m**pos, m**(nslots - 1 - pos)
    a4 = arr.reshape(npts, pre, m, post)
    out = np.einsum("ped,padb->paeb", mat, a4, optimize=True)
    return out.reshape(npts, m**nslots)


def norm_sq_flat(a: np.ndarray, g: np.ndarray, ginv: np.ndarray, m: int,
                 sigma: int, tau: int) -> np.ndarray:
    """Squared induced bundle norm per point.

    a has shape (npts, m**(sigma+tau)) with contravariant slots leading;
    g and ginv are (npts, m, m).  Lowers every contravariant slot with g,
    raises every covariant slot with ginv, then sums the pairing.
    """
    nslots = sigma + tau
    c = a
    for n in range(sigma):
        c = apply_metric_slot(c, g, m, n, nslots)
    for n in range(tau):
        c = apply_metric_slot(c, ginv, m, sigma + n, nslots)
    if nslots == 0:
        return (a * c).reshape(a.shape[0])
    return np.einsum("pi,pi->p", a, c, optimize=True)


def christoffel_flat(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Levi-Civita symbols from metric inverse and metric derivatives.

    ginv is (npts, m, m); dg[p, i, j, k] holds the k-th partial of g_ij.
    Returns gamma[p, c, i, j] symmetric in (i, j).
    """
    # 0.5 * g^{cl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij})
    t = np.einsum("pcl,pjli->pcij", ginv, dg, optimize=True)
    t += np.einsum("pcl,pilj->pcij", ginv, dg, optimize=True)
    t -= np.einsum("pcl,pijl->pcij", ginv, dg, optimize=True)
    return 0.5 * t


def covd_correction_flat(a: np.ndarray, gamma: np.ndarray, m: int,
                         sigma: int, tau: int) -> np.ndarray:
    """Christoffel correction terms of the covariant derivative.

    a has shape (npts, m**(sigma+tau)); gamma[p, c, k, l].  Returns
    corr[p, I, k] = sum over contravariant slots of +Gamma^{i_n}_{kl} a(l in
    slot n) minus the analogous sum with Gamma^{l}_{k j_n} over covariant
    slots; the trailing axis is the new derivative index k.
    """
    npts = a.shape[0]
    nslots = sigma + tau
    corr = np.zeros((npts, m**nslots, m))
    for n in range(nslots):
        pre, post = m**n, m**(nslots - 1 - n)
        a4 = a.reshape(npts, pre, m, post)
        if n < sigma:
            term = np.einsum("pckl,palb->pacbk", gamma, a4, optimize=True)
            corr += term.reshape(npts, m**nslots, m)
        else:
            term = np.einsum("plkc,palb->pacbk", gamma, a4, optimize=True)
            corr -= term.reshape(npts, m**nslots, m)
    return corr
