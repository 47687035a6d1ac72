"""Pure-numpy kernels, used when the compiled extension is unavailable."""

import numpy as np


def kraus_branches(F, coeff, on_mode_a):
    n = F.shape[0] - 1
    out = np.zeros((n + 1, n + 1, F.shape[1]), dtype=np.complex128)
    k = np.arange(n + 1)
    for j in range(n + 1):
        if on_mode_a:
            out[j, : n + 1 - j] = coeff[j : n + 1, j][:, None] * F[j:]
        else:
            out[j, : n + 1 - j] = coeff[n - k[: n + 1 - j], j][:, None] * F[: n + 1 - j]
    return out


def sector_counts(amp, col_sector, col_offset, bs_flat, bs_offset, phi, n_max):
    P = np.zeros((n_max + 1, n_max + 1))
    D = np.zeros((n_max + 1, n_max + 1))
    if col_sector.size == 0:
        return P, D
    # columns are packed in sector order
    starts = np.flatnonzero(np.r_[True, col_sector[1:] != col_sector[:-1]])
    stops = np.r_[starts[1:], col_sector.size]
    for lo, hi in zip(starts, stops):
        n = int(col_sector[lo])
        dim = n + 1
        off = int(col_offset[lo])
        F = amp[off: off + dim * (hi - lo)].reshape(hi - lo, dim).T
        B = bs_flat[bs_offset[n]: bs_offset[n] + dim * dim].reshape(dim, dim)
        k = np.arange(dim)
        X = np.exp(1j * phi * k)[:, None] * F
        Y = B @ X
        dY = B @ (1j * k[:, None] * X)
        P[k, n - k] += np.sum(np.abs(Y) ** 2, axis=1)
        D[k, n - k] += 2.0 * np.sum((Y.conj() * dY).real, axis=1)
    return P, D
