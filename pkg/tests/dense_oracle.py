"""Flat two-mode reference implementation for small cutoffs.

Everything here works on ``(N+1)**2``-dimensional matrices built from ladder
operators and ``scipy.linalg.expm``; it shares no code with the sector
engine and exists only to check it.
"""

import math

import numpy as np
from scipy.linalg import expm
from scipy.special import comb


class DenseModel:
    def __init__(self, n_max):
        self.n_max = n_max
        d = n_max + 1
        self.d = d
        ann = np.diag(np.sqrt(np.arange(1, d)), 1)
        eye = np.eye(d)
        self.a = np.kron(ann, eye)
        self.b = np.kron(eye, ann)
        self.na = self.a.conj().T @ self.a
        self.nb = self.b.conj().T @ self.b
        gen = self.a.conj().T @ self.b + self.a @ self.b.conj().T
        self.bs = expm(0.25j * math.pi * gen)
        # flat index of |m_a, m_b>
        self.index = lambda ma, mb: ma * d + mb

    def phase(self, phi):
        return expm(1j * phi * self.na)

    def kerr(self, kind, chi):
        if kind == "SK":
            h = self.a.conj().T @ self.a.conj().T @ self.a @ self.a
        else:
            h = self.na @ self.nb
        return expm(1j * chi * h)

    def input_density(self, weights):
        rho = np.zeros((self.d ** 2, self.d ** 2), dtype=complex)
        for n, w in enumerate(weights[: self.n_max + 1]):
            i = self.index(n, 0)
            rho[i, i] = w
        return rho

    def input_ket(self, amplitudes):
        psi = np.zeros(self.d ** 2, dtype=complex)
        for n, c in enumerate(amplitudes[: self.n_max + 1]):
            psi[self.index(n, 0)] = c
        return psi

    def loss_kraus(self, transmission, mode="a"):
        d = self.d
        ops = []
        for j in range(d):
            single = np.zeros((d, d))
            for m in range(j, d):
                single[m - j, m] = math.sqrt(comb(m, j) * transmission ** (m - j) * (1 - transmission) ** j)
            ops.append(np.kron(single, np.eye(d)) if mode == "a" else np.kron(np.eye(d), single))
        return ops

    def before_phase(self, rho, kind, chi, eta_loss=0.0, loss_mode="a"):
        u = self.bs @ self.kerr(kind, chi) @ self.phase(math.pi / 2) @ self.bs
        rho = u @ rho @ u.conj().T
        if eta_loss > 0:
            rho = sum(k @ rho @ k.conj().T for k in self.loss_kraus(1 - eta_loss, loss_mode))
        return rho

    def after_second_bs(self, rho, kind, chi):
        return self.before_phase(rho, kind, chi)

    def output(self, rho, kind, chi, phi, eta_loss=0.0, loss_mode="a"):
        rho = self.before_phase(rho, kind, chi, eta_loss, loss_mode)
        u = self.bs @ self.phase(phi)
        return u @ rho @ u.conj().T

    def output_derivative(self, rho, kind, chi, phi, eta_loss=0.0, loss_mode="a"):
        rho = self.before_phase(rho, kind, chi, eta_loss, loss_mode)
        p = self.phase(phi)
        rt = p @ rho @ p.conj().T
        drt = 1j * (self.na @ rt - rt @ self.na)
        return self.bs @ drt @ self.bs.conj().T

    def counts(self, rho):
        """``table[m_a, m_b]`` restricted to ``m_a + m_b <= n_max``."""
        diag = np.real(np.diag(rho)).reshape(self.d, self.d)
        mask = np.add.outer(np.arange(self.d), np.arange(self.d)) <= self.n_max
        return np.where(mask, diag, 0.0)

    def qfi(self, rho, floor=1e-12):
        lam, vec = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        g = np.abs(vec.conj().T @ self.na @ vec) ** 2
        total = 0.0
        for k in range(lam.size):
            for l in range(lam.size):
                s = lam[k] + lam[l]
                if s > floor:
                    total += (lam[k] - lam[l]) ** 2 / s * g[k, l]
        return 2.0 * total

    def moments(self, rho):
        ex = lambda op: np.trace(rho @ op)
        ad, bd = self.a.conj().T, self.b.conj().T
        return {
            "a": ex(self.a), "b": ex(self.b), "n_a": ex(self.na).real, "n_b": ex(self.nb).real,
            "adag_b": ex(ad @ self.b), "ab": ex(self.a @ self.b),
            "na_nb": ex(self.na @ self.nb).real, "adag2_a2": ex(ad @ ad @ self.a @ self.a).real,
            "bdag2_b2": ex(bd @ bd @ self.b @ self.b).real,
        }


def smear(table, eta):
    n = table.shape[0] - 1
    L = np.zeros((n + 1, n + 1))
    for m in range(n + 1):
        for k in range(m + 1):
            L[k, m] = comb(m, k) * eta ** k * (1 - eta) ** (m - k)
    return L @ table @ L.T


def engine_to_dense(model, state):
    """Flat density matrix of a sector-resolved engine state (for comparisons only)."""
    dim = model.d ** 2
    if hasattr(state, "sectors"):
        psi = np.zeros(dim, dtype=complex)
        for n, vec in enumerate(state.sectors):
            for k, c in enumerate(vec):
                psi[model.index(k, n - k)] = c
        return np.outer(psi, psi.conj())
    rho = np.zeros((dim, dim), dtype=complex)
    for n, f in enumerate(state.factors):
        block = f @ f.conj().T
        idx = [model.index(k, n - k) for k in range(n + 1)]
        rho[np.ix_(idx, idx)] = block
    return rho
