# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernel: sequential spin sweeps + salt swap proposals.

Mirrors brine._kernels_py exactly, consuming the same pre-generated random
arrays in the same order, so both backends produce bit-identical chains.
"""

from libc.math cimport exp


def run_sweeps(signed char[::1] spins, signed char[::1] salt,
               long long[::1] salt_pos, int[:, ::1] nbrs, int bc_spin,
               double J, double h, double kappa, double bias,
               double[:, ::1] u_spin, double[:, ::1] u_salt,
               long long[:, ::1] prop_part, long long[:, ::1] prop_site,
               long long[::1] out_M, long long[::1] out_Q,
               long long M, long long Q, double energy):
    """Advance the chain by out_M.shape[0] sweeps; returns updated caches.

    A sweep is one sequential pass of single-spin-flip Metropolis updates
    followed by n global salt-swap proposals (uniform particle, uniform
    target site; occupied targets are blocked).  `bias` shifts the log
    acceptance ratio (negative-control hook; zero for detailed balance).
    """
    cdef Py_ssize_t n_sweeps = out_M.shape[0]
    cdef Py_ssize_t n = spins.shape[0]
    cdef Py_ssize_t n_salt = salt_pos.shape[0]
    cdef Py_ssize_t deg = nbrs.shape[1]
    cdef Py_ssize_t s, i, j, k, x, src
    cdef int si, sf, st, nb, nbsum
    cdef long long acc_spin = 0, acc_salt = 0, blocked = 0
    cdef double dE

    for s in range(n_sweeps):
        for i in range(n):
            si = spins[i]
            nbsum = 0
            for j in range(deg):
                nb = nbrs[i, j]
                if nb < 0:
                    nbsum += bc_spin
                else:
                    nbsum += spins[nb]
            dE = 2.0 * J * si * nbsum + 2.0 * h * si + kappa * salt[i] * si
            if dE <= bias or u_spin[s, i] < exp(bias - dE):
                spins[i] = -si
                M -= 2 * si
                if salt[i]:
                    Q -= si
                energy += dE
                acc_spin += 1
        if n_salt > 0:
            for j in range(n):
                k = prop_part[s, j]
                x = prop_site[s, j]
                if salt[x]:
                    blocked += 1
                    continue
                src = salt_pos[k]
                sf = spins[src]
                st = spins[x]
                dE = 0.5 * kappa * (sf - st)
                if dE <= bias or u_salt[s, j] < exp(bias - dE):
                    salt[src] = 0
                    salt[x] = 1
                    salt_pos[k] = x
                    Q += (st - sf) // 2
                    energy += dE
                    acc_salt += 1
        out_M[s] = M
        out_Q[s] = Q
    return M, Q, energy, acc_spin, acc_salt, blocked
