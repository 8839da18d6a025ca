"""Pure-Python fallback for the Monte Carlo kernel.

Consumes the identical random arrays in the identical order as the
compiled kernel in brine._kernels, so the two backends are bit-identical;
it is just much slower.
"""

from math import exp


def run_sweeps(spins, salt, salt_pos, nbrs, bc_spin,
               J, h, kappa, bias,
               u_spin, u_salt, prop_part, prop_site,
               out_M, out_Q, M, Q, energy):
    """See brine._kernels.run_sweeps."""
    n_sweeps = out_M.shape[0]
    n = spins.shape[0]
    n_salt = salt_pos.shape[0]
    deg = nbrs.shape[1]
    acc_spin = acc_salt = blocked = 0

    for s in range(n_sweeps):
        us = u_spin[s]
        for i in range(n):
            si = int(spins[i])
            nbsum = 0
            for j in range(deg):
                nb = nbrs[i, j]
                nbsum += bc_spin if nb < 0 else int(spins[nb])
            dE = 2.0 * J * si * nbsum + 2.0 * h * si + kappa * salt[i] * si
            if dE <= bias or us[i] < exp(bias - dE):
                spins[i] = -si
                M -= 2 * si
                if salt[i]:
                    Q -= si
                energy += dE
                acc_spin += 1
        if n_salt > 0:
            pp, ps, uu = prop_part[s], prop_site[s], u_salt[s]
            for j in range(n):
                x = ps[j]
                if salt[x]:
                    blocked += 1
                    continue
                k = pp[j]
                src = salt_pos[k]
                sf = int(spins[src])
                st = int(spins[x])
                dE = 0.5 * kappa * (sf - st)
                if dE <= bias or uu[j] < exp(bias - dE):
                    salt[src] = 0
                    salt[x] = 1
                    salt_pos[k] = x
                    Q += (st - sf) // 2
                    energy += dE
                    acc_salt += 1
        out_M[s] = M
        out_Q[s] = Q
    return int(M), int(Q), float(energy), acc_spin, acc_salt, blocked
