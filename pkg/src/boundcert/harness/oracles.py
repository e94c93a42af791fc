"""High-precision reference values used as test oracles (mpmath)."""

import mpmath as mp
import numpy as np

DPS = 40


def _mp_matrix(M):
    M = np.asarray(M, dtype=complex)
    return mp.matrix([[mp.mpc(z.real, z.imag) for z in row] for row in M])


def relative_entropy_hp(rho, sigma, dps=DPS):
    """``Tr rho (log rho - log sigma)`` at ``dps`` digits; ``sigma`` must be positive definite."""
    with mp.workdps(dps):
        R = _mp_matrix(rho)
        S = _mp_matrix(sigma)
        wr, Ur = mp.eighe(R)
        ws, Us = mp.eighe(S)
        n = R.rows
        total = mp.mpf(0)
        for i in range(n):
            if wr[i] > 0:
                total += wr[i] * mp.log(wr[i])
        # Tr rho log sigma = sum_k <s_k|rho|s_k> log s_k
        for k in range(n):
            col = Us[:, k]
            v = (col.H * R * col)[0]
            total -= mp.re(v) * mp.log(ws[k])
        return float(total)


def log_mean_hp(x, y, dps=DPS):
    with mp.workdps(dps):
        x, y = mp.mpf(x), mp.mpf(y)
        if x == y:
            return float(1 / x)
        return float((mp.log(x) - mp.log(y)) / (x - y))


def bkm_integral_hp(a, c, s, dps=30):
    """``D(D0 + Y || D0)`` for ``D0 = diag(a, c)``, ``Y = [[0, s], [s, 0]]`` in closed form.

    The eigenvalues of ``D0 + Y`` are ``(a + c +- sqrt((a - c)^2 + 4 s^2)) / 2``.
    """
    with mp.workdps(dps):
        a, c, s = mp.mpf(a), mp.mpf(c), mp.mpf(s)
        disc = mp.sqrt((a - c) ** 2 + 4 * s * s)
        lp, lm = (a + c + disc) / 2, (a + c - disc) / 2
        ent = lp * mp.log(lp) + (lm * mp.log(lm) if lm > 0 else 0)
        return float(ent - a * mp.log(a) - c * mp.log(c))
