"""Straight-line serial reimplementation used as an independent test oracle.

Shares no code with the package: plain Python ints and floats, the math
module, one path at a time.
"""

import math

M = (1 << 64) - 1
G = 0x9E3779B97F4A7C15


def splitmix(z):
    z &= M
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return z ^ (z >> 31)


def normals(master_seed, path_index, count):
    key = splitmix((splitmix(master_seed) + (path_index + 1) * G) & M)
    out = []
    k = 1
    while len(out) < count:
        a = splitmix((key + k * G) & M)
        b = splitmix((key + (k + 1) * G) & M)
        k += 2
        u1 = 1.0 - (a >> 11) * 2.0**-53
        u2 = (b >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        out.append(r * math.cos(2.0 * math.pi * u2))
        out.append(r * math.sin(2.0 * math.pi * u2))
    return out[:count]


def cap_path(mu, sigma, y0, n, master_seed, path_index):
    ys = [y0]
    for z in normals(master_seed, path_index, n):
        ys.append(ys[-1] * math.exp((mu - sigma * sigma / 2.0) + sigma * z))
    return ys


def simulate(caps, A, B, p_star=1.0):
    """Return (S, P, dP, dS) lists; raises ZeroDivisionError-free ValueError on collapse."""
    S = [caps[0] / p_star]
    P = [caps[0] / S[0]]
    dP, dS = [], []
    for t in range(1, len(caps)):
        d = (P[-1] - p_star) / p_star
        if p_star * (1.0 - A) <= P[-1] <= p_star * (1.0 + A):
            s = S[-1]
        else:
            if 1.0 + d / B <= 0:
                raise ValueError("supply collapse")
            s = S[-1] * (1.0 + d / B)
        dS.append((s - S[-1]) / S[-1])
        S.append(s)
        P.append(caps[t] / s)
        dP.append((P[-1] - p_star) / p_star)
    return S, P, dP, dS


def loss(dP, dS, lam):
    pc = math.fsum(x * x for x in dP)
    sc = math.fsum(x * x for x in dS)
    return pc, sc, pc + lam * sc


def mean_loss(mu, sigma, y0, n, A, B, lam, n_paths, master_seed, p_star=1.0):
    totals = []
    for i in range(n_paths):
        caps = cap_path(mu, sigma, y0, n, master_seed, i)
        _, _, dP, dS = simulate(caps, A, B, p_star)
        totals.append(loss(dP, dS, lam)[2])
    return math.fsum(totals) / len(totals)
