"""Independent high-precision reference values (mpmath, 50 digits)."""

import mpmath as mp

mp.mp.dps = 50


def constants(h):
    h = mp.mpf(h)
    g = mp.gamma
    k = 2 * h * g(mp.mpf(3) / 2 - h) * g(h + mp.mpf(1) / 2)
    lam = 2 * h * g(3 - 2 * h) * g(h + mp.mpf(1) / 2) / g(mp.mpf(3) / 2 - h)
    c_h = mp.sqrt(2 * h * g(mp.mpf(3) / 2 - h) / (g(h + mp.mpf(1) / 2) * g(2 - 2 * h)))
    c2 = c_h / (2 * h * mp.sqrt(2 - 2 * h))
    beta_int = g(mp.mpf(3) / 2 - h) ** 2 / g(3 - 2 * h)
    return {"k_h": k, "lambda_h": lam, "c_h": c_h, "c2": c2, "beta_integral": beta_int}


def example_loglik(values, t_max, beta, h, jacobian=False):
    """Four-term sum for the example model (B = C = 1 - x), written from scratch.

    Z is the midpoint kernel sum of dX / C(left point); ΔG is the closed form
    for ratio 1; υ² = c2² Δ(t^{2-2H}).
    """
    x = [mp.mpf(v) for v in values]
    n = len(x) - 1
    T = mp.mpf(t_max)
    h = mp.mpf(h)
    beta = mp.mpf(beta)
    c = constants(h)
    t = [T * i / n for i in range(n + 1)]
    s = [(t[j] + t[j + 1]) / 2 for j in range(n)]
    y = [(x[j + 1] - x[j]) / (1 - x[j]) for j in range(n)]
    a = mp.mpf(1) / 2 - h

    def kern(ti, sj):
        return sj ** a * (ti - sj) ** a / c["k_h"]

    z = [mp.fsum(kern(t[i], s[j]) * y[j] for j in range(i)) for i in range(n + 1)]
    p = 2 - 2 * h
    total = mp.mpf(0)
    for i in range(n):
        dz = z[i + 1] - z[i]
        dtp = t[i + 1] ** p - t[i] ** p
        dg = c["beta_integral"] / c["k_h"] * dtp
        vs = c["c2"] ** 2 * dtp
        total += -mp.log(2 * mp.pi) / 2 - mp.log(vs) / 2 - (dz - beta * dg) ** 2 / (2 * vs)
    if jacobian:
        total += mp.fsum(mp.log(kern(t[i], s[i - 1])) for i in range(1, n + 1))
    return total
