"""Regenerate tests/fixtures/*.json from 50-digit mpmath evaluations.

Run from the repository root:  python3 tests/oracles/generate_fixtures.py

Nothing here imports the package; every value is computed from the
formulas directly so the fixtures are an independent oracle.
"""

import json
import math
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50
OUT = Path(__file__).resolve().parents[1] / "fixtures"


def F(x):
    # exact binary value of the double the tests will pass in
    return mp.mpf(float(x))


def lead_power(n, variant):
    return mp.mpf(n) * (mp.mpf(n) / 2 + 2) if variant == "paper" else mp.mpf(n) * (mp.mpf(2) / n + 2)


def bernstein(lam, r, s2, M):
    lam, s2, M = F(lam), F(s2), F(M)
    return 2 * mp.exp(-lam**2 / (2 * r * s2 + mp.mpf(2) / 3 * M * lam))


def d_eps(eps, T, R, n, variant):
    eps, T, R = F(eps), F(T), F(R)
    return 2**n * (T**n * mp.power(2, lead_power(n, variant)) * mp.pi ** (-2 * n) / eps**2
                   + (2 * T * mp.log(R) + 1) ** n)


def covering(eps, T, R, n, variant):
    return d_eps(eps, T, R, n, variant) * mp.log(16 / F(eps))


def theorem(mu, T, R, n, variant):
    mu, T, R = F(mu), F(T), F(R)
    vol = (R**2 - 1) ** n
    alpha = 3 * mu**2 / (4 * vol * (6 + mu))
    lead = 16 * T**n * mp.pi ** (-2 * n) * vol**2 * mp.power(2, lead_power(n, variant)) / mu**2
    log_beta = 2**n * (lead + (2 * T * mp.log(R) + 1) ** n) * mp.log(64 * vol / mu)
    return alpha, log_beta


def log_prob_est(eps, r, T, R, n, variant):
    eps, T, R = F(eps), F(T), F(R)
    vol = (R**2 - 1) ** n
    lead = 16 * T**n * mp.pi ** (-2 * n) * R ** (2 * n) * mp.power(2, lead_power(n, variant)) / eps**2
    d = 2**n * (lead + (2 * T * mp.log(R) + 1) ** n)
    rate = 3 * eps**2 * vol / (4 * R**n * (6 * R**n + eps * vol))
    return mp.log(2) + d * mp.log(64 * R**n / eps) - r * rate


def min_r(mu, T, R, n, target, variant):
    alpha, log_beta = theorem(mu, T, R, n, variant)
    r = int(mp.ceil((log_beta + mp.log(2 / F(target))) / alpha))
    return r, int(mp.ceil(log_beta / alpha)) + 1


def frame(mu, delta, R, n):
    mu, delta, R = F(mu), F(delta), F(R)
    den = (R**2 - 1) ** n
    return {"lower_paper": R ** (n - 1) * (1 - delta - mu) / den,
            "upper_paper": R ** (n + 1) * (1 + mu) / den,
            "lower_sharp": (1 - delta - mu) / den,
            "upper_sharp": R ** (2 * n) * (1 + mu) / den}


def sinc_power_integral(k):
    """int_R (sin s / s)^{2k} ds in closed form."""
    m = 2 * k
    total = sum((-1) ** j * mp.binomial(m, j) * mp.mpf(m - 2 * j) ** (m - 1)
                for j in range(m // 2 + 1))
    return mp.pi / (2 ** (m - 1) * mp.factorial(m - 1)) * total


def s(x):
    return mp.nstr(x, 30)


def main():
    E = math.e
    vec = {"bernstein": [], "dimension": [], "covering": [], "theorem": [], "prob_est": [],
           "min_samples": [], "frame": [], "truncation": [], "min_N": []}
    for lam, r, s2, M in [(1.0, 100, 1.0, 1.0), (2.5, 10, 0.3, 2.0), (0.1, 1, 0.0, 1.0),
                          (50.0, 1000, 0.05, 3.0)]:
        vec["bernstein"].append({"args": [lam, r, s2, M], "value": s(bernstein(lam, r, s2, M))})
    for variant in ("paper", "corrected"):
        for eps, T, R, n in [(0.5, 1.0, E, 1), (0.1, 2.0, 2.0, 1), (0.5, 1.0, 2.0, 2),
                             (0.25, 4.0, 3.0, 3), (1e-3, 0.5, 1.5, 1)]:
            vec["dimension"].append({"args": [eps, T, R, n, variant],
                                     "value": s(d_eps(eps, T, R, n, variant))})
            vec["covering"].append({"args": [eps, T, R, n, variant],
                                    "value": s(covering(eps, T, R, n, variant))})
        for mu, T, R, n in [(0.1, 1.0, 2.0, 1), (0.5, 4.0, E, 1), (0.3, 2.0, 1.5, 2),
                            (0.9, 1.0, 3.0, 1), (0.05, 0.5, 2.0, 3)]:
            a, lb = theorem(mu, T, R, n, variant)
            vec["theorem"].append({"args": [mu, T, R, n, variant], "alpha": s(a), "log_beta": s(lb)})
        for eps, r, T, R, n in [(0.1, 1000, 1.0, 2.0, 1), (0.5, 10**6, 4.0, E, 1),
                                (0.2, 50, 2.0, 1.5, 2)]:
            vec["prob_est"].append({"args": [eps, r, T, R, n, variant],
                                    "log_value": s(log_prob_est(eps, r, T, R, n, variant))})
        for mu, T, R, n, target in [(0.1, 1.0, 2.0, 1, 0.05), (0.5, 4.0, E, 1, 0.01),
                                    (0.3, 1.0, 1.5, 2, 0.1)]:
            r, rr = min_r(mu, T, R, n, target, variant)
            vec["min_samples"].append({"args": [mu, T, R, n, target, variant], "r": r,
                                       "r_remark": rr})
    for mu, delta, R, n in [(0.1, 0.1, 2.0, 1), (0.5, 0.2, E, 1), (0.2, 0.05, 1.5, 2)]:
        vec["frame"].append({"args": [mu, delta, R, n],
                             **{k: s(v) for k, v in frame(mu, delta, R, n).items()}})
    for N, T, R, n, norm in [(43, 1.0, E, 1, 1.0), (20, 2.0, 2.0, 1, 0.5), (30, 1.0, 2.0, 2, 1.0)]:
        gap = N - 2 * F(T) * mp.log(F(R))
        val = F(T) ** (mp.mpf(n) / 2) * F(norm) * (4 / (mp.pi**2 * gap)) ** (mp.mpf(n) / 2)
        vec["truncation"].append({"args": [N, T, R, n, norm], "value": s(val)})
    for eps, T, R, n in [(0.5, 1.0, E, 1), (0.1, 1.0, E, 1), (0.01, 1.0, E, 1), (0.1, 2.0, 2.0, 2)]:
        thr = 4 * F(T) / mp.pi**2 * F(eps) ** (mp.mpf(-2) / n) + 2 * F(T) * mp.log(F(R))
        vec["min_N"].append({"args": [eps, T, R, n], "N": int(mp.floor(thr)) + 1})
    misc = {
        # delta of the single-coefficient function at T=1, c=0 on [e^-3, e^3]
        "delta_single_k0_R_e3": s(1 - mp.quad(lambda u: mp.sinc(mp.pi * u) ** 2,
                                              mp.linspace(-3, 3, 13))),
        "sinc_power_integrals": {str(k): s(sinc_power_integral(k)) for k in range(1, 6)},
        # 2 int_40^inf sinc^2 = (1/pi^2) [1/40 - int_40^inf cos(2 pi w) / w^2 dw]
        "sinc_sq_tail_beyond_40": s((mp.mpf(1) / 40 - mp.quadosc(
            lambda w: mp.cos(2 * mp.pi * w) / w**2, [40, mp.inf], omega=2 * mp.pi))
            / mp.pi**2),
    }
    vec["misc"] = misc
    OUT.mkdir(exist_ok=True)
    (OUT / "oracle_vectors.json").write_text(json.dumps(vec, indent=1) + "\n")
    print("wrote", OUT / "oracle_vectors.json")


if __name__ == "__main__":
    main()
