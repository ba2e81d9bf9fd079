"""Independent high-precision reference values for the unit tests.

Run once with mpmath; the output is frozen in tests/unit/oracle_values.hpp.
Every value here is computed from the defining equations with 30-digit arithmetic,
without sharing code with the library.
"""
import mpmath as mp

mp.mp.dps = 30

N = mp.ncdf
def Np(z):
    return mp.npdf(z)


def c_star(beta):
    f = lambda c: c + beta * c * N(c) + beta * Np(c)
    return mp.findroot(f, (-5, 0), solver="anderson")


def crra_u(rho):
    if rho == 1:
        return mp.log
    return lambda w: w ** (1 - rho) / (1 - rho)


def expect(f, lo=-mp.inf, hi=mp.inf):
    pts = [lo, 0, hi] if lo < 0 < hi else [lo, hi]
    return mp.quad(lambda s: f(s) * Np(s), pts)


def H(rho, beta, delta, x, y=0):
    U = crra_u(rho)
    yt = y - x * x / 2
    full = expect(lambda s: U(mp.e ** (x * s + yt)))
    def F(z):
        a = z / x
        restr = expect(lambda s: U(mp.e ** (x * s + yt)), hi=a)
        return U(mp.e ** (z + yt) / delta) - full + beta * (U(mp.e ** (z + yt)) * N(a) - restr)
    return mp.findroot(F, mp.log(delta) if delta != 1 else mp.mpf(-0.01))


def m_general(rho, beta, delta, x, y=0):
    z = H(rho, beta, delta, x, y)
    yt = y - x * x / 2
    d1 = lambda w: w ** (-rho)
    d2 = lambda w: -rho * w ** (-rho - 1)
    a = z / x
    Z = lambda s: mp.e ** (x * s + yt)
    num = expect(lambda s: d1(Z(s)) * Z(s)) + beta * expect(lambda s: d1(Z(s)) * Z(s), hi=a)
    den = -(expect(lambda s: d2(Z(s)) * Z(s) ** 2) + beta * expect(lambda s: d2(Z(s)) * Z(s) ** 2, hi=a))
    e = mp.e ** (z + yt)
    den += beta * d1(e) * e * Np(a) / x
    return num / den


def z_log(beta, delta, x):
    f = lambda z: z - mp.log(delta) + beta * N(z / x) * z + beta * x * Np(z / x)
    return mp.findroot(f, mp.log(delta))


def m_log(beta, delta, x):
    if x == 0:
        return mp.mpf(1)
    z = z_log(beta, delta, x)
    w = z / x
    return x / (x + beta * Np(w) / (1 + beta * N(w)))


def big_M_log(beta, delta, v):
    return mp.quad(lambda x: 2 * x / m_log(beta, delta, x) ** 2, [0, mp.sqrt(v)])


def gda_value_log(beta, delta, mean_log, var_log):
    s = mp.sqrt(var_log)
    EU = mean_log
    def F(lp):
        th = (lp + mp.log(delta) - mean_log) / s
        pen = expect(lambda q: mp.log(delta) + lp - (mean_log + s * q), hi=th)
        return lp - EU + beta * pen
    return mp.e ** mp.findroot(F, mean_log)


def psi_crra2(beta, delta, w):
    # psi^-1 + beta (delta psi)^-1 = (1 + beta) w^-1
    return (1 + beta / delta) * w / (1 + beta)


def c_of_y_log(beta, delta):
    return mp.log(delta) / (1 + beta)


values = {}
values["kN1"] = N(1)
for b, name in [(0.01, "0_01"), (0.5, "0_5"), (1, "1"), (5, "5")]:
    values[f"kCStar_{name}"] = c_star(mp.mpf(b))
values["kPsiCrra2"] = psi_crra2(mp.mpf("0.5"), mp.mpf("1.1"), 2)
values["kCOfYLog"] = c_of_y_log(mp.mpf("0.5"), mp.mpf("1.2"))
values["kH_log_d09_x03"] = H(1, mp.mpf("0.5"), mp.mpf("0.9"), mp.mpf("0.3"))
values["kH_log_d11_x05"] = H(1, mp.mpf("0.5"), mp.mpf("1.1"), mp.mpf("0.5"))
values["kH_rho2_d12_x03"] = H(2, mp.mpf("0.5"), mp.mpf("1.2"), mp.mpf("0.3"))
values["kM_log_d09_x03"] = m_general(1, mp.mpf("0.5"), mp.mpf("0.9"), mp.mpf("0.3"))
values["kM_rho2_d09_x03"] = m_general(2, mp.mpf("0.5"), mp.mpf("0.9"), mp.mpf("0.3"))
values["kBigM_log_d09_v012"] = big_M_log(mp.mpf("0.5"), mp.mpf("0.9"), mp.mpf("0.12"))
target = mp.mpf("0.05")
values["kInvM_log_d09_t005"] = mp.findroot(lambda v: big_M_log(mp.mpf("0.5"), mp.mpf("0.9"), v) - target,
                                           (mp.mpf("0.02"), mp.mpf("0.05")), solver="illinois")
values["kEta_log_d09"] = gda_value_log(mp.mpf("0.5"), mp.mpf("0.9"), mp.mpf("-0.045"), mp.mpf("0.09"))
values["kEta_log_d12"] = gda_value_log(mp.mpf("0.5"), mp.mpf("1.2"), mp.mpf("-0.045"), mp.mpf("0.09"))

print("#pragma once\n")
print("// Generated by tests/oracles/oracles.py (mpmath, 30 digits). Do not edit.\n")
print("namespace oracle {\n")
for k, v in values.items():
    print(f"inline constexpr double {k} = {mp.nstr(v, 20)};")
print("\n}  // namespace oracle")
