#!/usr/bin/env python3
"""Regenerates the frozen reference constants used by the C++ test suites.

Every hard-coded expected value in tests/ that is not a hand-checkable
identity comes from this script. Run it and compare against the constants
embedded in the tests when touching the corresponding code paths.
"""

import mpmath as mp

mp.mp.dps = 50


def v1(m, N):
    m, N = mp.mpf(m), mp.mpf(N)
    disc = N**2 * (m - 1) ** 2 + (N - 1) * (m - 1) * (m - 2) ** 2
    return (4 * N * (m - 1) - 4 * mp.sqrt(disc)) / ((N - 1) * (m - 2) ** 2)


def v2(m, N):
    m, N = mp.mpf(m), mp.mpf(N)
    disc = N**2 * (m - 1) ** 2 + (N - 1) * (m - 1) * (m - 2) ** 2
    return (4 * N * (m - 1) + 4 * mp.sqrt(disc)) / ((N - 1) * (m - 2) ** 2)


def trace_constant_lhs(N):
    N = mp.mpf(N)
    root = mp.sqrt(2 * N**2 - 4 * N + 4)
    den = N**2 - 4 * N + 4
    return (4 * N - 4 * root) / den, (4 * N + 4 * root) / den


def admissible_alpha(alpha, nu1, nu2, N):
    alpha = mp.mpf(alpha)
    m = N / (1 - alpha)
    lo = v1(m, N) < min((mp.mpf(nu1) - 2) / N, (alpha - 1) / N)
    hi = v2(m, N) > (mp.mpf(nu2) - 2) / N
    return bool(lo and hi)


def show(label, value):
    print(f"{label:44s} {mp.nstr(value, 20)}")


print("== viscosity admissibility thresholds ==")
show("v1(m=4, N=2)", v1(4, 2))
show("v2(m=4, N=2)", v2(4, 2))
show("v1(m=10/3, N=3)", v1(mp.mpf(10) / 3, 3))
show("v2(m=10/3, N=3)", v2(mp.mpf(10) / 3, 3))
show("v1(m=2+1e-6, N=2)", v1(mp.mpf(2) + mp.mpf("1e-6"), 2))
show("v1(m=2000, N=2)  [alpha=0.999]", v1(2000, 2))
show("v2(m=2000, N=2)", v2(2000, 2))

print("\n== dimension >= 3 trace-constant window ==")
lo3, hi3 = trace_constant_lhs(3)
show("lower threshold, N=3 (12-4*sqrt(10))", lo3)
show("upper threshold, N=3 (12+4*sqrt(10))", hi3)
show("(nu1-2)/N for nu1=0.01, N=3", (mp.mpf("0.01") - 2) / 3)

print("\n== admissibility outcomes ==")
print("admissible(alpha=0.5,  nu=2,2, N=2):", admissible_alpha("0.5", 2, 2, 2))
print("admissible(alpha=0.1,  nu=2,2, N=3):", admissible_alpha("0.1", 2, 2, 3))
print("admissible(alpha=0.999,nu=2,2, N=2):", admissible_alpha("0.999", 2, 2, 2))

print("\n== mollifier ==")
z = mp.quad(lambda s: mp.e ** (-1 / (1 - s**2)), [-1, 1])
show("bump normalization integral", z)

print("\n== quadrature closed forms ==")
show("gaussian mass  int_0^inf exp(-r^2) r dr", mp.mpf(1) / 2)
show("gaussian grad  int_0^inf 4 r^3 exp(-r^2) dr", mp.quad(lambda r: 4 * r**3 * mp.e ** (-(r**2)), [0, mp.inf]))
show("clamp value    exp(-0.01)+0.1", mp.e ** mp.mpf("-0.01") + mp.mpf("0.1"))
show("constant-state mass 1.1*(1-0.01)/2", mp.mpf("1.1") * (1 - mp.mpf("0.01")) / 2)
show("acoustic bound 0.1/sqrt(2)", mp.mpf("0.1") / mp.sqrt(2))
show("bd entropy     2*(1-ln 2)", 2 * (1 - mp.log(2)))
show("log moment     ln(2)/4", mp.log(2) / 4)
show("pressure norm  0.5^(2/3)", mp.mpf("0.5") ** (mp.mpf(2) / 3))

print("\n== growth envelope h = rho + rho^2, N=2, nu1=2, nu2=6 ==")
# single-constant feasibility interval on the sampled grid 2^k, k=-10..10
a = mp.mpf(1)      # (N-1)/N + nu1/(2N) = 1
b = mp.mpf(2)      # (N-1)/N + nu2/(2N) = 2
lo_c, hi_c = mp.mpf("-inf"), mp.mpf("inf")
for k in range(-10, 11):
    rho = mp.mpf(2) ** k
    h = rho + rho**2
    if rho >= 1:
        lo_c = max(lo_c, h / rho**b)
        hi_c = min(hi_c, h / rho**a)
    if rho <= 1:
        lo_c = max(lo_c, h / rho**a)
        hi_c = min(hi_c, h / rho**b)
show("feasible C interval low", lo_c)
show("feasible C interval high", hi_c)
