# Independent high-precision reference values for curvature coefficients.
from mpmath import mp, mpf, sin, sinh, sqrt, exp, pi

mp.dps = 40


def sigma(t, K, n, th):
    if K == 0 or th == 0:
        return mpf(t)
    if K > 0:
        x = th * sqrt(mpf(K) / n)
        return sin(t * x) / sin(x)
    x = th * sqrt(mpf(-K) / n)
    return sinh(t * x) / sinh(x)


def tau(t, K, N, th):
    return mpf(t) ** (mpf(1) / N) * sigma(t, K, N - 1, th) ** (1 - mpf(1) / N)


def heat(t, K, N):
    u = mpf(2) * K * t / 3
    return sqrt(2 * N * (1 - exp(-u)) / u)


print("sinh1", mp.nstr(sinh(1), 20))
print("sigma_half_K1_N1_pi2", mp.nstr(sigma(mpf("0.5"), 1, 1, pi / 2), 20))
print("tau_half_K2_N2_1", mp.nstr(tau(mpf("0.5"), 2, 2, 1), 20))
print("heat_half_m3_2", mp.nstr(heat(mpf("0.5"), -3, 2), 20))
print("ckd_m1_2", mp.nstr(exp(2), 20))
print("cknd_m1_2_2", mp.nstr(2 * exp(1), 20))
print("sigma_K-2_N3_t03_th15", mp.nstr(sigma(mpf("0.3"), -2, 3, mpf("1.5")), 20))
print("sigma_K2_N3_t07_th2", mp.nstr(sigma(mpf("0.7"), 2, 3, 2), 20))
print("ratio_const_K1_N2_pi_eps01", mp.nstr((sin(pi - mpf("0.1")) / sin(mpf("0.1"))), 20))
