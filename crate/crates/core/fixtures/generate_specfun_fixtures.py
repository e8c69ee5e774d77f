#!/usr/bin/env python3
"""Arbitrary-precision reference values for the special-function module.

Run once from this directory:

    python3 generate_specfun_fixtures.py > specfun.txt

Columns: family n x value_sign value_logmag
  reg      D_n(x)
  reg_d    D_n'(x)
  imag     i^n D_n(ix)
  imag_d   i^(n+1) D_n'(ix)
  out      D_{-n-1}(x)
  out_d    D_{-n-1}'(x)
  bateman  k_n(x)  (n is the negative order ell)
Negative orders use D_v(z) = 2^(v/2) e^(-z^2/4) U(-v/2, 1/2, z^2/2).
Derivatives use the exact identity D_v'(z) = (z/2) D_v(z) - D_{v+1}(z) at
working precision.
"""
import mpmath as mp

mp.mp.dps = 60


def signed_log(v):
    v = mp.re(v)
    if v == 0:
        return 0, mp.mpf(0)
    return (1 if v > 0 else -1), mp.log(abs(v))


def emit(family, n, x, v):
    s, lm = signed_log(v)
    print(f"{family} {n} {mp.nstr(mp.mpf(x), 17)} {s} {mp.nstr(lm, 20)}")


def d(nu, z):
    if nu >= 0:
        # integer order: D_n(z) = exp(-z^2/4) He_n(z), He by its exact recurrence
        prev, cur = mp.mpf(0), mp.mpf(1)
        for k in range(nu):
            prev, cur = cur, z * cur - k * prev
        return mp.exp(-z * z / 4) * cur
    # negative order through the confluent hypergeometric U
    return 2 ** (mp.mpf(nu) / 2) * mp.exp(-z * z / 4) * mp.hyperu(-mp.mpf(nu) / 2, mp.mpf(1) / 2, z * z / 2)


def imag_value(n, x):
    return (mp.j ** n) * d(n, mp.j * x)


def imag_derivative(n, x):
    # i^(n+1) D_n'(ix) with D_n'(z) = (z/2) D_n(z) - D_{n+1}(z)
    z = mp.j * x
    return (mp.j ** (n + 1)) * (z / 2 * d(n, z) - d(n + 1, z))


ORDERS = [0, 1, 2, 3, 5, 8, 13, 20, 35, 50, 80, 120, 160, 200]

print("# parabolic cylinder and Bateman k-function reference table")
print("# family n x value_sign value_logmag  (mpmath, 60 digits working precision)")

for n in ORDERS:
    for x in ["-31.5", "-7.25", "-1.3", "0", "0.4", "1", "2.7", "6.1", "15.3", "50"]:
        x = mp.mpf(x)
        emit("reg", n, x, d(n, x))
for n in [0, 1, 4, 13, 50, 120, 200]:
    for x in ["-7.25", "0", "1", "6.1", "15.3", "50"]:
        x = mp.mpf(x)
        emit("reg_d", n, x, x / 2 * d(n, x) - d(n + 1, x))

for n in ORDERS:
    for x in ["0", "0.3", "1", "2.5", "7", "20", "50", "100"]:
        x = mp.mpf(x)
        emit("imag", n, x, imag_value(n, x))
for n in [0, 1, 4, 13, 50, 120, 200]:
    for x in ["0", "0.3", "2.5", "20", "100"]:
        x = mp.mpf(x)
        emit("imag_d", n, x, imag_derivative(n, x))

for n in ORDERS:
    for x in ["0", "0.05", "0.3", "1", "3", "8", "20", "50", "100"]:
        x = mp.mpf(x)
        emit("out", n, x, d(-n - 1, x))
for n in [0, 1, 4, 13, 50, 120, 200]:
    for x in ["0", "0.05", "1", "8", "50", "100"]:
        x = mp.mpf(x)
        emit("out_d", n, x, x / 2 * d(-n - 1, x) - d(-n, x))


def bateman(ell, u):
    if ell % 2 == 0:
        return mp.mpf(0)
    a = -mp.mpf(ell) / 2
    return mp.exp(-u) * mp.hyperu(a, 0, 2 * u) / mp.gamma(mp.mpf(ell) / 2 + 1)


for ell in [-1, -2, -3, -5, -9, -21, -41, -101, -201, -401]:
    for u in ["0.001", "0.01", "0.1", "0.5", "1", "3", "10", "30", "100"]:
        emit("bateman", ell, mp.mpf(u), bateman(ell, mp.mpf(u)))
