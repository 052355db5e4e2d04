#!/usr/bin/env python3
"""Fix-up oracle run: extra digits + corrected u_3 fit + extended coefficient sums
+ finite-dimensional Taylor-slope sanity check."""

import numpy as np

PI = np.pi


def c_absx(n):
    if n == 0:
        return PI / 2
    return -2.0 / (PI * n * n) if n % 2 else 0.0


def c_powerlaw(n):
    return 0.0 if n == 0 else abs(n) ** -1.25


def toeplitz_window(coeff, idx):
    idx = np.asarray(idx)
    d = idx[:, None] - idx[None, :]
    return np.vectorize(coeff, otypes=[complex])(d)


def circle_window(n, L):
    return np.arange(max(1 - n, -L), min(n, L) + 1)


def opnorm(A):
    w = np.linalg.eigvalsh(A.conj().T @ A)
    return float(np.sqrt(max(w[-1], 0.0)))


def t_grid(floor, tmax=1.0, per_decade=24):
    npts = max(2, int(round(per_decade * np.log10(tmax / floor))) + 1)
    k = np.arange(npts)
    return floor * (tmax / floor) ** (k / (npts - 1))


def fit_slope_sorted(xs, ys):
    """xs ascending; top-half log-log slope (same as classify_growth)."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    m = len(xs)
    lo = m - max(2, (m + 1) // 2)
    x = np.log(xs[lo:])
    y = np.log(ys[lo:])
    xm, ym = x.mean(), y.mean()
    return float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())


L = 512
FLOOR = 10.0 / L
GRID = t_grid(FLOOR)
FULL = np.arange(-L, L + 1)

print("== A4/A5 extra digits ==")
for n in (64, 128, 256, 512):
    v = opnorm(toeplitz_window(lambda d: d * c_absx(d), circle_window(n, L)))
    print(f"  ||wD(absx)|| window {n}: {v:.15f}")

print("\n== B min ratio extra digits ==")
ratios = []
for t in GRID:
    A = toeplitz_window(lambda d: (np.exp(1j * d * t) - 1.0) * c_absx(d), FULL)
    ratios.append(opnorm(A) / t)
ratios = np.array(ratios)
print(f"  min = {ratios.min():.15f}  max = {ratios.max():.15f}  at_floor = {ratios[0]:.15f}")

print("\n== F1 u_3 probe, correct ordering ==")
q = np.abs(np.exp(1j * 3 * GRID) - 1.0) / GRID
x = 1.0 / GRID[::-1]          # ascending effective window
yq = q[::-1]
print(f"  quotient at floor = {q[0]:.12f}, slope = {fit_slope_sorted(x, yq):.6f}")

print("\n== D3 extended coefficient partial sums ==")
ns = [2 ** k for k in range(6, 20)]
ps = [sum(abs(c_powerlaw(d)) for d in range(-n, n + 1)) for n in ns]
print("  windows:", ns)
print("  sums:", ["%.6f" % v for v in ps])
print(f"  top-half slope = {fit_slope_sorted(ns, ps):.6f}")
ns2 = [2 ** k for k in range(6, 16)]
ps2 = ps[: len(ns2)]
print(f"  top-half slope (to 2^15) = {fit_slope_sorted(ns2, ps2):.6f}")

print("\n== criterion 3 sanity: finite-dim Taylor slope ==")
rng = np.random.default_rng(42)
n = 8
A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
D = (A + A.conj().T) / 2
B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
w, V = np.linalg.eigh(D)
wd = D @ B - B @ D
ts = np.geomspace(1e-4, 1e-2, 9)
devs = []
for t in ts:
    U = V @ np.diag(np.exp(1j * w * t)) @ V.conj().T
    alpha = U @ B @ U.conj().T
    dev = np.linalg.norm((alpha - B) / (1j * t) - wd, 2)
    devs.append(dev)
    lip = np.linalg.norm(alpha - B, 2)
    assert lip <= t * np.linalg.norm(wd, 2) + 1e-8, (t, lip)
coef = np.polyfit(np.log(ts), np.log(devs), 1)[0]
print(f"  slope = {coef:.6f} (want 1 +- 0.1)")
print(f"  ||D|| = {np.linalg.norm(D,2):.4f}, omega bound check 2*t*||D||*||b||")
