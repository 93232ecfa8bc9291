#!/usr/bin/env python3
# Reference rollouts of the discrete schemes, written directly from the
# recurrences (independent of the C++ implementation). Printed values are
# frozen into tests/unit/test_datagen.cpp and test_operators.cpp.
import numpy as np


def fmt(v):
    return f"{float(v):.17g}"


print("== explicit Euler, dy/dt = -P y + Q y^rho as stencil ==")
# residual (y_{tau+1}-y_tau)/h + P y_tau - Q y_tau^rho = 0
# => y_{tau+1} = y_tau - h*(P y_tau - Q y_tau^rho)
def euler(y0, h, P, Q, rho, steps):
    y = [y0]
    for _ in range(steps):
        yt = y[-1]
        y.append(yt - h * (P * yt - Q * yt**rho))
    return y


lin = euler(1.0, 0.01, 1.0, 0.0, 0, 100)
print("linear y0=1,h=0.01,P=1: y_1 =", fmt(lin[1]), " y_100 =", fmt(lin[100]))
non = euler(0.5, 0.01, 1.0, 0.5, 2, 3)
print("nonlinear y0=0.5,h=0.01,(P,Q,rho)=(1,0.5,2): y_1..y_3 =",
      ", ".join(fmt(v) for v in non[1:4]))

print("== FDM diffusion, periodic in x, forward in t ==")
# residual (u_j^{tau+1}-u_j^tau)/h_t - c(u_j^tau)*(u_{j+1}-2u_j+u_{j-1})/h_x^2
def fdm(u0, h_t, h_x, cfun, steps):
    u = np.array(u0, dtype=float)
    out = [u.copy()]
    for _ in range(steps):
        lap = (np.roll(u, -1) - 2 * u + np.roll(u, 1)) / h_x**2
        u = u + h_t * cfun(u) * lap
        out.append(u.copy())
    return out


u0 = [1.5, 0.3, -0.2, 0.7]
const = fdm(u0, 0.01, 0.5, lambda u: np.full_like(u, 1.0), 2)
print("const c=1, h_t=0.01, h_x=0.5, u0=[1.5,0.3,-0.2,0.7]:")
print("  u^1 = {" + ", ".join(fmt(v) for v in const[1]) + "}")
print("  u^2 = {" + ", ".join(fmt(v) for v in const[2]) + "}")
sat = fdm(u0, 0.01, 0.5, lambda u: 0.1 / (1 + u**2), 2)
print("saturating a=0.1:")
print("  u^1 = {" + ", ".join(fmt(v) for v in sat[1]) + "}")
print("  u^2 = {" + ", ".join(fmt(v) for v in sat[2]) + "}")

print("== misspecified oscillator basis: dense-grid projection MSE ==")
# basis {1, cos(j x), sin(j x): j=2..9} (fundamental omitted, d=17), target
# cos(x) with (y0,v0)=(1,0); least-squares over 4096 uniform points in [0,2pi)
N = 4096
ts = np.arange(N) * (2 * np.pi / N)
cols = [np.ones(N)]
for j in range(2, 10):
    cols += [np.cos(j * ts), np.sin(j * ts)]
A = np.stack(cols, axis=1)
y = np.cos(ts)
w, *_ = np.linalg.lstsq(A, y, rcond=None)
r = y - A @ w
print("projection MSE of cos(x):", fmt(np.mean(r**2)))

print("== effective-dimension bound, hand case ==")
# D = [[1,2,0],[0,1,1]], T = I, xi = 0.5, nu = 2
D = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
B = D.T @ D
alpha = np.linalg.eigvalsh(B)
tol = 1e-8 * alpha.max()
zeros = int((alpha <= tol).sum())
xi, nu = 0.5, 2.0
bound = zeros / (1 + xi) + sum(1.0 / (1 + xi + nu * a) for a in alpha if a > tol)
print("eigs:", ", ".join(fmt(a) for a in alpha))
print("zero count:", zeros, " bound:", fmt(bound))
