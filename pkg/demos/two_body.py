"""Two agents joined by one virtual spring-damper.

The relative separation of a symmetric pair obeys a damped linear oscillator,
so the discrete integrator can be compared against a fine continuous-time
solution. Shows how the step size controls the error, and where the unit
step stops being accurate.
"""

import numpy as np

from swarmform import LinkSet, SimParams, World, integrate_step


def separations(k, b, L, r0, dt, steps):
    w = World([[0.0, 0.0], [r0, 0.0]])
    links = LinkSet([0, 1], [1, 0], L, k, b)
    params = SimParams(dt=dt)
    out = []
    for _ in range(steps):
        w = integrate_step(w, links, params)
        out.append(w.positions[1, 0] - w.positions[0, 0])
    return np.array(out)


def fine_solution(k, b, L, r0, t_end, h=1e-4):
    # relative coordinate r'' = -2k (r - L) - 2b r', plain RK4
    def acc(r, v):
        return -2 * k * (r - L) - 2 * b * v

    r, v, t, out = r0, 0.0, 0.0, []
    n = int(round(t_end / h))
    for _ in range(n):
        k1r, k1v = v, acc(r, v)
        k2r, k2v = v + 0.5 * h * k1v, acc(r + 0.5 * h * k1r, v + 0.5 * h * k1v)
        k3r, k3v = v + 0.5 * h * k2v, acc(r + 0.5 * h * k2r, v + 0.5 * h * k2v)
        k4r, k4v = v + h * k3v, acc(r + h * k3r, v + h * k3v)
        r += h / 6 * (k1r + 2 * k2r + 2 * k3r + k4r)
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return r


if __name__ == "__main__":
    k, b, L, r0 = 0.05, 0.4, 10.0, 30.0
    print(f"k={k} b={b} rest={L} start={r0}")
    for dt in (1.0, 0.5, 0.1, 0.02):
        steps = int(round(20 / dt))
        sep = separations(k, b, L, r0, dt, steps)
        ref = fine_solution(k, b, L, r0, steps * dt)
        print(f"dt={dt:<5} separation at t=20: {sep[-1]:.5f}  continuous: {ref:.5f}  "
              f"error {abs(sep[-1] - ref) / ref:.2%}")

    # unit step: settles to the rest length regardless of the start
    for start in (1.0, 10.0, 50.0):
        sep = separations(k, b, L, start, 1.0, 200)
        settle = int(np.argmax(np.abs(sep - L) < 1e-3 * L))
        print(f"start {start:>4}: within 0.1% of rest after {settle} steps")
