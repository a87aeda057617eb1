"""Independent oracle: radius where v first reaches 1e8 for
p = 2, alpha = 0, n = 3, f1 = f2 = 1, g1 = t, g2 = 1, h = t^q, u(0) = v(0) = 1.

Integrates u'' + 2u'/r = v, v'' + 2v'/r = (u')^q with scipy's DOP853 from a
series start at r = 1e-3 and locates the crossing with an event function.
"""
import numpy as np
from scipy.integrate import solve_ivp


def crossing(q, level=1e8):
    r0 = 1e-3
    # Series: u = 1 + r^2/6 + ..., v = 1 + c r^(q+2) with (r^2 v')' = r^2 (r/3)^q.
    u, du = 1 + r0**2 / 6, r0 / 3
    c = 1.0 / (3**q * (q + 2) * (q + 3))
    v, dv = 1 + c * r0 ** (q + 2), c * (q + 2) * r0 ** (q + 1)

    def rhs(r, y):
        u, du, v, dv = y
        return [du, v - 2 * du / r, dv, max(du, 0.0) ** q - 2 * dv / r]

    def hit(r, y):
        return y[2] - level

    hit.terminal = True
    sol = solve_ivp(rhs, (r0, 50), [u, du, v, dv], method="DOP853", rtol=1e-13, atol=1e-300, events=hit)
    r = sol.t_events[0][0]
    return r, sol.y_events[0][0][0]


if __name__ == "__main__":
    for q in (4, 6):
        r, u = crossing(q)
        print(f"q={q} r_cross={r:.15g} u_at_cross={u:.15g}")
