"""Independent reference implementations used by the tests."""
from fractions import Fraction


def rk4(v0, i_d, c, r, t, n):
    """Classical RK4 on C dV/dt = I_D - V/R."""
    f = lambda v: (i_d - v / r) / c
    h, v = t / n, v0
    for _ in range(n):
        k1 = f(v)
        k2 = f(v + h * k1 / 2)
        k3 = f(v + h * k2 / 2)
        k4 = f(v + h * k3)
        v += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return v


def brute_force_pairs(t1, t2, tol):
    """Repeatedly take the globally closest unused pair (ties: earliest indices)."""
    cand = {(i, j): abs(a - b) for i, a in enumerate(t1) for j, b in enumerate(t2)
            if abs(a - b) <= tol}
    out, used1, used2 = [], set(), set()
    while cand:
        (i, j), _ = min(cand.items(), key=lambda kv: (kv[1], kv[0]))
        out.append((i, j))
        used1.add(i)
        used2.add(j)
        cand = {k: v for k, v in cand.items() if k[0] not in used1 and k[1] not in used2}
    out.sort(key=lambda p: ((t1[p[0]] + t2[p[1]]) / 2, p))
    return out


def exact_switching_energy(c, v_th, v_h, r_on, r_i):
    """Discharge energy in exact rational arithmetic on the float inputs."""
    c, v_th, v_h, r_on, r_i = map(Fraction, (c, v_th, v_h, r_on, r_i))
    return c * (v_th * v_th - v_h * v_h) / 2 * r_on / (r_on + r_i)
