#!/usr/bin/env python3
"""Write tests/data/golden_charts.csv: every catalog chart evaluated at one
pinned point with pinned parameters and closed-form profiles.

Formulas are typed here directly from the displayed parametrizations, apart
from the C++ sources, so the C++ transcription can be audited against them.
"""

import math
import sys
from pathlib import Path

A_PAR = 0.8
B_PAR = 1.5
R_SMALL = 1.3
A_BIG = 0.7
R_BIG = 2.0
THETA = 0.3
S0 = 1.0
PHI0 = 1.5

S, T, U, V = 0.9, 0.7, 0.3, -0.2
T_SURF, U_SURF = 0.7, 0.3
V_CURVE = -0.2
REM_POINT = [0.9, 0.3, -0.2, 0.4, 0.1]
REM_OFFSETS = [1.0, 2.0, 3.0]

cos, sin, cosh, sinh = math.cos, math.sin, math.cosh, math.sinh


def pair(kind, second0):
    """Profiles with constant angle THETA: both are linear in s."""
    d1, d2 = {
        "sum1": (cos(THETA), sin(THETA)),
        "diffP": (cosh(THETA), sinh(THETA)),
        "diffM": (sinh(THETA), cosh(THETA)),
    }[kind]
    return PHI0 + d1 * (S - S0), second0 + d2 * (S - S0)


def psi_plus(s):
    return s + 0.1 * s * s


def psi_minus(s):
    return -s - 0.1 * s * s


def thm1():
    s, t, u, v = S, T, U, V
    out = {}
    f, p = pair("sum1", 0.0)
    out["i"] = [t, u, f * cos(v), f * sin(v), p]
    out["ii"] = [f * sinh(v), t, u, f * cosh(v), p]
    f, p = pair("diffM", 0.0)
    out["iii"] = [p, t, u, f * cos(v), f * sin(v)]
    f, p = pair("diffP", 0.0)
    out["iv"] = [f * cosh(v), t, u, f * sinh(v), p]
    q = psi_plus(s)
    out["v"] = [v * v * s / 2 + q + s, t, u, v * s, v * v * s / 2 + q]
    f, p = pair("diffP", 0.0)
    out["vi"] = [f * cos(v), f * sin(v), t, u, p]
    f, p = pair("diffM", 0.0)
    out["vii"] = [f * sinh(v), p, t, u, f * cosh(v)]
    q = psi_minus(s)
    out["viii"] = [s * v * v / 2 + q, s * v, t, u, s * v * v / 2 + q + s]
    return out


def thm2():
    s, t, u, v = S, T, U, V
    out = {}
    f, p = pair("diffP", 0.0)
    out["i"] = [v, f * cosh(t), f * sinh(t) * cos(u), f * sinh(t) * sin(u), p]
    f, p = pair("diffM", 0.0)
    out["ii"] = [v, p, f * cos(t), f * sin(t) * cos(u), f * sin(t) * sin(u)]
    f, p = pair("diffP", 0.0)
    out["iii"] = [f * cosh(t) * sin(u), f * cosh(t) * cos(u), f * sinh(t), p, v]
    f, p = pair("diffM", 0.0)
    out["iv"] = [p, f * sinh(t), f * cosh(t) * cos(u), f * cosh(t) * sin(u), v]
    f, p = pair("sum1", 0.0)
    out["v"] = [v, f * sinh(t), f * cosh(t) * cos(u), f * cosh(t) * sin(u), p]
    # cosh t, not cosh u, in the third slot keeps the fibre on a space form.
    out["vi"] = [f * sinh(t) * cos(u), f * sinh(t) * sin(u), f * cosh(t), p, v]
    q = psi_plus(s)
    out["vii"] = [s * (t * t + u * u) / 2 + q, v, s * t, s * u, s * (t * t + u * u) / 2 + q - s]
    q = psi_minus(s)
    out["viii"] = [s * (t * t - u * u) / 2 + q, s * t, s * u, v, s * (t * t - u * u) / 2 + q + s]
    return out


def thm3():
    s, t, u, v, a = S, T, U, V, A_PAR
    out = {}
    f1, f2 = pair("diffP", 1.0)
    out["i"] = [f2 * sinh(v), f1 * cosh(t), f1 * sinh(t) * cos(u), f1 * sinh(t) * sin(u), f2 * cosh(v)]
    f1, f2 = pair("diffM", 1.0)
    out["ii"] = [f2 * cos(v), f2 * sin(v), f1 * cos(t), f1 * sin(t) * cos(u), f1 * sin(t) * sin(u)]
    f1, f2 = pair("diffP", 1.0)
    out["iii"] = [f1 * cosh(t) * sin(u), f1 * cosh(t) * cos(u), f1 * sinh(t), f2 * cos(v), f2 * sin(v)]
    f1, f2 = pair("sum1", 1.0)
    out["iv"] = [f2 * sinh(v), f1 * sinh(t), f1 * cosh(t) * cos(u), f1 * cosh(t) * sin(u), f2 * cosh(v)]
    f1, f2 = pair("diffM", 1.0)
    out["v"] = [f2 * cosh(v), f1 * sinh(t), f1 * cosh(t) * cos(u), f1 * cosh(t) * sin(u), f2 * sinh(v)]
    f1, f2 = pair("sum1", 1.0)
    out["vi"] = [f1 * sinh(t) * cos(u), f1 * sinh(t) * sin(u), f1 * cosh(t), f2 * cos(v), f2 * sin(v)]
    q = psi_plus(s)
    x1 = s / 2 * (t * t + u * u - v * v) - a * v * v + q
    out["vii"] = [x1, v * (2 * a + s), s * t, s * u, x1 - s]
    q = psi_minus(s)
    x1 = s * (t * t - u * u - v * v) / 2 + a * v * v + q
    out["viii"] = [x1, s * t, s * u, v * (s - 2 * a), x1 + s]
    return out


def ex41():
    s, t, u, v, a, b = S, T, U, V, A_PAR, B_PAR
    x1 = -a * v * v + b * u * u + 0.5 * s * (t * t + u * u - v * v) + psi_plus(s)
    return [x1, v * (s + 2 * a), s * t, u * (s + 2 * b), x1 - s]


def rem42():
    s, t0, t1, t2, t3 = REM_POINT
    a1, a2, a3 = REM_OFFSETS
    x1 = -a1 * t1 * t1 + a2 * t2 * t2 + a3 * t3 * t3 + s * (t0 * t0 + t2 * t2 + t3 * t3 - t1 * t1) / 2 + psi_plus(s)
    return [x1, t1 * (s + 2 * a1), s * t0, t2 * (s + 2 * a2), t3 * (s + 2 * a3), x1 - s]


def intsurf():
    t, u, r, A = T_SURF, U_SURF, R_SMALL, A_BIG
    return {
        "i": [0, 0, t, u, 0],
        "ii": [0, r * cosh(t), r * sinh(t) * cos(u), r * sinh(t) * sin(u), 0],
        "iii": [0, 0, r * cos(t), r * sin(t) * cos(u), r * sin(t) * sin(u)],
        "iv": [A * t * t + A * u * u, 0, t, u, A * t * t + A * u * u],
        "v": [r * cosh(t) * sin(u), r * cosh(t) * cos(u), r * sinh(t), 0, 0],
        "vi": [A * t * t - A * u * u, t, u, 0, A * t * t - A * u * u],
        "vii": [0, r * sinh(t), r * cosh(t) * cos(u), r * cosh(t) * sin(u), 0],
        "viii": [r * sinh(t) * cos(u), r * sinh(t) * sin(u), r * cosh(t), 0, 0],
    }


def intcurve():
    v, R, a = V_CURVE, R_BIG, A_PAR
    return {
        "A": [0, 0, v, 0, 0],
        "B": [0, 0, cos(R * v) / R, sin(R * v) / R, 0],
        "C": [sinh(R * v) / R, 0, 0, 0, cosh(R * v) / R],
        "D": [cosh(R * v) / R, 0, 0, 0, sinh(R * v) / R],
        "E": [a * v * v, 0, v, 0, a * v * v],
        "F": [cos(R * v) / R, sin(R * v) / R, 0, 0, 0],
        "G": [a * v * v, v, 0, 0, a * v * v],
    }


def rows():
    four = [S, T, U, V]
    for fam, table in (("thm1", thm1()), ("thm2", thm2()), ("thm3", thm3())):
        for case, x in table.items():
            yield f"{fam}.{case}", four, x
    yield "ex41", four, ex41()
    yield "rem42", REM_POINT, rem42()
    for case, x in intsurf().items():
        yield f"intsurf.{case}", [T_SURF, U_SURF], x
    for case, x in intcurve().items():
        yield f"intcurve.{case}", [V_CURVE], x


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "tests/data/golden_charts.csv"
    lines = [
        "# Catalog charts at one pinned point, computed by tools/golden_charts.py from the displayed formulas.",
        f"# a={A_PAR} b={B_PAR} r={R_SMALL} A={A_BIG} R={R_BIG} theta={THETA} s0={S0} phi0={PHI0}",
        "# pair profiles use a constant angle; single-psi cases use s+0.1*s^2 or -s-0.1*s^2",
        "id,point,values",
    ]
    for cid, p, x in rows():
        lines.append(f"{cid},{' '.join(repr(float(v)) for v in p)},{' '.join(repr(float(v)) for v in x)}")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
