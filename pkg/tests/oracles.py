"""Independent reference computations shared by the test modules."""
import numpy as np
import sympy as sp

from equimesh.assembly import interior_residual
from equimesh.grid import ComputationalGrid, PhysicalMesh
from equimesh.monitor import MonitorParams, register_problem


def stencil_order(a=0.7, b=0.05, sizes=(11, 21, 41)):
    """Observed order of r1/d_xi against the exact d(S1)/d(xi) at the center node.

    The exact value comes from sympy on a smooth curvilinear map and a smooth
    solution; returns ``(slope, errors)``.
    """
    xi, eta, X_, Y_ = sp.symbols("xi eta X Y")
    u_expr = sp.sin(2 * X_) * sp.cos(Y_) + X_ * Y_
    x_map = xi + sp.Rational(1, 20) * sp.sin(sp.pi * xi) * sp.sin(sp.pi * eta)
    y_map = eta + sp.Rational(1, 25) * sp.sin(2 * sp.pi * xi) * sp.sin(sp.pi * eta)
    w1 = sp.diff(u_expr, X_).subs({X_: x_map, Y_: y_map})
    w2 = sp.diff(u_expr, Y_).subs({X_: x_map, Y_: y_map})
    k = a ** 2 / (1 + b * (w1 ** 2 + w2 ** 2))
    dx, dy = sp.diff(x_map, xi), sp.diff(y_map, xi)
    S1 = sp.sqrt((k * w1 ** 2 + 1) * dx ** 2 + 2 * k * w1 * w2 * dx * dy + (k * w2 ** 2 + 1) * dy ** 2)
    exact = float(sp.diff(S1, xi).subs({xi: 0.5, eta: 0.5}))

    register_problem("smooth-test", sp.lambdify((X_, Y_), u_expr, "numpy"))
    fx = sp.lambdify((xi, eta), x_map, "numpy")
    fy = sp.lambdify((xi, eta), y_map, "numpy")
    hs, errs = [], []
    for n in sizes:
        g = ComputationalGrid(n, n)
        XI, ETA = np.meshgrid(g.xi, g.eta, indexing="ij")
        mesh = PhysicalMesh(fx(XI, ETA), fy(XI, ETA))
        c = (n - 1) // 2
        r1, _ = interior_residual(mesh, MonitorParams(a, b), "smooth-test", c, c)
        hs.append(g.d_xi)
        errs.append(abs(r1 / g.d_xi - exact))
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0]), errs
