"""Taylor jet of the Legendre transform from the jet of ``f``.

With ``m = f'(x)`` the dual satisfies ``g'(m) = x``, so the jet of ``g`` at
``m0 = f'(x0)`` follows from inverting the slope series ``m - m0`` in
``h = x - x0`` and integrating ``x(m)`` once.
"""

from __future__ import annotations

import numpy as np

from . import series as S
from .config import DEFAULT
from .errors import InvalidParameter, SingularCurvature
from .expr import Expression, Jet, eval_jet, parse
from .funcspace import ScalarFunction

__all__ = ["dual_jet", "dual_jet_of"]


def dual_jet(f_jet: Jet, order: int, eps: float = DEFAULT.curvature_eps) -> Jet:
    """Jet of ``g`` at ``m0 = f'(x0)`` through ``order``.

    ``g(m0) = x0 f'(x0) - f(x0)``, ``g'(m0) = x0``, ``g''(m0) = 1/f''(x0)``,
    and higher terms come from series reversion.  Needs ``f_jet`` of at
    least the same order and ``|f''(x0)| >= eps``.
    """
    if order < 2:
        raise InvalidParameter("dual jets start at order 2")
    if f_jet.order < order:
        raise InvalidParameter(f"need an f-jet of order {order}, got {f_jet.order}")
    c = np.array(f_jet.coeffs[: order + 1], dtype=float)
    x0 = f_jet.basepoint
    f2 = 2.0 * c[2]
    if not abs(f2) >= eps:
        raise SingularCurvature(f"|f''({x0!r})| = {abs(f2):.3g} is below {eps:.3g}")
    slope = S.derivative(c)  # f'(x0 + h), order - 1 terms
    m0 = float(slope[0])
    shifted = slope.copy()
    shifted[0] = 0.0
    h_of_m = S.revert(shifted)  # h as a series in m - m0
    x_of_m = h_of_m.copy()
    x_of_m[0] = x0
    g = S.integral(x_of_m, x0 * m0 - c[0]) + 0.0  # no negative zeros
    return Jet.from_array(m0, g)


def dual_jet_of(f: ScalarFunction | Expression | str, x0: float, order: int, eps: float = DEFAULT.curvature_eps) -> Jet:
    """Convenience wrapper: evaluate the jet of ``f`` at ``x0`` and dualize."""
    if isinstance(f, str):
        f = parse(f)
    if isinstance(f, Expression):
        fj = eval_jet(f, float(x0), order)
    else:
        fj = f.jet(float(x0), order)
    return dual_jet(fj, order, eps)
