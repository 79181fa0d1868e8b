"""Scalar rational-function algebra in z.

Coefficients are stored in descending powers of z with a monic
denominator, which keeps degree bookkeeping and long division
index-stable. Products are never cancelled automatically; cancelling
common roots changes realization dimension and must stay an explicit
step (see :meth:`RationalTransferFunction.cancel`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RationalTransferFunction",
    "DecompositionParams",
    "relative_degree",
    "multiply",
    "impulse_response",
    "decompose",
    "second_order_gains",
]

_COEFF_EPS = 1e-12


def _trim_leading(c):
    """Drop leading (high-power) zero coefficients, keeping at least one."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.nonzero(np.abs(c) > _COEFF_EPS)[0]
    if nz.size == 0:
        return np.zeros(1)
    return c[nz[0]:].copy()


class RationalTransferFunction:
    """Proper scalar rational function num(z)/den(z).

    Parameters
    ----------
    num, den : array_like
        Real coefficients in descending powers of z. The denominator is
        normalized to be monic; the numerator is trimmed of leading
        zeros. Improper functions (deg num > deg den) are rejected.
    """

    def __init__(self, num, den):
        den = _trim_leading(den)
        if np.all(np.abs(den) <= _COEFF_EPS):
            raise ValueError("denominator is identically zero")
        num = _trim_leading(np.asarray(num, dtype=float) / den[0])
        den = den / den[0]
        if len(num) > len(den):
            raise ValueError(
                f"improper transfer function: deg(num)={len(num) - 1} > deg(den)={len(den) - 1}"
            )
        self.num = num
        self.den = den

    @property
    def is_zero(self):
        return bool(np.all(np.abs(self.num) <= _COEFF_EPS))

    @property
    def order(self):
        """Denominator degree."""
        return len(self.den) - 1

    @property
    def feedthrough(self):
        """Value at z -> infinity (nonzero only for biproper functions)."""
        if len(self.num) == len(self.den):
            return float(self.num[0])
        return 0.0

    def poles(self):
        return np.roots(self.den)

    def zeros(self):
        return np.roots(self.num)

    def __call__(self, z):
        return np.polyval(self.num, z) / np.polyval(self.den, z)

    def __mul__(self, other):
        return multiply(self, other)

    def equals(self, other, tol=1e-9):
        """Equality as rational functions: num_a*den_b == num_b*den_a.

        Robust to differing (uncancelled) representations of the same
        function.
        """
        lhs = np.convolve(self.num, other.den)
        rhs = np.convolve(other.num, self.den)
        n = max(len(lhs), len(rhs))
        lhs = np.pad(lhs, (n - len(lhs), 0))
        rhs = np.pad(rhs, (n - len(rhs), 0))
        scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1.0)
        return bool(np.max(np.abs(lhs - rhs)) <= tol * scale)

    def cancel(self, tol=1e-8):
        """Return a new function with common root pairs explicitly cancelled."""
        if self.is_zero:
            return RationalTransferFunction([0.0], [1.0])
        nz = list(np.roots(self.num))
        dp = list(np.roots(self.den))
        gain = self.num[0]
        for root in list(nz):
            match = None
            for i, p in enumerate(dp):
                if abs(root - p) <= tol:
                    match = i
                    break
            if match is not None:
                nz.remove(root)
                dp.pop(match)
        num = gain * np.real(np.poly(nz)) if nz else np.array([gain])
        den = np.real(np.poly(dp)) if dp else np.array([1.0])
        return RationalTransferFunction(num, den)

    def __repr__(self):
        num = np.array2string(self.num, precision=6)
        den = np.array2string(self.den, precision=6)
        return f"RationalTransferFunction(num={num}, den={den})"


def relative_degree(g: RationalTransferFunction) -> int:
    """Denominator degree minus numerator degree (both after trimming)."""
    if g.is_zero:
        raise ValueError("relative degree of the zero function is undefined")
    return (len(g.den) - 1) - (len(g.num) - 1)


def multiply(a: RationalTransferFunction, b: RationalTransferFunction) -> RationalTransferFunction:
    """Product of two proper rational functions, without cancellation."""
    return RationalTransferFunction(np.convolve(a.num, b.num), np.convolve(a.den, b.den))


def impulse_response(g: RationalTransferFunction, n: int) -> np.ndarray:
    """First n samples of the inverse Z-transform of g.

    Computed by the difference-equation recursion equivalent to long
    division, so uncancelled representations give the response of the
    underlying function.
    """
    if n < 0:
        raise ValueError("sample count must be non-negative")
    order = len(g.den) - 1
    b = np.pad(g.num, (len(g.den) - len(g.num), 0))  # align with den
    a = g.den
    h = np.zeros(n)
    for t in range(n):
        acc = b[t] if t <= order else 0.0
        for k in range(1, min(t, order) + 1):
            acc -= a[k] * h[t - k]
        h[t] = acc
    return h


@dataclass(frozen=True)
class DecompositionParams:
    """Gains and pole locations for the two first-order relay stages.

    Both stage poles must lie strictly inside the unit circle: a relay
    stage has to be internally stable even when a later cancellation
    would hide an unstable mode.
    """

    c1: float = 1.0
    c3: float = 1.0
    eps1: float = 0.0
    eps3: float = 0.0

    def __post_init__(self):
        if self.c1 == 0.0 or self.c3 == 0.0:
            raise ValueError("stage gains c1, c3 must be nonzero")
        if abs(self.eps1) >= 1.0 or abs(self.eps3) >= 1.0:
            raise ValueError("stage poles eps1, eps3 must satisfy |eps| < 1")


def second_order_gains(g: RationalTransferFunction):
    """Extract (k0, k1, k2) from the second-order form k0 / (z^2 - k1 z - k2)."""
    if len(g.den) != 3 or len(g.num) != 1:
        raise ValueError("expected the form k0 / (z^2 - k1 z - k2)")
    k0 = float(g.num[0])
    if k0 == 0.0:
        raise ValueError("degenerate controller: zero numerator")
    return k0, float(-g.den[1]), float(-g.den[2])


def decompose(g: RationalTransferFunction, p: DecompositionParams):
    """Split g = g3 * g2 * g1 with relative degrees (1, 0, 1).

    g1 and g3 are first-order relay stages c/(z - eps); g2 is the
    biproper second-order remainder whose zeros sit exactly on the relay
    poles, so the product reproduces g. Requires g in the second-order
    relative-degree-2 form produced by the delayed-LQR synthesis.

    Returns
    -------
    (g1, g2, g3) : tuple of RationalTransferFunction
    """
    k0, k1, k2 = second_order_gains(g)
    if relative_degree(g) != 2:
        raise ValueError("decomposition requires relative degree 2")
    g1 = RationalTransferFunction([p.c1], [1.0, -p.eps1])
    g3 = RationalTransferFunction([p.c3], [1.0, -p.eps3])
    scale = k0 / (p.c1 * p.c3)
    g2 = RationalTransferFunction(
        [scale, -scale * (p.eps1 + p.eps3), scale * p.eps1 * p.eps3],
        [1.0, -k1, -k2],
    )
    return g1, g2, g3
