"""First-order forward-mode automatic differentiation on numpy arrays.

A :class:`Dual` carries a value array of shape ``S`` together with a
derivative array of shape ``S + (k,)`` holding partials with respect to
``k`` seed directions.  The dynamics and constraint callbacks in this
package are written against the small math interface at the bottom of
this module (``sin``, ``cos``, ``sqrt``, ``arctan2``, ...), which
dispatches between plain numpy and Dual inputs.  The same code path then
serves both evaluation and derivative generation, and the collocation
layer gets exact Jacobians by seeding one lane per local variable and
evaluating all collocation points at once.

Only the operations the dynamics actually use are implemented.  Dividing
by a Dual that passes through zero, or powers of negative values, fail
the same way the underlying numpy expressions would.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Dual",
    "seed",
    "value",
    "sin",
    "cos",
    "sqrt",
    "arctan2",
    "exp",
]


class Dual:
    """Value plus directional derivatives along k seed lanes."""

    __slots__ = ("val", "der")

    def __init__(self, val, der):
        self.val = np.asarray(val, dtype=float)
        self.der = np.asarray(der, dtype=float)
        if self.der.shape[:-1] != self.val.shape:
            # allow scalar values with (k,) derivatives and broadcastable
            # derivative stacks; anything else is a construction bug
            try:
                self.der = np.broadcast_to(
                    self.der, self.val.shape + (self.der.shape[-1],)
                ).copy()
            except ValueError as exc:
                raise ValueError(
                    f"derivative shape {der.shape} incompatible with value "
                    f"shape {self.val.shape}"
                ) from exc

    @property
    def nlanes(self) -> int:
        return self.der.shape[-1]

    # -- helpers -------------------------------------------------------

    def _lift(self, other):
        """Return (val, der) of other, promoting constants to zero-derivative."""
        if isinstance(other, Dual):
            return other.val, other.der
        oval = np.asarray(other, dtype=float)
        return oval, None

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        oval, oder = self._lift(other)
        if oder is None:
            return Dual(self.val + oval, _match(self.der, self.val + oval))
        return Dual(self.val + oval, self.der + oder)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __sub__(self, other):
        return self.__add__(-np.asarray(other) if not isinstance(other, Dual) else -other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        oval, oder = self._lift(other)
        out = self.val * oval
        der = self.der * oval[..., None] if np.ndim(oval) else self.der * oval
        if oder is not None:
            der = der + oder * self.val[..., None]
        return Dual(out, _match(der, out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        oval, oder = self._lift(other)
        out = self.val / oval
        der = self.der / (oval[..., None] if np.ndim(oval) else oval)
        if oder is not None:
            der = der - oder * (out / oval)[..., None]
        return Dual(out, _match(der, out))

    def __rtruediv__(self, other):
        oval = np.asarray(other, dtype=float)
        out = oval / self.val
        der = -self.der * (out / self.val)[..., None]
        return Dual(out, _match(der, out))

    def __pow__(self, p):
        if isinstance(p, Dual):
            raise TypeError("dual exponents are not supported")
        out = self.val ** p
        der = self.der * (p * self.val ** (p - 1))[..., None]
        return Dual(out, _match(der, out))

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Dual(val={self.val!r}, nlanes={self.nlanes})"


def _match(der, val):
    """Broadcast a derivative stack to val.shape + (k,)."""
    val = np.asarray(val)
    if der.shape[:-1] == val.shape:
        return der
    return np.broadcast_to(der, val.shape + (der.shape[-1],)).copy()


def seed(val, lane: int, nlanes: int) -> Dual:
    """Make a Dual for `val` whose derivative is the unit vector of `lane`."""
    val = np.asarray(val, dtype=float)
    der = np.zeros(val.shape + (nlanes,))
    der[..., lane] = 1.0
    return Dual(val, der)


def value(x):
    """Strip the derivative part if present."""
    return x.val if isinstance(x, Dual) else x


# -- elementary functions ----------------------------------------------


def sin(x):
    if isinstance(x, Dual):
        return Dual(np.sin(x.val), x.der * np.cos(x.val)[..., None])
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(np.cos(x.val), -x.der * np.sin(x.val)[..., None])
    return np.cos(x)


def sqrt(x):
    if isinstance(x, Dual):
        r = np.sqrt(x.val)
        return Dual(r, x.der * (0.5 / r)[..., None])
    return np.sqrt(x)


def exp(x):
    if isinstance(x, Dual):
        e = np.exp(x.val)
        return Dual(e, x.der * e[..., None])
    return np.exp(x)


def arctan2(y, x):
    yd = isinstance(y, Dual)
    xd = isinstance(x, Dual)
    if not (yd or xd):
        return np.arctan2(y, x)
    yv = y.val if yd else np.asarray(y, dtype=float)
    xv = x.val if xd else np.asarray(x, dtype=float)
    out = np.arctan2(yv, xv)
    denom = xv * xv + yv * yv
    nl = y.nlanes if yd else x.nlanes
    der = np.zeros(np.shape(out) + (nl,))
    if yd:
        der = der + y.der * (xv / denom)[..., None]
    if xd:
        der = der - x.der * (yv / denom)[..., None]
    return Dual(out, der)
