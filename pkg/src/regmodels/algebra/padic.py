"""Truncated p-adic scalars.

An element of R/pi^M for R = Z_p is stored as an integer residue mod p^M
together with its precision M.  Arithmetic never claims precision beyond
what the operands carry: sums and products live at the minimum of the two
precisions.  A residue of 0 at precision M is indistinguishable from
anything of valuation >= M; `valuation` reports that case as None.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import PrecisionExhausted


@dataclass(frozen=True)
class TruncatedPadic:
    p: int
    residue: int
    precision: int

    def __post_init__(self):
        if self.precision < 1:
            raise ValueError("precision must be >= 1")
        object.__setattr__(self, "residue", self.residue % self.p**self.precision)

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_int(n: int, p: int, precision: int) -> "TruncatedPadic":
        return TruncatedPadic(p, n % p**precision, precision)

    @staticmethod
    def zero(p: int, precision: int) -> "TruncatedPadic":
        return TruncatedPadic(p, 0, precision)

    @staticmethod
    def one(p: int, precision: int) -> "TruncatedPadic":
        return TruncatedPadic(p, 1, precision)

    # -- basic queries -----------------------------------------------------

    @property
    def modulus(self) -> int:
        return self.p**self.precision

    def is_zero(self) -> bool:
        """Zero at this precision (valuation >= precision)."""
        return self.residue == 0

    def is_unit(self) -> bool:
        return self.residue % self.p != 0

    def valuation(self):
        """Largest e < precision with p^e | residue, or None for ">= M"."""
        return valuation(self)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "TruncatedPadic":
        if isinstance(other, TruncatedPadic):
            if other.p != self.p:
                raise ValueError("mixed primes")
            return other
        if isinstance(other, int):
            return TruncatedPadic.from_int(other, self.p, self.precision)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        m = min(self.precision, o.precision)
        return TruncatedPadic(self.p, (self.residue + o.residue) % self.p**m, m)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedPadic(self.p, -self.residue % self.modulus, self.precision)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        m = min(self.precision, o.precision)
        return TruncatedPadic(self.p, (self.residue * o.residue) % self.p**m, m)

    __rmul__ = __mul__

    def inverse(self) -> "TruncatedPadic":
        if not self.is_unit():
            raise PrecisionExhausted(
                f"cannot invert non-unit {self.residue} mod {self.p}^{self.precision}"
            )
        return TruncatedPadic(self.p, pow(self.residue, -1, self.modulus), self.precision)

    def divide_exact(self, e: int) -> "TruncatedPadic":
        """Divide by p^e, losing e digits of precision."""
        if e == 0:
            return self
        if self.precision <= e:
            raise PrecisionExhausted(f"division by p^{e} exhausts precision {self.precision}")
        if self.residue % self.p**e != 0:
            raise ValueError(f"{self.residue} not divisible by p^{e}")
        return TruncatedPadic(self.p, self.residue // self.p**e, self.precision - e)

    def truncate(self, precision: int) -> "TruncatedPadic":
        if precision > self.precision:
            raise PrecisionExhausted("cannot increase precision by truncation")
        return TruncatedPadic(self.p, self.residue % self.p**precision, precision)

    def lift(self) -> int:
        """Canonical integer representative in [0, p^M)."""
        return self.residue

    def __repr__(self):
        return f"{self.residue} + O({self.p}^{self.precision})"


def valuation(x: TruncatedPadic):
    """p-adic valuation of a truncated scalar.

    Returns the exact integer valuation when it is < precision, and None
    when the residue vanishes mod p^M (printed as ">=M" in reports).
    """
    if x.residue == 0:
        return None
    e = 0
    r = x.residue
    while r % x.p == 0:
        r //= x.p
        e += 1
    return e


def valuation_str(x: TruncatedPadic) -> str:
    v = valuation(x)
    return f">={x.precision}" if v is None else str(v)
