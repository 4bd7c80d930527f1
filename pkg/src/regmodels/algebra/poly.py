"""Multivariate polynomials over Z/p^M with tracked precision.

Coefficients are integer residues mod p^M; a polynomial carries the pair
(p, precision) and the precision of any binary operation is the minimum of
the operand precisions.  Zero coefficients are never stored.  The canonical
term order is graded lexicographic over the alphabetically sorted variable
names; serialization and display follow it, so equal polynomials always
print identically.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Tuple

from ..errors import PrecisionExhausted
from .padic import TruncatedPadic

Exponents = Tuple[int, ...]


class PadicPoly:
    __slots__ = ("p", "precision", "variables", "terms")

    def __init__(self, p: int, precision: int, variables: Tuple[str, ...],
                 terms: Dict[Exponents, int], _normalized: bool = False):
        self.p = p
        self.precision = precision
        if _normalized:
            self.variables = variables
            self.terms = terms
            return
        order = tuple(sorted(variables))
        remap = [variables.index(v) for v in order]
        mod = p**precision
        clean: Dict[Exponents, int] = {}
        for exps, c in terms.items():
            c %= mod
            if c == 0:
                continue
            key = tuple(exps[i] for i in remap)
            clean[key] = (clean.get(key, 0) + c) % mod
            if clean[key] == 0:
                del clean[key]
        self.variables = order
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @staticmethod
    def constant(c: int, p: int, precision: int) -> "PadicPoly":
        c %= p**precision
        return PadicPoly(p, precision, (), {(): c} if c else {}, _normalized=True)

    @staticmethod
    def zero(p: int, precision: int) -> "PadicPoly":
        return PadicPoly(p, precision, (), {}, _normalized=True)

    @staticmethod
    def var(name: str, p: int, precision: int) -> "PadicPoly":
        return PadicPoly(p, precision, (name,), {(1,): 1}, _normalized=True)

    @staticmethod
    def from_univariate(coeffs: Iterable[int], name: str, p: int, precision: int) -> "PadicPoly":
        """coeffs[i] is the coefficient of name**i."""
        terms = {(i,): c for i, c in enumerate(coeffs)}
        return PadicPoly(p, precision, (name,), terms)

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exps) for exps in self.terms)

    def constant_value(self) -> TruncatedPadic:
        zero_key = (0,) * len(self.variables)
        return TruncatedPadic(self.p, self.terms.get(zero_key, 0), self.precision)

    def coefficient(self, exps: Exponents) -> TruncatedPadic:
        return TruncatedPadic(self.p, self.terms.get(tuple(exps), 0), self.precision)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree(self, name: str) -> int:
        if name not in self.variables:
            return 0
        i = self.variables.index(name)
        return max((e[i] for e in self.terms), default=0)

    def sorted_terms(self):
        """Graded-lex order, highest first."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def min_coeff_valuation(self):
        """Minimum p-adic valuation over coefficients; None if zero poly."""
        best = None
        for c in self.terms.values():
            v = 0
            while c % self.p == 0:
                c //= self.p
                v += 1
            if best is None or v < best:
                best = v
            if best == 0:
                return 0
        return best

    # -- alignment ----------------------------------------------------------

    def _align(self, other: "PadicPoly"):
        if self.p != other.p:
            raise ValueError("mixed primes")
        prec = min(self.precision, other.precision)
        if self.variables == other.variables:
            return self.variables, prec, self.terms, other.terms

        allvars = tuple(sorted(set(self.variables) | set(other.variables)))

        def embed(poly):
            idx = [allvars.index(v) for v in poly.variables]
            out = {}
            for exps, c in poly.terms.items():
                key = [0] * len(allvars)
                for j, e in zip(idx, exps):
                    key[j] = e
                out[tuple(key)] = c
            return out

        return allvars, prec, embed(self), embed(other)

    def _coerce(self, other):
        if isinstance(other, PadicPoly):
            return other
        if isinstance(other, int):
            return PadicPoly.constant(other, self.p, self.precision)
        if isinstance(other, TruncatedPadic):
            return PadicPoly.constant(other.residue, self.p, other.precision)
        return NotImplemented

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        allvars, prec, a, b = self._align(o)
        mod = self.p**prec
        terms = dict(a)
        for exps, c in b.items():
            terms[exps] = (terms.get(exps, 0) + c) % mod
        terms = {e: c % mod for e, c in terms.items() if c % mod}
        return PadicPoly(self.p, prec, allvars, terms, _normalized=True)

    __radd__ = __add__

    def __neg__(self):
        mod = self.p**self.precision
        return PadicPoly(self.p, self.precision, self.variables,
                         {e: mod - c for e, c in self.terms.items()}, _normalized=True)

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
        allvars, prec, a, b = self._align(o)
        mod = self.p**prec
        terms: Dict[Exponents, int] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                key = tuple(x + y for x, y in zip(e1, e2))
                terms[key] = (terms.get(key, 0) + c1 * c2) % mod
        terms = {e: c for e, c in terms.items() if c}
        return PadicPoly(self.p, prec, allvars, terms, _normalized=True)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = PadicPoly.constant(1, self.p, self.precision)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, PadicPoly):
            return NotImplemented
        return (self.p == other.p and self.precision == other.precision
                and self._embedded_terms() == other._embedded_terms())

    def _embedded_terms(self):
        return {tuple((v, e) for v, e in zip(self.variables, exps) if e): c
                for exps, c in self.terms.items()}

    def __hash__(self):
        return hash((self.p, self.precision, frozenset(self._embedded_terms().items())))

    # -- congruence / precision ----------------------------------------------

    def congruent(self, other: "PadicPoly", N: int) -> bool:
        """f == g mod pi^N; both operands must carry precision >= N."""
        if min(self.precision, other.precision) < N:
            raise PrecisionExhausted(
                f"congruence mod p^{N} undecidable at precision "
                f"{min(self.precision, other.precision)}")
        diff = self - other
        v = diff.min_coeff_valuation()
        return v is None or v >= N

    def truncate(self, precision: int) -> "PadicPoly":
        if precision > self.precision:
            raise PrecisionExhausted("cannot increase precision by truncation")
        mod = self.p**precision
        terms = {e: c % mod for e, c in self.terms.items() if c % mod}
        return PadicPoly(self.p, precision, self.variables, terms, _normalized=True)

    def divide_by_pi_power(self, e: int) -> "PadicPoly":
        """Divide every coefficient by p^e, losing e digits of precision."""
        if e == 0:
            return self
        if self.precision <= e:
            raise PrecisionExhausted(f"dividing by p^{e} exhausts precision {self.precision}")
        pe = self.p**e
        terms = {}
        for exps, c in self.terms.items():
            if c % pe != 0:
                raise ValueError("coefficient not divisible by p^%d" % e)
            terms[exps] = c // pe
        return PadicPoly(self.p, self.precision - e, self.variables, terms)

    def mul_by_pi_power(self, e: int) -> "PadicPoly":
        pe = self.p**e
        return self.map_coefficients(lambda c: c * pe)

    def map_coefficients(self, func) -> "PadicPoly":
        return PadicPoly(self.p, self.precision, self.variables,
                         {e: func(c) for e, c in self.terms.items()})

    # -- calculus -------------------------------------------------------------

    def partial(self, name: str) -> "PadicPoly":
        if name not in self.variables:
            return PadicPoly.zero(self.p, self.precision)
        i = self.variables.index(name)
        terms = {}
        for exps, c in self.terms.items():
            if exps[i] == 0:
                continue
            key = exps[:i] + (exps[i] - 1,) + exps[i + 1:]
            terms[key] = terms.get(key, 0) + c * exps[i]
        return PadicPoly(self.p, self.precision, self.variables, terms)

    # -- substitution -----------------------------------------------------------

    def substitute(self, mapping: Mapping[str, "PadicPoly | int"]) -> "PadicPoly":
        """Simultaneously substitute polynomials for variables."""
        prec = self.precision
        subs = {}
        for name, val in mapping.items():
            if isinstance(val, int):
                val = PadicPoly.constant(val, self.p, prec)
            subs[name] = val
            prec = min(prec, val.precision)
        result = PadicPoly.zero(self.p, prec)
        # Horner-free direct expansion; desk-scale polynomials are small.
        power_cache: Dict[Tuple[str, int], PadicPoly] = {}

        def power_of(name, e):
            key = (name, e)
            if key not in power_cache:
                base = subs.get(name, PadicPoly.var(name, self.p, prec))
                power_cache[key] = base**e
            return power_cache[key]

        for exps, c in self.terms.items():
            term = PadicPoly.constant(c, self.p, prec)
            for name, e in zip(self.variables, exps):
                if e:
                    term = term * power_of(name, e)
            result = result + term
        return result

    def evaluate(self, assignment: Mapping[str, object], ring=None):
        """Evaluate with values in an arbitrary commutative ring.

        Values must support + and * among themselves and with the ring
        elements produced by ring.from_int (or plain ints when ring is None).
        """
        def lift_const(c):
            return c if ring is None else ring.from_int(c)

        total = None
        for exps, c in self.terms.items():
            term = lift_const(c)
            for name, e in zip(self.variables, exps):
                if e:
                    val = assignment[name]
                    for _ in range(e):
                        term = term * val
            total = term if total is None else total + term
        if total is None:
            return lift_const(0)
        return total

    # -- univariate views ----------------------------------------------------

    def as_univariate(self, name: str):
        """Coefficients of name**i as polynomials in the remaining variables."""
        if name not in self.variables:
            return [self]
        i = self.variables.index(name)
        rest = self.variables[:i] + self.variables[i + 1:]
        d = self.degree(name)
        buckets: list[Dict[Exponents, int]] = [dict() for _ in range(d + 1)]
        for exps, c in self.terms.items():
            key = exps[:i] + exps[i + 1:]
            buckets[exps[i]][key] = c
        return [PadicPoly(self.p, self.precision, rest, b, _normalized=True)
                for b in buckets]

    @staticmethod
    def from_univariate_coeffs(coeffs, name: str, p: int, precision: int) -> "PadicPoly":
        """Inverse of as_univariate: coeffs are PadicPoly in other variables."""
        result = PadicPoly.zero(p, precision)
        xi = PadicPoly.var(name, p, precision)
        for i, c in enumerate(coeffs):
            result = result + c * xi**i
        return result

    def div_rem(self, divisor: "PadicPoly", name: str):
        """Division with remainder in the main variable `name`.

        Requires the divisor's leading coefficient in `name` to be a unit
        polynomial (invertible mod p^M).
        """
        dcoeffs = divisor.as_univariate(name)
        lead = dcoeffs[-1]
        lead_inv = lead.inverse_unit()
        d = len(dcoeffs) - 1
        rem = self
        quot = PadicPoly.zero(self.p, min(self.precision, divisor.precision))
        xi = PadicPoly.var(name, self.p, self.precision)
        while not rem.is_zero() and rem.degree(name) >= d:
            rcoeffs = rem.as_univariate(name)
            k = len(rcoeffs) - 1
            factor = rcoeffs[-1] * lead_inv * xi**(k - d)
            quot = quot + factor
            rem = rem - factor * divisor
            if rem.degree(name) >= k and not rem.as_univariate(name)[k].is_zero():
                raise ArithmeticError("division failed to reduce degree")
        return quot, rem

    def exact_div(self, divisor: "PadicPoly", name: str) -> "PadicPoly":
        quot, rem = self.div_rem(divisor, name)
        if not rem.is_zero():
            raise ValueError("not exactly divisible")
        return quot

    def inverse_unit(self) -> "PadicPoly":
        """Inverse of a unit of (Z/p^M)[vars].

        A polynomial is a unit iff its constant term is a p-unit and every
        non-constant coefficient is divisible by p; the inverse comes from
        the finite Neumann series of the nilpotent part.
        """
        c0 = self.constant_value()
        if not c0.is_unit():
            raise PrecisionExhausted("constant term is not a unit")
        zero_key = (0,) * len(self.variables)
        for exps, c in self.terms.items():
            if exps != zero_key and c % self.p != 0:
                raise PrecisionExhausted("non-constant coefficient is a p-unit: not invertible")
        c0_inv = c0.inverse().residue
        # self = c0 (1 - n) with n nilpotent (coefficients in pZ)
        n = PadicPoly.constant(1, self.p, self.precision) - self.map_coefficients(
            lambda c: c * c0_inv)
        inv = PadicPoly.constant(1, self.p, self.precision)
        power = n
        for _ in range(self.precision):
            if power.is_zero():
                break
            inv = inv + power
            power = power * n
        return inv.map_coefficients(lambda c: c * c0_inv)

    # -- residue extraction ----------------------------------------------------

    def mod_p_terms(self) -> Dict[Exponents, int]:
        """Coefficients mod p with zeros dropped; exponents follow self.variables."""
        return {e: c % self.p for e, c in self.terms.items() if c % self.p}

    # -- display -----------------------------------------------------------------

    def canonical_key(self):
        return (self.variables, tuple(sorted(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for exps, c in self.sorted_terms():
            mono = "*".join(
                f"{v}^{e}" if e > 1 else v
                for v, e in zip(self.variables, exps) if e)
            bits.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(bits)
