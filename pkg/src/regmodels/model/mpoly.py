"""Multivariate polynomials over a finite field (mod-p residues of charts).

Used to decompose chart special fibres into parametrized branches: the
ambient relations mod p are products of small pieces, and solving them one
variable at a time reduces every fibre piece to a bivariate hypersurface.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

from ..algebra.bivariate import BiPoly
from ..algebra.finitefield import FFElem, FiniteField
from ..algebra.poly import PadicPoly

Exps = Tuple[int, ...]


class MPoly:
    __slots__ = ("F", "variables", "terms")

    def __init__(self, F: FiniteField, variables: Tuple[str, ...],
                 terms: Dict[Exps, FFElem]):
        self.F = F
        order = tuple(sorted(variables))
        remap = [variables.index(v) for v in order]
        clean: Dict[Exps, FFElem] = {}
        for exps, c in terms.items():
            if F.is_zero(c):
                continue
            key = tuple(exps[i] for i in remap)
            clean[key] = F.add(clean[key], c) if key in clean else c
            if F.is_zero(clean[key]):
                del clean[key]
        # drop variables that never occur: keeps alignment maps small
        used = [i for i, v in enumerate(order) if any(e[i] for e in clean)]
        if len(used) != len(order):
            order = tuple(order[i] for i in used)
            clean = {tuple(e[i] for i in used): c for e, c in clean.items()}
        self.variables = order
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_padic(poly: PadicPoly, F: FiniteField) -> "MPoly":
        return MPoly(F, poly.variables,
                     {e: F.from_int(c) for e, c in poly.terms.items()})

    @staticmethod
    def constant(c: FFElem, F: FiniteField) -> "MPoly":
        return MPoly(F, (), {(): c})

    @staticmethod
    def var(name: str, F: FiniteField) -> "MPoly":
        return MPoly(F, (name,), {(1,): F.one})

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in k) for k in self.terms)

    def constant_value(self) -> FFElem:
        return self.terms.get((0,) * len(self.variables), self.F.zero)

    def vars_present(self) -> List[str]:
        out = []
        for i, v in enumerate(self.variables):
            if any(e[i] for e in self.terms):
                out.append(v)
        return out

    def degree(self, name: str) -> int:
        if name not in self.variables:
            return 0
        i = self.variables.index(name)
        return max((e[i] for e in self.terms), default=0)

    # -- arithmetic ----------------------------------------------------------

    def _align(self, other: "MPoly"):
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

        return allvars, embed(self), embed(other)

    def __add__(self, other: "MPoly") -> "MPoly":
        allvars, a, b = self._align(other)
        F = self.F
        for k, v in b.items():
            a[k] = F.add(a[k], v) if k in a else v
        return MPoly(F, allvars, a)

    def __neg__(self) -> "MPoly":
        return MPoly(self.F, self.variables,
                     {k: self.F.neg(v) for k, v in self.terms.items()})

    def __sub__(self, other: "MPoly") -> "MPoly":
        return self + (-other)

    def __mul__(self, other: "MPoly") -> "MPoly":
        allvars, a, b = self._align(other)
        F = self.F
        out: Dict[Exps, FFElem] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                k = tuple(x + y for x, y in zip(e1, e2))
                prod = F.mul(c1, c2)
                out[k] = F.add(out[k], prod) if k in out else prod
        return MPoly(F, allvars, out)

    def __pow__(self, n: int) -> "MPoly":
        out = MPoly.constant(self.F.one, self.F)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c: FFElem) -> "MPoly":
        return MPoly(self.F, self.variables,
                     {k: self.F.mul(v, c) for k, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        return self._packed() == other._packed()

    def _packed(self):
        return {tuple((v, e) for v, e in zip(self.variables, exps) if e): c
                for exps, c in self.terms.items()}

    def __hash__(self):
        return hash(frozenset(self._packed().items()))

    # -- substitution ------------------------------------------------------------

    def substitute_poly(self, name: str, value: "MPoly") -> "MPoly":
        if name not in self.variables:
            return self
        i = self.variables.index(name)
        rest = self.variables[:i] + self.variables[i + 1:]
        out = MPoly(self.F, (), {})
        for exps, c in self.terms.items():
            key = exps[:i] + exps[i + 1:]
            base = MPoly(self.F, rest, {key: c})
            out = out + base * value**exps[i]
        return out

    def substitute_cleared(self, name: str, num: "MPoly", den: "MPoly"):
        """Substitute name := num/den, multiplied through by den^deg.

        Returns (cleared polynomial, exponent of den used)."""
        d = self.degree(name)
        if d == 0:
            return self, 0
        i = self.variables.index(name)
        rest = self.variables[:i] + self.variables[i + 1:]
        out = MPoly(self.F, (), {})
        for exps, c in self.terms.items():
            key = exps[:i] + exps[i + 1:]
            base = MPoly(self.F, rest, {key: c})
            out = out + base * num**exps[i] * den**(d - exps[i])
        return out, d

    def coefficients_in(self, name: str) -> List["MPoly"]:
        """Coefficient of name**k, as polynomials in the other variables."""
        d = self.degree(name)
        if name not in self.variables:
            return [self]
        i = self.variables.index(name)
        rest = self.variables[:i] + self.variables[i + 1:]
        buckets: List[Dict[Exps, FFElem]] = [dict() for _ in range(d + 1)]
        for exps, c in self.terms.items():
            buckets[exps[i]][exps[:i] + exps[i + 1:]] = c
        return [MPoly(self.F, rest, b) for b in buckets]

    def to_bipoly(self, xname: str, yname: str) -> BiPoly:
        extra = [v for v in self.vars_present() if v not in (xname, yname)]
        if extra:
            raise ValueError(f"extra variables {extra} present")
        terms: Dict[Tuple[int, int], FFElem] = {}
        xi = self.variables.index(xname) if xname in self.variables else None
        yi = self.variables.index(yname) if yname in self.variables else None
        for exps, c in self.terms.items():
            i = exps[xi] if xi is not None else 0
            j = exps[yi] if yi is not None else 0
            terms[(i, j)] = c
        return BiPoly(self.F, xname, yname, terms)

    @staticmethod
    def from_bipoly(b: BiPoly) -> "MPoly":
        return MPoly(b.F, (b.xname, b.yname), dict(b.terms))

    def evaluate(self, point: Dict[str, FFElem]) -> FFElem:
        F = self.F
        total = F.zero
        for exps, c in self.terms.items():
            term = c
            for name, e in zip(self.variables, exps):
                if e:
                    term = F.mul(term, F.pow(point[name], e))
            total = F.add(total, term)
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for exps, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]),
                              reverse=True):
            mono = "*".join(f"{v}^{e}" if e > 1 else v
                            for v, e in zip(self.variables, exps) if e)
            bits.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(bits)
