"""Sparse multilinear polynomials over binary variables.

A :class:`BinaryPolynomial` maps monomials (sorted tuples of distinct
:class:`BinaryVar`) to real coefficients, plus a separate constant.  Since
every variable is 0/1, ``x * x == x`` is applied whenever monomials are built,
so no monomial ever repeats a variable.
"""

from __future__ import annotations

import math
import re
from collections.abc import Mapping
from types import MappingProxyType
from typing import NamedTuple

from .errors import UnboundVariable


class BinaryVar(NamedTuple):
    """One-hot variable ``x_ik`` (kind 0) or a quadratization auxiliary (kind 1).

    Tuple ordering gives the canonical variable order: one-hot variables by
    torsion then angle, auxiliaries after all of them.
    """

    kind: int
    torsion: int
    angle: int

    @classmethod
    def onehot(cls, torsion: int, angle: int) -> "BinaryVar":
        return cls(0, torsion, angle)

    @classmethod
    def aux(cls, index: int) -> "BinaryVar":
        return cls(1, index, 0)

    @property
    def is_aux(self) -> bool:
        return self.kind == 1

    def __str__(self):
        if self.kind == 1:
            return f"y{self.torsion}"
        return f"t{self.torsion}_a{self.angle}"

    @classmethod
    def parse(cls, token: str) -> "BinaryVar":
        m = re.fullmatch(r"t(\d+)_a(\d+)", token)
        if m:
            return cls.onehot(int(m.group(1)), int(m.group(2)))
        m = re.fullmatch(r"y(\d+)", token)
        if m:
            return cls.aux(int(m.group(1)))
        raise ValueError(f"not a variable token: {token!r}")


Monomial = tuple  # sorted tuple of BinaryVar


def monomial(vars_) -> Monomial:
    return tuple(sorted(set(vars_)))


class BinaryPolynomial:
    """Immutable sparse polynomial; zero coefficients are never stored."""

    __slots__ = ("_terms", "_constant")

    def __init__(self, terms: Mapping | None = None, constant: float = 0.0):
        acc: dict[Monomial, float] = {}
        const = float(constant)
        for key, c in (terms or {}).items():
            mono = monomial(key)
            if not mono:
                const += c
            else:
                acc[mono] = acc.get(mono, 0.0) + c
        self._terms = {k: float(v) for k, v in acc.items() if v != 0.0}
        self._constant = const

    @classmethod
    def _raw(cls, terms: dict, constant: float) -> "BinaryPolynomial":
        # caller guarantees canonical keys and no zero coefficients
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._constant = float(constant)
        return obj

    @property
    def terms(self) -> Mapping[Monomial, float]:
        return MappingProxyType(self._terms)

    @property
    def constant(self) -> float:
        return self._constant

    def __len__(self):
        return len(self._terms)

    @property
    def num_terms(self) -> int:
        """Stored monomials, counting a nonzero constant as one term."""
        return len(self._terms) + (self._constant != 0.0)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    def variables(self) -> tuple[BinaryVar, ...]:
        return tuple(sorted({v for k in self._terms for v in k}))

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, BinaryPolynomial):
            return NotImplemented
        return self._constant == other._constant and self._terms == other._terms

    def __hash__(self):
        return hash((self._constant, frozenset(self._terms.items())))

    def __repr__(self):
        return f"BinaryPolynomial({len(self._terms)} terms, degree {self.degree}, constant {self._constant!r})"

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return BinaryPolynomial._raw(dict(self._terms), self._constant + other)
        if not isinstance(other, BinaryPolynomial):
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            s = out.get(k, 0.0) + c
            if s == 0.0:
                out.pop(k, None)
            else:
                out[k] = s
        return BinaryPolynomial._raw(out, self._constant + other._constant)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            if other == 0:
                return BinaryPolynomial()
            return BinaryPolynomial._raw(
                {k: c * other for k, c in self._terms.items()}, self._constant * other
            )
        if not isinstance(other, BinaryPolynomial):
            return NotImplemented
        out: dict[Monomial, float] = {}
        left = list(self._terms.items())
        if self._constant:
            left.append(((), self._constant))
        right = list(other._terms.items())
        if other._constant:
            right.append(((), other._constant))
        const = 0.0
        for ka, ca in left:
            for kb, cb in right:
                key = monomial(ka + kb) if ka and kb else (ka or kb)
                if not key:
                    const += ca * cb
                else:
                    out[key] = out.get(key, 0.0) + ca * cb
        return BinaryPolynomial({k: v for k, v in out.items()}, const)

    __rmul__ = __mul__

    def evaluate(self, assignment: Mapping) -> float:
        return evaluate(self, assignment)

    def to_text(self) -> str:
        return dumps(self)


def variable(var: BinaryVar, coeff: float = 1.0) -> BinaryPolynomial:
    return BinaryPolynomial({(var,): coeff})


def evaluate(poly: BinaryPolynomial, assignment: Mapping) -> float:
    """Value of ``poly`` at a 0/1 assignment covering all its variables."""
    total = poly.constant
    for mono, c in poly.terms.items():
        for v in mono:
            try:
                val = assignment[v]
            except KeyError:
                raise UnboundVariable(f"no value for variable {v}") from None
            if not val:
                break
        else:
            total += c
    return total


def prune(poly: BinaryPolynomial, threshold: float, keep=None) -> BinaryPolynomial:
    """Drop monomials with ``|c| < threshold * max|c|`` (constant always kept).

    ``keep`` optionally names monomials that survive regardless of size.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold}")
    if threshold == 0.0 or not poly.terms:
        return poly
    cut = threshold * poly.max_abs_coefficient()
    keep = keep or ()
    terms = {k: c for k, c in poly.terms.items() if abs(c) >= cut or k in keep}
    return BinaryPolynomial._raw(terms, poly.constant)


def dumps(poly: BinaryPolynomial) -> str:
    """Text form: one ``coeff var var ...`` line per monomial, constant first."""
    lines = []
    if poly.constant != 0.0:
        lines.append(repr(poly.constant))
    for mono in sorted(poly.terms, key=lambda k: (len(k), k)):
        lines.append(" ".join([repr(poly.terms[mono])] + [str(v) for v in mono]))
    return "\n".join(lines) + ("\n" if lines else "")


def loads(text: str) -> BinaryPolynomial:
    terms: dict[Monomial, float] = {}
    const = 0.0
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        try:
            coeff = float(tok[0])
            mono = monomial(BinaryVar.parse(t) for t in tok[1:])
        except ValueError as exc:
            raise ValueError(f"line {line_no}: {exc}") from None
        if not mono:
            const += coeff
        else:
            terms[mono] = terms.get(mono, 0.0) + coeff
    return BinaryPolynomial(terms, const)


def is_close(a: BinaryPolynomial, b: BinaryPolynomial, rel: float = 1e-9, abs_: float = 1e-12) -> bool:
    if not math.isclose(a.constant, b.constant, rel_tol=rel, abs_tol=abs_):
        return False
    for key in set(a.terms) | set(b.terms):
        if not math.isclose(a.terms.get(key, 0.0), b.terms.get(key, 0.0), rel_tol=rel, abs_tol=abs_):
            return False
    return True
