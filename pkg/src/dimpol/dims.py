"""Dimensional analysis core.

Dimension vectors with exact rational exponents, Pi-group exponent solving
against a caller-chosen set of repeated variables, and the diagonal scaling
transforms that map dimensional inputs, states and context to their
dimensionless counterparts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    NonFiniteScale,
    RankDeficient,
    SignatureMismatch,
    UnreachableDimension,
    ZeroRepeatedVariable,
)

DEFAULT_BASIS = ("M", "L", "T")

ROLES = ("input", "state", "context")


def _frac(value) -> Fraction:
    if isinstance(value, float):
        # floats are only accepted when they are exact small rationals (0.5, -1.5, ...)
        out = Fraction(value).limit_denominator(1000)
        if float(out) != value:
            raise ValueError(f"exponent {value!r} is not a simple rational")
        return out
    return Fraction(value)


@dataclass(frozen=True)
class DimVec:
    """Rational exponent vector over an ordered basis of fundamental dimensions."""

    exponents: tuple[Fraction, ...]
    basis: tuple[str, ...] = DEFAULT_BASIS

    def __post_init__(self):
        exps = tuple(_frac(e) for e in self.exponents)
        if len(exps) != len(self.basis):
            raise ValueError(
                f"{len(exps)} exponents given for basis {self.basis}")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "basis", tuple(self.basis))

    @classmethod
    def of(cls, M=0, L=0, T=0) -> "DimVec":
        return cls((M, L, T), DEFAULT_BASIS)

    @classmethod
    def zero(cls, basis: Sequence[str] = DEFAULT_BASIS) -> "DimVec":
        return cls(tuple(0 for _ in basis), tuple(basis))

    def _check(self, other: "DimVec"):
        if self.basis != other.basis:
            raise ValueError(f"basis mismatch: {self.basis} vs {other.basis}")

    def __mul__(self, other: "DimVec") -> "DimVec":
        """Dimension of the product of two quantities."""
        self._check(other)
        return DimVec(tuple(a + b for a, b in zip(self.exponents, other.exponents)),
                      self.basis)

    def __truediv__(self, other: "DimVec") -> "DimVec":
        self._check(other)
        return DimVec(tuple(a - b for a, b in zip(self.exponents, other.exponents)),
                      self.basis)

    def __pow__(self, power) -> "DimVec":
        p = _frac(power)
        return DimVec(tuple(e * p for e in self.exponents), self.basis)

    @property
    def is_dimensionless(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def __str__(self):
        parts = []
        for name, e in zip(self.basis, self.exponents):
            if e == 0:
                continue
            parts.append(name if e == 1 else f"{name}^{e}")
        return "[" + " ".join(parts) + "]"


DIMENSIONLESS = DimVec.zero()


@dataclass(frozen=True)
class QuantitySpec:
    name: str
    dim: DimVec
    role: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")


@dataclass(frozen=True)
class ProblemSignature:
    """Declared inputs, states and context of a control problem.

    ``repeated`` lists the context variables used as the dimensional basis,
    in the order their exponents appear in every Pi-group row.
    """

    name: str
    inputs: tuple[QuantitySpec, ...]
    states: tuple[QuantitySpec, ...]
    context: tuple[QuantitySpec, ...]
    repeated: tuple[str, ...]

    def __post_init__(self):
        for attr in ("inputs", "states", "context", "repeated"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        names = [q.name for q in self.quantities]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ValueError(f"duplicate quantity names: {sorted(dupes)}")
        ctx_names = self.context_names
        for r in self.repeated:
            if r not in ctx_names:
                raise ValueError(f"repeated variable {r!r} is not a context variable")
        if len(set(self.repeated)) != len(self.repeated):
            raise ValueError("repeated variables must be distinct")
        bases = {q.dim.basis for q in self.quantities}
        if len(bases) > 1:
            raise ValueError("all quantities must share one dimension basis")

    @property
    def quantities(self) -> tuple[QuantitySpec, ...]:
        return self.inputs + self.states + self.context

    @property
    def k(self) -> int:
        return len(self.inputs)

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def m(self) -> int:
        return len(self.context)

    @property
    def d(self) -> int:
        return len(self.repeated)

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(q.name for q in self.inputs)

    @property
    def state_names(self) -> tuple[str, ...]:
        return tuple(q.name for q in self.states)

    @property
    def context_names(self) -> tuple[str, ...]:
        return tuple(q.name for q in self.context)

    @property
    def free_context(self) -> tuple[QuantitySpec, ...]:
        """Non-repeated context variables, in declaration order."""
        return tuple(q for q in self.context if q.name not in self.repeated)

    def spec(self, name: str) -> QuantitySpec:
        for q in self.quantities:
            if q.name == name:
                return q
        raise KeyError(name)

    def check_repeated(self):
        """Validate the repeated-variable choice; raises on failure.

        The repeated dimension matrix must have full column rank, and no
        declared quantity may involve a dimension direction they do not span.
        """
        rep = [self.spec(r).dim for r in self.repeated]
        cols = [list(v.exponents) for v in rep]
        rep_matrix = _transpose(cols, len(self.quantities[0].dim.basis))
        r_rep = rational_rank(rep_matrix)
        if r_rep < len(rep):
            raise RankDeficient(
                f"repeated variables {self.repeated} have dimension rank {r_rep} < {len(rep)}")
        all_cols = [list(q.dim.exponents) for q in self.quantities]
        r_all = rational_rank(_transpose(all_cols, len(self.quantities[0].dim.basis)))
        if r_all > r_rep:
            raise UnreachableDimension(
                f"quantities span {r_all} independent dimensions but only "
                f"{r_rep} repeated variables were chosen")


def _transpose(cols, nrows):
    return [[col[i] for col in cols] for i in range(nrows)]


def _echelon(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivot columns)."""
    m = [[Fraction(v) for v in row] for row in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        m[r] = [v / p for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rational_rank(rows) -> int:
    return len(_echelon(rows)[1])


def solve_rational(a_rows, rhs) -> tuple[Fraction, ...]:
    """Exact solution of ``A x = rhs`` for full-column-rank ``A``.

    Rows of ``A`` may outnumber unknowns (redundant dimensions); the system
    must still be consistent, otherwise UnreachableDimension is raised.
    """
    ncols = len(a_rows[0])
    aug = [list(row) + [b] for row, b in zip(a_rows, rhs)]
    red, pivots = _echelon(aug)
    if ncols in pivots:
        raise UnreachableDimension("inconsistent dimension equations")
    if len(pivots) < ncols:
        raise RankDeficient("exponent system is rank deficient")
    sol = [Fraction(0)] * ncols
    for row, c in zip(red, pivots):
        sol[c] = row[-1]
    return tuple(sol)


@dataclass(frozen=True)
class PiGroupSet:
    """Rational exponents of the repeated variables for every Pi group.

    Row ``i`` of ``input_exponents`` gives the powers of the repeated
    variables that multiply input ``i``; likewise for states and for the
    non-repeated context variables.
    """

    signature: ProblemSignature
    input_exponents: tuple[tuple[Fraction, ...], ...]
    state_exponents: tuple[tuple[Fraction, ...], ...]
    context_exponents: tuple[tuple[Fraction, ...], ...]

    def groups(self) -> list[tuple[QuantitySpec, tuple[Fraction, ...]]]:
        sig = self.signature
        return (list(zip(sig.inputs, self.input_exponents))
                + list(zip(sig.states, self.state_exponents))
                + list(zip(sig.free_context, self.context_exponents)))

    def group_dimension(self, quantity: QuantitySpec, exps) -> DimVec:
        out = quantity.dim
        for name, e in zip(self.signature.repeated, exps):
            out = out * self.signature.spec(name).dim ** e
        return out

    @property
    def count(self) -> int:
        """Number of Pi groups for one input: 1 + n + (m - d)."""
        return 1 + len(self.state_exponents) + len(self.context_exponents)


def solve_pi_exponents(sig: ProblemSignature) -> PiGroupSet:
    sig.check_repeated()
    nbasis = len(sig.quantities[0].dim.basis)
    rep_cols = [list(sig.spec(r).dim.exponents) for r in sig.repeated]
    a_rows = _transpose(rep_cols, nbasis)

    def exps(q: QuantitySpec):
        # dim(q) + sum_j e_j dim(rep_j) = 0
        return solve_rational(a_rows, [-v for v in q.dim.exponents])

    return PiGroupSet(
        signature=sig,
        input_exponents=tuple(exps(q) for q in sig.inputs),
        state_exponents=tuple(exps(q) for q in sig.states),
        context_exponents=tuple(exps(q) for q in sig.free_context),
    )


def rational_power(base: float, exponent: Fraction) -> float:
    """``base ** exponent`` for a rational exponent, real-valued."""
    exponent = Fraction(exponent)
    if exponent == 0:
        return 1.0
    base = float(base)
    if exponent.denominator == 1:
        return base ** exponent.numerator
    if base >= 0:
        return math.pow(base, float(exponent))
    if exponent.denominator % 2 == 0:
        raise NonFiniteScale(f"even root of negative value {base}")
    mag = math.pow(-base, float(exponent))
    return -mag if exponent.numerator % 2 else mag


@dataclass(frozen=True)
class ScalingTransforms:
    """Diagonal scale factors for one context instance.

    ``u* = t_u * u``, ``x* = t_x * x`` and ``c* = t_c * c_free`` elementwise.
    """

    signature: ProblemSignature
    t_u: tuple[float, ...]
    t_x: tuple[float, ...]
    t_c: tuple[float, ...]
    context: tuple[float, ...]

    @property
    def free_context_values(self) -> tuple[float, ...]:
        names = self.signature.context_names
        rep = set(self.signature.repeated)
        return tuple(v for n, v in zip(names, self.context) if n not in rep)

    @property
    def c_star(self) -> tuple[float, ...]:
        return dimensionless_context(self)

    def context_dict(self) -> dict[str, float]:
        return dict(zip(self.signature.context_names, self.context))

    def u_to_star(self, u):
        return np.asarray(u, dtype=float) * np.asarray(self.t_u)

    def u_from_star(self, u_star):
        return np.asarray(u_star, dtype=float) / np.asarray(self.t_u)

    def x_to_star(self, x):
        return np.asarray(x, dtype=float) * np.asarray(self.t_x)

    def x_from_star(self, x_star):
        return np.asarray(x_star, dtype=float) / np.asarray(self.t_x)


def _context_tuple(sig: ProblemSignature, c) -> tuple[float, ...]:
    if isinstance(c, Mapping):
        missing = [n for n in sig.context_names if n not in c]
        if missing:
            raise ValueError(f"missing context values: {missing}")
        vals = tuple(float(c[n]) for n in sig.context_names)
    else:
        vals = tuple(float(v) for v in c)
    if len(vals) != sig.m:
        raise ValueError(f"expected {sig.m} context values, got {len(vals)}")
    return vals


def _scale(rep_values: Sequence[float], exps: Iterable[Fraction]) -> float:
    s = 1.0
    for v, e in zip(rep_values, exps):
        s *= rational_power(v, e)
    if not math.isfinite(s) or s == 0.0:
        raise NonFiniteScale(f"scale factor {s} from repeated values {rep_values}")
    return s


def build_transforms(sig: ProblemSignature, pi: PiGroupSet, c) -> ScalingTransforms:
    """Evaluate the scale factors at a concrete context ``c``.

    ``c`` is either a sequence in the signature's context order or a mapping
    from context names to values.
    """
    if pi.signature != sig:
        raise SignatureMismatch("Pi-group set was solved for a different signature")
    values = _context_tuple(sig, c)
    lookup = dict(zip(sig.context_names, values))
    rep_values = [lookup[r] for r in sig.repeated]
    for name, v in zip(sig.repeated, rep_values):
        if v == 0.0:
            raise ZeroRepeatedVariable(f"repeated variable {name} is zero")
        if not math.isfinite(v):
            raise NonFiniteScale(f"repeated variable {name} = {v}")
    return ScalingTransforms(
        signature=sig,
        t_u=tuple(_scale(rep_values, e) for e in pi.input_exponents),
        t_x=tuple(_scale(rep_values, e) for e in pi.state_exponents),
        t_c=tuple(_scale(rep_values, e) for e in pi.context_exponents),
        context=values,
    )


def transforms_for(sig: ProblemSignature, c) -> ScalingTransforms:
    """Shorthand: solve the exponents and evaluate them at ``c``."""
    return build_transforms(sig, solve_pi_exponents(sig), c)


def dimensionless_context(st: ScalingTransforms) -> tuple[float, ...]:
    return tuple(t * v for t, v in zip(st.t_c, st.free_context_values))


def _close(a: float, b: float, rel_tol: float) -> bool:
    scale = max(abs(a), abs(b))
    if scale < 1.0:
        return abs(a - b) <= rel_tol
    return abs(a - b) <= rel_tol * scale


def is_similar(a: ScalingTransforms, b: ScalingTransforms, rel_tol: float = 1e-9) -> bool:
    """True when both contexts map to the same dimensionless context."""
    if a.signature != b.signature:
        raise SignatureMismatch(
            f"cannot compare contexts of {a.signature.name!r} and {b.signature.name!r}")
    return all(_close(x, y, rel_tol)
               for x, y in zip(dimensionless_context(a), dimensionless_context(b)))


def unit_rescale_factor(dim: DimVec, unit_scales: Mapping[str, float]) -> float:
    """Factor by which a value of dimension ``dim`` changes when each base
    unit is rescaled (e.g. ``{"M": 1000}`` turns kilograms into grams)."""
    f = 1.0
    for name, e in zip(dim.basis, dim.exponents):
        f *= rational_power(unit_scales.get(name, 1.0), e)
    return f
