"""Truncated polynomial center manifolds for systems in normal form.

For a system split into center variables x (block A, zero real parts) and
hyperbolic variables y (block B), the graph y = h(x) of a local center
manifold satisfies

    Dh(x) * [A x + g(x, h(x))] - B h(x) - j(x, h(x)) = 0

up to the truncation order, where g and j are the center/hyperbolic
nonlinearities.  Coefficients are found degree by degree: products of
unknowns only influence strictly higher degrees, so each degree is an exact
linear solve over the parameter field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .algebra import (
    Exponents,
    PolyMatrix,
    RatFunc,
    SingularMatrixError,
    monomials_of_degree,
)
from .odesys import TIME_SYMBOL, BlockSplit, OdeSystem

DEFAULT_ORDER = 3

#: coefficient table: (hyperbolic component, center-monomial exponents) -> value
CoeffMap = dict[tuple[int, Exponents], RatFunc]


class HomologicalSolveError(ValueError):
    """The degree-d homological operator is singular over the parameter field."""

    def __init__(self, degree: int, message: str):
        super().__init__(f"degree {degree}: {message}")
        self.degree = degree


@dataclass(frozen=True)
class ManifoldApprox:
    """Truncated polynomial map h from center to hyperbolic variables.

    Only monomials of total degree 2..order appear, so h(0) = 0 and
    Dh(0) = 0 hold by construction.
    """

    center_syms: tuple[str, ...]
    hyp_syms: tuple[str, ...]
    param_syms: tuple[str, ...]
    order: int
    coeffs: "Mapping[tuple[int, Exponents], RatFunc]"

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("manifold order must be at least 2")
        n = len(self.center_syms)
        clean: CoeffMap = {}
        for (i, mono), value in dict(self.coeffs).items():
            if not 0 <= i < len(self.hyp_syms):
                raise ValueError(f"hyperbolic index {i} out of range")
            if len(mono) != n:
                raise ValueError(f"monomial {mono} does not match {n} center variables")
            deg = sum(mono)
            if not 2 <= deg <= self.order:
                raise ValueError(
                    f"monomial {mono} has degree {deg}; only degrees 2..{self.order} may appear"
                )
            if not value.is_zero:
                clean[(i, tuple(mono))] = value
        object.__setattr__(self, "coeffs", clean)

    @property
    def center_dim(self) -> int:
        return len(self.center_syms)

    @property
    def hyp_dim(self) -> int:
        return len(self.hyp_syms)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def vanishing_degrees(self) -> list[int]:
        """Degrees d in 2..order with no nonzero coefficient."""
        present = {sum(mono) for (_, mono) in self.coeffs}
        return [d for d in range(2, self.order + 1) if d not in present]

    def component_polynomials(self, symbols: tuple[str, ...]) -> list[RatFunc]:
        """The maps h_i as rational functions over the given ambient symbols."""
        out = []
        for i in range(self.hyp_dim):
            acc = RatFunc.zero(symbols)
            for (k, mono), value in self.coeffs.items():
                if k != i:
                    continue
                term = value.reindexed(symbols)
                for name, e in zip(self.center_syms, mono):
                    if e:
                        term = term * RatFunc.variable(symbols, name) ** e
                acc = acc + term
            out.append(acc)
        return out

    def as_string_map(self) -> dict[str, str]:
        """Serialize as {hyperbolic variable -> expression in center variables}."""
        symbols = (TIME_SYMBOL,) + self.center_syms + self.param_syms
        return {
            name: str(poly)
            for name, poly in zip(self.hyp_syms, self.component_polynomials(symbols))
        }


def _split_parts(sys: OdeSystem, split: BlockSplit):
    split.validate(sys.dim)
    center_syms = tuple(sys.state_syms[i] for i in split.center_indices)
    hyp_syms = tuple(sys.state_syms[i] for i in split.hyperbolic_indices)
    return center_syms, hyp_syms


def _manifold_bindings(
    sys: OdeSystem, split: BlockSplit, coeffs: CoeffMap
) -> dict[str, RatFunc]:
    """Bindings sending each hyperbolic state to its h polynomial."""
    center_syms, hyp_syms = _split_parts(sys, split)
    symbols = sys.symbols
    bindings: dict[str, RatFunc] = {}
    for i, name in enumerate(hyp_syms):
        acc = RatFunc.zero(symbols)
        for (k, mono), value in coeffs.items():
            if k != i:
                continue
            term = value
            for cname, e in zip(center_syms, mono):
                if e:
                    term = term * RatFunc.variable(symbols, cname) ** e
            acc = acc + term
        bindings[name] = acc
    return bindings


def _residual_from_coeffs(
    sys: OdeSystem, split: BlockSplit, coeffs: CoeffMap, order: int
) -> list[RatFunc]:
    """Invariance residual Dh*[Ax+g(x,h)] - B*h - j(x,h), truncated at ``order``."""
    center_syms, hyp_syms = _split_parts(sys, split)
    symbols = sys.symbols
    h_bind = _manifold_bindings(sys, split, coeffs)
    h_polys = [h_bind[name] for name in hyp_syms]

    # With cross-block linear terms zero, the full center rhs evaluated on the
    # manifold is exactly A x + g(x, h(x)).
    center_rhs_on_h = [
        sys.rhs[i].substitute(h_bind).truncated(center_syms, order)
        for i in split.center_indices
    ]

    b_rows = split.a_hyperbolic.to_rows()
    _, nonlinear = sys.linear_nonlinear_split()
    residual = []
    for li in range(len(hyp_syms)):
        acc = RatFunc.zero(symbols)
        for ci, cname in enumerate(center_syms):
            acc = acc + h_polys[li].diff(cname) * center_rhs_on_h[ci]
        for lj in range(len(hyp_syms)):
            acc = acc - b_rows[li][lj] * h_polys[lj]
        j_on_h = nonlinear[split.hyperbolic_indices[li]].substitute(h_bind)
        acc = acc - j_on_h
        residual.append(acc.truncated(center_syms, order))
    return residual


def mh_residual(
    sys: OdeSystem, split: BlockSplit, h: ManifoldApprox, order: int | None = None
) -> list[RatFunc]:
    """Exact manifold-invariance residual for a candidate h, truncated.

    Returns one rational function per hyperbolic component, over the system's
    ambient symbols; denominators involve parameters only.  All terms of
    center-degree above ``order`` (default: h.order) are discarded.
    """
    center_syms, hyp_syms = _split_parts(sys, split)
    if h.center_syms != center_syms or h.hyp_syms != hyp_syms:
        raise ValueError(
            f"manifold variables {h.center_syms}/{h.hyp_syms} do not match the split "
            f"{center_syms}/{hyp_syms}"
        )
    return _residual_from_coeffs(sys, split, dict(h.coeffs), order or h.order)


def compute_center_manifold(
    sys: OdeSystem, split: BlockSplit, order: int = DEFAULT_ORDER
) -> ManifoldApprox:
    """Solve the invariance condition degree by degree up to ``order``.

    At each degree d the unknown coefficients enter linearly through
    Dh_d * (A x) - B h_d; contributions of already-solved lower degrees are
    moved to the right-hand side and the resulting square system is solved
    exactly.  Raises HomologicalSolveError when a degree is singular.
    """
    if order < 2:
        raise ValueError("order must be at least 2")
    center_syms, hyp_syms = _split_parts(sys, split)
    symbols = sys.symbols
    n, m = len(center_syms), len(hyp_syms)
    a_rows = split.a_center.to_rows()
    b_rows = split.a_hyperbolic.to_rows()

    coeffs: CoeffMap = {}
    for degree in range(2, order + 1):
        basis = monomials_of_degree(n, degree)
        unknowns = [(i, mono) for i in range(m) for mono in basis]
        index = {key: k for k, key in enumerate(unknowns)}
        size = len(unknowns)
        zero = RatFunc.zero(symbols)
        matrix = [[zero for _ in range(size)] for _ in range(size)]

        for i in range(m):
            for mono in basis:
                col = index[(i, mono)]
                # Dq * (A_c x): derivative in x_l times sum_s A[l][s] x_s.
                for l in range(n):
                    e = mono[l]
                    if not e:
                        continue
                    for s in range(n):
                        a = a_rows[l][s]
                        if a.is_zero:
                            continue
                        target = list(mono)
                        target[l] -= 1
                        target[s] += 1
                        row = index[(i, tuple(target))]
                        matrix[row][col] = matrix[row][col] + a * e
                # -B q contributions stay within the same monomial.
                for i2 in range(m):
                    b = b_rows[i2][i]
                    if not b.is_zero:
                        row = index[(i2, mono)]
                        matrix[row][col] = matrix[row][col] - b

        residual = _residual_from_coeffs(sys, split, coeffs, degree)
        rhs = [zero] * size
        for i in range(m):
            cmap = residual[i].coefficient_map(center_syms)
            for mono, value in cmap.items():
                if sum(mono) == degree:
                    rhs[index[(i, mono)]] = -value

        try:
            solution = PolyMatrix(size, size, [e for row in matrix for e in row]).solve(rhs)
        except SingularMatrixError as exc:
            raise HomologicalSolveError(degree, str(exc)) from exc
        for (i, mono), k in index.items():
            if not solution[k].is_zero:
                coeffs[(i, mono)] = solution[k]

    return ManifoldApprox(center_syms, hyp_syms, sys.param_syms, order, coeffs)


def reduce_to_center(
    sys: OdeSystem, split: BlockSplit, h: ManifoldApprox, order: int | None = None
) -> OdeSystem:
    """System restricted to the manifold: x' = A x + g(x, h(x)), truncated."""
    center_syms, hyp_syms = _split_parts(sys, split)
    if h.center_syms != center_syms or h.hyp_syms != hyp_syms:
        raise ValueError("manifold does not match the split")
    order = order or h.order
    h_bind = _manifold_bindings(sys, split, dict(h.coeffs))
    new_ambient = (TIME_SYMBOL,) + center_syms + sys.param_syms
    new_rhs = []
    for global_i in split.center_indices:
        f = sys.rhs[global_i].substitute(h_bind).truncated(center_syms, order)
        new_rhs.append(f.reindexed(new_ambient))
    return OdeSystem(center_syms, sys.param_syms, tuple(new_rhs))
