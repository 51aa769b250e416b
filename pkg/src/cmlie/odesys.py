"""Autonomous polynomial ODE systems and linear coordinate changes.

A system owns an ordered tuple of state names and parameter names.  Its
right-hand sides are rational functions over the ambient symbol list
``("t", *states, *params)``; denominators may involve parameters only and
the time symbol never appears (autonomy).  Keeping "t" in the ambient list
lets generators (which may depend on t) share the same symbol space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .algebra import PolyMatrix, RatFunc, SymbolMismatchError

TIME_SYMBOL = "t"

#: Fallback state names for transformed systems, cycled with numeric suffixes.
DEFAULT_COORD_NAMES = ("u", "v", "w")


def default_state_names(n: int, taken: Sequence[str]) -> tuple[str, ...]:
    """n fresh coordinate names: u, v, w, then z1, z2, ..., avoiding ``taken``."""
    names: list[str] = []
    pool = list(DEFAULT_COORD_NAMES)
    i = 1
    while len(names) < n:
        cand = pool.pop(0) if pool else f"z{i}"
        if not pool and cand.startswith("z"):
            i += 1
        if cand not in taken and cand not in names:
            names.append(cand)
    return tuple(names)


@dataclass(frozen=True)
class OdeSystem:
    """First-order autonomous system y_k' = rhs_k(y; params)."""

    state_syms: tuple[str, ...]
    param_syms: tuple[str, ...]
    rhs: tuple[RatFunc, ...]

    def __post_init__(self):
        states = tuple(self.state_syms)
        params = tuple(self.param_syms)
        object.__setattr__(self, "state_syms", states)
        object.__setattr__(self, "param_syms", params)
        object.__setattr__(self, "rhs", tuple(self.rhs))
        names = (TIME_SYMBOL,) + states + params
        if len(set(names)) != len(names):
            raise ValueError(f"state/parameter names collide (or shadow {TIME_SYMBOL!r}): {names}")
        if len(self.rhs) != len(states):
            raise ValueError(f"{len(states)} states but {len(self.rhs)} right-hand sides")
        for name, f in zip(states, self.rhs):
            if f.symbols != names:
                raise SymbolMismatchError(
                    f"rhs for {name!r} is over {f.symbols}, expected {names}"
                )
            if f.uses(TIME_SYMBOL):
                raise ValueError(f"system must be autonomous; rhs for {name!r} involves t")
            bad = f.denominator_symbols() & set(states)
            if bad:
                raise ValueError(f"rhs for {name!r} has states {sorted(bad)} in its denominator")

    @property
    def symbols(self) -> tuple[str, ...]:
        return (TIME_SYMBOL,) + self.state_syms + self.param_syms

    @property
    def dim(self) -> int:
        return len(self.state_syms)

    def state_index(self, name: str) -> int:
        return self.state_syms.index(name)

    def parse(self, text: str) -> RatFunc:
        """Parse an expression over this system's ambient symbols."""
        from .expr import parse_expr

        return parse_expr(text, self.symbols)

    # -- structure ----------------------------------------------------------

    def jacobian_origin(self) -> PolyMatrix:
        """Jacobian of the right-hand side at the origin (exact, params symbolic)."""
        origin = {s: 0 for s in self.state_syms}
        entries = []
        for f in self.rhs:
            for s in self.state_syms:
                entries.append(f.diff(s).substitute(origin))
        return PolyMatrix(self.dim, self.dim, entries)

    def linear_nonlinear_split(self) -> tuple[PolyMatrix, list[RatFunc]]:
        """rhs = A*y + N with N(0) = 0 and DN(0) = 0, exactly."""
        a = self.jacobian_origin()
        y = [RatFunc.variable(self.symbols, s) for s in self.state_syms]
        linear = a.mul_vector(y)
        nonlinear = [f - l for f, l in zip(self.rhs, linear)]
        return a, nonlinear

    def change_coordinates(
        self, transform: PolyMatrix, new_states: Sequence[str] | None = None
    ) -> "OdeSystem":
        """Rewrite under the linear substitution y = T*z, exactly.

        The new right-hand side is T^{-1} * rhs(T*z).  T entries must be
        rational functions of the parameters only.
        """
        n = self.dim
        if transform.rows != n or transform.cols != n:
            raise ValueError(f"transform must be {n}x{n}")
        if transform.symbols != self.symbols:
            raise SymbolMismatchError("transform must live over the system's ambient symbols")
        for e in transform.entries:
            bad = e.free_symbols() & (set(self.state_syms) | {TIME_SYMBOL})
            if bad:
                raise ValueError(f"transform entries must be parameter-only; found {sorted(bad)}")
        if new_states is None:
            new_states = default_state_names(n, (TIME_SYMBOL,) + self.param_syms)
        new_states = tuple(new_states)
        if len(new_states) != n:
            raise ValueError(f"need {n} new state names, got {len(new_states)}")
        new_ambient = (TIME_SYMBOL,) + new_states + self.param_syms

        inverse = transform.inverse()
        z = [RatFunc.variable(new_ambient, s) for s in new_states]
        t_rows = transform.to_rows()
        bindings: dict[str, RatFunc] = {}
        for i, old in enumerate(self.state_syms):
            acc = RatFunc.zero(new_ambient)
            for j in range(n):
                acc = acc + t_rows[i][j].reindexed(new_ambient) * z[j]
            bindings[old] = acc
        substituted = [f.substitute(bindings, new_ambient) for f in self.rhs]
        inv_rows = [[e.reindexed(new_ambient) for e in row] for row in inverse.to_rows()]
        new_rhs = []
        for i in range(n):
            acc = RatFunc.zero(new_ambient)
            for j in range(n):
                acc = acc + inv_rows[i][j] * substituted[j]
            new_rhs.append(acc)
        return OdeSystem(new_states, self.param_syms, tuple(new_rhs))

    def check_normal_form(
        self,
        split: "BlockSplit",
        samples: Sequence[Mapping[str, float]] = (),
        tol_eig: float = 1e-9,
    ) -> "NormalFormReport":
        """Verify the block/normal-form structure for a state partition.

        Checks, exactly: (a) the Jacobian at the origin is block-diagonal for
        the partition, (b) the nonlinear residual and all its first partials
        vanish at the origin.  For each numeric parameter sample, classifies
        block eigenvalues: center block |Re| <= tol_eig, hyperbolic block
        |Re| > tol_eig.
        """
        split.validate(self.dim)
        jac = self.jacobian_origin()
        cross: list[tuple[int, int, RatFunc]] = []
        for i in range(self.dim):
            for j in range(self.dim):
                same_block = (i in split.center_indices) == (j in split.center_indices)
                if not same_block and not jac.entry(i, j).is_zero:
                    cross.append((i, j, jac.entry(i, j)))
        block_errors = []
        for i, j, e in cross:
            block_errors.append(f"Jacobian entry ({i},{j}) crosses blocks: {e}")
        if split.extract_center(jac) != split.a_center:
            block_errors.append("stored center block differs from the Jacobian center block")
        if split.extract_hyperbolic(jac) != split.a_hyperbolic:
            block_errors.append("stored hyperbolic block differs from the Jacobian hyperbolic block")

        _, nonlinear = self.linear_nonlinear_split()
        origin = {s: 0 for s in self.state_syms}
        nl_errors = []
        for k, g in enumerate(nonlinear):
            if not g.substitute(origin).is_zero:
                nl_errors.append(f"nonlinear part of row {k} does not vanish at the origin")
            for s in self.state_syms:
                if not g.diff(s).substitute(origin).is_zero:
                    nl_errors.append(
                        f"nonlinear part of row {k} has nonzero d/d{s} at the origin"
                    )

        eig_reports = []
        for binding in samples:
            ac = _eval_matrix(split.a_center, binding)
            ah = _eval_matrix(split.a_hyperbolic, binding)
            center_eigs = np.linalg.eigvals(ac) if ac.size else np.array([])
            hyp_eigs = np.linalg.eigvals(ah) if ah.size else np.array([])
            ok = bool(
                np.all(np.abs(center_eigs.real) <= tol_eig)
                and np.all(np.abs(hyp_eigs.real) > tol_eig)
            )
            eig_reports.append(
                EigenSample(dict(binding), center_eigs.tolist(), hyp_eigs.tolist(), ok)
            )
        return NormalFormReport(
            block_diagonal_errors=tuple(block_errors),
            nonlinear_errors=tuple(nl_errors),
            eigen_samples=tuple(eig_reports),
        )


def _eval_matrix(m: PolyMatrix, binding: Mapping[str, float]) -> np.ndarray:
    values = dict(binding)
    out = np.empty((m.rows, m.cols))
    for i in range(m.rows):
        for j in range(m.cols):
            out[i, j] = m.entry(i, j).evaluate_float(values)
    return out


@dataclass(frozen=True)
class BlockSplit:
    """Partition of the states into center and hyperbolic blocks.

    ``a_center`` / ``a_hyperbolic`` are the corresponding diagonal blocks of
    the Jacobian at the origin.
    """

    center_indices: tuple[int, ...]
    hyperbolic_indices: tuple[int, ...]
    a_center: PolyMatrix
    a_hyperbolic: PolyMatrix

    def validate(self, dim: int) -> None:
        c, h = set(self.center_indices), set(self.hyperbolic_indices)
        if c & h:
            raise ValueError("center and hyperbolic index sets overlap")
        if c | h != set(range(dim)):
            raise ValueError(f"split must cover all {dim} states exactly")
        if self.a_center.rows != len(self.center_indices) or self.a_center.rows != self.a_center.cols:
            raise ValueError("center block has wrong shape")
        if (
            self.a_hyperbolic.rows != len(self.hyperbolic_indices)
            or self.a_hyperbolic.rows != self.a_hyperbolic.cols
        ):
            raise ValueError("hyperbolic block has wrong shape")

    def extract_center(self, full: PolyMatrix) -> PolyMatrix:
        return _submatrix(full, self.center_indices)

    def extract_hyperbolic(self, full: PolyMatrix) -> PolyMatrix:
        return _submatrix(full, self.hyperbolic_indices)


def _submatrix(m: PolyMatrix, idx: tuple[int, ...]) -> PolyMatrix:
    return PolyMatrix(
        len(idx), len(idx), [m.entry(i, j) for i in idx for j in idx]
    )


def split_states(sys: OdeSystem, center_indices: Sequence[int]) -> BlockSplit:
    """Build a BlockSplit for the given center indices, blocks from the Jacobian."""
    center = tuple(center_indices)
    hyp = tuple(i for i in range(sys.dim) if i not in center)
    if not center or not hyp:
        raise ValueError("both blocks must be non-empty")
    jac = sys.jacobian_origin()
    return BlockSplit(center, hyp, _submatrix(jac, center), _submatrix(jac, hyp))


def split_by_names(sys: OdeSystem, center_names: Sequence[str]) -> BlockSplit:
    return split_states(sys, [sys.state_index(n) for n in center_names])


@dataclass(frozen=True)
class EigenSample:
    binding: dict
    center_eigenvalues: list
    hyperbolic_eigenvalues: list
    ok: bool


@dataclass(frozen=True)
class NormalFormReport:
    block_diagonal_errors: tuple[str, ...] = ()
    nonlinear_errors: tuple[str, ...] = ()
    eigen_samples: tuple[EigenSample, ...] = field(default_factory=tuple)

    @property
    def block_diagonal_ok(self) -> bool:
        return not self.block_diagonal_errors

    @property
    def nonlinear_ok(self) -> bool:
        return not self.nonlinear_errors

    @property
    def passed(self) -> bool:
        return (
            self.block_diagonal_ok
            and self.nonlinear_ok
            and all(s.ok for s in self.eigen_samples)
        )

    def violations(self) -> list[str]:
        out = list(self.block_diagonal_errors) + list(self.nonlinear_errors)
        for s in self.eigen_samples:
            if not s.ok:
                out.append(
                    f"eigenvalue classification failed at {s.binding}: "
                    f"center {s.center_eigenvalues}, hyperbolic {s.hyperbolic_eigenvalues}"
                )
        return out
