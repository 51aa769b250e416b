"""Lie point symmetries of first-order autonomous systems: verification,
prolongation, pushforward under linear coordinate changes, and restriction
to a computed center manifold.

A generator X = xi * d/dt + sum_k eta_k * d/dy_k acts on a system
y_k' = omega_k(y).  The engine verifies candidates via the linearized
symmetry condition

    eta_k^(1) - X(omega_k) = 0,     eta_k^(1) = D_t eta_k - omega_k D_t xi

with derivatives of y already replaced by omega (on-solutions form).
Candidate discovery (solving the determining equations) is out of scope;
the engine checks and transforms generators supplied by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import PolyMatrix, RatFunc, SymbolMismatchError
from .center import ManifoldApprox, _manifold_bindings
from .odesys import TIME_SYMBOL, BlockSplit, OdeSystem, default_state_names


@dataclass(frozen=True)
class Generator:
    """Infinitesimal generator over an ambient symbol list (t, states, params)."""

    xi: RatFunc
    etas: tuple[RatFunc, ...]

    def __post_init__(self):
        object.__setattr__(self, "etas", tuple(self.etas))
        if not self.etas:
            raise ValueError("a generator needs at least one eta component")
        for e in self.etas:
            if e.symbols != self.xi.symbols:
                raise SymbolMismatchError("xi and etas must share one symbol list")

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.xi.symbols

    @classmethod
    def from_strings(cls, sys: OdeSystem, xi: str, etas: Sequence[str]) -> "Generator":
        from .expr import parse_expr

        if len(etas) != sys.dim:
            raise ValueError(f"expected {sys.dim} eta components, got {len(etas)}")
        amb = sys.symbols
        return cls(parse_expr(xi, amb), tuple(parse_expr(e, amb) for e in etas))

    def components(self) -> tuple[RatFunc, ...]:
        return (self.xi,) + self.etas

    @property
    def is_zero(self) -> bool:
        return self.xi.is_zero and all(e.is_zero for e in self.etas)

    def __add__(self, other: "Generator") -> "Generator":
        if not isinstance(other, Generator):
            return NotImplemented
        if other.symbols != self.symbols or len(other.etas) != len(self.etas):
            raise SymbolMismatchError("generators live over different spaces")
        return Generator(self.xi + other.xi, tuple(a + b for a, b in zip(self.etas, other.etas)))

    def scaled(self, c) -> "Generator":
        return Generator(self.xi * c, tuple(e * c for e in self.etas))

    def __rmul__(self, c):
        return self.scaled(c)

    def _check_system(self, sys: OdeSystem) -> None:
        if sys.symbols != self.symbols:
            raise SymbolMismatchError(
                f"generator over {self.symbols} does not match system over {sys.symbols}"
            )
        if len(self.etas) != sys.dim:
            raise ValueError(f"generator has {len(self.etas)} etas for a {sys.dim}-state system")


@dataclass(frozen=True)
class LscReport:
    """Residuals of the linearized symmetry condition, one per state."""

    residuals: tuple[RatFunc, ...]

    @property
    def is_symmetry(self) -> bool:
        return all(r.is_zero for r in self.residuals)


@dataclass(frozen=True)
class Lemma4Report:
    """Center-manifold invariance residuals, one per hyperbolic component."""

    residuals: tuple[RatFunc, ...]

    @property
    def invariant(self) -> bool:
        return all(r.is_zero for r in self.residuals)


def total_derivative(e: RatFunc, sys: OdeSystem) -> RatFunc:
    """D_t e = de/dt + sum_j omega_j * de/dy_j, exactly."""
    if e.symbols != sys.symbols:
        raise SymbolMismatchError("expression must live over the system's ambient symbols")
    acc = e.diff(TIME_SYMBOL)
    for name, omega in zip(sys.state_syms, sys.rhs):
        acc = acc + omega * e.diff(name)
    return acc


def prolong_first(gen: Generator, sys: OdeSystem) -> tuple[RatFunc, ...]:
    """First prolongation eta_k^(1) = D_t eta_k - omega_k * D_t xi (on solutions)."""
    gen._check_system(sys)
    dxi = total_derivative(gen.xi, sys)
    return tuple(
        total_derivative(eta, sys) - omega * dxi for eta, omega in zip(gen.etas, sys.rhs)
    )


def lsc_residual(gen: Generator, sys: OdeSystem) -> LscReport:
    """Linearized symmetry condition residuals; zero iff gen is a symmetry."""
    gen._check_system(sys)
    prolonged = prolong_first(gen, sys)
    residuals = []
    for k, omega in enumerate(sys.rhs):
        applied = gen.xi * omega.diff(TIME_SYMBOL)
        for j, name in enumerate(sys.state_syms):
            applied = applied + gen.etas[j] * omega.diff(name)
        residuals.append(prolonged[k] - applied)
    return LscReport(tuple(residuals))


def pushforward_linear(
    gen: Generator,
    sys: OdeSystem,
    transform: PolyMatrix,
    new_states: Sequence[str] | None = None,
) -> Generator:
    """Re-express a generator under the linear substitution y = T*z.

    The new components are xi and T^{-1} * eta with y = T z substituted
    throughout; exact.  ``sys`` supplies the state/parameter names (the
    generator itself is coordinate-data only).
    """
    gen._check_system(sys)
    n = sys.dim
    if new_states is None:
        new_states = default_state_names(n, (TIME_SYMBOL,) + sys.param_syms)
    new_states = tuple(new_states)
    if len(new_states) != n:
        raise ValueError(f"need {n} new state names, got {len(new_states)}")
    new_ambient = (TIME_SYMBOL,) + new_states + sys.param_syms

    z = [RatFunc.variable(new_ambient, s) for s in new_states]
    t_rows = transform.to_rows()
    bindings: dict[str, RatFunc] = {}
    for i, old in enumerate(sys.state_syms):
        acc = RatFunc.zero(new_ambient)
        for j in range(n):
            acc = acc + t_rows[i][j].reindexed(new_ambient) * z[j]
        bindings[old] = acc

    inv_rows = [
        [e.reindexed(new_ambient) for e in row] for row in transform.inverse().to_rows()
    ]
    etas_sub = [e.substitute(bindings, new_ambient) for e in gen.etas]
    new_etas = []
    for i in range(n):
        acc = RatFunc.zero(new_ambient)
        for j in range(n):
            acc = acc + inv_rows[i][j] * etas_sub[j]
        new_etas.append(acc)
    return Generator(gen.xi.substitute(bindings, new_ambient), tuple(new_etas))


def _center_hyp_components(
    gen: Generator, split: BlockSplit
) -> tuple[list[RatFunc], list[RatFunc]]:
    phi = [gen.etas[i] for i in split.center_indices]
    psi = [gen.etas[i] for i in split.hyperbolic_indices]
    return phi, psi


def lemma4_check(
    gen: Generator, sys: OdeSystem, split: BlockSplit, h: ManifoldApprox
) -> Lemma4Report:
    """Does the generator leave the manifold y = h(x) invariant (through order N)?

    Evaluates psi(x, h(x)) - Dh(x) * phi(x, h(x)) with phi/psi the center and
    hyperbolic eta components, truncated at the manifold's order.
    """
    gen._check_system(sys)
    center_syms = tuple(sys.state_syms[i] for i in split.center_indices)
    h_bind = _manifold_bindings(sys, split, dict(h.coeffs))
    h_polys = [h_bind[sys.state_syms[i]] for i in split.hyperbolic_indices]
    phi, psi = _center_hyp_components(gen, split)
    phi_on_h = [p.substitute(h_bind) for p in phi]
    residuals = []
    for li, p in enumerate(psi):
        acc = p.substitute(h_bind)
        for ci, cname in enumerate(center_syms):
            acc = acc - h_polys[li].diff(cname) * phi_on_h[ci]
        residuals.append(acc.truncated(center_syms, h.order))
    return Lemma4Report(tuple(residuals))


def restrict_to_center(
    gen: Generator, sys: OdeSystem, split: BlockSplit, h: ManifoldApprox
) -> Generator:
    """Generator induced on the center manifold (hyperbolic components dropped).

    Components are evaluated on y = h(x) and truncated at the manifold order;
    raises if the Lemma-4 invariance residual is nonzero (the restriction is
    undefined in that case).
    """
    report = lemma4_check(gen, sys, split, h)
    if not report.invariant:
        raise ValueError(
            "generator does not leave the center manifold invariant; "
            f"residuals: {[str(r) for r in report.residuals]}"
        )
    center_syms = tuple(sys.state_syms[i] for i in split.center_indices)
    new_ambient = (TIME_SYMBOL,) + center_syms + sys.param_syms
    h_bind = _manifold_bindings(sys, split, dict(h.coeffs))
    phi, _ = _center_hyp_components(gen, split)
    xi_hat = gen.xi.substitute(h_bind).truncated(center_syms, h.order).reindexed(new_ambient)
    etas_hat = tuple(
        p.substitute(h_bind).truncated(center_syms, h.order).reindexed(new_ambient)
        for p in phi
    )
    return Generator(xi_hat, etas_hat)


def proportional(a: Generator, b: Generator) -> tuple[bool, Fraction | None]:
    """Is a == c * b for a nonzero constant rational c?  Returns (flag, c).

    Zero generators are proportional to each other with c = None.
    """
    if a.symbols != b.symbols or len(a.etas) != len(b.etas):
        return False, None
    pairs = list(zip(a.components(), b.components()))
    scale: Fraction | None = None
    for ca, cb in pairs:
        if ca.is_zero != cb.is_zero:
            return False, None
        if scale is None and not cb.is_zero:
            ratio = ca / cb
            if not ratio.is_constant:
                return False, None
            scale = ratio.constant_value()
    if scale is None:
        return True, None
    if scale == 0:
        return False, None
    ok = all(ca == cb * scale for ca, cb in pairs)
    return ok, (scale if ok else None)


def evolution_generator(sys: OdeSystem, scale: RatFunc | Fraction | int = 1) -> Generator:
    """The generator with xi = 0 and eta = scale * omega (always a symmetry).

    ``scale`` may be a rational constant or a parameter-dependent RatFunc.
    """
    amb = sys.symbols
    if isinstance(scale, RatFunc):
        if scale.is_zero:
            raise ValueError("scale must be nonzero")
        return Generator(RatFunc.zero(amb), tuple(f * scale for f in sys.rhs))
    c = Fraction(scale)
    if c == 0:
        raise ValueError("scale must be nonzero")
    return Generator(RatFunc.zero(amb), tuple(f * c for f in sys.rhs))
