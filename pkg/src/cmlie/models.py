"""Built-in quasi-chemical microbial kinetics corpus.

The four-stage model tracks metabolizing cells M, multiplying cells M*
("Mstar"), an antagonist A, and dead cells D, with rate constants k1..k4.
The net natural growth rate is G = k2 - k4 and the scaled death-pathway
rate is eps = k3 / 10^9.  Dropping the uncoupled D equation gives a
three-state core system; its analysis splits into two cases by whether G
vanishes, each with its own normalizing matrix, block split, and a table of
six verified symmetry generators in both original and normal coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import PolyMatrix, RatFunc
from .expr import parse_expr
from .numerics import NumericTrajectory
from .odesys import BlockSplit, OdeSystem, split_by_names
from .symmetry import Generator

INOCULUM = 1.0e4

# Nonlinear shorthands used throughout the two cases (normal coordinates).
F_NONZERO = "(-(eps/G)*(v - k1*w)*(k2*v + G*(u + k2*w)))"
G_ZERO = "(-eps*(v - w)*(u + (k2/k1)*w))"
_J = "(v - k1*w)"
_L = "(u + (k2/G)*v + k2*w)"
_M = "(-(1/eps)*(G + k1)*w)"
_N = "(eps*k2*w*(-v + w) + k1*(k2*v + eps*u*(-v + w)))"
_P = "((v - w)*(u + (k2/k1)*w))"
_N0 = "(k1*(k2*v - eps*u*v))"  # n at w = 0
_P0 = "(u*v)"  # p at w = 0


def _system(states: Sequence[str], params: Sequence[str], rhs: Sequence[str]) -> OdeSystem:
    ambient = ("t",) + tuple(states) + tuple(params)
    return OdeSystem(
        tuple(states), tuple(params), tuple(parse_expr(e, ambient) for e in rhs)
    )


def full_model() -> OdeSystem:
    """Four-state model with G and eps expanded in terms of k1..k4."""
    return _system(
        ("M", "Mstar", "A", "D"),
        ("k1", "k2", "k3", "k4"),
        (
            "-k1*M",
            "k1*M + (k2 - k4)*Mstar - 1e-9*k3*Mstar*A",
            "k2*Mstar - 1e-9*k3*Mstar*A",
            "k4*Mstar + 1e-9*k3*Mstar*A",
        ),
    )


def reduced_model_sym() -> OdeSystem:
    """Three-state core system with independent symbols k1, k2, G, eps."""
    return _system(
        ("y1", "y2", "y3"),
        ("k1", "k2", "G", "eps"),
        ("-k1*y1", "k1*y1 + G*y2 - eps*y2*y3", "k2*y2 - eps*y2*y3"),
    )


def reduced_model_g0() -> OdeSystem:
    """The three-state core system at G = 0 (params k1, k2, eps)."""
    return _system(
        ("y1", "y2", "y3"),
        ("k1", "k2", "eps"),
        ("-k1*y1", "k1*y1 - eps*y2*y3", "k2*y2 - eps*y2*y3"),
    )


@dataclass(frozen=True)
class PaperCase:
    """One analysis case: system, normalizing matrix, split, generator tables."""

    tag: str  # "G_nonzero" | "G_zero"
    system: OdeSystem
    transform: PolyMatrix
    normal_system: OdeSystem
    split: BlockSplit
    generators_original: tuple[Generator, ...]
    generators_normal: tuple[Generator, ...]


def _gens(sys: OdeSystem, rows: Sequence[Sequence[str]]) -> tuple[Generator, ...]:
    return tuple(Generator.from_strings(sys, row[0], row[1:]) for row in rows)


_CASE_ALIASES = {
    "gnz": "G_nonzero",
    "g_nonzero": "G_nonzero",
    "g0": "G_zero",
    "g_zero": "G_zero",
}


def canonical_case_tag(tag: str) -> str:
    key = tag.strip().lower()
    canon = _CASE_ALIASES.get(key)
    if canon is None:
        raise ValueError(f"unknown case tag {tag!r}; use one of gnz, g0")
    return canon


def paper_case(tag: str) -> PaperCase:
    """Build the full verified corpus for one case ('gnz' or 'g0')."""
    canon = canonical_case_tag(tag)
    if canon == "G_nonzero":
        sys = reduced_model_sym()
        z = sys.parse
        transform = PolyMatrix.from_rows(
            [
                [z("0"), z("0"), z("G + k1")],
                [z("0"), z("1"), z("-k1")],
                [z("1"), z("k2/G"), z("k2")],
            ]
        )
        normal = sys.change_coordinates(transform, ("u", "v", "w"))
        split = split_by_names(normal, ["u"])
        originals = _gens(
            sys,
            [
                ("1", "0", "0", "0"),
                (
                    "y2",
                    "-k1*y1*y2",
                    "k1*y1*y2 + G*y2^2 - eps*y2^2*y3",
                    "k2*y2^2 - eps*y2^2*y3",
                ),
                (
                    "y3",
                    "-k1*y1*y3",
                    "k1*y1*y3 + G*y2*y3 - eps*y2*y3^2",
                    "k2*y2*y3 - eps*y2*y3^2",
                ),
                (
                    "0",
                    "-y1",
                    "y1 + (G/k1)*y2 - (eps/k1)*y2*y3",
                    "(k2/k1)*y2 - (eps/k1)*y2*y3",
                ),
                (
                    "(1/k1)*t",
                    "-t*y1",
                    "t*y1 + (G/k1)*t*y2 - (eps/k1)*t*y2*y3",
                    "(k2/k1)*t*y2 - (eps/k1)*t*y2*y3",
                ),
                (
                    "(-1/eps)*y1",
                    "(k1/eps)*y1^2",
                    "(-k1/eps)*y1^2 - (G/eps)*y1*y2 + y1*y2*y3",
                    "(-k2/eps)*y1*y2 + y1*y2*y3",
                ),
            ],
        )
        f = F_NONZERO
        normals = _gens(
            normal,
            [
                ("1", "0", "0", "0"),
                (_J, f"(1/G)*(G - k2)*{_J}*{f}", f"{_J}*(G*v + {f})", f"-k1*w*{_J}"),
                (_L, f"(1/G)*(G - k2)*{_L}*{f}", f"{_L}*(G*v + {f})", f"-k1*w*{_L}"),
                ("0", f"(1/(G*k1))*(G - k2)*{f}", f"(1/k1)*(G*v + {f})", "-w"),
                ("t/k1", f"(t/(G*k1))*(G - k2)*{f}", f"(t/k1)*(G*v + {f})", "-t*w"),
                (_M, f"(1/G)*(G - k2)*{_M}*{f}", f"{_M}*(G*v + {f})", f"-k1*w*{_M}"),
            ],
        )
        return PaperCase(canon, sys, transform, normal, split, originals, normals)

    sys = reduced_model_g0()
    z = sys.parse
    transform = PolyMatrix.from_rows(
        [
            [z("0"), z("0"), z("1")],
            [z("0"), z("1"), z("-1")],
            [z("1"), z("0"), z("k2/k1")],
        ]
    )
    normal = sys.change_coordinates(transform, ("u", "v", "w"))
    split = split_by_names(normal, ["u", "v"])
    originals = _gens(
        sys,
        [
            ("1", "0", "0", "0"),
            ("y2", "-k1*y1*y2", "k1*y1*y2 - eps*y2^2*y3", "k2*y2^2 - eps*y2^2*y3"),
            ("y3", "-k1*y1*y3", "k1*y1*y3 - eps*y2*y3^2", "k2*y2*y3 - eps*y2*y3^2"),
            ("0", "(k1/eps)*y1", "(-k1/eps)*y1 + y2*y3", "(-k2/eps)*y2 + y2*y3"),
            (
                "(-1/eps)*t",
                "(k1/eps)*t*y1",
                "(-k1/eps)*t*y1 + t*y2*y3",
                "(-k2/eps)*t*y2 + t*y2*y3",
            ),
            (
                "(-1/eps)*y1",
                "(k1/eps)*y1^2",
                "(-k1/eps)*y1^2 + y1*y2*y3",
                "(-k2/eps)*y1*y2 + y1*y2*y3",
            ),
        ],
    )
    lift = "(u + (k2/k1)*w)"
    normals = _gens(
        normal,
        [
            ("1", "0", "0", "0"),
            ("v - w", f"(1/k1)*(v - w)*{_N}", f"-eps*(v - w)*{_P}", "-k1*(v - w)*w"),
            (lift, f"(1/k1)*{lift}*{_N}", f"-eps*{lift}*{_P}", f"-k1*{lift}*w"),
            ("0", f"(-1/(eps*k1))*{_N}", _P, "(k1/eps)*w"),
            ("-t/eps", f"(-1/(eps*k1))*t*{_N}", f"t*{_P}", "(k1/eps)*t*w"),
            ("(-1/eps)*w", f"(-1/(eps*k1))*w*{_N}", f"w*{_P}", "(k1/eps)*w^2"),
        ],
    )
    return PaperCase(canon, sys, transform, normal, split, originals, normals)


def g0_reduced_center_system() -> OdeSystem:
    """Dynamics on the G = 0 center manifold: u' = k2 v - eps u v, v' = -eps u v."""
    return _system(("u", "v"), ("k1", "k2", "eps"), ("k2*v - eps*u*v", "-eps*u*v"))


def g0_restricted_generators() -> tuple[Generator, ...]:
    """The four nontrivial generators inherited by the G = 0 center dynamics."""
    sys = g0_reduced_center_system()
    return _gens(
        sys,
        [
            ("v", f"(1/k1)*v*{_N0}", f"-eps*v*{_P0}"),
            ("u", f"(1/k1)*u*{_N0}", f"-eps*u*{_P0}"),
            ("0", f"(-1/(eps*k1))*{_N0}", _P0),
            ("(-1/eps)*t", f"(-1/(eps*k1))*t*{_N0}", f"t*{_P0}"),
        ],
    )


def g0_center_system_original_names() -> OdeSystem:
    """The G = 0 center dynamics relabeled to the original names (y2, y3).

    On the manifold u plays the role of y3 (the antagonist) and v the role
    of y2 (multiplying cells).
    """
    return _system(("y2", "y3"), ("k1", "k2", "eps"), ("-eps*y2*y3", "k2*y2 - eps*y2*y3"))


def x4_hat_original_names() -> Generator:
    """The inherited evolution-type generator in (y2, y3) coordinates.

    This is the relabeling of {0, -(k2 v - eps u v)/eps, u v} under u = y3,
    v = y2; the y2 component is y2*y3 and the y3 component carries the
    -(k2/eps) term (see x4_hat_swapped_display for the commonly mis-stated
    variant, which fails the symmetry condition).
    """
    sys = g0_center_system_original_names()
    return Generator.from_strings(sys, "0", ["y2*y3", "(-k2/eps)*y2 + y2*y3"])


def x4_hat_swapped_display() -> Generator:
    """The same generator with the two eta components swapped.

    Kept as a regression fixture: this variant is *not* a symmetry of the
    relabeled center dynamics (its condition residual is k2*y2^2).
    """
    sys = g0_center_system_original_names()
    return Generator.from_strings(sys, "0", ["(-k2/eps)*y2 + y2*y3", "y2*y3"])


def first_integral_g0(k2: float, eps: float) -> Callable[[np.ndarray], float]:
    """Conserved quantity H(u, v) = v - u - (k2/eps) ln(k2 - eps u).

    Defined for eps*u < k2; raises ValueError outside that domain.
    """
    if eps == 0:
        raise ValueError("eps must be nonzero")

    def quantity(state) -> float:
        u, v = float(state[0]), float(state[1])
        arg = k2 - eps * u
        if arg <= 0:
            raise ValueError(f"first integral undefined: k2 - eps*u = {arg!r} <= 0")
        return v - u - (k2 / eps) * math.log(arg)

    return quantity


# -- scenarios and trajectory shape predicates --------------------------------


@dataclass(frozen=True)
class Scenario:
    """Named numeric regime of the full model."""

    name: str
    binding: dict[str, float]
    ic: tuple[float, ...]
    expected_shape: str
    t_end: float


def scenarios() -> list[Scenario]:
    """The built-in regimes; horizons chosen so the shapes have settled."""
    ic = (INOCULUM, 0.0, 0.0, 0.0)
    return [
        Scenario(
            "paper-G0",
            {"k1": 1.0, "k2": 4.0, "k3": 100.0, "k4": 4.0},
            ic,
            "mstar-dies-a-settles",
            t_end=150.0,
        ),
        Scenario(
            "ross-k3zero-Gpos",
            {"k1": 1.0, "k2": 4.0, "k3": 0.0, "k4": 1.0},
            ic,
            "unrestrained-growth",
            t_end=50.0,
        ),
        Scenario(
            "ross-k3pos-Gpos",
            {"k1": 1.0, "k2": 4.0, "k3": 100.0, "k4": 1.0},
            ic,
            "peak-then-decline",
            t_end=50.0,
        ),
        Scenario(
            "ross-k3zero-Gneg",
            {"k1": 1.0, "k2": 1.0, "k3": 0.0, "k4": 4.0},
            ic,
            "bounded-limit",
            t_end=50.0,
        ),
    ]


def scenario_by_name(name: str) -> Scenario:
    for s in scenarios():
        if s.name == name:
            return s
    raise ValueError(f"unknown scenario {name!r}; known: {[s.name for s in scenarios()]}")


def peaks_then_declines(ts: np.ndarray, ys: np.ndarray) -> bool:
    """Attains its maximum strictly inside the window and ends below 1% of it."""
    i = int(np.argmax(ys))
    if i == 0 or i == len(ys) - 1:
        return False
    peak = ys[i]
    return peak > 0 and ys[-1] < 0.01 * peak


def approaches_constant(ts: np.ndarray, ys: np.ndarray) -> bool:
    """|y(t_end) - y(0.9 t_end)| < 1e-3 |y(t_end)|."""
    t_end = ts[-1]
    y90 = float(np.interp(0.9 * t_end, ts, ys))
    return abs(ys[-1] - y90) < 1e-3 * abs(ys[-1])


def unrestrained_growth(ts: np.ndarray, ys: np.ndarray) -> bool:
    """Strictly increasing over the final decile and final > 10x the midpoint value."""
    t_end = ts[-1]
    tail = ys[ts >= 0.9 * t_end]
    if len(tail) < 2 or not np.all(np.diff(tail) > 0):
        return False
    mid = float(np.interp(0.5 * t_end, ts, ys))
    return ys[-1] > 10 * abs(mid)


@dataclass(frozen=True)
class ShapeReport:
    ok: bool
    details: tuple[str, ...]


def check_scenario_shape(scenario: Scenario, traj: NumericTrajectory) -> ShapeReport:
    """Evaluate the scenario's expected qualitative shape on a trajectory."""
    ts = traj.times
    mstar = traj.component("Mstar")
    a = traj.component("A")
    checks: list[tuple[str, bool]] = []
    if scenario.expected_shape == "mstar-dies-a-settles":
        checks.append(("Mstar peaks then declines to <1% of peak", peaks_then_declines(ts, mstar)))
        checks.append(("A approaches a constant", approaches_constant(ts, a)))
    elif scenario.expected_shape == "unrestrained-growth":
        checks.append(("Mstar grows without restraint", unrestrained_growth(ts, mstar)))
        checks.append(("A grows without restraint", unrestrained_growth(ts, a)))
    elif scenario.expected_shape == "peak-then-decline":
        checks.append(("Mstar peaks then declines to <1% of peak", peaks_then_declines(ts, mstar)))
        checks.append(("A approaches a constant", approaches_constant(ts, a)))
        eps = 1e-9 * scenario.binding["k3"]
        bound = scenario.binding["k2"] / eps if eps else math.inf
        checks.append((f"A stays below k2/eps = {bound:g}", bool(np.all(a <= bound + 1e-6))))
    elif scenario.expected_shape == "bounded-limit":
        checks.append(("A approaches a constant", approaches_constant(ts, a)))
        checks.append(("Mstar peaks then declines to <1% of peak", peaks_then_declines(ts, mstar)))
    else:
        raise ValueError(f"unknown shape tag {scenario.expected_shape!r}")
    failed = tuple(f"FAILED: {name}" for name, ok in checks if not ok)
    passed = tuple(f"ok: {name}" for name, ok in checks if ok)
    return ShapeReport(not failed, failed + passed)
