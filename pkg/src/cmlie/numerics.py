"""Adaptive numerical integration, symmetry flows, and invariance testing.

The integrator is an embedded Dormand-Prince 4(5) pair (seven stages, FSAL)
propagating the fifth-order solution, with a PI step-size controller.  Dense
output between accepted steps uses cubic Hermite interpolation from the
stored derivatives.  Everything is deterministic for fixed inputs.

Butcher tableau (Dormand & Prince 1980, the RKDP54 pair):

    c  = 0, 1/5, 3/10, 4/5, 8/9, 1, 1
    a  = lower-triangular stage coefficients listed in _DOPRI_A
    b5 = 35/384, 0, 500/1113, 125/192, -2187/6784, 11/84, 0     (propagated)
    b4 = 5179/57600, 0, 7571/16695, 393/640, -92097/339200,
         187/2100, 1/40                                          (embedded)

The error estimate uses e = b5 - b4; the last stage equals the first stage
of the next step (FSAL).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .algebra import RatFunc, UnknownSymbolError, ZeroDenominatorError
from .odesys import TIME_SYMBOL, OdeSystem
from .symmetry import Generator, lsc_residual

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12
DEFAULT_T_END = 50.0
DEFAULT_INVARIANCE_SAMPLES = 64

#: parameter name -> double value; must cover every parameter of the system.
ParamBinding = Mapping[str, float]


class NumericsError(RuntimeError):
    """Base class for numerical-integration failures."""


class StepSizeUnderflow(NumericsError):
    def __init__(self, t: float):
        super().__init__(f"step size underflow at t = {t!r}")
        self.t = t


class NonFiniteState(NumericsError):
    def __init__(self, t: float):
        super().__init__(f"state became non-finite near t = {t!r}")
        self.t = t


# -- compilation of exact expressions into fast float evaluators -------------


def _compile_poly(poly, positions: Mapping[str, int], constants: Mapping[str, float]):
    """Poly -> [(float coeff, ((slot, exp), ...))], folding bound symbols in."""
    terms = []
    for mono, coeff in poly.terms.items():
        c = float(coeff)
        factors = []
        for i, e in enumerate(mono):
            if not e:
                continue
            name = poly.symbols[i]
            if name in positions:
                factors.append((positions[name], e))
            elif name in constants:
                c *= float(constants[name]) ** e
            else:
                raise UnknownSymbolError(f"no binding or slot for symbol {name!r}")
        terms.append((c, tuple(factors)))
    return tuple(terms)


def compile_scalar(
    rf: RatFunc, positions: Mapping[str, int], constants: Mapping[str, float]
) -> Callable[[Sequence[float]], float]:
    """Compile a RatFunc into a float evaluator over a positional value vector.

    Symbols in ``positions`` are read from the argument vector; symbols in
    ``constants`` are folded in at compile time.
    """
    num_terms = _compile_poly(rf.num, positions, constants)
    den_terms = _compile_poly(rf.den, positions, constants)

    def term_sum(terms, vals):
        total = 0.0
        for c, factors in terms:
            for slot, e in factors:
                c *= vals[slot] ** e
            total += c
        return total

    if len(den_terms) == 1 and not den_terms[0][1]:
        den_const = den_terms[0][0]
        if den_const == 0.0:
            raise ZeroDenominatorError("denominator evaluates to zero for this binding")

        def evaluate(vals, _terms=num_terms, _d=den_const):
            return term_sum(_terms, vals) / _d

        return evaluate

    def evaluate(vals, _n=num_terms, _d=den_terms):
        d = term_sum(_d, vals)
        if d == 0.0:
            raise ZeroDenominatorError("denominator evaluates to zero")
        return term_sum(_n, vals) / d

    return evaluate


def _require_full_binding(sys: OdeSystem, binding: ParamBinding) -> None:
    missing = [p for p in sys.param_syms if p not in binding]
    if missing:
        raise UnknownSymbolError(f"missing parameter bindings: {missing}")


def make_rhs(sys: OdeSystem, binding: ParamBinding) -> Callable[[float, np.ndarray], np.ndarray]:
    """Compile the system's right-hand side as f(t, y) -> dy/dt."""
    _require_full_binding(sys, binding)
    positions = {s: i for i, s in enumerate(sys.state_syms)}
    fns = [compile_scalar(f, positions, binding) for f in sys.rhs]

    def f(_t: float, y: np.ndarray) -> np.ndarray:
        return np.array([fn(y) for fn in fns])

    return f


def eval_rhs(sys: OdeSystem, binding: ParamBinding, state: Sequence[float]) -> list[float]:
    """One-shot evaluation of the right-hand side at a state point."""
    f = make_rhs(sys, binding)
    return list(f(0.0, np.asarray(state, dtype=float)))


# -- Dormand-Prince 4(5) ------------------------------------------------------

_DOPRI_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DOPRI_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DOPRI_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DOPRI_ERR = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_PI_ALPHA = 0.7 / 5.0
_PI_BETA = 0.4 / 5.0
_MAX_STEPS = 1_000_000


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, direction, rtol, atol) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = f(t0 + h0 * direction, y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def _integrate_raw(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t1: float,
    rtol: float,
    atol: float,
    max_step: float = math.inf,
):
    """Core adaptive loop; returns (times, states, derivs, accepted, rejected)."""
    if not (t1 > t0):
        raise ValueError("integration interval must have t1 > t0")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    y = np.asarray(y0, dtype=float)
    n_stages = 7
    k = np.empty((n_stages, y.size))
    f0 = f(t0, y)
    if not np.all(np.isfinite(f0)):
        raise NonFiniteState(t0)
    h = min(_initial_step(f, t0, y, f0, 1.0, rtol, atol), max_step, t1 - t0)
    times = [t0]
    states = [y.copy()]
    derivs = [f0.copy()]
    k[0] = f0
    t = t0
    accepted = 0
    rejected = 0
    err_prev = 1.0
    steps = 0
    while t < t1:
        steps += 1
        if steps > _MAX_STEPS:
            raise NumericsError(f"step limit exceeded at t = {t!r}")
        h = min(h, max_step, t1 - t)
        if t + h <= t or h <= 1e-300:
            raise StepSizeUnderflow(t)
        for s in range(1, n_stages):
            ts = t + _DOPRI_C[s] * h
            ys = y + h * sum(a * k[j] for j, a in enumerate(_DOPRI_A[s]))
            k[s] = f(ts, ys)
        y_new = y + h * sum(b * k[j] for j, b in enumerate(_DOPRI_B5) if b)
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteState(t)
        err_vec = h * sum(e * k[j] for j, e in enumerate(_DOPRI_ERR) if e)
        err = _error_norm(err_vec, y, y_new, rtol, atol)
        if err <= 1.0:
            t_new = t + h
            times.append(t_new)
            states.append(y_new.copy())
            derivs.append(k[6].copy())
            accepted += 1
            # PI controller (Gustafsson): react to the current and previous error.
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err ** (-_PI_ALPHA) * err_prev**_PI_BETA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            err_prev = max(err, 1e-10)
            k[0] = k[6]  # FSAL
            t, y = t_new, y_new
            h *= factor
        else:
            rejected += 1
            factor = max(_MIN_FACTOR, _SAFETY * err ** (-_PI_ALPHA))
            h *= min(1.0, factor)
    return (
        np.array(times),
        np.array(states),
        np.array(derivs),
        accepted,
        rejected,
    )


@dataclass(frozen=True)
class NumericTrajectory:
    """Accepted integration nodes plus derivative data for dense output."""

    state_names: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray = field(repr=False)
    accepted: int = 0
    rejected: int = 0

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states disagree in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        """Cubic Hermite dense output at arbitrary times inside the span."""
        ts = np.asarray(ts, dtype=float)
        if np.any(ts < self.times[0] - 1e-12) or np.any(ts > self.times[-1] + 1e-12):
            raise ValueError("sample times fall outside the integrated span")
        ts = np.clip(ts, self.times[0], self.times[-1])
        idx = np.clip(np.searchsorted(self.times, ts, side="right") - 1, 0, len(self.times) - 2)
        t0 = self.times[idx]
        t1 = self.times[idx + 1]
        hseg = t1 - t0
        s = ((ts - t0) / hseg)[:, None]
        y0 = self.states[idx]
        y1 = self.states[idx + 1]
        f0 = self.derivs[idx]
        f1 = self.derivs[idx + 1]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * y0 + h10 * hseg[:, None] * f0 + h01 * y1 + h11 * hseg[:, None] * f1

    def interpolate(self, t: float) -> np.ndarray:
        return self.sample([t])[0]

    def component(self, name: str) -> np.ndarray:
        return self.states[:, self.state_names.index(name)]


def integrate_adaptive(
    sys: OdeSystem,
    binding: ParamBinding,
    ic: Sequence[float],
    t_end: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    t0: float = 0.0,
    max_step: float = math.inf,
) -> NumericTrajectory:
    """Integrate the system from ``t0`` to ``t_end`` with adaptive steps."""
    if not (t_end > t0):
        raise ValueError("t_end must exceed t0")
    ic = np.asarray(ic, dtype=float)
    if ic.size != sys.dim:
        raise ValueError(f"initial condition has {ic.size} entries for {sys.dim} states")
    f = make_rhs(sys, binding)
    times, states, derivs, acc, rej = _integrate_raw(f, t0, ic, t_end, rtol, atol, max_step)
    return NumericTrajectory(sys.state_syms, times, states, derivs, acc, rej)


# -- one-parameter flows -------------------------------------------------------


def make_flow_rhs(
    gen: Generator,
    state_names: Sequence[str],
    binding: ParamBinding,
) -> Callable[[float, np.ndarray], np.ndarray]:
    """Compile dz/dgamma for z = (t, y): (xi(z), eta(z))."""
    state_names = tuple(state_names)
    if len(gen.etas) != len(state_names):
        raise ValueError("generator arity does not match the state list")
    positions = {TIME_SYMBOL: 0}
    positions.update({s: i + 1 for i, s in enumerate(state_names)})
    fns = [compile_scalar(gen.xi, positions, binding)] + [
        compile_scalar(e, positions, binding) for e in gen.etas
    ]

    def f(_gamma: float, z: np.ndarray) -> np.ndarray:
        return np.array([fn(z) for fn in fns])

    return f


def flow_generator(
    gen: Generator,
    state_names: Sequence[str],
    binding: ParamBinding,
    point: tuple[float, Sequence[float]],
    gamma: float,
    substeps: int = 1,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> tuple[float, np.ndarray]:
    """Transport (t, y) along the generator's one-parameter flow to ``gamma``.

    Integrates dt/dgamma = xi, dy/dgamma = eta with the same adaptive scheme
    as trajectories; gamma may be negative.  ``substeps`` caps the step size
    at |gamma|/substeps.  At gamma = 0 the input point is returned exactly.
    """
    t, y = point
    z0 = np.concatenate(([float(t)], np.asarray(y, dtype=float)))
    if gamma == 0.0:
        return float(z0[0]), z0[1:]
    f = make_flow_rhs(gen, state_names, binding)
    sign = 1.0 if gamma > 0 else -1.0
    span = abs(gamma)
    if substeps < 1:
        raise ValueError("substeps must be at least 1")

    def g(s, z):
        return sign * f(s, z)

    _, states, _, _, _ = _integrate_raw(g, 0.0, z0, span, rtol, atol, max_step=span / substeps)
    z1 = states[-1]
    return float(z1[0]), z1[1:]


@dataclass(frozen=True)
class InvarianceReport:
    """How closely a generator's flow maps one solution onto another."""

    gamma: float
    sample_times: np.ndarray
    transformed_times: np.ndarray
    deviations: np.ndarray
    max_rel_deviation: float
    lsc_is_symmetry: bool
    compared_points: int
    monotone_prefix_only: bool

    def passes(self, tol: float) -> bool:
        return self.max_rel_deviation <= tol


def solution_invariance(
    sys: OdeSystem,
    gen: Generator,
    binding: ParamBinding,
    ic: Sequence[float],
    gamma: float,
    t_end: float = DEFAULT_T_END,
    n_samples: int = DEFAULT_INVARIANCE_SAMPLES,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> InvarianceReport:
    """Test whether the flow maps the solution set to itself.

    A reference trajectory is sampled at evenly spaced times; every sampled
    point is transported by the flow; a second trajectory is integrated from
    the first transported point and compared against the transported points
    at the transformed times.  If the transformed times are not strictly
    increasing, the comparison is restricted to the largest monotone prefix.
    """
    lsc = lsc_residual(gen, sys)
    if not lsc.is_symmetry:
        warnings.warn(
            "generator fails the linearized symmetry condition; "
            "running the invariance test anyway",
            stacklevel=2,
        )
    traj = integrate_adaptive(sys, binding, ic, t_end, rtol=rtol, atol=atol)
    ts = np.linspace(traj.t0, traj.t_end, n_samples)
    ys = traj.sample(ts)

    transformed = [
        flow_generator(gen, sys.state_syms, binding, (float(t), y), gamma, rtol=rtol, atol=atol)
        for t, y in zip(ts, ys)
    ]
    xi_static = gen.xi.is_zero
    t_hat = ts.copy() if xi_static else np.array([p[0] for p in transformed])
    y_hat = np.array([p[1] for p in transformed])

    prefix = len(t_hat)
    for i in range(1, len(t_hat)):
        if t_hat[i] <= t_hat[i - 1]:
            prefix = i
            break
    truncated = prefix < len(t_hat)

    t_cmp = t_hat[:prefix]
    y_cmp = y_hat[:prefix]
    span_end = float(t_cmp[-1])
    start = float(t_cmp[0])
    if span_end <= start:
        span_end = start + max(1e-9, abs(start) * 1e-9)
    second = integrate_adaptive(
        sys, binding, y_cmp[0], span_end, rtol=rtol, atol=atol, t0=start
    )
    y_second = second.sample(t_cmp)
    diffs = np.max(np.abs(y_cmp - y_second), axis=1)
    scales = np.maximum(np.max(np.abs(y_cmp), axis=1), 1.0)
    deviations = diffs / scales
    return InvarianceReport(
        gamma=gamma,
        sample_times=ts,
        transformed_times=t_hat,
        deviations=deviations,
        max_rel_deviation=float(np.max(deviations)),
        lsc_is_symmetry=lsc.is_symmetry,
        compared_points=prefix,
        monotone_prefix_only=truncated,
    )


def conserved_drift(traj: NumericTrajectory, quantity: Callable[[np.ndarray], float]) -> float:
    """Relative drift of a conserved quantity along a trajectory.

    max over nodes of |H(y_i) - H(y_0)| / max(|H(y_0)|, 1); raises
    NumericsError if H is non-finite anywhere (domain violation).
    """
    values = np.array([quantity(row) for row in traj.states], dtype=float)
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.isfinite(values)))
        raise NumericsError(
            f"conserved quantity is non-finite at t = {traj.times[bad]!r} (domain violation)"
        )
    h0 = values[0]
    return float(np.max(np.abs(values - h0)) / max(abs(h0), 1.0))


def write_csv(traj: NumericTrajectory, path, samples: int | None = None) -> None:
    """Write `t,<var1>,...` rows at accepted steps (or ``samples`` dense points)."""
    if samples is None:
        ts = traj.times
        ys = traj.states
    else:
        if samples < 2:
            raise ValueError("samples must be at least 2")
        ts = np.linspace(traj.t0, traj.t_end, samples)
        ys = traj.sample(ts)
    header = ",".join(("t",) + traj.state_names)
    lines = [header]
    for t, row in zip(ts, ys):
        lines.append(",".join(f"{v:.17g}" for v in (t, *row)))
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
