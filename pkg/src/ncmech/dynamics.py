"""Equations of motion, fixed-step trajectories, and the worked scenarios.

Phase flows are generated directly from a Hamiltonian and a bracket
structure (zdot_a = Omega^{ab} d_b H); the second-order configuration-space
form eliminates the kinetic momentum, numerically per state in general and
symbolically for linear potentials with quadratic scalar potentials, the
family where the elimination stays polynomial.  Integration is classical
fixed-step RK4 only: deterministic, trivially reproducible, and simple to
order-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .gauge import FieldConfig, field_strength
from .poly import (
    EXACT,
    FLOAT,
    DimensionMismatchError,
    Polynomial,
    SingularMatrixError,
    ThetaMatrix,
    solve_linear,
)
from .structure import (
    KIND_DERIGLAZOV,
    KIND_DUVAL_HORVATHY,
    SINGULARITY_TOLERANCE,
    BracketStructure,
    SingularStructureError,
)

FIRST_ORDER_PHASE = "first-order-phase"
SECOND_ORDER_CONFIG = "second-order-config"


class NonFiniteStateError(RuntimeError):
    """Integration produced a non-finite component."""

    def __init__(self, step: int, state):
        self.step = step
        self.state = tuple(state)
        super().__init__(f"non-finite state at step {step}: {self.state}")


class SingularVelocityMatrixError(RuntimeError):
    """The velocity-momentum matrix G lost invertibility at a state."""

    def __init__(self, state, det):
        self.state = tuple(state)
        self.det = det
        super().__init__(
            f"singular velocity-momentum matrix (det={det!r}) at state {self.state}")


def compile_vector(polys: Sequence[Polynomial]) -> Callable:
    """Compile a tuple of polynomials into one fast state -> tuple function."""
    exprs = []
    for p in polys:
        if p.is_zero:
            exprs.append("0.0")
            continue
        parts = []
        for exps in sorted(p.terms):
            factors = [repr(float(p.terms[exps]))]
            for i, e in enumerate(exps):
                if e == 1:
                    factors.append(f"s[{i}]")
                elif e > 1:
                    factors.append(f"s[{i}]**{e}")
            parts.append("*".join(factors))
        exprs.append(" + ".join(parts))
    src = "def _rhs(s):\n    return (" + ", ".join(exprs) + ("," if len(exprs) == 1 else "") + ")"
    namespace: dict = {}
    exec(src, {"__builtins__": {}}, namespace)
    return namespace["_rhs"]


@dataclass(frozen=True)
class EquationsOfMotion:
    kind: str
    n: int
    labels: tuple
    rhs: Callable
    symbolic_rhs: tuple | None = None
    kinetic_momentum_map: Callable | None = None

    @property
    def dim(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_end: float
    method: str = "rk4"
    monitors: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method != "rk4":
            raise ValueError(f"unsupported integrator method {self.method!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    labels: tuple
    monitors: dict

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise DimensionMismatchError("times and states lengths disagree")
        for name, values in self.monitors.items():
            if len(values) != len(self.times):
                raise DimensionMismatchError(f"monitor {name!r} length disagrees")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def column(self, label: str) -> np.ndarray:
        return self.states[:, self.labels.index(label)]


def phase_labels(n: int) -> tuple:
    return tuple(f"x{i + 1}" for i in range(n)) + tuple(f"p{i + 1}" for i in range(n))


def config_labels(n: int) -> tuple:
    return tuple(f"x{i + 1}" for i in range(n)) + tuple(f"v{i + 1}" for i in range(n))


def eom_from_hamiltonian(hamiltonian: Polynomial,
                         structure: BracketStructure,
                         kinetic_momentum_map: Callable | None = None
                         ) -> EquationsOfMotion:
    """Phase equations zdot_a = {z_a, H} for a constant bracket table."""
    n = structure.n
    if hamiltonian.nvars != 2 * n:
        raise DimensionMismatchError(
            f"hamiltonian needs nvars={2 * n}, got {hamiltonian.nvars}")
    omega = structure.omega()
    if structure.kind == KIND_DUVAL_HORVATHY:
        if abs(structure.constant_d()) < SINGULARITY_TOLERANCE:
            raise SingularStructureError(
                "bracket table degenerate: 1 - e*theta*B vanishes")
    grads = [hamiltonian.diff(b) for b in range(2 * n)]
    zero = Polynomial.zero(2 * n, hamiltonian.mode)
    rhs_polys = []
    for a in range(2 * n):
        acc = zero
        for b in range(2 * n):
            if omega[a, b] != 0:
                acc = acc + grads[b].scale(omega[a, b])
        rhs_polys.append(acc)
    rhs_polys = tuple(rhs_polys)
    compiled = compile_vector([p.to_float() for p in rhs_polys])
    return EquationsOfMotion(kind=FIRST_ORDER_PHASE, n=n,
                             labels=phase_labels(n), rhs=compiled,
                             symbolic_rhs=rhs_polys,
                             kinetic_momentum_map=kinetic_momentum_map)


def _dh_hamiltonian(fc: FieldConfig, structure: BracketStructure) -> Polynomial:
    # the minimal-coupling Hamiltonian for this model is p^2/2 + e*phi;
    # the magnetic field enters through the bracket table instead
    for a in fc.A:
        if not a.is_zero:
            raise ValueError(
                "duval-horvathy dynamics couples B through the brackets; "
                "pass A = 0 and set B on the structure")
    n, mode = fc.n, fc.mode
    half = Fraction(1, 2) if mode == EXACT else 0.5
    total = Polynomial.zero(2 * n, mode)
    for i in range(n):
        pi = Polynomial.variable(n + i, 2 * n, mode)
        total = total + (pi * pi).scale(half)
    return total + fc.phi.embed(2 * n, list(range(n))).scale(fc.e)


def hamiltonian_rhs(fc: FieldConfig,
                    structure: BracketStructure) -> EquationsOfMotion:
    """First-order phase equations for the particle in external fields."""
    if fc.n != structure.n:
        raise DimensionMismatchError("field config and structure disagree on n")
    n = fc.n
    a_compiled = [a.to_float().as_callable() for a in fc.A]
    e_float = float(fc.e)

    def momentum_map(state):
        x = state[:n]
        return tuple(state[n + i] - e_float * a_compiled[i](x) for i in range(n))

    if structure.kind == KIND_DERIGLAZOV:
        return eom_from_hamiltonian(fc.hamiltonian(), structure,
                                    kinetic_momentum_map=momentum_map)

    hamiltonian = _dh_hamiltonian(fc, structure)
    dpoly = structure.d_factor_poly()
    if dpoly.is_constant:
        return eom_from_hamiltonian(hamiltonian, structure,
                                    kinetic_momentum_map=momentum_map)

    # position-dependent d(x): pointwise numeric bracket table
    grads = compile_vector([hamiltonian.diff(b).to_float() for b in range(2 * n)])
    d_fn = dpoly.to_float().as_callable()
    th = float(structure.theta_scalar)
    e_b = compile_vector([structure.B.scale(structure.e).to_float()])

    def rhs(state):
        x = state[:n]
        d = d_fn(x)
        if abs(d) < SINGULARITY_TOLERANCE:
            raise SingularStructureError(
                f"1 - e*theta*B vanished at position {tuple(x)}")
        g = grads(state)
        eb = e_b(x)[0]
        return (th * d * g[1] + d * g[2],
                -th * d * g[0] + d * g[3],
                -d * g[0] + eb * d * g[3],
                -d * g[1] - eb * d * g[2])

    return EquationsOfMotion(kind=FIRST_ORDER_PHASE, n=n,
                             labels=phase_labels(n), rhs=rhs,
                             kinetic_momentum_map=momentum_map)


def _is_linear(poly: Polynomial) -> bool:
    return poly.total_degree() <= 1


def lorentz_rhs(fc: FieldConfig, theta: ThetaMatrix) -> EquationsOfMotion:
    """Second-order configuration-space equations with the momentum eliminated.

    State is (x, v).  The elimination solves G pi = v - e theta grad(phi)
    with G^i_j = delta - e theta^{ik} d_k A_j per evaluation; when every A_i
    is linear and phi is quadratic the same elimination is done once,
    symbolically and exactly.
    """
    n = fc.n
    if theta.n != n:
        raise DimensionMismatchError("theta dimension disagrees with fields")
    e = fc.e
    mode = fc.mode
    xmap = list(range(n))

    # (theta . grad phi)^i over (x, v) variables
    def theta_grad(poly):
        out = []
        for i in range(n):
            acc = Polynomial.zero(2 * n, mode)
            for k in range(n):
                if theta[i, k] != 0:
                    acc = acc + poly.diff(k).embed(2 * n, xmap).scale(theta[i, k])
            out.append(acc)
        return out

    strength = field_strength(fc, theta)
    grad_phi = [fc.phi.diff(i) for i in range(n)]
    th_grad_phi = theta_grad(fc.phi)

    symbolic = None
    if all(_is_linear(a) for a in fc.A) and fc.phi.total_degree() <= 2:
        # G is a constant matrix; invert once, exactly
        g_rows = []
        for i in range(n):
            row = []
            for j in range(n):
                entry = Fraction(1 if i == j else 0) if mode == EXACT else float(i == j)
                for k in range(n):
                    entry = entry - e * theta[i, k] * fc.A[j].diff(k).constant_value()
                row.append(entry)
            g_rows.append(row)
        vvars = [Polynomial.variable(n + i, 2 * n, mode) for i in range(n)]
        try:
            pi = solve_linear(g_rows, [vvars[i] - th_grad_phi[i].scale(e)
                                       for i in range(n)])
        except SingularMatrixError:
            det = _det(g_rows)
            raise SingularVelocityMatrixError(("symbolic",), det)
        pidot = []
        for i in range(n):
            acc = Polynomial.zero(2 * n, mode)
            for j in range(n):
                sij = strength[i][j]
                if not sij.is_zero:
                    acc = acc + (sij.embed(2 * n, xmap) * pi[j]).scale(e)
            acc = acc - grad_phi[i].embed(2 * n, xmap).scale(e)
            for k in range(n):
                for l in range(n):
                    if theta[k, l] != 0:
                        term = fc.A[i].diff(k).constant_value() * theta[k, l] * e * e
                        acc = acc - grad_phi[l].embed(2 * n, xmap).scale(term)
            pidot.append(acc)
        accel = []
        for i in range(n):
            acc = Polynomial.zero(2 * n, mode)
            for j in range(n):
                if g_rows[i][j] != 0:
                    acc = acc + pidot[j].scale(g_rows[i][j])
            for j in range(n):
                for k in range(n):
                    if theta[i, k] != 0:
                        hz = fc.phi.diff(k).diff(j).constant_value()
                        if hz != 0:
                            acc = acc + vvars[j].scale(e * theta[i, k] * hz)
            accel.append(acc)
        symbolic = tuple(vvars) + tuple(accel)

    # numeric elimination, valid for arbitrary polynomial fields
    e_f = float(e)
    theta_f = np.array([[float(theta[i, j]) for j in range(n)] for i in range(n)])
    dA = [[fc.A[j].diff(k).to_float().as_callable() for j in range(n)]
          for k in range(n)]  # dA[k][j] = d_k A_j
    ddA = [[[fc.A[j].diff(k).diff(l).to_float().as_callable()
             for j in range(n)] for l in range(n)] for k in range(n)]
    gphi = [p.to_float().as_callable() for p in grad_phi]
    hphi = [[fc.phi.diff(k).diff(j).to_float().as_callable() for j in range(n)]
            for k in range(n)]
    f_theta = [[strength[i][j].to_float().as_callable() for j in range(n)]
               for i in range(n)]

    def rhs(state):
        x = state[:n]
        v = np.asarray(state[n:], dtype=float)
        da = np.array([[dA[k][j](x) for j in range(n)] for k in range(n)])
        g = np.eye(n) - e_f * theta_f @ da
        det = np.linalg.det(g)
        if abs(det) < 1e-12:
            raise SingularVelocityMatrixError(state, det)
        gp = np.array([gphi[i](x) for i in range(n)])
        pi = np.linalg.solve(g, v - e_f * theta_f @ gp)
        fmat = np.array([[f_theta[i][j](x) for j in range(n)] for i in range(n)])
        pidot = e_f * fmat @ pi - e_f * gp
        pidot -= e_f * e_f * np.array(
            [sum(da[k][i] * theta_f[k, l] * gp[l]
                 for k in range(n) for l in range(n)) for i in range(n)])
        hess = np.array([[hphi[k][j](x) for j in range(n)] for k in range(n)])
        gdot = np.array([[-e_f * sum(theta_f[i, k] * ddA[k][l][j](x) * v[l]
                                     for k in range(n) for l in range(n))
                          for j in range(n)] for i in range(n)])
        accel = gdot @ pi + g @ pidot + e_f * theta_f @ (hess @ v)
        return tuple(v) + tuple(accel)

    if symbolic is not None:
        compiled = compile_vector([p.to_float() for p in symbolic])
        rhs_fn = compiled
    else:
        rhs_fn = rhs
    return EquationsOfMotion(kind=SECOND_ORDER_CONFIG, n=n,
                             labels=config_labels(n), rhs=rhs_fn,
                             symbolic_rhs=symbolic)


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    return float(np.linalg.det(np.array([[float(v) for v in r] for r in rows])))


def integrate(eom: EquationsOfMotion, init: Sequence[float],
              cfg: IntegratorConfig) -> Trajectory:
    """Classical fixed-step RK4; deterministic for fixed inputs."""
    dim = eom.dim
    if len(init) != dim:
        raise DimensionMismatchError(
            f"initial state has length {len(init)}, equations need {dim}")
    monitors = {name: poly.to_float().as_callable()
                for name, poly in cfg.monitors.items()}
    for name, poly in cfg.monitors.items():
        if poly.nvars != dim:
            raise DimensionMismatchError(
                f"monitor {name!r} has nvars={poly.nvars}, state dim is {dim}")
    rhs = eom.rhs
    dt = float(cfg.dt)
    nsteps = int(round(cfg.t_end / dt))
    state = tuple(float(v) for v in init)
    times = [0.0]
    states = [state]
    logs = {name: [fn(state)] for name, fn in monitors.items()}
    half = dt / 2.0
    sixth = dt / 6.0
    rng = range(dim)
    for step in range(1, nsteps + 1):
        k1 = rhs(state)
        s2 = tuple(state[i] + half * k1[i] for i in rng)
        k2 = rhs(s2)
        s3 = tuple(state[i] + half * k2[i] for i in rng)
        k3 = rhs(s3)
        s4 = tuple(state[i] + dt * k3[i] for i in rng)
        k4 = rhs(s4)
        state = tuple(state[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
                      for i in rng)
        if not all(math.isfinite(v) for v in state):
            raise NonFiniteStateError(step, state)
        times.append(step * dt)
        states.append(state)
        for name, fn in monitors.items():
            logs[name].append(fn(state))
    return Trajectory(times=np.array(times), states=np.array(states),
                      labels=eom.labels,
                      monitors={k: np.array(v) for k, v in logs.items()})


def monitor_drift(traj: Trajectory, name: str) -> float:
    """Maximum absolute drift of a monitored quantity from its initial value."""
    if name not in traj.monitors:
        raise ValueError(f"unknown monitor {name!r}")
    values = traj.monitors[name]
    return float(np.max(np.abs(values - values[0])))


def fit_rotation_frequency(traj: Trajectory, label: str) -> float:
    """Angular frequency from interpolated upward zero crossings of a column.

    Averages over all complete periods present; requires at least five
    (six crossings), which keeps the estimate robust to endpoint effects.
    """
    values = traj.column(label)
    times = traj.times
    crossings = []
    for k in range(len(values) - 1):
        if values[k] < 0.0 <= values[k + 1]:
            frac = -values[k] / (values[k + 1] - values[k])
            crossings.append(times[k] + frac * (times[k + 1] - times[k]))
    if len(crossings) < 6:
        raise ValueError(
            f"only {len(crossings)} upward crossings; need >= 6 (five periods)")
    period = (crossings[-1] - crossings[0]) / (len(crossings) - 1)
    return 2.0 * math.pi / period


def phase_initial_from_velocity(fc: FieldConfig, theta: ThetaMatrix,
                                x0: Sequence[float],
                                v0: Sequence[float]) -> tuple:
    """Canonical momentum matching a prescribed initial velocity."""
    n = fc.n
    x0 = tuple(float(v) for v in x0)
    theta_f = np.array([[float(theta[i, j]) for j in range(n)] for i in range(n)])
    e_f = float(fc.e)
    da = np.array([[fc.A[j].diff(k).to_float().as_callable()(x0)
                    for j in range(n)] for k in range(n)])
    g = np.eye(n) - e_f * theta_f @ da
    gp = np.array([fc.phi.diff(i).to_float().as_callable()(x0) for i in range(n)])
    pi = np.linalg.solve(g, np.asarray(v0, dtype=float) - e_f * theta_f @ gp)
    a0 = np.array([a.to_float().as_callable()(x0) for a in fc.A])
    return tuple(x0) + tuple(pi + e_f * a0)


def velocity_from_phase(fc: FieldConfig, theta: ThetaMatrix,
                        state: Sequence[float]) -> tuple:
    """xdot at a phase state, from the same map the phase equations use."""
    n = fc.n
    x = tuple(float(v) for v in state[:n])
    p = np.asarray(state[n:], dtype=float)
    theta_f = np.array([[float(theta[i, j]) for j in range(n)] for i in range(n)])
    e_f = float(fc.e)
    a0 = np.array([a.to_float().as_callable()(x) for a in fc.A])
    pi = p - e_f * a0
    da = np.array([[fc.A[j].diff(k).to_float().as_callable()(x)
                    for j in range(n)] for k in range(n)])
    g = np.eye(n) - e_f * theta_f @ da
    gp = np.array([fc.phi.diff(i).to_float().as_callable()(x) for i in range(n)])
    return tuple(g @ pi + e_f * theta_f @ gp)


# ---------------------------------------------------------------------------
# scenario library


@dataclass(frozen=True)
class ScenarioBundle:
    name: str
    fields: FieldConfig
    structure: BracketStructure
    integrator: IntegratorConfig
    init_phase: tuple
    init_config: tuple | None
    meta: dict


SCENARIO_NAMES = ("constant-b", "harmonic", "saddle", "combined", "dh-compare")

_SCENARIO_DEFAULTS = {
    "constant-b": {"e": 1.0, "B": 1.0, "theta": 0.1, "dt": 1e-3, "t_end": 40.0,
                   "x0": (0.0, 0.0), "v0": (1.0, 0.0)},
    "harmonic": {"e": 1.0, "omega": 1.0, "theta": 0.1, "dt": 1e-3, "t_end": 10.0,
                 "x0": (1.0, 0.0), "v0": (0.0, 0.0)},
    "saddle": {"e": 1.0, "theta": 0.1, "dt": 1e-3, "t_end": 10.0,
               "x0": (0.0, 1.0), "v0": (0.5, 0.0)},
    "combined": {"e": 1.0, "B": 1.0, "omega": 1.0, "theta": 0.1, "dt": 1e-3,
                 "t_end": 10.0, "x0": (1.0, 0.0), "v0": (0.0, 0.3)},
    "dh-compare": {"e": 1.0, "B": 1.0, "theta": 0.1, "dt": 1e-3, "t_end": 10.0,
                   "x0": (1.0, 0.0), "p0": (0.0, 1.0)},
}


def symmetric_gauge_potential(B: float, mode: str = FLOAT) -> tuple:
    """A = (-B y / 2, B x / 2), the symmetric gauge for a constant field."""
    half_b = B / 2.0 if mode == FLOAT else Fraction(B) / 2
    a1 = Polynomial.variable(1, 2, mode).scale(-half_b)
    a2 = Polynomial.variable(0, 2, mode).scale(half_b)
    return (a1, a2)


def isotropic_potential(omega: float, mode: str = FLOAT) -> Polynomial:
    """phi = omega^2 (x^2 + y^2) / 2."""
    w2 = omega * omega / 2.0 if mode == FLOAT else Fraction(omega) ** 2 / 2
    x, y = Polynomial.variable(0, 2, mode), Polynomial.variable(1, 2, mode)
    return (x * x + y * y).scale(w2)


def effective_field(e: float, B: float, theta: float) -> float:
    """B(1 + e*theta*B/4), the shifted constant field of the planar model."""
    return B * (1.0 + e * theta * B / 4.0)


def cancellation_theta(e: float, B: float, omega: float) -> float:
    """theta at which the effective rotational coupling vanishes."""
    return -4.0 * B / (4.0 * omega * omega + e * B * B)


def scenario(name: str, params: dict | None = None) -> ScenarioBundle:
    """Fully populated worked scenario; ``params`` overrides the defaults."""
    if name not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}")
    defaults = dict(_SCENARIO_DEFAULTS[name])
    params = dict(params or {})
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(f"unknown parameters for scenario {name!r}: {sorted(unknown)}")
    defaults.update(params)
    p = defaults
    e, theta = float(p["e"]), float(p["theta"])
    zero = Polynomial.zero(2, FLOAT)
    meta: dict = {"e": e, "theta": theta}

    if name == "constant-b":
        B = float(p["B"])
        fields = FieldConfig(n=2, A=symmetric_gauge_potential(B), phi=zero, e=e)
        meta.update(B=B, B_tilde=effective_field(e, B, theta),
                    omega_c=e * effective_field(e, B, theta))
    elif name == "harmonic":
        omega = float(p["omega"])
        fields = FieldConfig(n=2, A=(zero, zero),
                             phi=isotropic_potential(omega), e=e)
        meta.update(omega=omega, B_theta=theta * omega * omega)
    elif name == "saddle":
        y = Polynomial.variable(1, 2, FLOAT)
        fields = FieldConfig(n=2, A=(zero, zero), phi=(y * y).scale(0.5), e=e)
    elif name == "combined":
        B, omega = float(p["B"]), float(p["omega"])
        fields = FieldConfig(n=2, A=symmetric_gauge_potential(B),
                             phi=isotropic_potential(omega), e=e)
        bt = effective_field(e, B, theta)
        meta.update(B=B, omega=omega, B_tilde=bt,
                    rotational_coefficient=e * (bt + theta * omega * omega),
                    linear_coefficient=e * omega * omega,
                    theta_star=cancellation_theta(e, B, omega))
    else:  # dh-compare
        B = float(p["B"])
        fields = FieldConfig(n=2, A=(zero, zero), phi=zero, e=e)
        meta.update(B=B, d=1.0 - e * theta * B)

    if name == "dh-compare":
        structure = BracketStructure.duval_horvathy(
            e, theta, Polynomial.constant(2, float(p["B"]), FLOAT))
        init_phase = tuple(float(v) for v in p["x0"]) + tuple(
            float(v) for v in p["p0"])
        init_config = None
    else:
        structure = BracketStructure.deriglazov(ThetaMatrix.planar(theta, FLOAT))
        init_config = tuple(float(v) for v in p["x0"]) + tuple(
            float(v) for v in p["v0"])
        init_phase = phase_initial_from_velocity(
            fields, structure.theta, p["x0"], p["v0"])

    hmon = fields.hamiltonian().to_float() if name != "dh-compare" else \
        _dh_hamiltonian(fields, structure).to_float()
    integrator = IntegratorConfig(dt=float(p["dt"]), t_end=float(p["t_end"]),
                                  monitors={"H": hmon})
    return ScenarioBundle(name=name, fields=fields, structure=structure,
                          integrator=integrator, init_phase=init_phase,
                          init_config=init_config, meta=meta)


def run_phase(bundle: ScenarioBundle,
              overrides: IntegratorConfig | None = None) -> Trajectory:
    eom = hamiltonian_rhs(bundle.fields, bundle.structure)
    return integrate(eom, bundle.init_phase, overrides or bundle.integrator)


def run_config(bundle: ScenarioBundle,
               overrides: IntegratorConfig | None = None) -> Trajectory:
    if bundle.init_config is None:
        raise ValueError(f"scenario {bundle.name!r} has no second-order form")
    eom = lorentz_rhs(bundle.fields, bundle.structure.theta)
    base = overrides or bundle.integrator
    n = bundle.fields.n
    speed = sum((Polynomial.variable(n + i, 2 * n, FLOAT) ** 2 for i in range(n)),
                start=Polynomial.zero(2 * n, FLOAT))
    cfg = IntegratorConfig(dt=base.dt, t_end=base.t_end,
                           monitors={"speed2": speed})
    return integrate(eom, bundle.init_config, cfg)
