"""Time-dependent and Newtonian mechanics engines.

Two independent dynamics constructions backed by the phase machinery:

* time-dependent systems on a space-time split into space and time,
  where the dynamics is generated from the section attached to the
  Hamiltonian through the energy-quotient bracket and must coincide
  with the textbook field plus the unit time component;
* Newtonian space-time with a clock covector, a spatial metric, and
  inertial frames, where observed trajectories in different frames must
  trace the same events.

Gauge convention.  Boosting an observed phase by a spatial velocity
``v`` keeps the event, and maps momentum and the action-like coordinate
kinematically:

    p -> p - m g(v),   s -> s - <p, v> + (m/2) <g(v), v>

This is the unique convention compatible with the observed dynamics
``dx/dt = g^{-1}(p)/m + u`` under which boost round trips restore the
phase exactly and world-lines are frame-independent; the transformation
rules printed with the opposite momentum sign fail both properties.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import symexpr as se
from .phase import TimePhaseSpace, canonical_poisson
from .symexpr import Expression

__all__ = [
    "MechanicsError", "IntegrationError", "VectorField", "Trajectory",
    "integrate", "TimeDepSystem", "timedep_dynamics", "NewtonSpaceTime",
    "InertialFrame", "ObservedPhase", "ObserverSplit", "gauge_transform",
    "newton_dynamics", "observed_hamiltonian", "compare_frames",
    "tau_clock_residual",
]


class MechanicsError(ValueError):
    pass


class IntegrationError(RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(f"{message} at step {step}")
        self.step = step


# ---------------------------------------------------------------------------
# Fields and the fixed-step integrator


class VectorField:
    """First-order field with named state components.

    Components are expressions in the state names; evaluation goes
    through a compiled closure, so fields are cheap inside integration
    loops while the expressions stay inspectable.
    """

    def __init__(self, names, components):
        self.names = tuple(names)
        self.components = tuple(
            c if isinstance(c, Expression) else se.Const(float(c))
            for c in components)
        if len(self.components) != len(self.names):
            raise MechanicsError("one component per state variable required")
        self._fn = se.compile_fn(self.components, self.names)

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return np.array(self._fn(y))

    def evaluate_at(self, env: dict[str, float]) -> np.ndarray:
        return np.array([se.evaluate(c, env) for c in self.components])


@dataclass
class Trajectory:
    """Uniformly sampled solution curve with optional event columns."""

    names: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    event_names: tuple[str, ...] = ()
    events: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def to_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["step", "time", *self.names, *self.event_names])
            for k in range(len(self.times)):
                row = [str(k), _fmt(self.times[k])]
                row += [_fmt(v) for v in self.states[k]]
                if self.events is not None:
                    row += [_fmt(v) for v in self.events[k]]
                writer.writerow(row)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def integrate(fld, y0, h: float, T: float, names=None,
              event_fn=None, event_names=()) -> Trajectory:
    """Classical fixed-step fourth-order Runge-Kutta, recording every step.

    Deterministic by construction; raises :class:`IntegrationError` with
    the offending step index if the state stops being finite.
    """
    if h <= 0:
        raise MechanicsError("step size must be positive")
    if T < h:
        raise MechanicsError("duration must cover at least one step")
    if names is None:
        names = getattr(fld, "names", None)
        if names is None:
            raise MechanicsError("state names required for a bare callable")
    y = np.array(y0, dtype=float)
    n_steps = int(round(T / h))
    states = np.empty((n_steps + 1, len(y)))
    states[0] = y
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        for k in range(n_steps):
            try:
                k1 = fld(y)
                k2 = fld(y + 0.5 * h * k1)
                k3 = fld(y + 0.5 * h * k2)
                k4 = fld(y + h * k3)
            except (ZeroDivisionError, OverflowError, ValueError) as err:
                raise IntegrationError(f"domain error ({err})", k + 1) from None
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise IntegrationError("non-finite state", k + 1)
            states[k + 1] = y
    times = h * np.arange(n_steps + 1)
    traj = Trajectory(tuple(names), times, states,
                      meta={"step": h, "duration": T})
    if event_fn is not None:
        traj.events = np.array([event_fn(s) for s in states])
        traj.event_names = tuple(event_names)
    return traj


# ---------------------------------------------------------------------------
# Time-dependent systems


class TimeDepSystem:
    """Hamiltonian system on positions x time, driven through the quotient.

    The Hamiltonian is an expression in the position names, momentum
    names, and time.  The section it defines on the energy quotient
    assigns minus the Hamiltonian, and the attached function upstairs is
    ``energy + H``; both defining identities of that function are checked
    exactly at construction.
    """

    def __init__(self, dim: int, hamiltonian: Expression,
                 q_names=None, p_names=None, time: str = "t",
                 energy: str = "e"):
        self.dim = dim
        self.q_names = tuple(q_names or (f"q{i + 1}" for i in range(dim)))
        self.p_names = tuple(p_names or (f"p{i + 1}" for i in range(dim)))
        self.time = time
        self.space = TimePhaseSpace(self.q_names, self.p_names, time, energy)
        self.H = hamiltonian
        allowed = set(self.space.base_names)
        extraneous = se.free_vars(hamiltonian) - allowed
        if extraneous:
            raise MechanicsError(
                f"Hamiltonian uses unknown variables {sorted(extraneous)}")
        self.section = se.neg(self.H)           # energy value along the section
        self.F = se.add(se.Var(energy), self.H)  # the attached function
        if se.differentiate(self.F, energy) != se.Const(1.0):
            raise MechanicsError("attached function must have unit fiber slope")
        if se.subst(self.F, {energy: self.section}) != se.Const(0.0):
            raise MechanicsError("attached function must vanish on the section")

    @property
    def state_names(self) -> tuple[str, ...]:
        return self.q_names + self.p_names + (self.time,)


def timedep_dynamics(sys: TimeDepSystem,
                     rng: np.random.Generator | None = None,
                     n_check: int = 40, tol: float = 1e-12) -> VectorField:
    """Dynamics of a time-dependent system on ``(q, p, t)``.

    Computed twice: through the bracket of the attached function on the
    full cotangent space pushed down along the quotient, and in closed
    form (Hamilton's equations plus the unit time component).  The two
    routes are compared on random states before the closed form is
    returned; the bracket route stays available on the result for
    inspection.
    """
    rng = rng or np.random.default_rng(0)
    space = sys.space
    closed = [se.differentiate(sys.H, p) for p in sys.p_names]
    closed += [se.neg(se.differentiate(sys.H, q)) for q in sys.q_names]
    closed += [se.Const(1.0)]

    reduced = []
    for name in sys.state_names:
        out = canonical_poisson(sys.F, se.Var(name), space.pairs)
        reduced.append(se.subst(out, {space.energy: 0.0}))

    worst = 0.0
    for _ in range(n_check):
        env = {n: float(rng.uniform(-2, 2)) for n in sys.state_names}
        for a, b in zip(closed, reduced):
            worst = max(worst, abs(se.evaluate(a, env) - se.evaluate(b, env)))
    if worst >= tol:
        raise MechanicsError(
            f"bracket-generated dynamics deviates from the closed form "
            f"({worst:.3e})")

    order = sys.q_names + sys.p_names + (sys.time,)
    fld = VectorField(order, closed)
    fld.reduction_components = tuple(reduced)
    fld.cross_check_residual = worst
    return fld


def timedep_event_fn(sys: TimeDepSystem):
    """Extractor of the space-time event (q, t) from a dynamics state."""
    d = sys.dim

    def event(state: np.ndarray) -> np.ndarray:
        return np.concatenate([state[:d], state[-1:]])

    return event, sys.q_names + (sys.time,)


# ---------------------------------------------------------------------------
# Newtonian space-time


def _nullspace_basis(tau: np.ndarray) -> np.ndarray:
    n = tau.shape[0]
    _, _, vt = np.linalg.svd(tau.reshape(1, -1))
    basis = vt[1:].T  # columns span the kernel
    # deterministic signs: first nonzero entry of each column positive
    for j in range(basis.shape[1]):
        col = basis[:, j]
        nz = np.nonzero(np.abs(col) > 1e-13)[0]
        if len(nz) and col[nz[0]] < 0:
            basis[:, j] = -col
    return basis


class NewtonSpaceTime:
    """Affine space-time with a clock covector and a spatial metric.

    Events live in an affine space of dimension ``d + 1``; the covector
    ``tau`` measures time intervals between events, the symmetric
    positive-definite metric ``g`` measures distances on the spatial
    subspace (the kernel of ``tau``), and velocities of observers and
    particles sit on the level-1 set of ``tau``.
    """

    def __init__(self, d: int = 3, tau=None, g=None):
        self.d = d
        self.tau = np.array(tau if tau is not None
                            else np.eye(d + 1)[d], dtype=float)
        if self.tau.shape != (d + 1,):
            raise MechanicsError("clock covector has wrong length")
        if np.linalg.norm(self.tau) == 0.0:
            raise MechanicsError("clock covector must be nonzero")
        self.g = np.array(g if g is not None else np.eye(d), dtype=float)
        if self.g.shape != (d, d) or np.max(np.abs(self.g - self.g.T)) > 1e-12:
            raise MechanicsError("metric must be a symmetric d x d matrix")
        try:
            np.linalg.cholesky(self.g)
        except np.linalg.LinAlgError:
            raise MechanicsError("metric must be positive definite") from None
        self.g_inv = np.linalg.inv(self.g)
        canonical = np.allclose(self.tau, np.eye(d + 1)[d])
        if canonical:
            self.spatial_basis = np.eye(d + 1)[:, :d]
        else:
            self.spatial_basis = _nullspace_basis(self.tau)
        self._spatial_proj = np.linalg.pinv(self.spatial_basis)

    def time_of(self, v) -> float:
        return float(self.tau @ np.asarray(v, float))

    def interval(self, x1, x2) -> float:
        """Time elapsed from the first event to the second."""
        return self.time_of(np.asarray(x2, float) - np.asarray(x1, float))

    def spatial_vector(self, components) -> np.ndarray:
        return self.spatial_basis @ np.asarray(components, float)

    def spatial_components(self, v) -> np.ndarray:
        v = np.asarray(v, float)
        if abs(self.time_of(v)) > 1e-9:
            raise MechanicsError("vector is not spatial")
        return self._spatial_proj @ v

    def frame(self, u) -> "InertialFrame":
        return InertialFrame(self, np.asarray(u, float))

    def rest_frame(self) -> "InertialFrame":
        """The frame defined by the clock covector itself."""
        u = self.tau / float(self.tau @ self.tau)
        return InertialFrame(self, u)

    def split_velocity(self, v, frame: "InertialFrame"):
        """Split a model vector into (spatial part, time component)."""
        v = np.asarray(v, float)
        dt = self.time_of(v)
        return v - dt * frame.u, dt


@dataclass(frozen=True)
class InertialFrame:
    spacetime: NewtonSpaceTime
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, float)
        object.__setattr__(self, "u", u)
        if abs(self.spacetime.time_of(u) - 1.0) > 1e-12:
            raise MechanicsError("frame velocity must have unit clock rate")

    def boosted(self, v_components) -> "InertialFrame":
        shift = self.spacetime.spatial_vector(v_components)
        return InertialFrame(self.spacetime, self.u + shift)


@dataclass(frozen=True)
class ObservedPhase:
    """Event, spatial momentum, action coordinate, and the frame tag."""

    x: np.ndarray
    p: np.ndarray
    s: float
    frame: InertialFrame

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, float))
        object.__setattr__(self, "p", np.asarray(self.p, float))
        object.__setattr__(self, "s", float(self.s))


def _spatial_comps(st: NewtonSpaceTime, v) -> np.ndarray:
    v = np.asarray(v, float)
    if v.shape == (st.d,):
        return v
    if v.shape == (st.d + 1,):
        return st.spatial_components(v)
    raise MechanicsError("boost velocity has wrong length")


def gauge_transform(phase: ObservedPhase, v, m: float) -> ObservedPhase:
    """Re-express an observed phase in the frame boosted by ``v``.

    The event is untouched; momentum and the action coordinate follow
    the kinematic convention stated in the module docstring, under
    which boosting by ``v`` and back by ``-v`` restores the phase and
    boosts compose additively.
    """
    if m <= 0:
        raise MechanicsError("mass must be positive")
    st = phase.frame.spacetime
    c = _spatial_comps(st, v)
    gv = st.g @ c
    p_new = phase.p - m * gv
    s_new = phase.s - float(phase.p @ c) + 0.5 * m * float(gv @ c)
    return ObservedPhase(phase.x, p_new, s_new, phase.frame.boosted(c))


@dataclass(frozen=True)
class ObserverSplit:
    """Origin event plus a frame, splitting space-time into space x time."""

    spacetime: NewtonSpaceTime
    x0: np.ndarray
    frame: InertialFrame

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, float))

    @classmethod
    def default(cls, st: NewtonSpaceTime) -> "ObserverSplit":
        return cls(st, np.zeros(st.d + 1), st.rest_frame())

    def coordinates(self, x) -> tuple[np.ndarray, float]:
        """Observer coordinates (q, t) of an event."""
        rel = np.asarray(x, float) - self.x0
        t = self.spacetime.time_of(rel)
        q = self.spacetime._spatial_proj @ (rel - t * self.frame.u)
        return q, t

    def event(self, q, t: float) -> np.ndarray:
        return (self.x0 + self.spacetime.spatial_vector(q)
                + float(t) * self.frame.u)


class NewtonField:
    """Observed dynamics in event form: state is (event, momentum).

    The event velocity is ``g^{-1}(p)/m + u`` (so its clock rate is one
    identically) and the force is minus the spatial gradient of the
    potential, read through a fixed observer split that belongs to the
    system, not to the integration frame.
    """

    def __init__(self, st: NewtonSpaceTime, frame: InertialFrame, m: float,
                 phi: Expression, split: ObserverSplit | None = None,
                 q_names=None, time: str = "t"):
        if m <= 0:
            raise MechanicsError("mass must be positive")
        self.st = st
        self.frame = frame
        self.m = float(m)
        self.split = split or ObserverSplit.default(st)
        self.q_names = tuple(q_names or (f"q{i + 1}" for i in range(st.d)))
        self.time = time
        allowed = set(self.q_names) | {time}
        extraneous = se.free_vars(phi) - allowed
        if extraneous:
            raise MechanicsError(
                f"potential uses unknown variables {sorted(extraneous)}")
        self.phi = phi
        order = self.q_names + (time,)
        self._grad = se.compile_fn(
            [se.differentiate(phi, q) for q in self.q_names], order)
        self.names = tuple(f"x{i + 1}" for i in range(st.d + 1)) \
            + tuple(f"p{i + 1}" for i in range(st.d))

    def __call__(self, state: np.ndarray) -> np.ndarray:
        st = self.st
        x = state[:st.d + 1]
        p = state[st.d + 1:]
        xdot = st.spatial_basis @ (st.g_inv @ p) / self.m + self.frame.u
        q, t = self.split.coordinates(x)
        pdot = -np.array(self._grad([*q, t]))
        return np.concatenate([xdot, pdot])

    def initial_state(self, phase: ObservedPhase) -> np.ndarray:
        return np.concatenate([phase.x, phase.p])

    def event_of(self, state: np.ndarray) -> np.ndarray:
        return state[:self.st.d + 1]

    @property
    def event_names(self) -> tuple[str, ...]:
        return tuple(f"x{i + 1}" for i in range(self.st.d + 1))


def newton_dynamics(st: NewtonSpaceTime, frame: InertialFrame, m: float,
                    phi: Expression,
                    split: ObserverSplit | None = None) -> NewtonField:
    return NewtonField(st, frame, m, phi, split)


def observed_hamiltonian(fld: NewtonField):
    """Energy function of the observed dynamics, as a state callable."""
    st = fld.st
    phi_fn = se.compile_fn([fld.phi], fld.q_names + (fld.time,))

    def energy(state: np.ndarray) -> float:
        p = state[st.d + 1:]
        q, t = fld.split.coordinates(state[:st.d + 1])
        return float(p @ st.g_inv @ p) / (2.0 * fld.m) + phi_fn([*q, t])[0]

    return energy


def tau_clock_residual(fld: NewtonField, traj: Trajectory) -> float:
    """Worst deviation of the clock rate of the event velocity from one."""
    worst = 0.0
    for state in traj.states:
        rate = fld.st.time_of(fld(state)[:fld.st.d + 1])
        worst = max(worst, abs(rate - 1.0))
    return worst


@dataclass
class FrameComparison:
    scenario: str
    frames: tuple[list[float], list[float]]
    max_deviation: float
    passed: bool
    trajectories: tuple[Trajectory, Trajectory]

    def to_dict(self) -> dict:
        return {"scenario": self.scenario, "frames": list(self.frames),
                "max_deviation": self.max_deviation, "pass": self.passed}


def compare_frames(st: NewtonSpaceTime, m: float, phi: Expression,
                   initial: ObservedPhase, v, h: float, T: float,
                   split: ObserverSplit | None = None,
                   tol: float = 1e-6, scenario: str = "") -> FrameComparison:
    """Integrate the same initial phase in a frame and its boost.

    The initial data for the second frame comes from the gauge
    transformation; world-lines are compared event by event in
    space-time coordinates, never in frame components, which is the
    form in which frame independence is literally true.
    """
    fld1 = newton_dynamics(st, initial.frame, m, phi, split)
    boosted = gauge_transform(initial, v, m)
    fld2 = newton_dynamics(st, boosted.frame, m, phi, split)
    t1 = integrate(fld1, fld1.initial_state(initial), h, T,
                   event_fn=fld1.event_of, event_names=fld1.event_names)
    t2 = integrate(fld2, fld2.initial_state(boosted), h, T,
                   event_fn=fld2.event_of, event_names=fld2.event_names)
    deviation = float(np.max(np.abs(t1.events - t2.events)))
    frames = ([float(x) for x in initial.frame.u],
              [float(x) for x in boosted.frame.u])
    return FrameComparison(scenario or "compare-frames", frames, deviation,
                           deviation < tol, (t1, t2))
