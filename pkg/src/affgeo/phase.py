"""Phase bundles of AV-bundles, differentials, and Poisson brackets.

An AV-bundle over a patch is presented in a reference trivialization:
the fiber coordinate is ``s`` and trivializing sections are registered
as expressions over the base.  Phase elements are kept in a fixed
trivialization with explicit retagging instead of as equivalence
classes; every statement of trivialization independence then becomes
an executable comparison between tags.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import symexpr as se
from .brackets import Patch
from .reporting import Report
from .symexpr import Expression

__all__ = [
    "AVBundle", "PhasePoint", "AffineOneForm", "TwoForm", "PhaseError",
    "FiberConstancyError", "bold_d", "section_one_form", "bold_d_oneform",
    "omega_Z", "canonical_poisson", "TimePhaseSpace", "eq1_aff_poisson",
    "AVMorphism", "check_affine_reduction", "sample_envs",
]


class PhaseError(ValueError):
    pass


class FiberConstancyError(PhaseError):
    """The would-be descended function varies along the quotient fibers."""


class AVBundle:
    """One-dimensional affine bundle over a patch, trivially presented.

    Registered sections are expressions over the base; the
    presentation's zero section is always registered under ``"zero"``
    and serves as the default tag.  The difference of two sections is
    a function on the base by construction.
    """

    def __init__(self, patch: Patch, s: str = "s"):
        if s in patch.names:
            raise PhaseError("fiber coordinate name collides with the base")
        self.patch = patch
        self.s = s
        self.sections: dict[str, Expression] = {}
        self.register("zero", se.Const(0.0))
        self.reference = "zero"

    def register(self, name: str, sigma) -> Expression:
        sigma = sigma if isinstance(sigma, Expression) else se.Const(float(sigma))
        extraneous = se.free_vars(sigma) - set(self.patch.names)
        if extraneous:
            raise PhaseError(f"section uses unknown variables {sorted(extraneous)}")
        self.sections[name] = sigma
        return sigma

    def section(self, sigma) -> Expression:
        """Resolve a section by name, or pass an expression through."""
        if isinstance(sigma, str):
            try:
                return self.sections[sigma]
            except KeyError:
                raise PhaseError(f"unknown section {sigma!r}") from None
        return sigma if isinstance(sigma, Expression) else se.Const(float(sigma))

    def gradient(self, sigma) -> list[Expression]:
        e = self.section(sigma)
        return [se.differentiate(e, n) for n in self.patch.names]


@dataclass(frozen=True)
class PhasePoint:
    """Covector with a base point, expressed relative to a section tag."""

    bundle: AVBundle
    tag: str
    x: np.ndarray
    p: np.ndarray

    def retag(self, new_tag: str) -> "PhasePoint":
        """Re-express in another trivialization; shifts by d(old - new)."""
        old = self.bundle.section(self.tag)
        new = self.bundle.section(new_tag)
        env = self.bundle.patch.env(self.x)
        shift = np.array([se.evaluate(se.differentiate(se.sub(old, new), n), env)
                          for n in self.bundle.patch.names])
        return PhasePoint(self.bundle, new_tag, self.x, self.p + shift)


def bold_d(bundle: AVBundle, sigma, m, tag: str | None = None) -> PhasePoint:
    """Differential of a section at a point, in the given tag.

    The covector is the ordinary differential of the difference between
    the section and the tag section; two sections with a constant
    difference give the same phase point everywhere.
    """
    tag = tag or bundle.reference
    diff = se.sub(bundle.section(sigma), bundle.section(tag))
    env = bundle.patch.env(m)
    p = np.array([se.evaluate(se.differentiate(diff, n), env)
                  for n in bundle.patch.names])
    return PhasePoint(bundle, tag, np.asarray(m, float), p)


@dataclass(frozen=True)
class AffineOneForm:
    """Section of the phase bundle: covector components plus a tag."""

    bundle: AVBundle
    tag: str
    components: tuple[Expression, ...]

    def retag(self, new_tag: str) -> "AffineOneForm":
        old = self.bundle.section(self.tag)
        new = self.bundle.section(new_tag)
        shift = se.sub(old, new)
        comps = tuple(se.add(c, se.differentiate(shift, n))
                      for c, n in zip(self.components, self.bundle.patch.names))
        return AffineOneForm(self.bundle, new_tag, comps)


def section_one_form(bundle: AVBundle, sigma, tag: str | None = None) -> AffineOneForm:
    """The differential of a section, as an affine 1-form."""
    tag = tag or bundle.reference
    diff = se.sub(bundle.section(sigma), bundle.section(tag))
    comps = tuple(se.differentiate(diff, n) for n in bundle.patch.names)
    return AffineOneForm(bundle, tag, comps)


class TwoForm:
    """Two-form with expression coefficients; antisymmetric by storage.

    Terms are kept for index pairs ``i < j`` over the coordinate list;
    the evaluated matrix is filled antisymmetrically.
    """

    def __init__(self, coords, terms: dict[tuple[int, int], Expression]):
        self.coords = tuple(coords)
        self.terms = {}
        for (i, j), coeff in terms.items():
            if i == j:
                raise PhaseError("diagonal two-form term")
            if i > j:
                i, j, coeff = j, i, se.neg(coeff)
            key = (i, j)
            if key in self.terms:
                self.terms[key] = se.add(self.terms[key], coeff)
            else:
                self.terms[key] = coeff

    def matrix(self, env: dict[str, float]) -> np.ndarray:
        n = len(self.coords)
        out = np.zeros((n, n))
        for (i, j), coeff in self.terms.items():
            value = se.evaluate(coeff, env)
            out[i, j] = value
            out[j, i] = -value
        return out

    def max_difference(self, other: "TwoForm", envs) -> float:
        if self.coords != other.coords:
            raise PhaseError("two-forms live in different coordinates")
        worst = 0.0
        for env in envs:
            worst = max(worst, float(np.max(np.abs(
                self.matrix(env) - other.matrix(env)))))
        return worst

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for (i, j), coeff in sorted(self.terms.items()):
            pieces.append(f"({se.to_text(coeff)}) d{self.coords[i]}^d{self.coords[j]}")
        return " + ".join(pieces)


def bold_d_oneform(alpha: AffineOneForm) -> TwoForm:
    """Differential of an affine 1-form: an ordinary two-form.

    The components already represent the difference against the tag
    section's differential, so the exterior derivative of the component
    covector field is the tag-independent answer (retagging shifts the
    components by an exact, hence closed, form).
    """
    names = alpha.bundle.patch.names
    terms = {}
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            coeff = se.sub(se.differentiate(alpha.components[j], names[i]),
                           se.differentiate(alpha.components[i], names[j]))
            terms[(i, j)] = coeff
    return TwoForm(names, terms)


def omega_Z(bundle: AVBundle, via: str | None = None,
            momentum_names: tuple[str, ...] | None = None) -> TwoForm:
    """Canonical symplectic form of the phase bundle, in tag coordinates.

    Computed as the pullback of the cotangent form ``sum dp_i ^ dx_i``
    through the trivialization induced by the section ``via``; the
    result is independent of that choice because the trivializations
    differ by translation by a closed form.
    """
    via = via or bundle.reference
    base = bundle.patch.names
    n = len(base)
    if momentum_names is None:
        momentum_names = tuple(f"p{i + 1}" for i in range(n))
    if set(momentum_names) & set(base):
        raise PhaseError("momentum names collide with base names")
    coords = base + momentum_names
    psi = se.sub(bundle.section(bundle.reference), bundle.section(via))
    phi = [se.differentiate(psi, nm) for nm in base]  # translation covector
    terms: dict[tuple[int, int], Expression] = {}
    for i in range(n):
        terms[(i, n + i)] = se.Const(-1.0)  # dp_i ^ dx_i = -(dx_i ^ dp_i)
    for i in range(n):
        for j in range(i + 1, n):
            coeff = se.sub(se.differentiate(phi[j], base[i]),
                           se.differentiate(phi[i], base[j]))
            terms[(i, j)] = coeff
    return TwoForm(coords, terms)


# ---------------------------------------------------------------------------
# Poisson brackets


def canonical_poisson(F: Expression, G: Expression, pairs) -> Expression:
    """Canonical bracket: sum over pairs of dF/dp dG/dx - dF/dx dG/dp.

    The sign is fixed so the bracket of a momentum with its coordinate
    is one, which is what makes the recovered time-dependent dynamics
    carry the unit time component.
    """
    if F == G:
        return se.Const(0.0)  # antisymmetry, decidable structurally
    out: Expression = se.Const(0.0)
    for x, p in pairs:
        out = se.add(out, se.sub(
            se.mul(se.differentiate(F, p), se.differentiate(G, x)),
            se.mul(se.differentiate(F, x), se.differentiate(G, p))))
    return out


def sample_envs(names, rng: np.random.Generator, count: int,
                low: float = -1.0, high: float = 1.0) -> list[dict[str, float]]:
    return [{n: float(rng.uniform(low, high)) for n in names}
            for _ in range(count)]


@dataclass(frozen=True)
class TimePhaseSpace:
    """Cotangent coordinates of a space-time split into space and time.

    Positions ``q`` plus the time variable, momenta ``p`` plus the
    energy variable conjugate to time.  The quotient along the energy
    direction is realized by dropping that coordinate.
    """

    q: tuple[str, ...]
    p: tuple[str, ...]
    time: str = "t"
    energy: str = "e"

    def __post_init__(self):
        if len(self.q) != len(self.p):
            raise PhaseError("need one momentum name per position name")

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return list(zip(self.q + (self.time,), self.p + (self.energy,)))

    @property
    def names(self) -> tuple[str, ...]:
        return self.q + (self.time,) + self.p + (self.energy,)

    @property
    def base_names(self) -> tuple[str, ...]:
        """Coordinates of the quotient: everything but the energy."""
        return self.q + (self.time,) + self.p

    def section_function(self, sigma: Expression) -> Expression:
        """The function ``energy - sigma`` attached to a section of the
        quotient projection."""
        return se.sub(se.Var(self.energy), sigma)


def eq1_aff_poisson(space: TimePhaseSpace, sigma: Expression,
                    sigma2: Expression,
                    rng: np.random.Generator | None = None,
                    n_samples: int = 16, tol: float = 1e-9) -> Expression:
    """Bracket of two sections of the energy-quotient projection.

    Computes the canonical bracket of the attached functions upstairs,
    verifies the result is constant along the quotient fibers, and
    returns the descended expression.
    """
    rng = rng or np.random.default_rng(0)
    F = space.section_function(sigma)
    G = space.section_function(sigma2)
    upstairs = canonical_poisson(F, G, space.pairs)
    variation = se.differentiate(upstairs, space.energy)
    worst = 0.0
    for env in sample_envs(space.names, rng, n_samples):
        worst = max(worst, abs(se.evaluate(variation, env)))
    if worst >= tol:
        raise FiberConstancyError(
            f"bracket varies along the energy direction (residual {worst:.3e})")
    return se.subst(upstairs, {space.energy: 0.0})


# ---------------------------------------------------------------------------
# Affine Poisson reduction


@dataclass(frozen=True)
class AVMorphism:
    """Fibration of AV-bundles in coordinates.

    ``base_map`` sends target base coordinates to expressions in the
    source base coordinates; ``fiber_expr`` gives the target fiber
    value as an expression in the source base coordinates and the
    source fiber variable ``fiber_var`` (affinely).
    """

    base_map: dict[str, Expression]
    fiber_expr: Expression
    fiber_var: str

    def pullback(self, sigma: Expression) -> Expression:
        """Pull a target section back to a source section.

        Solves the fiber equation for the source fiber value; the fiber
        part of the morphism must be affine with constant nonzero slope.
        """
        slope = se.differentiate(self.fiber_expr, self.fiber_var)
        if se.free_vars(slope):
            raise PhaseError("fiber map is not affine in the fiber variable")
        slope_value = se.evaluate(slope, {})
        if slope_value == 0.0:
            raise PhaseError("fiber map does not move the fiber")
        offset = se.subst(self.fiber_expr, {self.fiber_var: 0.0})
        target_value = se.subst(sigma, self.base_map)
        return se.div(se.sub(target_value, offset), se.Const(slope_value))

    def pullback_function(self, f: Expression) -> Expression:
        """Pull a function on the target base back along the base map."""
        return se.subst(f, self.base_map)


def check_affine_reduction(rho: AVMorphism, bracket_z, bracket_y,
                           section_pairs, envs, tol: float = 1e-9) -> Report:
    """Residual of the reduction identity at sample points.

    For every supplied pair of target sections, compares the source
    bracket of the pulled-back sections against the pullback of the
    target bracket.
    """
    report = Report("affine-reduction")
    worst, witness = 0.0, None
    for idx, (sigma, sigma2) in enumerate(section_pairs):
        lhs = bracket_z(rho.pullback(sigma), rho.pullback(sigma2))
        rhs = rho.pullback_function(bracket_y(sigma, sigma2))
        residual = se.sub(lhs, rhs)
        for env in envs:
            r = abs(se.evaluate(residual, env))
            if r > worst:
                worst = r
                witness = {"pair": idx, "point": dict(env), "residual": r}
    report.add("reduction_identity", worst < tol, worst,
               witness if worst >= tol else None)
    return report
