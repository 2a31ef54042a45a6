"""Bracket structures on affine spaces and affine bundles.

The data of a bracket is stored relative to a reference section ``a0``
and a model frame ``v_1 .. v_n``:

* ``beta_i``  -- components of the mixed bracket of ``a0`` with ``v_i``,
* ``c_ij``    -- components of the model bracket of ``v_i`` with ``v_j``
  (antisymmetric in ``i j``),
* an anchor, given by the vector field attached to ``a0`` and the
  vector fields attached to the frame sections.

The bracket of two sections ``a0 + f^i v_i`` and ``a0 + g^j v_j`` is
then evaluated through the expansion that bi-affinity, skew-symmetry
and the Leibniz rule force:

    (g^j - f^j) beta_j + rho(a0)(g^j - f^j) v_j + f^i g^j c_ij
        + f^i rho(v_i)(g^j) v_j - g^j rho(v_j)(f^i) v_i

Over a point all derivative terms vanish and the expansion reduces to
``D(w - u) + c(u, w)`` with ``D`` the matrix of the ``beta``'s.

Verification is exact where exactness is free: the axioms of a bracket
over a point are affine in each slot, so they hold identically iff they
hold on the finite set of reference-plus-basis points, which the
verifier enumerates.  Bundle checks sample instead, since coefficients
are arbitrary expressions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import symexpr as se
from .affine import AffineSpaceSpec
from .duality import SpecialAffineSpace, SpecialDualSpace, iota_sharp, special_dual
from .reporting import Report
from .symexpr import Expression

__all__ = [
    "BracketError", "NonAffineSectionError", "Patch", "random_polynomial",
    "LieAffgebraData", "LieAffgebroidData", "HullAlgebroidData",
    "bracket", "verify_affgebra", "verify_affgebroid", "hull_extend",
    "AffJacobiBracket", "aff_jacobi_bracket", "is_aff_poisson",
    "AffPoissonResult", "atiyah_algebroid", "affgebra_to_affgebroid",
    "jet_bundle_affgebroid",
]

JACOBI_TOL = 1e-9      # symbolic derivatives, float evaluation only
CENTRALITY_TOL = 1e-12


class BracketError(ValueError):
    """Malformed bracket data or failed construction-time verification."""


class NonAffineSectionError(BracketError):
    """A section that had to be affine in the fiber coordinates is not."""


# ---------------------------------------------------------------------------
# Base patches and random coefficient functions


@dataclass(frozen=True)
class Patch:
    """Open box in R^m used as the base of a bundle."""

    names: tuple[str, ...] = ()
    lows: tuple[float, ...] = ()
    highs: tuple[float, ...] = ()

    @classmethod
    def box(cls, names, low=-1.0, high=1.0) -> "Patch":
        names = tuple(names)
        return cls(names, (low,) * len(names), (high,) * len(names))

    @property
    def dim(self) -> int:
        return len(self.names)

    def context(self) -> se.VarContext:
        return se.VarContext.make(base=self.names)

    def env(self, point) -> dict[str, float]:
        return dict(zip(self.names, np.atleast_1d(np.asarray(point, float))))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((count, 0))
        return rng.uniform(self.lows, self.highs, size=(count, self.dim))

    def grid(self, per_axis: int) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((1, 0))
        axes = [np.linspace(lo, hi, per_axis)
                for lo, hi in zip(self.lows, self.highs)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def random_polynomial(patch: Patch, rng: np.random.Generator,
                      degree: int = 2) -> Expression:
    """Random polynomial over the patch coordinates, coefficients in [-1, 1]."""
    expr: Expression = se.Const(rng.uniform(-1.0, 1.0))
    vars_ = [se.Var(n) for n in patch.names]
    for v in vars_:
        expr = expr + se.Const(rng.uniform(-1.0, 1.0)) * v
    if degree >= 2:
        for va, vb in itertools.combinations_with_replacement(vars_, 2):
            expr = expr + se.Const(rng.uniform(-1.0, 1.0)) * va * vb
    return expr


def _coerce_section(components, n: int) -> list[Expression]:
    comps = [c if isinstance(c, Expression) else se.Const(float(c))
             for c in components]
    if len(comps) != n:
        raise BracketError(f"expected {n} section components, got {len(comps)}")
    return comps


# ---------------------------------------------------------------------------
# Brackets over a point


class LieAffgebraData:
    """Bracket data over a point: matrix ``D`` and constants ``c``.

    ``D`` houses the mixed bracket of the reference element with model
    vectors; ``c[i, j]`` the model bracket of the i-th and j-th basis
    vectors.  ``c`` must be antisymmetric in ``(i, j)``, which already
    forces the reconstructed bracket to be skew.
    """

    def __init__(self, D, c, v=None):
        self.D = np.array(D, dtype=float)
        self.c = np.array(c, dtype=float)
        n = self.D.shape[0]
        if self.D.shape != (n, n) or self.c.shape != (n, n, n):
            raise BracketError("inconsistent bracket data shapes")
        if np.max(np.abs(self.c + self.c.transpose(1, 0, 2))) > 1e-15:
            raise BracketError("structure constants are not antisymmetric")
        self.n = n
        self.v = None if v is None else np.array(v, dtype=float)

    def bracket(self, u, w) -> np.ndarray:
        """Full bracket of ``o + u`` with ``o + w``."""
        u = np.asarray(u, float)
        w = np.asarray(w, float)
        return self.D @ (w - u) + np.einsum("ijk,i,j->k", self.c, u, w)

    def second_linear(self, u, W) -> np.ndarray:
        """Second-slot linear part: bracket of ``o + u`` against model ``W``."""
        u = np.asarray(u, float)
        W = np.asarray(W, float)
        return self.D @ W + np.einsum("ijk,i,j->k", self.c, u, W)


def verify_affgebra(data: LieAffgebraData) -> Report:
    """Exact axiom check by enumeration of reference-plus-basis points.

    Skew-symmetry and the Jacobi identity are affine in each argument,
    so each holds identically iff it holds with every argument drawn
    from the origin and the basis translates; the verifier enumerates
    that cube and reports the worst residual with a witness.
    """
    n = data.n
    tol = 1e-12  # enumeration is exhaustive; the threshold only absorbs roundoff
    report = Report("affgebra")
    points = [np.zeros(n)] + [e for e in np.eye(n)]
    labels = ["o"] + [f"o+e{i + 1}" for i in range(n)]

    worst, witness = 0.0, None
    for (la, ua), (lb, ub) in itertools.product(zip(labels, points), repeat=2):
        r = float(np.max(np.abs(data.bracket(ua, ub) + data.bracket(ub, ua))))
        if r > worst:
            worst, witness = r, {"pair": [la, lb], "residual": r}
    report.add("skew", worst <= tol, worst, witness if worst > tol else None)

    worst, witness = 0.0, None
    for (l1, u1), (l2, u2), (l3, u3) in itertools.product(
            zip(labels, points), repeat=3):
        total = (data.second_linear(u1, data.bracket(u2, u3))
                 + data.second_linear(u2, data.bracket(u3, u1))
                 + data.second_linear(u3, data.bracket(u1, u2)))
        r = float(np.max(np.abs(total)))
        if r > worst:
            worst, witness = r, {"triple": [l1, l2, l3], "residual": r}
    report.add("jacobi", worst <= tol, worst, witness if worst > tol else None)
    return report


# ---------------------------------------------------------------------------
# Brackets over a patch


class LieAffgebroidData:
    """Bracket and anchor data on an affine bundle over a patch.

    ``beta[i]`` and ``c[i][j]`` are length-``rank`` lists of expressions
    over the base; ``anchor_ref`` and ``anchor_lin[i]`` are vector
    fields on the base (components over the patch coordinates).  The
    optional ``v`` marks a distinguished model section (constant frame
    coefficients), making the bundle special.  ``bracket_fn``, when
    given, replaces the structure-function expansion as the bracket
    backend; verification then genuinely tests it against the anchor.
    """

    def __init__(self, patch: Patch, rank: int, beta, c, anchor_ref,
                 anchor_lin, v=None, bracket_fn=None):
        self.patch = patch
        self.rank = rank
        self.beta = [_coerce_section(b, rank) for b in beta]
        if len(self.beta) != rank:
            raise BracketError("beta must have one entry per frame section")
        self.c = [[_coerce_section(cij, rank) for cij in row] for row in c]
        if len(self.c) != rank or any(len(row) != rank for row in self.c):
            raise BracketError("c must be rank x rank")
        self.anchor_ref = _coerce_section(anchor_ref, patch.dim)
        self.anchor_lin = [_coerce_section(a, patch.dim) for a in anchor_lin]
        if len(self.anchor_lin) != rank:
            raise BracketError("anchor_lin must have one entry per frame section")
        self.v = None if v is None else np.array(v, dtype=float)
        if self.v is not None and self.v.shape != (rank,):
            raise BracketError("distinguished section has wrong length")
        self.bracket_fn = bracket_fn
        self._check_antisymmetry()

    def _check_antisymmetry(self):
        pts = self.patch.grid(3)
        for i in range(self.rank):
            for j in range(self.rank):
                for k in range(self.rank):
                    s = self.c[i][j][k] + self.c[j][i][k]
                    for p in pts:
                        if abs(se.evaluate(s, self.patch.env(p))) > 1e-12:
                            raise BracketError(
                                f"structure functions not antisymmetric at "
                                f"(i={i}, j={j}, k={k})")

    # -- anchor ------------------------------------------------------------

    def anchor_of(self, f) -> list[Expression]:
        """Vector field of the section ``a0 + f^i v_i``."""
        f = _coerce_section(f, self.rank)
        comps = list(self.anchor_ref)
        for i in range(self.rank):
            comps = [se.add(ca, se.mul(f[i], li))
                     for ca, li in zip(comps, self.anchor_lin[i])]
        return comps

    def anchor_model(self, W) -> list[Expression]:
        """Vector field of the model section ``W^i v_i``."""
        W = _coerce_section(W, self.rank)
        comps = [se.Const(0.0)] * self.patch.dim
        for i in range(self.rank):
            comps = [se.add(ca, se.mul(W[i], li))
                     for ca, li in zip(comps, self.anchor_lin[i])]
        return comps

    def apply_field(self, field, func: Expression) -> Expression:
        """Derivative of ``func`` along a base vector field."""
        out: Expression = se.Const(0.0)
        for comp, name in zip(field, self.patch.names):
            out = se.add(out, se.mul(comp, se.differentiate(func, name)))
        return out

    # -- bracket -----------------------------------------------------------

    def bracket(self, f, g) -> list[Expression]:
        """Bracket of the sections ``a0 + f`` and ``a0 + g``."""
        f = _coerce_section(f, self.rank)
        g = _coerce_section(g, self.rank)
        if self.bracket_fn is not None:
            return _coerce_section(self.bracket_fn(f, g), self.rank)
        return self._expansion(f, g)

    def _expansion(self, f, g) -> list[Expression]:
        n = self.rank
        rho0 = self.anchor_ref
        out: list[Expression] = []
        for k in range(n):
            term: Expression = se.Const(0.0)
            for j in range(n):
                term = se.add(term, se.mul(se.sub(g[j], f[j]), self.beta[j][k]))
            term = se.add(term, self.apply_field(rho0, se.sub(g[k], f[k])))
            for i in range(n):
                for j in range(n):
                    term = se.add(term, se.mul(se.mul(f[i], g[j]), self.c[i][j][k]))
            for i in range(n):
                term = se.add(term, se.mul(
                    f[i], self.apply_field(self.anchor_lin[i], g[k])))
            for j in range(n):
                term = se.sub(term, se.mul(
                    g[j], self.apply_field(self.anchor_lin[j], f[k])))
            out.append(term)
        return out

    def second_linear(self, f, W) -> list[Expression]:
        """Second-slot linear part: bracket of ``a0 + f`` against model ``W``.

        Computed as a bracket difference when a custom backend is
        installed, directly from the expansion otherwise.
        """
        f = _coerce_section(f, self.rank)
        W = _coerce_section(W, self.rank)
        if self.bracket_fn is not None:
            zero = [se.Const(0.0)] * self.rank
            plus = self.bracket(f, [se.add(a, b) for a, b in zip(zero, W)])
            base = self.bracket(f, zero)
            return [se.sub(a, b) for a, b in zip(plus, base)]
        n = self.rank
        out: list[Expression] = []
        for k in range(n):
            term: Expression = se.Const(0.0)
            for j in range(n):
                term = se.add(term, se.mul(W[j], self.beta[j][k]))
            term = se.add(term, self.apply_field(self.anchor_ref, W[k]))
            for i in range(n):
                for j in range(n):
                    term = se.add(term, se.mul(se.mul(f[i], W[j]), self.c[i][j][k]))
            for i in range(n):
                term = se.add(term, se.mul(
                    f[i], self.apply_field(self.anchor_lin[i], W[k])))
            for j in range(n):
                term = se.sub(term, se.mul(
                    W[j], self.apply_field(self.anchor_lin[j], f[k])))
            out.append(term)
        return out

    # -- helpers -----------------------------------------------------------

    def special_space(self) -> SpecialAffineSpace:
        if self.v is None:
            raise BracketError("no distinguished section on this bundle")
        return SpecialAffineSpace(AffineSpaceSpec(self.rank), self.v)

    def eval_section(self, comps, point) -> np.ndarray:
        env = self.patch.env(point)
        return np.array([se.evaluate(cp, env) for cp in comps])


def bracket(data, a, b):
    """Bracket of two sections: numeric over a point, symbolic over a patch.

    ``data`` is either bracket data over a point (arguments are
    coordinate arrays) or over a patch (arguments are coefficient
    expressions relative to the frame).
    """
    return data.bracket(a, b)


def _max_abs(data: LieAffgebroidData, comps, points) -> tuple[float, dict | None]:
    worst, witness = 0.0, None
    for p in points:
        vals = data.eval_section(comps, p)
        r = float(np.max(np.abs(vals))) if len(vals) else 0.0
        if r > worst:
            worst = r
            witness = {"point": [float(x) for x in np.atleast_1d(p)],
                       "residual": r}
    return worst, witness


def _random_sections(data: LieAffgebroidData, rng, count: int):
    return [[random_polynomial(data.patch, rng) for _ in range(data.rank)]
            for _ in range(count)]


def verify_affgebroid(data: LieAffgebroidData, sample_points,
                      rng: np.random.Generator | None = None,
                      tol: float = JACOBI_TOL) -> Report:
    """Sampled axiom verification: skew, Jacobi, Leibniz, anchor morphism.

    Coefficients of the probe sections are random polynomials; all
    checks evaluate symbolic residuals at the supplied base points.
    """
    rng = rng or np.random.default_rng(0)
    pts = np.asarray(sample_points, float)
    report = Report("affgebroid")

    secs = _random_sections(data, rng, 3)

    worst, witness = 0.0, None
    for f in secs:
        w, wit = _max_abs(data, data.bracket(f, f), pts)
        if w > worst:
            worst, witness = w, wit
    report.add("skew", worst < tol, worst, witness if worst >= tol else None)

    worst, witness = 0.0, None
    f1, f2, f3 = secs
    cyc = [(f1, f2, f3), (f2, f3, f1), (f3, f1, f2)]
    total = [se.Const(0.0)] * data.rank
    for a, b, cthird in cyc:
        inner = data.bracket(b, cthird)
        outer = data.second_linear(a, inner)
        total = [se.add(t, o) for t, o in zip(total, outer)]
    worst, witness = _max_abs(data, total, pts)
    report.add("jacobi", worst < tol, worst, witness if worst >= tol else None)

    # Leibniz: bracket of a section against (coefficient * frame section)
    worst, witness = 0.0, None
    f = secs[0]
    for i in range(data.rank):
        coeff = random_polynomial(data.patch, rng)
        unit = [se.Const(1.0) if j == i else se.Const(0.0)
                for j in range(data.rank)]
        scaled = [se.mul(coeff, u) for u in unit]
        lhs = data.second_linear(f, scaled)
        base = data.second_linear(f, unit)
        rho_f = data.anchor_of(f)
        deriv = data.apply_field(rho_f, coeff)
        rhs = [se.add(se.mul(coeff, b), se.mul(deriv, u))
               for b, u in zip(base, unit)]
        residual = [se.sub(a, b) for a, b in zip(lhs, rhs)]
        w, wit = _max_abs(data, residual, pts)
        if w > worst:
            worst, witness = w, (dict(wit, frame=i) if wit else None)
    report.add("leibniz", worst < tol, worst, witness if worst >= tol else None)

    # anchor morphism: anchor of a bracket is the commutator of anchors
    worst, witness = 0.0, None
    for f, g in [(f1, f2), (f2, f3)]:
        br = data.bracket(f, g)
        lhs = data.anchor_model(br)
        X, Y = data.anchor_of(f), data.anchor_of(g)
        comm = [se.sub(data.apply_field(X, Y[a]), data.apply_field(Y, X[a]))
                for a in range(data.patch.dim)]
        residual = [se.sub(a, b) for a, b in zip(lhs, comm)]
        for p in pts:
            env = data.patch.env(p)
            r = max((abs(se.evaluate(rr, env)) for rr in residual), default=0.0)
            if r > worst:
                worst = r
                witness = {"point": [float(x) for x in np.atleast_1d(p)],
                           "residual": r}
    report.add("anchor_morphism", worst < tol, worst,
               witness if worst >= tol else None)
    return report


# ---------------------------------------------------------------------------
# The hull extension


class HullAlgebroidData:
    """Bracket on sections of the vector hull, extending bundle data.

    Sections are pairs ``(h, comps)``: the weight function (coefficient
    of the embedded reference section) and the model components.  The
    weight-1 slice reproduces the input bracket; the weight function of
    any bracket obeys the closed-cocycle identity of the distinguished
    dual section.
    """

    def __init__(self, data: LieAffgebroidData):
        self.data = data

    def anchor(self, h, comps) -> list[Expression]:
        h = h if isinstance(h, Expression) else se.Const(float(h))
        comps = _coerce_section(comps, self.data.rank)
        out = [se.mul(h, a) for a in self.data.anchor_ref]
        for i in range(self.data.rank):
            out = [se.add(o, se.mul(comps[i], li))
                   for o, li in zip(out, self.data.anchor_lin[i])]
        return out

    def bracket(self, X, Y) -> tuple[Expression, list[Expression]]:
        h, f = X
        h2, g = Y
        h = h if isinstance(h, Expression) else se.Const(float(h))
        h2 = h2 if isinstance(h2, Expression) else se.Const(float(h2))
        f = _coerce_section(f, self.data.rank)
        g = _coerce_section(g, self.data.rank)
        data = self.data
        rho_X = self.anchor(h, f)
        rho_Y = self.anchor(h2, g)
        weight = se.sub(data.apply_field(rho_X, h2), data.apply_field(rho_Y, h))
        comps: list[Expression] = []
        for k in range(data.rank):
            term: Expression = se.Const(0.0)
            for j in range(data.rank):
                term = se.add(term, se.mul(se.sub(se.mul(h, g[j]), se.mul(h2, f[j])),
                                           data.beta[j][k]))
            for i in range(data.rank):
                for j in range(data.rank):
                    term = se.add(term, se.mul(se.mul(f[i], g[j]), data.c[i][j][k]))
            term = se.add(term, data.apply_field(rho_X, g[k]))
            term = se.sub(term, data.apply_field(rho_Y, f[k]))
            comps.append(term)
        return weight, comps

    def one_cocycle_residual(self, X, Y) -> Expression:
        """Pairing of the distinguished dual section with the exterior
        derivative identity: anchor derivatives of the weights minus the
        weight of the bracket.  Identically zero for a closed one-form.
        """
        h, f = X
        h2, g = Y
        weight, _ = self.bracket(X, Y)
        lhs = se.sub(self.data.apply_field(self.anchor(h, f), _as_expr(h2)),
                     self.data.apply_field(self.anchor(h2, g), _as_expr(h)))
        return se.sub(lhs, weight)


def _as_expr(x) -> Expression:
    return x if isinstance(x, Expression) else se.Const(float(x))


def hull_extend(data: LieAffgebroidData,
                sample_points=None,
                rng: np.random.Generator | None = None) -> HullAlgebroidData:
    """Extend bundle bracket data to the vector hull.

    The input is verified first; extension of an invalid structure is
    refused.
    """
    rng = rng or np.random.default_rng(0)
    pts = sample_points if sample_points is not None else data.patch.grid(3)
    report = verify_affgebroid(data, pts, rng=rng)
    if not report.passed:
        failing = [c.check for c in report.checks if not c.passed]
        raise BracketError(f"input verification failed: {', '.join(failing)}")
    return HullAlgebroidData(data)


# ---------------------------------------------------------------------------
# Dual-side correspondence: aff-Jacobi brackets from bundle brackets


def _affine_w_coefficients(sigma: Expression, names) -> tuple[list[Expression], Expression]:
    """Split an expression affine in the ``w`` coordinates into
    (linear coefficients, value at w = 0)."""
    coeffs = []
    for name in names:
        d = se.differentiate(sigma, name)
        if se.free_vars(d) & set(names):
            raise NonAffineSectionError(
                f"section is not affine in the fiber coordinate {name!r}")
        coeffs.append(d)
    zero = {name: 0.0 for name in names}
    return coeffs, se.subst(sigma, zero)


def _dual_quotient(data: LieAffgebroidData) -> SpecialDualSpace:
    return special_dual(data.special_space())


def section_for_dual_function(data: LieAffgebroidData,
                              sigma: Expression) -> list[Expression]:
    """Section of the bundle corresponding to an affine function on the
    quotient of its special dual (the F identification, dual side)."""
    sd = _dual_quotient(data)
    names = sd.quotient_var_names()
    if set(names) & set(data.patch.names):
        raise BracketError("quotient coordinate names collide with base names")
    coeffs, const = _affine_w_coefficients(sigma, names)
    v = data.v
    comps: list[Expression] = [se.Const(0.0)] * data.rank
    for j, cj in zip(sd.free_indices, coeffs):
        comps[j] = se.neg(cj)
    for j in range(data.rank):
        comps[j] = se.sub(comps[j], se.mul(const, se.Const(v[j])))
    return comps


def aff_jacobi_bracket(data: LieAffgebroidData, sigma: Expression,
                       sigma2: Expression) -> Expression:
    """Bracket of two affine sections of the dual AV-bundle.

    Both sections are translated to bundle sections, bracketed there,
    and the result is pushed back down to a function on the quotient of
    the special dual.
    """
    sd = _dual_quotient(data)
    a = section_for_dual_function(data, sigma)
    b = section_for_dual_function(data, sigma2)
    return iota_sharp(data.bracket(a, b), sd)


class AffJacobiBracket:
    """The dual-side bracket of a special bundle, as a reusable object.

    Callable on pairs of affine sections (expressions in the base and
    quotient coordinates); the value is a function on the base of the
    dual AV-bundle, well defined on the quotient by construction.
    """

    def __init__(self, data: LieAffgebroidData):
        if data.v is None:
            raise BracketError("dual bracket needs a distinguished section")
        self.data = data
        self._sd = _dual_quotient(data)

    @property
    def quotient_names(self) -> tuple[str, ...]:
        return self._sd.quotient_var_names()

    @property
    def base_names(self) -> tuple[str, ...]:
        """Coordinates of the dual AV-bundle's base."""
        return self.data.patch.names + self.quotient_names

    def __call__(self, sigma: Expression, sigma2: Expression) -> Expression:
        return aff_jacobi_bracket(self.data, sigma, sigma2)

    def hamiltonian_operator_of(self, sigma: Expression):
        """The partial map of the bracket at a fixed affine section.

        Returns a callable on affine functions of the quotient: the
        difference of bracket values across a shift of the second slot,
        which by bi-affinity does not depend on the reference section
        chosen (the zero section here).  This is the first-order
        operator whose derivation property the aff-Poisson criterion
        tests.
        """
        reference = se.Const(0.0)

        def operator(f: Expression) -> Expression:
            return se.sub(self(sigma, se.add(reference, f)),
                          self(sigma, reference))

        return operator


@dataclass
class AffPoissonResult:
    is_poisson: bool
    derivation_ok: bool
    centrality_ok: bool
    derivation_residual: float
    centrality_residual: float
    witness: dict | None = None

    @property
    def criteria_agree(self) -> bool:
        return self.derivation_ok == self.centrality_ok

    def __bool__(self) -> bool:
        return self.is_poisson


def is_aff_poisson(data: LieAffgebroidData,
                   rng: np.random.Generator | None = None,
                   sample_points=None,
                   tol: float = JACOBI_TOL) -> AffPoissonResult:
    """Decide whether the induced dual bracket is aff-Poisson.

    Two independent criteria are evaluated and compared:

    * derivation test: the partial map of the bracket is always a
      first-order operator ``f -> V(f) + lam*f``; it is a derivation
      iff the zero-order term ``lam`` (the bracket applied to the
      constant section 1) vanishes.  The reported residual is the
      Leibniz defect on a product of two affine coordinate functions,
      which for a first-order operator equals ``-lam * f * g``.
    * centrality test: the distinguished section commutes with the
      frame in the hull and is killed by the anchor.
    """
    rng = rng or np.random.default_rng(0)
    sd = _dual_quotient(data)
    names = sd.quotient_var_names()
    pts = (np.asarray(sample_points, float) if sample_points is not None
           else data.patch.sample(rng, 8))

    # derivation side: lam = {sigma, sigma' + 1} - {sigma, sigma'}
    worst_d, witness = 0.0, None
    for _ in range(3):
        sigma = se.Const(rng.uniform(-1, 1))
        for name in names:
            sigma = sigma + se.Const(rng.uniform(-1, 1)) * se.Var(name)
        sigma2 = se.Const(rng.uniform(-1, 1))
        lam = se.sub(aff_jacobi_bracket(data, sigma, sigma2 + 1.0),
                     aff_jacobi_bracket(data, sigma, sigma2))
        f = se.Var(names[0]) if names else se.Const(1.0)
        g = (se.Var(data.patch.names[0]) if data.patch.dim else se.Const(1.0))
        defect = se.mul(lam, se.mul(f, g))
        for p in pts:
            env = data.patch.env(p)
            env.update({n: rng.uniform(-2, 2) for n in names})
            r = abs(se.evaluate(defect, env))
            if r > worst_d:
                worst_d = r
                witness = {"point": dict(env), "residual": r}
    derivation_ok = worst_d < tol

    # centrality side: hull brackets of v against the frame, and the anchor
    worst_c = 0.0
    hull = HullAlgebroidData(data)
    v_sec = (se.Const(0.0), [se.Const(float(x)) for x in data.v])
    frame = [(se.Const(1.0), [se.Const(0.0)] * data.rank)]
    for i in range(data.rank):
        comps = [se.Const(1.0) if j == i else se.Const(0.0)
                 for j in range(data.rank)]
        frame.append((se.Const(0.0), comps))
    for X in frame:
        weight, comps = hull.bracket(v_sec, X)
        w, _ = _max_abs(data, [weight] + comps, pts)
        worst_c = max(worst_c, w)
    w, _ = _max_abs(data, data.anchor_model(list(data.v)), pts)
    worst_c = max(worst_c, w)
    centrality_ok = worst_c < CENTRALITY_TOL

    return AffPoissonResult(
        is_poisson=derivation_ok and centrality_ok,
        derivation_ok=derivation_ok,
        centrality_ok=centrality_ok,
        derivation_residual=worst_d,
        centrality_residual=worst_c,
        witness=witness if not derivation_ok else None,
    )


# ---------------------------------------------------------------------------
# Stock structures


def atiyah_algebroid(patch: Patch) -> LieAffgebroidData:
    """Invariant vector fields on a trivialized principal line bundle.

    Sections are pairs (vector field on the base, function), the frame
    is the coordinate fields plus the vertical generator, the anchor
    forgets the function part, and the vertical generator is central.
    The special affine dual of this bundle is the phase bundle of the
    line bundle (times a line), which is why its induced dual bracket
    reproduces the canonical Poisson bracket.
    """
    m = patch.dim
    n = m + 1
    zero = se.Const(0.0)
    beta = [[zero] * n for _ in range(n)]
    c = [[[zero] * n for _ in range(n)] for _ in range(n)]
    anchor_ref = [zero] * m
    anchor_lin = []
    for i in range(m):
        anchor_lin.append([se.Const(1.0) if a == i else zero for a in range(m)])
    anchor_lin.append([zero] * m)
    v = np.zeros(n)
    v[m] = 1.0
    return LieAffgebroidData(patch, n, beta, c, anchor_ref, anchor_lin, v=v)


def affgebra_to_affgebroid(data: LieAffgebraData, v=None) -> LieAffgebroidData:
    """View bracket data over a point as bundle data over an empty patch."""
    n = data.n
    beta = [[se.Const(data.D[k, i]) for k in range(n)] for i in range(n)]
    c = [[[se.Const(data.c[i, j, k]) for k in range(n)]
          for j in range(n)] for i in range(n)]
    vv = v if v is not None else data.v
    return LieAffgebroidData(Patch(), n, beta, c, [], [[] for _ in range(n)],
                             v=vv)


def jet_bundle_affgebroid(bracket_backend: str = "expansion",
                        patch: Patch | None = None) -> LieAffgebroidData:
    """First-jet prolongations of curves on a plane fibred over time.

    The bundle consists of the tangent vectors projecting to the unit
    time vector; the reference section is the time direction, the
    model frame the spatial direction, and the anchor the inclusion
    into the tangent bundle.  With ``bracket_backend="commutator"`` the
    bracket is computed as an honest vector-field commutator instead
    of through structure functions.
    """
    patch = patch or Patch.box(("q", "t"))
    zero = se.Const(0.0)
    one_ = se.Const(1.0)
    beta = [[zero]]
    c = [[[zero]]]
    anchor_ref = [zero, one_]    # the time direction
    anchor_lin = [[one_, zero]]  # the spatial direction
    bracket_fn = None
    if bracket_backend == "commutator":
        def bracket_fn(f, g):
            # sections are d/dt + f d/dq and d/dt + g d/dq; their
            # commutator is vertical with the coefficient below
            fq, gq = f[0], g[0]
            dt_g = se.differentiate(gq, "t")
            dt_f = se.differentiate(fq, "t")
            return [se.add(se.sub(dt_g, dt_f),
                           se.sub(se.mul(fq, se.differentiate(gq, "q")),
                                  se.mul(gq, se.differentiate(fq, "q"))))]
    elif bracket_backend != "expansion":
        raise BracketError(f"unknown bracket backend {bracket_backend!r}")
    return LieAffgebroidData(patch, 1, beta, c, anchor_ref, anchor_lin,
                             bracket_fn=bracket_fn)
