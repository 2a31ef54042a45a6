import numpy as np
import pytest

from affgeo import symexpr as se
from affgeo.brackets import (
    BracketError, LieAffgebraData, LieAffgebroidData, NonAffineSectionError,
    Patch, aff_jacobi_bracket, affgebra_to_affgebroid, atiyah_algebroid,
    jet_bundle_affgebroid, hull_extend, is_aff_poisson, random_polynomial,
    verify_affgebra, verify_affgebroid,
)
from affgeo.symexpr import Const, Var, evaluate, parse, VarContext

EPS3 = np.zeros((3, 3, 3))
for i, j, k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    EPS3[i, j, k] = 1.0
    EPS3[j, i, k] = -1.0


def test_affgebra_rejects_nonantisymmetric_c():
    c = np.zeros((2, 2, 2))
    c[0, 0, 0] = 1.0
    with pytest.raises(BracketError):
        LieAffgebraData(np.zeros((2, 2)), c)


def test_affgebra_bracket_rotation_example():
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    data = LieAffgebraData(J, np.zeros((2, 2, 2)))
    out = data.bracket([1.0, 0.0], [0.0, 0.0])
    assert np.allclose(out, [0.0, -1.0])


def test_affgebra_bracket_skew_on_diagonal():
    rng = np.random.default_rng(0)
    data = LieAffgebraData(rng.normal(size=(3, 3)), EPS3)
    for _ in range(8):
        u = rng.normal(size=3)
        assert np.allclose(data.bracket(u, u), 0.0)


def test_verify_abelian_passes_any_D():
    rng = np.random.default_rng(1)
    data = LieAffgebraData(rng.normal(size=(4, 4)), np.zeros((4, 4, 4)))
    report = verify_affgebra(data)
    assert report.passed
    assert report["jacobi"].residual < 1e-12


def test_verify_so3_passes():
    report = verify_affgebra(LieAffgebraData(np.zeros((3, 3)), EPS3))
    assert report.passed


def test_verify_cross_product_with_identity_fails_with_witness():
    report = verify_affgebra(LieAffgebraData(np.eye(3), EPS3))
    assert not report.passed
    jac = report["jacobi"]
    assert not jac.passed
    assert jac.witness is not None and jac.residual > 0.1


# --- bundle structures -----------------------------------------------------


def grid16():
    return Patch.box(("q", "t")).grid(4)


def test_jet_bundle_bracket_matches_commutator_oracle():
    data = jet_bundle_affgebroid()
    ctx = VarContext.make(base=("q", "t"))
    f = parse("sin(q)*t", ctx)
    g = parse("q^2 - t", ctx)
    out = data.bracket([f], [g])[0]

    # oracle: commutator of d/dt + f d/dq with d/dt + g d/dq
    def d(e, v):
        return se.differentiate(e, v)
    oracle = d(g, "t") + f * d(g, "q") - d(f, "t") - g * d(f, "q")

    for p in grid16():
        env = {"q": p[0], "t": p[1]}
        assert abs(evaluate(out, env) - evaluate(oracle, env)) < 1e-12


def test_jet_bundle_backends_agree():
    via_expansion = jet_bundle_affgebroid()
    via_commutator = jet_bundle_affgebroid(bracket_backend="commutator")
    ctx = VarContext.make(base=("q", "t"))
    f = parse("q*t + 1", ctx)
    g = parse("cos(t) - q", ctx)
    b1 = via_expansion.bracket([f], [g])[0]
    b2 = via_commutator.bracket([f], [g])[0]
    for p in grid16():
        env = {"q": p[0], "t": p[1]}
        assert abs(evaluate(b1, env) - evaluate(b2, env)) < 1e-12


def test_verify_jet_bundle_passes():
    report = verify_affgebroid(jet_bundle_affgebroid(), grid16(),
                               rng=np.random.default_rng(2))
    assert report.passed, [c.to_dict() for c in report.checks]


def test_affgebroid_construction_rejects_bad_antisymmetry():
    patch = Patch.box(("q", "t"))
    zero = Const(0.0)
    with pytest.raises(BracketError):
        LieAffgebroidData(patch, 1, [[zero]], [[[Const(2.0)]]],
                          [zero, Const(1.0)], [[Const(1.0), zero]])


def test_doubled_anchor_breaks_leibniz_for_independent_bracket():
    data = jet_bundle_affgebroid(bracket_backend="commutator")
    doctored = LieAffgebroidData(
        data.patch, 1, data.beta, data.c,
        [se.mul(Const(2.0), a) for a in data.anchor_ref],
        [[se.mul(Const(2.0), a) for a in lin] for lin in data.anchor_lin],
        bracket_fn=data.bracket_fn)
    report = verify_affgebroid(doctored, grid16(),
                               rng=np.random.default_rng(3))
    leib = report["leibniz"]
    assert not leib.passed
    assert leib.witness is not None


def test_bracket_of_section_with_itself_vanishes():
    data = jet_bundle_affgebroid()
    f = [parse("q^2*t", VarContext.make(base=("q", "t")))]
    out = data.bracket(f, f)[0]
    for p in grid16():
        assert abs(evaluate(out, {"q": p[0], "t": p[1]})) < 1e-12


# --- hull extension ---------------------------------------------------------


def test_hull_reference_self_bracket_vanishes():
    hull = hull_extend(jet_bundle_affgebroid())
    a0 = (Const(1.0), [Const(0.0)])
    weight, comps = hull.bracket(a0, a0)
    assert weight == Const(0.0)
    assert comps[0] == Const(0.0)


def test_hull_restriction_reproduces_input():
    data = jet_bundle_affgebroid()
    hull = hull_extend(data)
    ctx = VarContext.make(base=("q", "t"))
    f = [parse("sin(q) + t", ctx)]
    g = [parse("q*t^2", ctx)]
    weight, comps = hull.bracket((1.0, f), (1.0, g))
    direct = data.bracket(f, g)
    assert weight == Const(0.0)
    for p in grid16():
        env = {"q": p[0], "t": p[1]}
        assert abs(evaluate(comps[0], env) - evaluate(direct[0], env)) < 1e-12


def test_hull_weight_zero_sector_is_model_bracket():
    data = jet_bundle_affgebroid()
    hull = hull_extend(data)
    ctx = VarContext.make(base=("q", "t"))
    f = [parse("q^2", ctx)]
    g = [parse("t*q", ctx)]
    weight, comps = hull.bracket((0.0, f), (0.0, g))
    assert weight == Const(0.0)
    # model sector of this bundle: [f d/dq, g d/dq] = (f g_q - g f_q) d/dq
    expected = f[0] * se.differentiate(g[0], "q") - g[0] * se.differentiate(f[0], "q")
    for p in grid16():
        env = {"q": p[0], "t": p[1]}
        assert abs(evaluate(comps[0], env) - evaluate(expected, env)) < 1e-12


def test_hull_jacobi_with_random_weights():
    data = jet_bundle_affgebroid()
    hull = hull_extend(data)
    rng = np.random.default_rng(4)
    secs = [(random_polynomial(data.patch, rng),
             [random_polynomial(data.patch, rng)]) for _ in range(3)]
    X, Y, Z = secs

    def nested(A, B, C):
        inner = hull.bracket(B, C)
        return hull.bracket(A, inner)

    total_w = Const(0.0)
    total_c = Const(0.0)
    for A, B, C in [(X, Y, Z), (Y, Z, X), (Z, X, Y)]:
        w, comps = nested(A, B, C)
        total_w = total_w + w
        total_c = total_c + comps[0]
    for p in grid16():
        env = {"q": p[0], "t": p[1]}
        assert abs(evaluate(total_w, env)) < 1e-9
        assert abs(evaluate(total_c, env)) < 1e-9


def test_hull_distinguished_dual_section_is_closed():
    data = jet_bundle_affgebroid()
    hull = hull_extend(data)
    rng = np.random.default_rng(5)
    X = (random_polynomial(data.patch, rng), [random_polynomial(data.patch, rng)])
    Y = (random_polynomial(data.patch, rng), [random_polynomial(data.patch, rng)])
    residual = hull.one_cocycle_residual(X, Y)
    for p in grid16():
        assert abs(evaluate(residual, {"q": p[0], "t": p[1]})) < 1e-9


def test_hull_extend_refuses_invalid_input():
    data = jet_bundle_affgebroid(bracket_backend="commutator")
    doctored = LieAffgebroidData(
        data.patch, 1, data.beta, data.c,
        [se.mul(Const(2.0), a) for a in data.anchor_ref],
        [[se.mul(Const(2.0), a) for a in lin] for lin in data.anchor_lin],
        bracket_fn=data.bracket_fn)
    with pytest.raises(BracketError):
        hull_extend(doctored)


# --- the Atiyah structure and the dual bracket ------------------------------


def test_atiyah_bracket_examples():
    data = atiyah_algebroid(Patch.box(("x",)))
    x = Var("x")
    # [(d/dx, 0), (0, x)] = (0, 1)
    out = data.bracket([1.0, 0.0], [0.0, x])
    assert out[0] == Const(0.0)
    assert out[1] == Const(1.0)
    # skew on equal sections
    out = data.bracket([1.0, 0.0], [1.0, 0.0])
    assert out == [Const(0.0), Const(0.0)]


def test_atiyah_vertical_generator_is_central():
    data = atiyah_algebroid(Patch.box(("x",)))
    rng = np.random.default_rng(6)
    for _ in range(4):
        f = [random_polynomial(data.patch, rng), random_polynomial(data.patch, rng)]
        out = data.second_linear(f, [0.0, 1.0])
        for p in data.patch.grid(5):
            env = data.patch.env(p)
            assert all(abs(evaluate(o, env)) < 1e-12 for o in out)


def canonical_poisson_oracle(F, G, pairs):
    """Independent Poisson bracket: sum dF/dp dG/dx - dF/dx dG/dp."""
    out = Const(0.0)
    for x, p in pairs:
        out = out + se.differentiate(F, p) * se.differentiate(G, x) \
                  - se.differentiate(F, x) * se.differentiate(G, p)
    return out


@pytest.mark.parametrize("names", [("x",), ("x", "y")])
def test_atiyah_dual_bracket_is_canonical_poisson(names):
    patch = Patch.box(names)
    data = atiyah_algebroid(patch)
    m = len(names)
    rng = np.random.default_rng(7)
    wnames = [f"w{j+1}" for j in range(m)]
    ctx = VarContext.make(base=list(names) + wnames)

    def random_affine():
        e = random_polynomial(patch, rng)
        for w in wnames:
            e = e + random_polynomial(patch, rng) * Var(w)
        return e

    for _ in range(2):
        sigma, sigma2 = random_affine(), random_affine()
        ours = aff_jacobi_bracket(data, sigma, sigma2)
        oracle = canonical_poisson_oracle(sigma, sigma2,
                                          list(zip(names, wnames)))
        for _ in range(16):
            env = {n: rng.uniform(-1, 1) for n in ctx.names}
            assert abs(evaluate(ours, env) - evaluate(oracle, env)) < 1e-9


def test_aff_jacobi_skew():
    data = atiyah_algebroid(Patch.box(("x",)))
    sigma = parse("w1*x + x^2", VarContext.make(base=("x", "w1")))
    assert aff_jacobi_bracket(data, sigma, sigma) == Const(0.0)


def test_aff_jacobi_rejects_non_affine_sections():
    data = atiyah_algebroid(Patch.box(("x",)))
    sigma = parse("w1^2", VarContext.make(base=("x", "w1")))
    with pytest.raises(NonAffineSectionError):
        aff_jacobi_bracket(data, sigma, Const(0.0))


def test_aff_jacobi_over_a_point_constant_sections():
    # abelian structure over a point with a central distinguished vector
    data = affgebra_to_affgebroid(
        LieAffgebraData(np.zeros((2, 2)), np.zeros((2, 2, 2))), v=[0.0, 1.0])
    out = aff_jacobi_bracket(data, Const(2.0), Var("w1"))
    assert out == Const(0.0)


def test_is_aff_poisson_atiyah_true():
    result = is_aff_poisson(atiyah_algebroid(Patch.box(("x",))),
                            rng=np.random.default_rng(8))
    assert result.criteria_agree
    assert bool(result)
    assert result.derivation_ok and result.centrality_ok


def test_is_aff_poisson_false_when_distinguished_vector_not_central():
    # over a point: D v != 0 for v = e2
    D = np.array([[0.0, 1.0], [0.0, 1.0]])
    data = affgebra_to_affgebroid(LieAffgebraData(D, np.zeros((2, 2, 2))),
                                  v=[0.0, 1.0])
    result = is_aff_poisson(data, rng=np.random.default_rng(9))
    assert result.criteria_agree
    assert not bool(result)
    assert result.witness is not None


def test_is_aff_poisson_abelian_true():
    data = affgebra_to_affgebroid(
        LieAffgebraData(np.zeros((3, 3)), np.zeros((3, 3, 3))),
        v=[1.0, 2.0, 0.5])
    result = is_aff_poisson(data, rng=np.random.default_rng(10))
    assert result.criteria_agree and bool(result)


def test_bracket_object_matches_function_and_exposes_coordinates():
    from affgeo.brackets import AffJacobiBracket
    data = atiyah_algebroid(Patch.box(("x",)))
    bracket_obj = AffJacobiBracket(data)
    assert bracket_obj.base_names == ("x", "w1")
    ctx = VarContext.make(base=("x", "w1"))
    s1, s2 = parse("w1*x", ctx), parse("w1 + x^2", ctx)
    assert bracket_obj(s1, s2) == aff_jacobi_bracket(data, s1, s2)
    # the partial map on affine functions is a derivation here: its
    # zero-order term (value on the constant 1) vanishes
    X = bracket_obj.hamiltonian_operator_of(s1)
    assert X(Const(1.0)) == Const(0.0)
    rng = np.random.default_rng(11)
    out = X(Var("w1"))
    oracle = canonical_poisson_oracle(s1, Var("w1"), [("x", "w1")])
    for _ in range(8):
        env = {"x": rng.uniform(-1, 1), "w1": rng.uniform(-1, 1)}
        assert abs(evaluate(out, env) - evaluate(oracle, env)) < 1e-12


def test_bracket_object_requires_distinguished_section():
    from affgeo.brackets import AffJacobiBracket
    with pytest.raises(BracketError):
        AffJacobiBracket(jet_bundle_affgebroid())
