import numpy as np
import pytest

from affgeo import symexpr as se
from affgeo.brackets import Patch, random_polynomial
from affgeo.phase import (
    AVBundle, AVMorphism, FiberConstancyError, PhaseError, TimePhaseSpace,
    bold_d, bold_d_oneform, canonical_poisson, check_affine_reduction,
    eq1_aff_poisson, omega_Z, sample_envs, section_one_form,
)
from affgeo.symexpr import Const, Var, VarContext, evaluate, parse


def line_bundle(*names):
    return AVBundle(Patch.box(names or ("x",)))


def test_bold_d_of_tag_section_vanishes():
    z = line_bundle()
    z.register("sigma", parse("x^2", z.patch.context()))
    pt = bold_d(z, "zero", [1.0])
    assert np.allclose(pt.p, 0.0)


def test_bold_d_symbolic_derivative():
    z = line_bundle()
    z.register("sq", parse("x^2", z.patch.context()))
    pt = bold_d(z, "sq", [1.0])
    assert pt.p == pytest.approx([2.0])
    assert pt.tag == "zero"


def test_sections_with_constant_difference_share_differentials():
    z = line_bundle()
    ctx = z.patch.context()
    z.register("a", parse("sin(x)", ctx))
    z.register("b", parse("sin(x) + 5", ctx))
    for m in np.linspace(-2, 2, 9):
        pa, pb = bold_d(z, "a", [m]), bold_d(z, "b", [m])
        assert pa.p == pytest.approx(pb.p, abs=0)


def test_retag_is_a_groupoid_action():
    z = line_bundle()
    ctx = z.patch.context()
    z.register("s1", parse("x^2", ctx))
    z.register("s2", parse("sin(x)", ctx))
    pt = bold_d(z, "s1", [0.7], tag="zero")
    double = pt.retag("s1").retag("s2")
    direct = pt.retag("s2")
    assert double.p == pytest.approx(direct.p, abs=0)
    assert double.tag == direct.tag == "s2"


def test_round_trip_retag_exact():
    z = line_bundle()
    z.register("s1", parse("x^2 - 3*x", z.patch.context()))
    pt = bold_d(z, "s1", [0.3])
    assert pt.retag("s1").retag("zero").p == pytest.approx(pt.p, abs=0)


def test_bold_d_oneform_of_exact_form_is_zero():
    z = line_bundle("x", "y")
    rng = np.random.default_rng(0)
    for _ in range(6):
        sigma = random_polynomial(z.patch, rng, degree=3)
        name = f"s{rng.integers(1e6)}"
        z.register(name, sigma)
        two = bold_d_oneform(section_one_form(z, name))
        for env in sample_envs(z.patch.names, rng, 8):
            assert np.max(np.abs(two.matrix(env))) < 1e-12


def test_bold_d_oneform_rotation_example():
    z = line_bundle("x", "y")
    ctx = z.patch.context()
    alpha_comps = (se.neg(Var("y")), Var("x"))
    from affgeo.phase import AffineOneForm
    alpha = AffineOneForm(z, "zero", alpha_comps)
    two = bold_d_oneform(alpha)
    assert two.terms[(0, 1)] == Const(2.0)


def test_bold_d_oneform_tag_independent():
    z = line_bundle("x", "y")
    ctx = z.patch.context()
    z.register("shift", parse("x^2 + y^2", ctx))
    from affgeo.phase import AffineOneForm
    alpha = AffineOneForm(z, "zero", (parse("-y + x^2", ctx), parse("x*y", ctx)))
    direct = bold_d_oneform(alpha)
    via_other = bold_d_oneform(alpha.retag("shift"))
    rng = np.random.default_rng(1)
    assert direct.max_difference(via_other, sample_envs(z.patch.names, rng, 12)) < 1e-12


def test_omega_flat_tag_is_darboux():
    z = line_bundle()
    omega = omega_Z(z)
    assert omega.coords == ("x", "p1")
    assert omega.terms[(0, 1)] == Const(-1.0)  # i.e. dp ^ dx


def test_omega_invariance_one_dim():
    z = line_bundle()
    z.register("sq", parse("x^2", z.patch.context()))
    base = omega_Z(z)
    other = omega_Z(z, via="sq")
    envs = [{"x": v, "p1": w} for v in np.linspace(-2, 2, 5)
            for w in np.linspace(-2, 2, 5)]
    assert base.max_difference(other, envs) < 1e-12


def test_omega_invariance_two_dim_with_sin():
    z = line_bundle("x1", "x2")
    ctx = z.patch.context()
    z.register("wavy", parse("sin(x1)", ctx))
    z.register("mixed", parse("x1^2*x2 + cos(x2)", ctx))
    base = omega_Z(z)
    rng = np.random.default_rng(2)
    envs = sample_envs(("x1", "x2", "p1", "p2"), rng, 25)
    for name in ("wavy", "mixed"):
        assert base.max_difference(omega_Z(z, via=name), envs) < 1e-12


def test_canonical_poisson_darboux_pairs():
    pairs = [("x", "p")]
    assert canonical_poisson(Var("p"), Var("x"), pairs) == Const(1.0)
    assert canonical_poisson(Var("x"), Var("x"), pairs) == Const(0.0)
    out = canonical_poisson(Var("p") ** 2, Var("x"), pairs)
    assert evaluate(out, {"p": 3.0, "x": 0.0}) == pytest.approx(6.0)


def test_canonical_poisson_antisymmetric_and_jacobi():
    pairs = [("x1", "p1"), ("x2", "p2")]
    names = ("x1", "x2", "p1", "p2")
    patch = Patch.box(names)
    rng = np.random.default_rng(3)
    F, G, H = (random_polynomial(patch, rng) for _ in range(3))
    anti = canonical_poisson(F, G, pairs) + canonical_poisson(G, F, pairs)
    cyc = (canonical_poisson(F, canonical_poisson(G, H, pairs), pairs)
           + canonical_poisson(G, canonical_poisson(H, F, pairs), pairs)
           + canonical_poisson(H, canonical_poisson(F, G, pairs), pairs))
    for env in sample_envs(names, rng, 16):
        assert abs(evaluate(anti, env)) < 1e-12
        assert abs(evaluate(cyc, env)) < 1e-9


def timephase():
    return TimePhaseSpace(q=("q",), p=("p",))


def test_eq1_skew():
    space = timephase()
    ctx = VarContext.make(base=space.base_names)
    sigma = parse("p^2/2 + q*t", ctx)
    assert eq1_aff_poisson(space, sigma, sigma) == Const(0.0)


def test_eq1_fiber_constancy_holds_for_honest_sections():
    space = timephase()
    ctx = VarContext.make(base=space.base_names)
    H = parse("p^2/2", ctx)
    sigma = se.neg(H)
    rng = np.random.default_rng(4)
    for other in ("q*t - p", "sin(q) + t*p^2", "cos(t)"):
        out = eq1_aff_poisson(space, sigma, parse(other, ctx), rng=rng)
        assert space.energy not in se.free_vars(out)


def test_eq1_matches_upstairs_bracket_pointwise():
    # the defining identity: descended bracket composed with the
    # projection equals the cotangent bracket of the attached functions
    space = timephase()
    ctx = VarContext.make(base=space.base_names)
    sigma = se.neg(parse("p", ctx))
    sigma2 = se.neg(parse("q", ctx))
    down = eq1_aff_poisson(space, sigma, sigma2)
    up = canonical_poisson(space.section_function(sigma),
                           space.section_function(sigma2), space.pairs)
    rng = np.random.default_rng(5)
    for env in sample_envs(space.names, rng, 16):
        assert abs(evaluate(down, env) - evaluate(up, env)) < 1e-12


def test_eq1_rejects_sections_using_the_energy_direction():
    space = timephase()
    bad = se.mul(Var("e"), Var("q"))
    good = parse("p", VarContext.make(base=space.base_names))
    with pytest.raises(FiberConstancyError):
        eq1_aff_poisson(space, bad, good)


# --- reduction --------------------------------------------------------------


def reduction_setup():
    space = timephase()
    ctx = VarContext.make(base=space.base_names)
    pairs = space.pairs

    def bracket_z(f, g):
        return canonical_poisson(f, g, pairs)

    def bracket_y(s1, s2):
        return eq1_aff_poisson(space, s1, s2)

    sections = [
        (se.neg(parse("p^2/2 + q*t", ctx)), se.neg(parse("q*p - t", ctx))),
        (parse("sin(q)*t", ctx), parse("p + q^2", ctx)),
        (Const(3.0), Const(-1.0)),
    ]
    identity_base = {n: Var(n) for n in space.base_names}
    rng = np.random.default_rng(6)
    envs = sample_envs(space.names, rng, 12)
    return space, bracket_z, bracket_y, sections, identity_base, envs


def test_reduction_identity_passes_for_energy_shift_morphism():
    space, bz, by, sections, base_map, envs = reduction_setup()
    rho = AVMorphism(base_map, se.sub(Var("e"), Var("r")), "r")
    report = check_affine_reduction(rho, bz, by, sections, envs)
    assert report.passed
    assert report["reduction_identity"].residual < 1e-9


def test_reduction_constant_sections_both_sides_zero():
    space, bz, by, _, base_map, envs = reduction_setup()
    rho = AVMorphism(base_map, se.sub(Var("e"), Var("r")), "r")
    report = check_affine_reduction(rho, bz, by,
                                    [(Const(2.0), Const(5.0))], envs)
    assert report.passed
    assert report["reduction_identity"].residual < 1e-15


def test_reduction_flipped_morphism_with_mismatched_bracket_fails():
    space, bz, _, sections, base_map, envs = reduction_setup()
    rho_flipped = AVMorphism(base_map, se.add(Var("e"), Var("r")), "r")

    def bracket_y_mismatched(s1, s2):
        # built with the opposite fiber identification; only the part
        # that is odd in the sections flips, so the identity must fail
        F = se.sub(se.neg(Var("e")), s1)
        G = se.sub(se.neg(Var("e")), s2)
        return se.subst(canonical_poisson(F, G, space.pairs),
                        {space.energy: 0.0})

    report = check_affine_reduction(rho_flipped, bz, bracket_y_mismatched,
                                    sections, envs)
    assert not report.passed
    assert report["reduction_identity"].witness is not None


def test_avmorphism_pullback_solves_fiber_equation():
    space, *_ = reduction_setup()
    base_map = {n: Var(n) for n in space.base_names}
    rho = AVMorphism(base_map, se.sub(Var("e"), Var("r")), "r")
    sigma = Var("q")
    pulled = rho.pullback(sigma)
    env = {"q": 2.0, "t": 0.5, "p": -1.0, "e": 4.0}
    # fiber equation: e - r = sigma  =>  r = e - sigma
    assert evaluate(pulled, env) == pytest.approx(4.0 - 2.0)


def test_avmorphism_rejects_degenerate_fiber_map():
    rho = AVMorphism({}, Const(1.0), "r")
    with pytest.raises(PhaseError):
        rho.pullback(Const(0.0))
