"""Unit tests for region evaluation and the boundary search."""

import numpy as np
import pytest

from secrd.binary import BecBscParams, BinaryScheme, aux_scheme, build_source
from secrd.probs import (
    Alphabet,
    ConditionalPmf,
    InvalidArgument,
    JointPmf,
    bsc,
    conditional_entropy,
    identity_channel,
    joint_from,
    mutual_information,
)
from secrd.region import (
    AuxScheme,
    SearchConfig,
    SecureSource,
    best_reconstruction,
    cardinality_caps,
    evaluate_scheme,
    eve_less_noisy_bound,
    identity_scheme,
    less_noisy_bound,
    lossless_region_point,
    materialize,
    no_side_info_point,
    sweep_boundary,
)

PARAMS = BecBscParams(p=0.1, eps=0.4689955935892812)

# Frozen via the closed-form boundary expressions of the binary model.
FROZEN_TUPLE = (0.220727680351, 0.056279471231, 0.277729666137)


def random_source(rng, na=2, nb=2, ne=2):
    names = ("A", "B", "E")
    shape = (na, nb, ne)
    mass = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    axes = tuple(
        (n, Alphabet(tuple(f"{n.lower()}{i}" for i in range(k))))
        for n, k in zip(names, shape)
    )
    d = rng.random((na, na))
    np.fill_diagonal(d, 0.0)
    return SecureSource(JointPmf(axes, mass), d, d_max=1.0)


def random_scheme(rng, source, nv=2, nu=2):
    a = source.a_alphabet
    v_alph = Alphabet(tuple(f"v{i}" for i in range(nv)))
    u_alph = Alphabet(tuple(f"u{i}" for i in range(nu)))
    v_rows = rng.dirichlet(np.ones(nv), size=len(a))
    u_rows = rng.dirichlet(np.ones(nu), size=nv)
    v_channel = ConditionalPmf(a, v_alph, v_rows)
    u_channel = ConditionalPmf(v_alph, u_alph, u_rows)
    return AuxScheme(v_channel, u_channel, best_reconstruction(source, v_channel))


class TestSecureSource:
    def test_requires_exact_axes(self):
        pmf = JointPmf((("A", Alphabet(("0", "1"))),), np.array([0.5, 0.5]))
        with pytest.raises(InvalidArgument):
            SecureSource(pmf, np.zeros((2, 2)))

    def test_distortion_bounds(self):
        src = build_source(PARAMS)
        with pytest.raises(InvalidArgument):
            SecureSource(src.joint, np.array([[0.0, 2.0], [1.0, 0.0]]), d_max=1.0)

    def test_cardinality_caps(self):
        src = build_source(PARAMS)
        assert cardinality_caps(src) == (4, 12)

    def test_check_caps_rejects_oversized_u(self):
        src = build_source(PARAMS)
        big = Alphabet(tuple(f"u{i}" for i in range(5)))
        v_channel = bsc(0.1)
        u_channel = ConditionalPmf(v_channel.output, big, np.full((2, 5), 0.2))
        scheme = AuxScheme(v_channel, u_channel, np.zeros((2, 3), dtype=int))
        with pytest.raises(InvalidArgument):
            scheme.check_caps(src)


class TestEvaluateScheme:
    def test_matches_frozen_closed_form_value(self):
        scheme = aux_scheme(PARAMS, BinaryScheme(0.12, 0.07))
        tup = evaluate_scheme(build_source(PARAMS), scheme)
        assert tuple(tup) == pytest.approx(FROZEN_TUPLE, abs=1e-9)

    def test_markov_structure_of_materialized_joint(self):
        rng = np.random.default_rng(5)
        src = random_source(rng, na=3, nb=2, ne=2)
        scheme = random_scheme(rng, src, nv=3, nu=2)
        joint = materialize(src, scheme)
        assert mutual_information(joint, ("U",), ("A",), ("V",)) == pytest.approx(
            0.0, abs=1e-12)
        assert mutual_information(joint, ("V",), ("B", "E"), ("A",)) == pytest.approx(
            0.0, abs=1e-12)

    def test_equivocation_never_negative(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            src = random_source(rng)
            tup = evaluate_scheme(src, random_scheme(rng, src))
            assert tup.equivocation >= 0.0
            assert tup.rate >= 0.0

    def test_identity_scheme_is_lossless(self):
        src = build_source(PARAMS)
        tup = evaluate_scheme(src, identity_scheme(src))
        assert tup.distortion == pytest.approx(0.0, abs=1e-12)
        assert tup.rate == pytest.approx(
            conditional_entropy(src.joint, ("A",), ("B",)), abs=1e-12)


class TestSpecialPoints:
    def test_lossless_point_agrees_with_general_evaluator(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            src = random_source(rng, na=2, nb=3, ne=2)
            u_channel = ConditionalPmf(
                src.a_alphabet, Alphabet(("u0", "u1")),
                rng.dirichlet(np.ones(2), size=2))
            point = lossless_region_point(src, u_channel)
            general = evaluate_scheme(src, identity_scheme(src, u_channel))
            assert tuple(point) == pytest.approx(tuple(general), abs=1e-9)

    def test_eve_less_noisy_bound_equals_residual_entropy(self):
        rng = np.random.default_rng(14)
        src = random_source(rng)
        scheme = random_scheme(rng, src)
        tup = eve_less_noisy_bound(src, scheme)
        joint = joint_from(src.joint, [("V", scheme.v_channel, "A")])
        h_ave = conditional_entropy(joint, ("A",), ("V", "E"))
        assert tup.equivocation == pytest.approx(max(0.0, h_ave), abs=1e-9)

    def test_less_noisy_bound_drops_u(self):
        rng = np.random.default_rng(15)
        src = random_source(rng)
        scheme = random_scheme(rng, src)
        tup = less_noisy_bound(src, scheme)
        joint = joint_from(src.joint, [("V", scheme.v_channel, "A")])
        delta = (conditional_entropy(joint, ("A",), ("V", "B"))
                 + mutual_information(joint, ("A",), ("B",))
                 - mutual_information(joint, ("A",), ("E",)))
        assert tup.equivocation == pytest.approx(max(0.0, delta), abs=1e-9)

    def test_no_side_info_requires_singleton_b(self):
        src = build_source(PARAMS)
        with pytest.raises(InvalidArgument):
            no_side_info_point(src, identity_scheme(src))


class TestBestReconstruction:
    def test_copies_b_off_erasure(self):
        src = build_source(PARAMS)
        recon = best_reconstruction(src, bsc(0.05))
        # B symbols are (0, e, 1): match b when visible, v on erasure
        np.testing.assert_array_equal(recon, [[0, 0, 1], [0, 1, 1]])

    def test_ties_break_to_lowest_index(self):
        axes = (("A", Alphabet(("0", "1"))),
                ("B", Alphabet(("b",))),
                ("E", Alphabet(("e",))))
        src = SecureSource(JointPmf(axes, np.array([[[0.5]], [[0.5]]])),
                           np.array([[0.0, 1.0], [1.0, 0.0]]))
        recon = best_reconstruction(src, ConditionalPmf(
            src.a_alphabet, Alphabet(("v0",)), [[1.0], [1.0]]))
        assert recon[0, 0] == 0


class TestBoundarySearch:
    def test_csv_header_and_shape(self):
        src = build_source(PARAMS)
        cfg = SearchConfig(grid_resolution=2, refine_rounds=4, rate_budget=0.5)
        curve = sweep_boundary(src, [0.05], cfg)
        lines = curve.to_csv().splitlines()
        assert lines[0] == "D,R,Delta,scheme_id"
        assert len(lines) == 1 + len(curve.points)

    def test_boundary_point_tuples_are_achievable(self):
        src = build_source(PARAMS)
        cfg = SearchConfig(grid_resolution=3, refine_rounds=6, rate_budget=0.5)
        curve = sweep_boundary(src, [0.03], cfg)
        for d_budget, tup, scheme in curve.points:
            again = evaluate_scheme(src, scheme)
            assert again.distortion <= d_budget + 1e-9
            assert tup.equivocation == pytest.approx(again.equivocation, abs=1e-9)

    def test_infeasible_budget_dropped(self):
        src = build_source(PARAMS)
        # D = 0 needs R >= H(A|B) ~ 0.469 > budget, so no point is returned
        cfg = SearchConfig(grid_resolution=2, refine_rounds=3, rate_budget=0.3)
        curve = sweep_boundary(src, [0.0], cfg)
        assert curve.points == []
