import random
from fractions import Fraction

import pytest

from ssq import exactla as xla
from ssq import lattice as lat
from ssq import qform as qf


def test_discr_e8_trivial():
    f = qf.discr(lat.make_E(8))
    assert f.order() == 1
    assert f.orders == ()


def test_discr_a2():
    f = qf.discr(lat.make_A(2))
    assert f.orders == (3,)
    # dual generator has square -2/3, i.e. 4/3 mod 2
    assert f.qvals[0] == Fraction(4, 3)


def test_discr_a1():
    f = qf.discr(lat.make_A(1))
    assert f.orders == (2,)
    assert f.qvals[0] == Fraction(3, 2)  # -1/2 mod 2


def test_discr_order_matches_det():
    for L in [lat.make_A(3), lat.make_D(4), lat.make_E(6),
              lat.direct_sum(lat.make_A(2), lat.make_U())]:
        f = qf.discr(L)
        assert f.order() == abs(L.det())
        assert f.is_nondegenerate()


def test_class_of_and_lift_roundtrip():
    L = lat.direct_sum(lat.make_A(2), lat.make_A(1))
    f = qf.discr(L)
    for el in f.elements():
        v = f.lift(el)
        assert qf.class_of(f, v) == el


def test_p_part():
    L = lat.direct_sum(lat.make_A(2), lat.make_A(1))
    f = qf.discr(L)
    f3 = qf.p_part(f, 3)
    assert f3.order() == 3
    f2 = qf.p_part(f, 2)
    assert f2.order() == 2
    f5 = qf.p_part(f, 5)
    assert f5.order() == 1


def test_length_det_p():
    f = qf.orthogonal_sum(qf.cyclic_form(2, 3), qf.cyclic_form(2, 3))
    assert qf.length_p(f, 3) == 2
    u2 = qf.u_block(2)
    l, u = qf.det_p(u2, 2)
    assert l == 2
    assert u == 7  # -1 mod 8: det U_2 = -1/4


def test_brown_trivial_and_a2():
    assert qf.brown(qf.trivial_form()) == 0
    assert qf.brown(qf.discr(lat.make_A(2))) == 6
    # <2/3>^2: Brown 4 = signature of Q_112 mod 8 (1 - 21)
    f = qf.orthogonal_sum(qf.cyclic_form(2, 3), qf.cyclic_form(2, 3))
    assert qf.brown(f) == 4


def test_brown_blocks_match_numeric():
    blocks = [
        qf.cyclic_form(1, 2), qf.cyclic_form(3, 2), qf.cyclic_form(1, 4),
        qf.cyclic_form(7, 4), qf.cyclic_form(2, 3), qf.cyclic_form(4, 3),
        qf.cyclic_form(2, 9), qf.cyclic_form(2, 5), qf.u_block(2),
        qf.v_block(2), qf.u_block(4), qf.v_block(4), qf.cyclic_form(3, 8),
    ]
    for f in blocks:
        assert qf.brown(f) == qf.brown_numeric(f), f


def test_brown_additive_random():
    rng = random.Random(1)
    pool = [qf.cyclic_form(1, 2), qf.cyclic_form(7, 4), qf.cyclic_form(2, 3),
            qf.cyclic_form(4, 3), qf.u_block(2), qf.v_block(2)]
    for _ in range(100):
        a, b = rng.choice(pool), rng.choice(pool)
        s = qf.orthogonal_sum(a, b)
        assert qf.brown(s) == (qf.brown(a) + qf.brown(b)) % 8


def test_van_der_blij_small():
    for L in [lat.make_A(1), lat.make_A(2), lat.make_A(3), lat.make_D(4),
              lat.make_E(6), lat.make_E(7), lat.make_U(),
              lat.direct_sum(lat.make_U(), lat.make_A(2))]:
        f = qf.discr(L)
        p, m, z = L.signature()
        assert qf.brown(f) == (p - m) % 8, L.gram


def test_is_even_2_characteristic():
    f = qf.cyclic_form(1, 2)
    even, c = qf.characteristic_element(f)
    assert not even and c == (1,)
    u2 = qf.u_block(2)
    even, c = qf.characteristic_element(u2)
    assert even and c == (0, 0)


def test_block_decompose_d4():
    f = qf.discr(lat.make_D(4))
    blocks = qf.block_decompose(f)
    # D4 discr: even 2-elementary of length 2 with Brown -4: that is V_2
    assert blocks == [("V", 2)]
    assert qf.brown(f) == 4  # -4 mod 8


def test_block_decompose_u2():
    L = lat.rescale(lat.make_U(), 2)
    f = qf.discr(L)
    assert qf.block_decompose(f) == [("U", 2)]


def test_serialize_parse():
    blocks = [("cyc", 4, 3), ("U", 2), ("U", 2), ("V", 2)]
    s = qf.serialize_blocks(sorted(blocks, key=str))
    assert qf.parse_blocks(s) == sorted(blocks, key=str)


def test_isotropic_subgroups_cyclic8():
    # discr<-8> = Z/8 with q = -1/8: isotropic subgroup {0, 4g}
    f = qf.discr(lat.Lattice([[-8]]))
    assert f.orders == (8,)
    subs = qf.isotropic_subgroups(f)
    assert frozenset({(0,), (4,)}) in subs
    assert len(subs) == 2  # trivial and the order-2 one


def test_isotropic_subgroups_none_in_half():
    f = qf.cyclic_form(1, 2)
    subs = qf.isotropic_subgroups(f)
    assert len(subs) == 1


def test_quotient_form_u2():
    f = qf.u_block(2)
    k = [(1, 0)]
    g = qf.quotient_form(f, k)
    assert g.order() == 1


def test_quotient_form_z8():
    f = qf.discr(lat.Lattice([[-8]]))
    g = qf.quotient_form(f, [(4,)])
    assert g.orders == (2,)
    assert g.qvals[0] == Fraction(3, 2)  # <-1/2>


def test_quotient_preserves_brown():
    rng = random.Random(2)
    pool = [qf.u_block(2), qf.v_block(2), qf.cyclic_form(2, 3),
            qf.cyclic_form(4, 3), qf.cyclic_form(1, 4), qf.discr(lat.Lattice([[-8]]))]
    for _ in range(40):
        f = qf.orthogonal_sum(rng.choice(pool), rng.choice(pool))
        if f.order() > 4096:
            continue
        subs = qf.isotropic_subgroups(f)
        for sub in subs:
            gens = qf.subgroup_basis(f, sub)
            g = qf.quotient_form(f, gens)
            assert g.order() * len(sub) ** 2 == f.order()
            assert qf.brown(g) == qf.brown(f)


def test_null_cobordant_iff_brown_zero_small():
    # 3-elementary: Br = 0 implies a maximal isotropic subgroup exists
    f = qf.orthogonal_sum(qf.cyclic_form(2, 3), qf.cyclic_form(4, 3))
    assert qf.brown(f) == 0
    subs = qf.isotropic_subgroups(f)
    assert any(len(s) ** 2 == f.order() for s in subs)


def test_eq_3forms_congruence():
    # forms with only 3- and 9-torsion: Br F + Br q_c - 2 l(F) = 0 mod 4,
    # where q_c(3x) = 3 q(x) is the induced form on 3F
    import cmath

    pool = [qf.cyclic_form(2, 3), qf.cyclic_form(4, 3), qf.cyclic_form(2, 9),
            qf.cyclic_form(4, 9)]
    rng = random.Random(3)
    for _ in range(20):
        f = qf.orthogonal_sum(rng.choice(pool), rng.choice(pool))
        reps = {}
        for el in f.elements():
            reps.setdefault(f.smul(3, el), el)
        tot = sum(
            cmath.exp(1j * cmath.pi * 3 * float(f.q(x))) for x in reps.values()
        )
        assert abs(abs(tot) - len(reps) ** 0.5) < 1e-6
        brc = round(cmath.phase(tot) / (cmath.pi / 4)) % 8
        delta = (qf.brown(f) + brc - 2 * len(f.orders)) % 4
        assert delta == 0
