import random
from fractions import Fraction

import pytest

from ssq import exactla as xla
from ssq import lattice as lat
from ssq import qform as qf
from ssq import shortvec as sv


def test_named_lattices():
    a2 = lat.make_named("A2")
    assert a2.gram == ((-2, 1), (1, -2))
    assert a2.det() == 3
    u = lat.make_named("U")
    assert u.gram == ((0, 1), (1, 0))
    assert u.signature() == (1, 1, 0)
    e8 = lat.make_named("E8")
    assert e8.det() == 1 and e8.is_even()
    assert e8.signature() == (0, 8, 0)
    with pytest.raises(lat.LatticeError):
        lat.make_named("Z5")


def test_l_k3():
    L = lat.make_L_K3()
    assert L.rank == 22
    assert L.signature() == (3, 19, 0)
    assert L.det() == -1
    assert L.is_even()


def test_rescale():
    a2 = lat.make_A(2)
    r = lat.rescale(a2, 2)
    assert r.gram == ((-4, 2), (2, -4))
    with pytest.raises(lat.LatticeError):
        lat.rescale(a2, Fraction(1, 3))


def test_bbE6():
    # E6*(3): even, rank 6, det 3^4, minimal norm -4
    bb = lat.dual_rescaled(lat.make_E(6), 3)
    assert bb.rank == 6
    assert bb.is_even()
    assert abs(bb.det()) == 3 ** 5 / 3 * 3 or abs(bb.det()) == 243
    f = qf.discr(bb)
    assert qf.length_p(f, 3) == 5
    assert not sv.enum_norm(bb, -2)
    assert sv.enum_norm(bb, -4)


def test_dual_embedding():
    u = lat.make_U()
    assert lat.dual_basis(u) == ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))
    a1 = lat.make_A(1)
    assert lat.dual_basis(a1) == ((Fraction(-1, 2),),)


def test_dual_index_p04():
    P = lat.make_pencil_lattice(0, 4)
    L = P.lattice
    d = 1
    for x in L.snf().diagonal():
        if x:
            d *= x
    assert d == abs(L.det())


def test_direct_sum_k3():
    s = lat.direct_sum(lat.make_E(8), lat.make_E(8), lat.make_U(),
                       lat.make_U(), lat.make_U())
    assert s.rank == 22 and s.signature() == (3, 19, 0) and s.det() == -1


def test_orthogonal_complement_an():
    # complement of the characteristic vector e in H_{n+1} is A_n
    for n in (2, 3, 4):
        H = lat.make_H(n + 1)
        e = tuple([1] * (n + 1))
        C, basis = lat.orthogonal_complement(H, [e])
        assert C.rank == n
        assert lat.definite_isometric(C, lat.make_A(n))


def test_orthogonal_complement_simple():
    D = lat.Lattice([[-2, 0], [0, -2]])
    C, basis = lat.orthogonal_complement(D, [(1, 0)])
    assert C.gram == ((-2,),)


def test_complement_h_p10():
    P = lat.make_pencil_lattice(1, 0)
    C, basis = lat.orthogonal_complement(P.lattice, [P.h])
    assert C.rank == 3
    assert C.is_negative_definite()


def test_pencil_lattice_invariants():
    P = lat.make_pencil_lattice(2, 3)
    assert P.rank == 2 + 2 * 2 + 3
    assert P.lattice.norm(P.h) == 4
    l = P.l_vec()
    assert P.lattice.norm(l) == -2
    assert P.lattice.product(P.h, l) == 1
    m0 = P.m0_vec(0)
    assert P.lattice.norm(m0) == -2
    assert P.lattice.product(m0, l) == 1
    # lam, mu, nu squares
    assert xla.dot(P.gram, P.lam(), P.lam()) == 0
    assert xla.dot(P.gram, P.mu(0), P.mu(0)) == Fraction(-2, 3)
    assert xla.dot(P.gram, P.nu(0), P.nu(0)) == Fraction(-1, 2)
    assert xla.dot(P.gram, P.lam(), P.h) == -1


def test_pencil_10_0():
    P = lat.make_pencil_lattice(10, 0)
    assert P.rank == 22
    assert P.lattice.signature() == (1, 21, 0)
    om = P.omega()
    assert qf._mod2(xla.dot(P.gram, om, om)) == 0
    assert qf._mod1(xla.dot(P.gram, om, P.lam())) == Fraction(2, 3)


def test_pencil_0_12_discr2():
    P = lat.make_pencil_lattice(0, 12)
    assert P.rank == 14
    f = qf.discr(P.lattice)
    assert qf.length_p(f, 2) == 12


def test_lines_count_in_pencil():
    # a with a.l = 1 number 3p + q
    for (p, q) in [(1, 0), (2, 1), (0, 3)]:
        P = lat.make_pencil_lattice(p, q)
        ls = sv.lines(P.polarized())
        l = P.l_vec()
        meet = [a for a in ls if P.lattice.product(a, l) == 1]
        assert len(meet) == 3 * p + q
        assert len(ls) == 3 * p + q + 1  # plus the axis


def test_odd_unimodular():
    names_ranks = [("D12plus", 12), ("E7sq_plus", 14), ("A15plus", 15),
                   ("D8sq_plus", 16)]
    for name, rank in names_ranks:
        L, basis, amb = lat.make_odd_unimodular(name)
        assert L.rank == rank
        assert abs(L.det()) == 1
        assert not L.is_even()
        assert L.is_negative_definite()
        assert not sv.enum_norm(L, -1), name  # does not represent -1
        assert sv.enum_norm(L, -2), name


def test_a15plus_kernel():
    L, basis, amb = lat.make_odd_unimodular("A15plus")
    assert L.rank == 15


def test_char_two_complement():
    barT, basis, amb = lat.make_odd_unimodular("D12plus")
    # u with u^2 = q - 1 = 7 = 1 mod 3 (q = 8): ambient e_1 + e_2 has -2
    amb_u = tuple([1, 1] + [0] * 10)
    coords = lat.coords_in_basis(basis, amb_u)
    u = tuple(int(c) for c in coords)
    assert (barT.norm(u) - 7) % 3 == 0
    T, rows = lat.char_two_complement(lat.CharTwoComplementSpec(barT, u))
    assert T.rank == 12
    assert T.is_even()
    f = qf.discr(T)
    assert qf.p_part(f, 3).order() == 9
    # a vector of square != q-1 mod 3
    amb_bad = tuple([1, 1, 1, 1] + [0] * 8)  # norm -4 = 2 mod 3
    bad = tuple(int(c) for c in lat.coords_in_basis(basis, amb_bad))
    with pytest.raises(lat.LatticeError):
        lat.char_two_complement(lat.CharTwoComplementSpec(barT, bad))


def test_characteristic_vectors_h2():
    H2 = lat.make_H(2)
    vecs = lat.characteristic_vectors(H2, -2)
    assert sorted(vecs) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    H1 = lat.make_H(1)
    assert sorted(lat.characteristic_vectors(H1, -1)) == [(-1,), (1,)]


def test_characteristic_d12plus_square_minus4():
    L, basis, amb = lat.make_odd_unimodular("D12plus")
    vecs = lat.characteristic_vectors(L, -4)
    assert vecs  # contains e.g. the image of 2e_12


def test_van_der_blij_random_sums():
    rng = random.Random(9)
    pool = [lat.make_A(1), lat.make_A(2), lat.make_U(), lat.make_D(4),
            lat.rescale(lat.make_A(1), 2), lat.rescale(lat.make_U(), 3)]
    for _ in range(100):
        L = lat.direct_sum(rng.choice(pool), rng.choice(pool))
        f = qf.discr(L)
        p, m, z = L.signature()
        assert qf.brown(f) == (p - m) % 8
        assert f.order() == abs(L.det())


def test_text_roundtrip(tmp_path):
    P = lat.make_pencil_lattice(1, 1)
    path = tmp_path / "p11.lat"
    lat.write_lattice(path, P.lattice, h=P.h, comment="pencil (1,1)")
    L2, h2 = lat.read_lattice(path)
    assert L2 == P.lattice
    assert h2 == P.h


def test_isometric_u_recognition():
    # diag(2,-2) glued by (e+f)/2 is U: rank-2 even indefinite det -1
    from ssq import glue
    D = lat.Lattice([[2, 0], [0, -2]])
    ov = glue.overlattice(D, glue.GluingKernel.from_vectors(
        [(Fraction(1, 2), Fraction(1, 2))]))
    assert lat.same_genus_invariants(ov.lattice, lat.make_U())
