import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatholo.su2lab import (
    ONE, QI, QJ, QK, ClosureOverflow, NotAMember, UnitQuaternion, bi_generate,
    commutator_decomp_su2, commutator_product, conj_product_solve, cyclic_group,
    diagonal_closure_probe, generate, is_perfect, normally_generates, qexp, qlog,
    qmul, quaternion_root, random_unit, rotation,
)

unit = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 4).filter(lambda t: sum(c * c for c in t) > 1e-3)


@pytest.fixture(scope="module")
def BI():
    return bi_generate()


def test_quaternion_units():
    assert (QI * QJ).distance(QK) < 1e-15
    assert (QI * QI).distance(-ONE) < 1e-15
    q = UnitQuaternion(2.0, 0.0, 0.0, 0.0)
    assert q.w == 1.0


@settings(max_examples=50)
@given(unit, unit)
def test_quaternion_product_is_unit_and_inverse(a, b):
    p, q = UnitQuaternion(*a), UnitQuaternion(*b)
    r = p * q
    assert abs(np.linalg.norm(r.as_array()) - 1) < 1e-12
    assert (p * p.inverse()).distance(ONE) < 1e-12


def test_rotation_matches_hamilton_product():
    # R_z(pi) is k, R_x(pi) is i
    assert rotation([0, 0, 1], math.pi).distance(QK) < 1e-15
    assert rotation([1, 0, 0], math.pi).distance(QI) < 1e-15


@settings(max_examples=50)
@given(st.tuples(*[st.floats(-1.5, 1.5, allow_nan=False)] * 3))
def test_exp_log_roundtrip(v):
    v = np.array(v)
    if np.linalg.norm(v) >= math.pi:
        return
    assert np.allclose(qlog(qexp(v)), v, atol=1e-12)


# ---------------------------------------------------------- finite groups


def test_bi_order_center_orders(BI):
    assert len(BI) == 120
    assert -ONE in BI
    assert sorted(BI.elements[i].w for i in BI.center()) == [-1.0, 1.0]
    orders = {BI.order(i) for i in range(len(BI))}
    assert orders <= {1, 2, 3, 4, 5, 6, 10}
    counts = {k: sum(BI.order(i) == k for i in range(120)) for k in orders}
    assert counts == {1: 1, 2: 1, 3: 20, 4: 30, 5: 24, 6: 20, 10: 24}


def test_bi_quantization_sound(BI):
    assert BI.min_separation() > 0.1


def test_cayley_table_consistent(BI):
    rng = np.random.default_rng(0)
    for _ in range(200):
        i, j = rng.integers(0, 120, 2)
        prod = BI.elements[i] * BI.elements[j]
        assert BI.index_of(prod) == BI.table[i, j]


def test_perfect():
    assert is_perfect(bi_generate())
    assert not is_perfect(cyclic_group(5))
    assert is_perfect(generate([]))


def test_normal_generation(BI):
    assert normally_generates(QI, BI)
    assert not normally_generates(-ONE, BI)
    cen = set(BI.center())
    assert all(normally_generates(BI.elements[i], BI) for i in range(120) if i not in cen)


def test_not_a_member(BI):
    with pytest.raises(NotAMember):
        normally_generates(rotation([0, 0, 1], 0.1), BI)


def test_closure_overflow():
    with pytest.raises(ClosureOverflow):
        generate([rotation([0, 0, 1], 1.0)])


# ---------------------------------------------------------------- solvers


def test_conj_product_trivial_cases():
    g = rotation([0, 1, 1], 2 * math.pi / 5)
    sol = conj_product_solve(g, g)
    assert len(sol.conjugators) == 1 and sol.conjugators[0] == ONE
    sol = conj_product_solve(g * g, g)
    assert sol.conjugators == [ONE, ONE] and sol.exponents == [1, 1]


def test_conj_product_random_targets():
    rng = np.random.default_rng(1)
    g = rotation(rng.normal(size=3), 2 * math.pi / 5)
    for i in range(10):
        target = random_unit(rng)
        sol = conj_product_solve(target, g, seed=i)
        assert sol.product(g).distance(target) <= 1e-6
        assert len(sol.conjugators) <= 64


def test_conj_product_rejects_central():
    with pytest.raises(ValueError):
        conj_product_solve(QI, -ONE)


def test_commutator_decomp_identity_and_minus_one():
    assert commutator_decomp_su2(ONE, 3) == [(ONE, ONE)] * 3
    pairs = commutator_decomp_su2(-ONE, 1)
    assert commutator_product(pairs).distance(-ONE) <= 1e-8
    # the classical witness
    assert commutator_product([(QI, QJ)]).distance(-ONE) < 1e-15


@pytest.mark.parametrize("m", [1, 2, 3])
def test_commutator_decomp_forward_check(m):
    rng = np.random.default_rng(m)
    for i in range(5):
        f = random_unit(rng)
        pairs = commutator_decomp_su2(f, m, seed=i)
        assert len(pairs) == m
        assert commutator_product(pairs).distance(f) <= 1e-8


def test_quaternion_root():
    rng = np.random.default_rng(4)
    q = random_unit(rng)
    r = quaternion_root(q, 5)
    p = ONE
    for _ in range(5):
        p = p * r
    assert p.distance(q) < 1e-12


def test_diagonal_probe():
    g = rotation([1, 2, 3], 2 * math.pi / 5)
    targets = [(g, g), (ONE, ONE), (rotation([0, 0, 1], math.pi / 3), ONE)]
    rep = diagonal_closure_probe(targets, g, budget=200)
    r_gg, r_id, r_x = rep.results
    assert r_gg.hit and r_gg.conjugators == [(ONE, ONE)]
    assert r_id.hit and r_id.conjugators == []
    assert r_x.hit and r_x.residual <= 1e-4
    # forward check of the returned witness
    px, py = ONE, ONE
    for (c, d), e in zip(r_x.conjugators, r_x.exponents):
        ge = g if e > 0 else g.inverse()
        px, py = px * ge.conj_by(c), py * ge.conj_by(d)
    assert px.distance(targets[2][0]) <= 1e-4 and py.distance(ONE) <= 1e-4
    assert '"hits": 3' in rep.to_json()
