"""Exact Brascamp-Lieb feasibility checks."""

import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fieldclt.hybl import (
    PROVED,
    REFUTED,
    HyblInstance,
    admissible_pk,
    check_c1,
    check_c2,
    check_paper_family,
    covering_certificate,
    decay_exponent,
    format_instance,
    nullspace,
    paper_family_instance,
    parse_instance,
    rank,
    subspace_intersection,
    subspace_sum,
)

F = Fraction


def _np_rank(rows):
    return 0 if len(rows) == 0 else int(np.linalg.matrix_rank(np.array(rows, dtype=float)))


def _brute_deficit(inst, basis):
    # independent floating rank computation
    images = [[[sum(float(r[c]) * float(v[c]) for c in range(inst.ambient_dim)) for r in m] for v in basis]
              for m in inst.maps]
    return len(basis) - sum(float(z) * _np_rank(img) for z, img in zip(inst.exponents, images))


def _small_vectors(n):
    return [v for v in itertools.product((-1, 0, 1), repeat=n) if any(v)]


def _brute_violation(inst):
    n = inst.ambient_dim
    vecs = _small_vectors(n)
    for size in range(1, n + 1):
        for combo in itertools.combinations(vecs, size):
            if _np_rank(list(combo)) == size and _brute_deficit(inst, combo) > 1e-9:
                return True
    return False


def test_exact_linear_algebra():
    assert rank([[1, 2], [2, 4]], 2) == 1
    null = nullspace([[1, 1]], 2)
    assert null == ((F(1), F(-1)),) and all(isinstance(x, F) for x in null[0])
    u, v = ((F(1), F(0), F(0)),), ((F(0), F(1), F(0)),)
    assert len(subspace_sum(u, v, 3)) == 2
    assert subspace_intersection(u, v, 3) == ()
    plane = ((F(1), F(0), F(0)), (F(0), F(1), F(0)))
    assert len(subspace_intersection(plane, ((F(1), F(1), F(0)), (F(0), F(0), F(1))), 3)) == 1


def test_instance_validation():
    with pytest.raises(ValueError):
        HyblInstance(2, [[[1, 1], [2, 2]]], [F(1, 2)])
    with pytest.raises(TypeError):
        HyblInstance(1, [[[1]]], [0.5])
    with pytest.raises(ValueError):
        HyblInstance(1, [[[1]]], [F(3, 2)])
    with pytest.raises(ValueError):
        HyblInstance(2, [[[1, 0, 0]]], [F(1)])


def test_holder_pair_proved():
    inst = HyblInstance(1, [[[1]], [[1]]], [F(1, 2), F(1, 2)])
    v = check_c2(inst)
    assert (v.c1_holds, v.c2_holds, v.c3_holds, v.complete) == (True, PROVED, PROVED, True)


def test_duplicated_projection_refuted():
    # two copies of x -> x_1 on R^2 with exponents 1: C1 holds, the x_2 axis violates C2
    inst = HyblInstance(2, [[[1, 0]], [[1, 0]]], [F(1), F(1)])
    v = check_c2(inst)
    assert v.c1_holds
    assert v.c2_holds == REFUTED and v.c3_holds == REFUTED and v.complete
    assert v.witness == ((F(0), F(1)),)
    assert inst.deficit(v.witness) == 1


def test_loomis_whitney_proved_by_search():
    maps = [[[1, 0, 0], [0, 1, 0]], [[1, 0, 0], [0, 0, 1]], [[0, 1, 0], [0, 0, 1]]]
    inst = HyblInstance(3, maps, [F(1, 2)] * 3)
    v = check_c2(inst)
    assert v.c1_holds and v.c2_holds == PROVED and v.c3_holds == PROVED
    assert not v.complete and v.candidates_tested > 0


def test_young_convolution_exponents():
    # Young: 1/p + 1/q + 1/r = 2 on R^2 with projections and the difference map
    maps = [[[1, 0]], [[0, 1]], [[1, -1]]]
    ok = HyblInstance(2, maps, [F(2, 3)] * 3)
    assert check_c2(ok).c2_holds == PROVED
    bad = HyblInstance(2, maps, [F(1), F(1), F(0)])
    assert check_c1(bad)
    assert check_c2(bad).c2_holds == PROVED
    under = HyblInstance(2, maps, [F(1, 2)] * 3)
    assert not check_c1(under)


@pytest.mark.parametrize("k", range(3, 9))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_cumulant_family_certificate(k, d):
    z1 = F(1, 2)
    v = check_paper_family(k, d, z1)
    assert v.c1_holds and v.c2_holds == PROVED and v.complete
    inst = paper_family_instance(k, d, z1, v.exponents[-1])
    assert check_c1(inst)
    general = check_c2(inst)
    assert general.c2_holds == PROVED and general.complete


@pytest.mark.parametrize("k", range(3, 13))
def test_identity_exponent_is_inverse_admissible_index(k):
    assert check_paper_family(k, 1, F(1, 2)).exponents[-1] == 1 / admissible_pk(k)


def test_mismatched_identity_exponent_fails_c1():
    v = check_paper_family(4, 1, F(1, 2), F(1, 2))
    assert not v.c1_holds and v.c2_holds == "undecided"


def test_admissible_index_and_decay():
    assert [admissible_pk(k) for k in range(3, 9)] == [4, 3, F(8, 3), F(5, 2), F(12, 5), F(7, 3)]
    with pytest.raises(ValueError):
        admissible_pk(2)
    assert decay_exponent(3, 1, F(3, 2)) == F(1, 2)
    assert decay_exponent(4, 2, 2) == 0


def test_covering_certificate_weights_sum_to_one():
    inst = paper_family_instance(5, 2, F(1, 2), F(3, 8))
    cert = covering_certificate(inst)
    assert cert is not None and sum(cert.values()) == 1
    for j, z in enumerate(inst.exponents):
        assert sum(t for fam, t in cert.items() if j in fam) <= z


_entry = st.sampled_from([-1, 0, 1])


@st.composite
def small_instances(draw):
    n = draw(st.integers(1, 3))
    maps = []
    for _ in range(draw(st.integers(1, 3))):
        rows = draw(st.integers(1, n))
        m = [[draw(_entry) for _ in range(n)] for _ in range(rows)]
        if rank(m, n) == rows:
            maps.append(m)
    if not maps:
        maps = [[[1 if c == r else 0 for c in range(n)] for r in range(n)]]
    z = [F(draw(st.integers(0, 4)), 4) for _ in maps]
    return HyblInstance(n, maps, z)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(small_instances())
def test_checker_agrees_with_brute_force(inst):
    v = check_c2(inst)
    if v.c2_holds == REFUTED:
        assert _brute_deficit(inst, v.witness) > 1e-9
    brute = _brute_violation(inst)
    if v.c2_holds == PROVED:
        assert not brute
    if brute:
        assert v.c2_holds == REFUTED


@settings(max_examples=60, deadline=None)
@given(small_instances(), st.lists(st.lists(_entry, min_size=3, max_size=3), min_size=1, max_size=3))
def test_codimension_form_equivalent_under_scaling(inst, raw):
    n = inst.ambient_dim
    basis = [v[:n] for v in raw if any(v[:n])]
    if not basis or rank(basis, n) != len(basis):
        return
    basis = tuple(tuple(F(x) for x in v) for v in basis)
    gap = inst.ambient_dim - sum(z * nj for z, nj in zip(inst.exponents, inst.target_dims))
    assert inst.codim_slack(basis) == gap - inst.deficit(basis)


def test_interchange_round_trip():
    inst = paper_family_instance(3, 2, F(1, 2), F(1, 4))
    back = parse_instance(format_instance(inst))
    assert back == inst
    text = "# Holder\nambient 1\nmap\n1  # identity\nend\nmap\n1\nend\nexponents 1/2 1/2\n"
    assert check_c2(parse_instance(text)).c2_holds == PROVED


@pytest.mark.parametrize("text", ["ambient 1\nmap\n1\n", "ambient x\n", "bogus 3\n",
                                  "ambient 1\nmap\n1\nend\nexponents 1/0\n"])
def test_interchange_errors(text):
    with pytest.raises(ValueError):
        parse_instance(text)


def test_verdict_serializes():
    payload = json.loads(check_c2(HyblInstance(2, [[[1, 0]], [[1, 0]]], [F(1), F(1)])).to_json())
    assert payload["c2_holds"] == REFUTED
    assert payload["witness"] == [["0", "1"]]
