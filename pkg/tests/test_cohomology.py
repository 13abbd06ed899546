import random

import numpy as np
import pytest

from obstrukt.cohomology import (
    E_DIVISOR,
    SIGMA,
    AutElement,
    all_aut_elements,
    check_cocycle,
    closure,
    coset_divisor_table,
    distinguished_class,
    even_subgroup_order,
    galois_containment,
    h1_lattice,
    h12,
    h48,
    h96,
    is_coboundary,
    is_faithful,
    lattice_action,
    preserves_gram,
    trivial_group,
)
from obstrukt.lines import NLINES, Divisor, hyperplane_divisor, intersection_number


def test_gram_rank_17(lattice):
    assert lattice.rank == 17
    assert lattice.gram.nrows == NLINES
    assert all(lattice.gram[i, i] == -2 for i in range(NLINES))
    assert len(lattice.gram17) == 17


def test_intersection_numbers_symmetric(lattice):
    for i in range(NLINES):
        for j in range(NLINES):
            assert lattice.gram[i, j] == lattice.gram[j, i]
    assert intersection_number((0,) * 6, (0,) * 6) == -2


def test_aut_group_faithful_and_preserves_pairing(lattice):
    els = all_aut_elements()
    assert len(els) == 23040
    assert is_faithful(els)
    assert even_subgroup_order() == 11520
    for g in random.Random(0).sample(els, 40):
        assert preserves_gram(lattice_action(g, lattice), lattice)


def test_group_law_matches_line_action():
    rng = random.Random(1)
    els = all_aut_elements()
    for _ in range(50):
        g, h = rng.choice(els), rng.choice(els)
        gh = (g * h).line_permutation()
        pg, ph = g.line_permutation(), h.line_permutation()
        assert gh == tuple(pg[ph[k]] for k in range(NLINES))
        assert (g * g.inverse()).is_identity


def test_subgroup_orders():
    assert (h96().order, h48().order, h12().order, trivial_group().order) == (96, 48, 12, 1)
    assert set(h12().elements) <= set(h48().elements) <= set(h96().elements)


@pytest.mark.parametrize("H,expected", [(h96, [2]), (h48, []), (h12, []), (trivial_group, [])])
def test_h1(H, expected):
    res = h1_lattice(H())
    assert res.invariants == expected
    assert res.free_rank == 0


def test_h96_cocycle_on_all_pairs(lattice):
    H = h96()
    res = h1_lattice(H, lattice)
    mats = {g: lattice_action(g, lattice) for g in H.elements}
    assert check_cocycle(H, res.cocycle, mats)
    assert not is_coboundary(H, res.cocycle, mats)
    doubled = {g: [2 * x for x in v] for g, v in res.cocycle.items()}
    assert is_coboundary(H, doubled, mats)


def test_coboundaries_are_cocycles(lattice):
    H = h48()
    m = np.arange(17) - 8
    mats = {g: np.array(lattice_action(g, lattice)) for g in H.elements}
    c = {g: list(mats[g] @ m - m) for g in H.elements}
    assert check_cocycle(H, c, mats)
    assert is_coboundary(H, c, mats)


def test_distinguished_class(lattice):
    dc = distinguished_class(lattice)
    assert (dc["fixed"], dc["negated"]) == (48, 48)
    d = lattice.class_of(E_DIVISOR)
    img = [sum(r[j] * d[j] for j in range(17)) for r in lattice_action(SIGMA, lattice)]
    assert img == [-x for x in d]
    for g in h48().generators:
        assert [sum(r[j] * d[j] for j in range(17)) for r in lattice_action(g, lattice)] == d


def test_coset_table_lattice_identities(lattice):
    table = coset_divisor_table(lattice)
    assert len(table) == 4
    for rep, D in table.items():
        tau = rep.line_permutation()
        assert lattice.equal_classes(E_DIVISOR - E_DIVISOR.permute(tau), D)


def test_hyperplane_sections_are_linearly_equivalent(lattice):
    H1 = hyperplane_divisor([1, 2, 3], [0, 0, 0])
    H2 = hyperplane_divisor([2, 4, 6], [1, 0, 1])
    assert lattice.equal_classes(H1, H2)
    assert H1.degree() == H2.degree() == 8


def test_json_round_trips():
    g = AutElement((1, 0, 1, 0, 0, 0), (2, 1, 3, 4, 6, 5))
    assert AutElement.from_json(g.to_json()) == g
    assert AutElement.from_json({"t": [1, 0, 1, 0, 0, 0], "perm": [2, 1, 3, 4, 6, 5]}) == g
    D = Divisor.of([1, 2], [3])
    assert Divisor.from_json(D.to_json()) == D
    assert g in closure([g]).elements


def test_galois_containment_flagship(curve, delta):
    assert galois_containment(curve, delta).order == 96
