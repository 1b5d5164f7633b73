from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fermivqe.lattice import (
    DOWN,
    UP,
    Bond,
    GeometryError,
    build_geometry,
    edge_color,
    geometry_from_dict,
    is_bipartite,
    register_map,
)


@pytest.mark.parametrize(
    "kind,rows,cols,nbonds",
    [("chain", 1, 12, 11), ("ladder", 2, 6, 16), ("rectangle", 3, 4, 17), ("chain", 1, 2, 1), ("chain", 1, 6, 5), ("ladder", 2, 3, 7)],
)
def test_bond_counts(kind, rows, cols, nbonds):
    g = build_geometry(kind, rows, cols)
    assert g.num_bonds == nbonds
    assert g.num_sites == rows * cols


def test_bonds_are_canonical_and_unique():
    g = build_geometry("rectangle", 3, 4)
    assert all(b.a < b.b for b in g.bonds)
    assert len(set(g.bonds)) == g.num_bonds
    assert Bond(3, 1) == Bond(1, 3)


@pytest.mark.parametrize(
    "args",
    [("chain", 1, 1), ("chain", 2, 4), ("ladder", 3, 4), ("triangle", 1, 4), ("rectangle", 0, 4)],
)
def test_invalid_geometry(args):
    with pytest.raises(GeometryError):
        build_geometry(*args)


def test_custom_geometry_validation():
    with pytest.raises(GeometryError):
        build_geometry("custom", bonds=[(0, 1), (1, 0)], num_sites=3)
    with pytest.raises(GeometryError):
        build_geometry("custom", bonds=[(0, 5)], num_sites=3)
    with pytest.raises((GeometryError, ValueError)):
        build_geometry("custom", bonds=[(1, 1)], num_sites=3)
    g = build_geometry("custom", bonds=[(0, 1), (1, 2), (2, 3)], num_sites=4)
    assert geometry_from_dict(g.to_dict()) == g


def test_chain_schedule_alternates():
    sched = edge_color(build_geometry("chain", 1, 12))
    assert sched.depth == 2
    first, second = sched.steps
    assert [(b.a, b.b) for b in first] == [(k, k + 1) for k in range(0, 11, 2)]
    assert [(b.a, b.b) for b in second] == [(k, k + 1) for k in range(1, 11, 2)]


@pytest.mark.parametrize("kind,rows,cols,depth", [("ladder", 2, 6, 3), ("rectangle", 3, 4, 4), ("ladder", 2, 3, 3), ("chain", 1, 6, 2)])
def test_schedule_depth_matches_max_degree(kind, rows, cols, depth):
    g = build_geometry(kind, rows, cols)
    assert is_bipartite(g)
    assert edge_color(g).depth == depth == g.max_degree


def _check_proper(g, sched):
    seen = set()
    for step in sched.steps:
        used = set()
        for b in step:
            assert b.a not in used and b.b not in used
            used.update((b.a, b.b))
        seen.update(step)
    assert seen == set(g.bonds)
    assert sum(len(s) for s in sched.steps) == g.num_bonds


@st.composite
def random_graphs(draw):
    n = draw(st.integers(2, 9))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=len(pairs), unique=True))
    return build_geometry("custom", bonds=chosen, num_sites=n)


@given(random_graphs())
def test_edge_coloring_is_proper_and_near_optimal(g):
    sched = edge_color(g)
    _check_proper(g, sched)
    assert g.max_degree <= sched.depth <= g.max_degree + 1
    if is_bipartite(g):
        assert sched.depth == g.max_degree


def test_triangle_needs_three_colours():
    g = build_geometry("custom", bonds=[(0, 1), (1, 2), (0, 2)], num_sites=3)
    assert not is_bipartite(g)
    assert edge_color(g).depth == 3


def test_register_maps():
    chain6 = build_geometry("chain", 1, 6)
    assert register_map(chain6, spinful=True).mode_of(2, DOWN) == 5
    chain12 = build_geometry("chain", 1, 12)
    reg = register_map(chain12)
    assert [reg.mode_of(j) for j in range(12)] == list(range(12))
    ladder = build_geometry("ladder", 2, 6)
    assert register_map(ladder).mode_of(6) == 6
    snake = register_map(ladder, ordering="snake")
    assert snake.mode_of(11) == 6 and snake.mode_of(6) == 11
    blocked = register_map(chain6, spinful=True, ordering="spin_blocked")
    assert blocked.mode_of(2, UP) == 2 and blocked.mode_of(2, DOWN) == 8


@given(st.sampled_from([("chain", 1, 7), ("ladder", 2, 4), ("rectangle", 3, 3)]), st.booleans(), st.sampled_from(["row_major", "snake", "spin_blocked"]))
def test_register_map_is_bijective(shape, spinful, ordering):
    g = build_geometry(*shape)
    if ordering == "spin_blocked" and not spinful:
        with pytest.raises(GeometryError):
            register_map(g, spinful=spinful, ordering=ordering)
        return
    reg = register_map(g, spinful=spinful, ordering=ordering)
    spins = (UP, DOWN) if spinful else (UP,)
    modes = [reg.mode_of(s, sp) for s in range(g.num_sites) for sp in spins]
    assert sorted(modes) == list(range(reg.num_modes))
