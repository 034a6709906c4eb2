from itertools import combinations_with_replacement, product

import pytest

from stabsim import generate
from stabsim.clock import ring_distance, ssme_params
from stabsim.protocol import (
    RULE_BUMP,
    RULE_CONVERGE,
    RULE_COPY,
    RULE_NORMAL,
    RULE_RESET,
    DijkstraProtocol,
    SsmeProtocol,
    make_protocol,
    ssme_guards,
    ssme_privileged,
    ssme_rule,
)


PATH2 = generate("path:2")
SSME2 = SsmeProtocol.for_graph(PATH2)  # alpha=2, ring=8


class TestPrivilege:
    def test_first_identity_threshold(self):
        assert ssme_privileged(6, 0, n=3, diam=1)

    def test_last_identity_threshold(self):
        # 2n + 2*diam*(n-1) coincides with (2n-2)(diam+1)+2
        assert ssme_privileged(10, 2, n=3, diam=1)
        assert 10 == (2 * 3 - 2) * (1 + 1) + 2

    def test_negative_register_never_privileged(self):
        for n, diam, vid in [(3, 1, 0), (5, 2, 4), (2, 1, 1)]:
            assert not ssme_privileged(-1, vid, n, diam)


class TestSsmeGuards:
    def test_both_normal_at_zero(self):
        for v in (0, 1):
            assert SSME2.enabled_rule(v, (0, 0), PATH2) == RULE_NORMAL

    def test_both_reset_on_wide_drift(self):
        for v in (0, 1):
            assert SSME2.enabled_rule(v, (5, 2), PATH2) == RULE_RESET

    def test_stem_climb_is_ordered(self):
        assert SSME2.enabled_rule(0, (-2, -1), PATH2) == RULE_CONVERGE
        assert SSME2.enabled_rule(1, (-2, -1), PATH2) is None

    def test_apply_rules(self):
        assert SSME2.apply(0, RULE_NORMAL, (7, 7), PATH2) == 0
        assert SSME2.apply(0, RULE_RESET, (5, 2), PATH2) == -2
        assert SSME2.apply(0, RULE_CONVERGE, (-2, -1), PATH2) == -1

    def test_apply_rejects_unknown_rule(self):
        with pytest.raises(ValueError):
            SSME2.apply(0, "XX", (0, 0), PATH2)


def test_guard_exclusivity_exhaustive():
    """Over every register value and every neighbor multiset up to degree 3,
    at most one guard holds, and the fused rule picks the true one."""
    params = ssme_params(3, 1)
    values = list(params.values())
    labels = (RULE_NORMAL, RULE_CONVERGE, RULE_RESET)
    for r_v in values:
        for deg in (1, 2, 3):
            for neigh in combinations_with_replacement(values, deg):
                guards = ssme_guards(r_v, neigh, params.ring)
                assert sum(guards) <= 1, (r_v, neigh, guards)
                want = None
                for label, hit in zip(labels, guards):
                    if hit:
                        want = label
                        break
                assert ssme_rule(r_v, neigh, params.ring) == want, (r_v, neigh)


def test_isolated_vertex_rule_is_a_tick():
    # No neighbors: the guards degenerate and the vertex simply ticks.
    params = ssme_params(1, 0)
    for r in params.values():
        rule = ssme_rule(r, (), params.ring)
        assert rule in (RULE_NORMAL, RULE_CONVERGE)


def test_thresholds_spread_wider_than_diameter():
    for n in range(2, 9):
        for diam in range(1, n):
            p = ssme_params(n, diam)
            thr = [2 * n + 2 * diam * i for i in range(n)]
            for i, j in product(range(n), repeat=2):
                if i != j:
                    assert ring_distance(thr[i], thr[j], p.ring) > diam
            for t in thr:
                assert 0 < t <= p.ring - 1


class TestDijkstra:
    def test_requires_enough_states(self):
        with pytest.raises(ValueError):
            DijkstraProtocol(3, 3)

    def test_all_equal_gives_root_token(self):
        g = generate("ring:3")
        p = DijkstraProtocol.for_graph(g, 4)
        assert p.privileged_vertices((0, 0, 0), g) == (0,)
        assert p.enabled_rule(0, (0, 0, 0), g) == RULE_BUMP

    def test_distinct_values_give_two_tokens(self):
        g = generate("ring:3")
        p = DijkstraProtocol.for_graph(g, 4)
        assert p.privileged_vertices((0, 1, 2), g) == (1, 2)
        assert not p.is_legitimate((0, 1, 2), g)

    def test_copy_action(self):
        g = generate("ring:3")
        p = DijkstraProtocol.for_graph(g, 4)
        assert p.apply(1, RULE_COPY, (0, 1, 2), g) == 0
        assert p.apply(0, RULE_BUMP, (3, 3, 3), g) == 0

    def test_rejects_non_ring_graph(self):
        g = generate("path:3")
        with pytest.raises(ValueError, match="ring"):
            make_protocol("dijkstra", g)


def test_make_protocol():
    g = generate("ring:4")
    assert make_protocol("ssme", g).name == "ssme"
    assert make_protocol("dijkstra", g).k == 5
    with pytest.raises(ValueError):
        make_protocol("nope", g)


def test_protocol_graph_mismatch():
    g4 = generate("ring:4")
    g5 = generate("ring:5")
    p = SsmeProtocol.for_graph(g4)
    with pytest.raises(ValueError):
        p.check_graph(g5)
