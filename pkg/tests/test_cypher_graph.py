import random

import pytest

from struct_reward.cypher_graph import (
    GedConfig,
    PatternEdge,
    PatternGraph,
    PatternNode,
    extract_pattern_graph,
    ged,
    ged_reward,
)

from ged_oracle import exhaustive_ged
from graph_gen import random_graph


def node(labels=(), props=None, anon=False, var=None):
    return PatternNode(labels=frozenset(labels), props=props or {}, anon=anon, var=var)


def edge(src, dst, types=(), directed=True, props=None):
    return PatternEdge(src=src, dst=dst, rel_types=frozenset(types),
                       directed=directed, props=props or {})


class TestExtraction:
    def test_simple_match(self):
        g, ok = extract_pattern_graph("MATCH (a:Person)-[:KNOWS]->(b:Person) RETURN a")
        assert ok
        assert len(g.nodes) == 2 and len(g.edges) == 1
        assert g.size() == 3
        assert g.nodes[0].labels == frozenset({"person"})
        assert g.edges[0].directed and g.edges[0].rel_types == frozenset({"knows"})
        assert (g.edges[0].src, g.edges[0].dst) == (0, 1)

    def test_no_pattern_clause_is_valid_empty(self):
        g, ok = extract_pattern_graph("RETURN 1")
        assert ok
        assert g.size() == 0

    def test_variable_unification_across_clauses(self):
        query = "MATCH (a:Movie {year: 1999}) MATCH (a)<-[:ACTED_IN]-(p) RETURN p"
        g, ok = extract_pattern_graph(query)
        assert ok
        expected = PatternGraph(
            nodes=[
                node(labels=["movie"], props={"year": "1999"}, var="a"),
                node(var="p"),
            ],
            edges=[edge(1, 0, types=["acted_in"], directed=True)],
        )
        assert g == expected

    def test_garbage_fails(self):
        g, ok = extract_pattern_graph("I don't know")
        assert not ok
        assert g.size() == 0

    def test_empty_string_fails(self):
        _g, ok = extract_pattern_graph("")
        assert not ok

    def test_malformed_pattern_fails_whole_extraction(self):
        g, ok = extract_pattern_graph("MATCH (a:Person RETURN a")
        assert not ok
        assert g.size() == 0

    def test_undirected_and_left_arrows(self):
        g, ok = extract_pattern_graph("MATCH (a)-[:NEAR]-(b), (c)<-[:OWNS]-(d) RETURN a")
        assert ok
        assert not g.edges[0].directed
        # (c)<-[:OWNS]-(d) runs d -> c
        assert (g.edges[1].src, g.edges[1].dst) == (3, 2)
        assert g.edges[1].directed

    def test_bare_relationships(self):
        g, ok = extract_pattern_graph("MATCH (a)-->(b)<--(c), (d)--(e) RETURN a")
        assert ok
        assert [(e.src, e.dst, e.directed) for e in g.edges] == [
            (0, 1, True), (2, 1, True), (3, 4, False)]

    def test_variable_length_flattens_to_one_edge(self):
        g, ok = extract_pattern_graph("MATCH (a:Station)-[:CONNECTS*1..3]->(b) RETURN b")
        assert ok
        assert len(g.edges) == 1
        assert g.edges[0].rel_types == frozenset({"connects"})

    def test_where_equality_folds_into_props(self):
        g, ok = extract_pattern_graph(
            "MATCH (c:Customer) WHERE c.tier = 'gold' AND c.age > 30 RETURN c")
        assert ok
        assert g.nodes[0].props == {"tier": "gold"}
        assert g.ignored_conditions == 1

    def test_where_equality_on_relationship_var(self):
        g, ok = extract_pattern_graph(
            "MATCH (a)-[r:KNOWS]->(b) WHERE r.since = 2020 RETURN a")
        assert ok
        assert g.edges[0].props == {"since": "2020"}

    def test_inline_props_match_where_folding(self):
        g1, _ = extract_pattern_graph("MATCH (m:Movie {year: 1999}) RETURN m")
        g2, _ = extract_pattern_graph("MATCH (m:Movie) WHERE m.year = 1999 RETURN m")
        assert g1.nodes == g2.nodes

    def test_merge_and_create_patterns_count(self):
        g, ok = extract_pattern_graph(
            "MERGE (a:User {name: 'bo'}) CREATE (a)-[:OWNS]->(b:Cart) RETURN b")
        assert ok
        assert len(g.nodes) == 2 and len(g.edges) == 1

    def test_optional_match_treated_like_match(self):
        g1, _ = extract_pattern_graph("MATCH (a:P) OPTIONAL MATCH (a)-[:R]->(b) RETURN a")
        g2, _ = extract_pattern_graph("MATCH (a:P) MATCH (a)-[:R]->(b) RETURN a")
        assert g1 == g2

    def test_merge_on_create_set_is_not_a_pattern(self):
        g, ok = extract_pattern_graph(
            "MERGE (u:User {id: 7}) ON CREATE SET u.created = 1 RETURN u")
        assert ok
        assert len(g.nodes) == 1

    def test_path_variable_binding(self):
        g, ok = extract_pattern_graph("MATCH p = (a:X)-[:R]->(b:Y) RETURN p")
        assert ok
        assert len(g.nodes) == 2 and len(g.edges) == 1

    def test_multi_labels_and_type_alternatives(self):
        g, ok = extract_pattern_graph("MATCH (a:Person:Actor)-[:KNOWS|LIKES]->(b) RETURN a")
        assert ok
        assert g.nodes[0].labels == frozenset({"person", "actor"})
        assert g.edges[0].rel_types == frozenset({"knows", "likes"})

    def test_anonymous_nodes_are_distinct(self):
        g, ok = extract_pattern_graph("MATCH ()-[:R]->() RETURN 1")
        assert ok
        assert len(g.nodes) == 2
        assert all(n.anon for n in g.nodes)

    def test_deterministic_construction(self):
        query = "MATCH (a:X)-[:R]->(b:Y) MATCH (b)-[:S]->(c) RETURN a"
        assert extract_pattern_graph(query) == extract_pattern_graph(query)

    def test_self_loop_allowed(self):
        g, ok = extract_pattern_graph("MATCH (a:P)-[:SELF]->(a) RETURN a")
        assert ok
        assert len(g.nodes) == 1 and len(g.edges) == 1
        assert g.edges[0].src == g.edges[0].dst == 0


class TestGed:
    def test_identity_zero_distance(self):
        g, _ = extract_pattern_graph("MATCH (a:Person)-[:KNOWS]->(b:Person) RETURN a")
        result = ged(g, g)
        assert result.distance == 0
        assert result.exact
        assert result.edit_script == ()

    def test_empty_vs_size3_costs_three_insertions(self):
        g, _ = extract_pattern_graph("MATCH (a:Person)-[:KNOWS]->(b:Person) RETURN a")
        result = ged(PatternGraph(), g)
        assert result.distance == 3
        ops = sorted(op.op for op in result.edit_script)
        assert ops == ["ins_edge", "ins_node", "ins_node"]

    def test_single_label_substitution(self):
        g1, _ = extract_pattern_graph("MATCH (a:A)-[:R]->(b:B) RETURN a")
        g2, _ = extract_pattern_graph("MATCH (a:A)-[:R]->(c:C) RETURN a")
        result = ged(g1, g2)
        assert result.distance == 1
        assert [op.op for op in result.edit_script] == ["sub_node"]

    def test_direction_flip_costs_one(self):
        g1, _ = extract_pattern_graph("MATCH (a:A)-[:R]->(b:B) RETURN a")
        g2, _ = extract_pattern_graph("MATCH (a:A)<-[:R]-(b:B) RETURN a")
        assert ged(g1, g2).distance == 1

    def test_directedness_change_costs_one(self):
        g1, _ = extract_pattern_graph("MATCH (a:A)-[:R]->(b:B) RETURN a")
        g2, _ = extract_pattern_graph("MATCH (a:A)-[:R]-(b:B) RETURN a")
        assert ged(g1, g2).distance == 1

    def test_script_cost_sums_to_distance(self):
        rng = random.Random(7)
        for _ in range(50):
            g1 = random_graph(rng, 4)
            g2 = random_graph(rng, 4)
            result = ged(g1, g2)
            assert sum(op.cost for op in result.edit_script) == pytest.approx(result.distance)

    def test_exact_matches_exhaustive_oracle(self):
        rng = random.Random(11)
        for _ in range(120):
            g1 = random_graph(rng, 4)
            g2 = random_graph(rng, 4)
            result = ged(g1, g2)
            assert result.exact
            assert result.distance == exhaustive_ged(g1, g2)

    def test_symmetry_on_exact_path(self):
        rng = random.Random(13)
        for _ in range(60):
            g1 = random_graph(rng, 4)
            g2 = random_graph(rng, 4)
            assert ged(g1, g2).distance == ged(g2, g1).distance

    def test_triangle_inequality_on_exact_path(self):
        rng = random.Random(17)
        for _ in range(40):
            a = random_graph(rng, 3)
            b = random_graph(rng, 3)
            c = random_graph(rng, 3)
            ab = ged(a, b).distance
            bc = ged(b, c).distance
            ac = ged(a, c).distance
            assert ac <= ab + bc + 1e-9

    def test_approx_never_below_exact(self):
        rng = random.Random(19)
        approx_cfg = GedConfig(exact_node_budget=0)
        for _ in range(80):
            g1 = random_graph(rng, 5)
            g2 = random_graph(rng, 5)
            exact = ged(g1, g2)
            approx = ged(g1, g2, approx_cfg)
            assert exact.exact
            if g1.nodes or g2.nodes:
                assert not approx.exact
            assert approx.distance >= exact.distance - 1e-12

    def test_expansion_cap_falls_back_to_approx(self):
        rng = random.Random(23)
        g1 = random_graph(rng, 6)
        g2 = random_graph(rng, 6)
        result = ged(g1, g2, GedConfig(max_expansions=2))
        assert not result.exact


class TestGedReward:
    def test_identical_queries_full_reward(self):
        q = "MATCH (a:Person)-[:KNOWS]->(b:Person) RETURN a"
        assert ged_reward(q, q) == 1.0

    def test_one_label_perturbation_two_thirds(self):
        gold = "MATCH (a:Person)-[:KNOWS]->(b:Person) RETURN a"
        pred = "MATCH (a:Person)-[:KNOWS]->(b:Actor) RETURN a"
        assert ged_reward(gold, pred) == pytest.approx(1 - 1 / 3, abs=1e-9)

    def test_unparseable_pred_floors_to_zero(self):
        assert ged_reward("MATCH (a:P) RETURN a", "I don't know") == 0.0

    def test_empty_pred_vs_nonempty_gold(self):
        assert ged_reward("MATCH (a:P) RETURN a", "RETURN 1") == 0.0

    def test_both_empty_patterns_full_reward(self):
        assert ged_reward("RETURN 1", "RETURN 2") == 1.0

    def test_clamped_at_zero_for_disjoint(self):
        gold = "MATCH (a:A)-[:R]->(b:B) RETURN a"
        pred = "MATCH (x:X)-[:Z]->(y:Y) RETURN x"
        r = ged_reward(gold, pred)
        assert 0.0 <= r <= 1.0

    def test_fuzz_reward_in_unit_interval(self):
        rng = random.Random(29)
        alphabet = "MATCH ()-[]->:{}'\"0a\x00\\ RETURN"
        for _ in range(300):
            gold = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 40)))
            pred = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 40)))
            r = ged_reward(gold, pred)
            assert 0.0 <= r <= 1.0

    def test_clause_reorder_is_isomorphic(self):
        q1 = "MATCH (a:X)-[:R]->(b:Y) MATCH (c:Z) RETURN a"
        q2 = "MATCH (c:Z) MATCH (a:X)-[:R]->(b:Y) RETURN a"
        g1, _ = extract_pattern_graph(q1)
        g2, _ = extract_pattern_graph(q2)
        assert ged(g1, g2).distance == 0
