import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from struct_reward.corpus import (
    DatasetError,
    extract_answer,
    load_dataset,
    parse_dataset_lines,
    serialize_dataset,
)


def record(**overrides):
    base = {
        "id": "s1",
        "question": "how many users?",
        "schema": "CREATE TABLE users (id int)",
        "dialect": "sql",
        "gold": "SELECT COUNT(*) FROM users",
        "candidates": ["```sql\nSELECT COUNT(*) FROM users\n```"],
    }
    base.update(overrides)
    return base


class TestExtractAnswer:
    def test_think_block_then_fenced(self):
        out = extract_answer("<think>reasoning</think> ```sql\nSELECT 1\n```", "sql")
        assert out.query == "SELECT 1"
        assert out.had_think_block
        assert out.extraction_note == "fenced_block"

    def test_no_rule_matches(self):
        out = extract_answer("I cannot answer.", "sql")
        assert out.query is None
        assert out.extraction_note == "none"
        assert not out.had_think_block

    def test_last_fenced_block_wins(self):
        completion = (
            "draft:\n```sql\nSELECT 1\n```\nfinal:\n```sql\nSELECT 2\n```"
        )
        out = extract_answer(completion, "sql")
        assert out.query == "SELECT 2"

    def test_untagged_fence_accepted(self):
        out = extract_answer("```\nSELECT a FROM t\n```", "sql")
        assert out.query == "SELECT a FROM t"
        assert out.extraction_note == "fenced_block"

    def test_wrong_tag_fence_used_only_as_fallback(self):
        wrong_only = "```python\nSELECT 9\n```"
        out = extract_answer(wrong_only, "sql")
        assert out.query == "SELECT 9"
        both = "```python\nSELECT 9\n```\n```sql\nSELECT 1\n```"
        assert extract_answer(both, "sql").query == "SELECT 1"

    def test_bare_tail_sql(self):
        out = extract_answer("  SELECT a FROM t WHERE x = 1", "sql")
        assert out.extraction_note == "bare_tail"
        assert out.query == "SELECT a FROM t WHERE x = 1"

    def test_bare_tail_cypher_keywords(self):
        for q in ("MATCH (a) RETURN a", "OPTIONAL MATCH (a) RETURN a",
                  "CREATE (a:X)", "MERGE (a:X)", "CALL db.labels()", "RETURN 1"):
            out = extract_answer(q, "cypher")
            assert out.query == q
            assert out.extraction_note == "bare_tail"

    def test_sql_keywords_not_valid_for_cypher_tail(self):
        assert extract_answer("SELECT a FROM t", "cypher").query is None

    def test_cypher_fence_tag(self):
        out = extract_answer("```cypher\nMATCH (a) RETURN a\n```", "cypher")
        assert out.query == "MATCH (a) RETURN a"

    def test_think_block_only(self):
        out = extract_answer("<think>hmm</think>", "sql")
        assert out.query is None
        assert out.had_think_block

    def test_fenced_block_inside_think_is_stripped(self):
        completion = "<think>```sql\nSELECT draft\n```</think>\nSELECT final FROM t"
        out = extract_answer(completion, "sql")
        assert out.query == "SELECT final FROM t"
        assert out.extraction_note == "bare_tail"

    def test_unknown_dialect_rejected(self):
        with pytest.raises(ValueError, match="dialect"):
            extract_answer("SELECT 1", "sparql")

    def test_empty_fenced_block_falls_through(self):
        out = extract_answer("```sql\n\n```", "sql")
        assert out.query is None

    @settings(max_examples=300, deadline=None)
    @given(st.text(max_size=200), st.sampled_from(["sql", "cypher"]))
    def test_note_none_iff_query_absent(self, completion, dialect):
        out = extract_answer(completion, dialect)
        assert (out.query is None) == (out.extraction_note == "none")

    @settings(max_examples=200, deadline=None)
    @given(
        st.sampled_from(["sql", "cypher"]),
        st.booleans(),
        st.sampled_from(["fenced", "bare", "none"]),
        st.sampled_from(["SELECT a FROM t", "WITH x AS (SELECT 1) SELECT x",
                         "MATCH (a) RETURN a", "RETURN 1"]),
        st.text(alphabet="abc \n", max_size=20),
    )
    def test_idempotent_on_extracted_query(self, dialect, think, shape, query, prose):
        if dialect == "cypher" and query.upper().startswith(("SELECT", "WITH")):
            query = "MATCH (a) RETURN a"
        if dialect == "sql" and query.upper().startswith(("MATCH", "RETURN")):
            query = "SELECT a FROM t"
        parts = []
        if think:
            parts.append(f"<think>{prose}</think>")
        if shape == "fenced":
            parts.append(f"{prose}```{dialect}\n{query}\n```")
        elif shape == "bare":
            parts.append(query)
        else:
            parts.append(prose if not prose.strip() or True else prose)
        completion = "\n".join(parts)
        first = extract_answer(completion, dialect)
        if first.query is not None:
            second = extract_answer(first.query, dialect)
            assert second.query == first.query


class TestDataset:
    def test_load_two_records(self, tmp_path):
        path = tmp_path / "d.jsonl"
        lines = [json.dumps(record(id="a")), json.dumps(record(id="b"))]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        samples = load_dataset(path)
        assert [s.id for s in samples] == ["a", "b"]
        assert samples[0].schema_text.startswith("CREATE TABLE")

    def test_missing_gold_names_line_one(self, tmp_path):
        path = tmp_path / "d.jsonl"
        bad = record()
        del bad["gold"]
        path.write_text(json.dumps(bad) + "\n", encoding="utf-8")
        with pytest.raises(DatasetError, match=r"line 1.*gold"):
            load_dataset(path)

    def test_empty_gold_rejected(self):
        with pytest.raises(DatasetError, match="gold"):
            parse_dataset_lines([json.dumps(record(gold="   "))])

    def test_bad_json_names_line(self):
        with pytest.raises(DatasetError, match="line 2"):
            parse_dataset_lines([json.dumps(record()), "{not json"])

    def test_empty_candidates_rejected(self):
        with pytest.raises(DatasetError, match="candidates"):
            parse_dataset_lines([json.dumps(record(candidates=[]))])

    def test_bad_dialect_rejected(self):
        with pytest.raises(DatasetError, match="dialect"):
            parse_dataset_lines([json.dumps(record(dialect="sparql"))])

    def test_expected_dialect_lists_offenders(self):
        lines = [json.dumps(record(id="a")),
                 json.dumps(record(id="c", dialect="cypher", gold="MATCH (a) RETURN a"))]
        with pytest.raises(DatasetError, match="c"):
            parse_dataset_lines(lines, expected_dialect="sql")

    def test_round_trip_preserves_unknown_keys(self, tmp_path):
        rec = record(db_id="warehouse", note={"x": 1})
        text = json.dumps(rec, ensure_ascii=False)
        samples = parse_dataset_lines([text])
        assert samples[0].extras == {"db_id": "warehouse", "note": {"x": 1}}
        out = serialize_dataset(samples)
        assert json.loads(out) == rec

    def test_canonical_round_trip_byte_identity(self, tmp_path):
        samples = parse_dataset_lines(
            [json.dumps(record(id=f"s{i}")) for i in range(5)])
        text = serialize_dataset(samples)
        again = serialize_dataset(parse_dataset_lines(text.splitlines()))
        assert text == again

    def test_candidate_order_preserved(self):
        rec = record(candidates=["c0", "c1", "c2"])
        sample = parse_dataset_lines([json.dumps(rec)])[0]
        assert sample.candidates == ("c0", "c1", "c2")
