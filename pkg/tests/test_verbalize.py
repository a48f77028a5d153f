import pytest

from causechain.graphs import ci, cluster_mecs, enumerate_dags
from causechain.hypotheses import Hypothesis
from causechain.parsing import parse_premise
from causechain.verbalize import (
    DEFAULT_PHRASES,
    PARAPHRASE_PHRASES,
    NameScheme,
    PhraseBook,
    default_scheme,
    name_list,
    paraphrase,
    phrases_from_file,
    refactor_names,
    refactored_scheme,
    rename_text,
    scheme_from_file,
    verbalize_hypothesis,
    verbalize_premise,
)

COLLIDER_PREMISE = (
    "Suppose there is a closed system of 3 variables, A, B and C. "
    "All the statistical relations among these 3 variables are as follows: "
    "A correlates with C. B correlates with C. "
    "However, A is independent of B."
)


def test_name_schemes():
    assert default_scheme(3).names == ("A", "B", "C")
    assert refactored_scheme(3).names == ("Z", "Y", "X")
    assert default_scheme(6)[5] == "F"
    with pytest.raises(ValueError):
        NameScheme(("A", "A"))


def test_scheme_from_file(tmp_path):
    p = tmp_path / "names.txt"
    p.write_text("north\nsouth\n\neast\n")
    assert scheme_from_file(str(p)).names == ("north", "south", "east")


def test_name_list():
    assert name_list(["A"]) == "A"
    assert name_list(["A", "B"]) == "A and B"
    assert name_list(["A", "B", "C"]) == "A, B and C"
    assert name_list(["B", "D", "E"]) == "B, D and E"


def test_premise_collider():
    text = verbalize_premise([ci(0, 1)], 3, default_scheme(3))
    assert text == COLLIDER_PREMISE


def test_premise_no_independencies():
    text = verbalize_premise([], 2, default_scheme(2))
    assert text == (
        "Suppose there is a closed system of 2 variables, A and B. "
        "All the statistical relations among these 2 variables are as "
        "follows: A correlates with B."
    )
    assert "However" not in text


def test_premise_all_independent():
    # No correlation sentences means no However marker either.
    text = verbalize_premise([ci(0, 1)], 2, default_scheme(2))
    assert text.endswith("as follows: A is independent of B.")
    assert "However" not in text


def test_premise_conditional_sets():
    text = verbalize_premise([ci(0, 2, 1)], 3, default_scheme(3))
    assert "However, A and C are independent given B." in text
    text = verbalize_premise([ci(0, 3, 1, 2)], 4, default_scheme(4))
    assert "A and D are independent given B and C." in text
    text = verbalize_premise([ci(0, 4, 1, 2, 3)], 5, default_scheme(5))
    assert "A and E are independent given B, C and D." in text


def test_premise_statement_order():
    # Pairs ascending, then conditioning set; However only on the first.
    text = verbalize_premise([ci(1, 2, 0), ci(0, 1), ci(0, 2, 1)], 3,
                             default_scheme(3))
    body = text.split("as follows: ")[1]
    assert body == (
        "A correlates with C. B correlates with C. "
        "However, A is independent of B. A and C are independent given B. "
        "B and C are independent given A."
    )


def test_premise_rejects_bad_statements():
    with pytest.raises(ValueError):
        verbalize_premise([ci(0, 1), ci(0, 1)], 3, default_scheme(3))
    with pytest.raises(IndexError):
        verbalize_premise([ci(0, 5)], 3, default_scheme(3))


def test_hypothesis_default_phrases():
    names = default_scheme(4)
    cases = {
        ("direct_cause", 0, 2): "A directly affects C.",
        ("together_cause", 0, 1): "A and B together cause some other "
                                  "variable(s).",
        ("common_cause", 1, 3): "Some variable(s) cause both B and D.",
        ("mediation", 2, 0): "C influences A through some mediator(s).",
    }
    for (kind, a, b), expected in cases.items():
        assert verbalize_hypothesis(Hypothesis(kind, a, b), names) == expected


def test_hypothesis_paraphrase_phrases():
    names = default_scheme(3)
    h = Hypothesis("direct_cause", 0, 2)
    assert verbalize_hypothesis(h, names, PARAPHRASE_PHRASES) == \
        "A directly causes C."
    h = Hypothesis("mediation", 0, 1)
    assert verbalize_hypothesis(h, names, PARAPHRASE_PHRASES) == (
        "There exists at least one mediator (i.e., intermediate variable) "
        "between A and B."
    )


def test_phrasebook_requires_all_kinds():
    with pytest.raises(ValueError):
        PhraseBook(hypothesis={"direct_cause": "{a} pushes {b}."})


def test_phrases_from_file(tmp_path):
    p = tmp_path / "phrases.txt"
    p.write_text(
        "# alternative wordings\n"
        "direct_cause: {A} pushes {B}.\n"
        "together_cause: {A} and {B} share an effect.\n"
        "common_cause: {A} and {B} share a cause.\n"
        "mediation: {A} reaches {B} indirectly.\n"
    )
    book = phrases_from_file(str(p))
    h = Hypothesis("direct_cause", 0, 1)
    assert verbalize_hypothesis(h, default_scheme(2), book) == "A pushes B."


def test_rename_text():
    assert rename_text("A correlates with B.", {"A": "Z", "B": "Y"}) == \
        "Z correlates with Y."
    # Single pass: swaps do not chain.
    assert rename_text("A and B", {"A": "B", "B": "A"}) == "B and A"
    # Whole words only.
    assert rename_text("A correlates with AB.", {"A": "Z"}) == \
        "Z correlates with AB."
    with pytest.raises(ValueError):
        rename_text("A B", {"A": "X", "B": "X"})


def test_refactor_names_round_trip():
    scheme = refactored_scheme(3)
    moved = refactor_names(COLLIDER_PREMISE, scheme)
    assert "Z, Y and X" in moved
    assert "Z correlates with X." in moved
    back = refactor_names(moved, default_scheme(3), source=scheme.names)
    assert back == COLLIDER_PREMISE


def test_refactored_names_disjoint_from_default():
    # The rewrite must never collide with untouched tokens for the sizes
    # the benchmark uses.
    for n in range(2, 7):
        assert not set(default_scheme(n).names) & set(refactored_scheme(n).names)


def test_paraphrase_swaps_hypothesis_only():
    record = {
        "kind": "together_cause", "a": 0, "b": 1,
        "names": default_scheme(3),
        "premise": COLLIDER_PREMISE,
        "hypothesis": "A and B together cause some other variable(s).",
        "label": 1,
    }
    out = paraphrase(record)
    assert out["hypothesis"] == (
        "There exists at least one collider (i.e., common effect) of A and B."
    )
    assert out["premise"] == record["premise"]
    assert out["label"] == record["label"]
    assert record["hypothesis"].startswith("A and B together")


def test_paraphrase_rejects_identity_book():
    record = {"kind": "direct_cause", "a": 0, "b": 1,
              "names": default_scheme(2), "hypothesis": "A directly affects B."}
    with pytest.raises(ValueError):
        paraphrase(record, DEFAULT_PHRASES)
    with pytest.raises(ValueError):
        paraphrase({**record, "kind": "nonsense"})


@pytest.mark.parametrize("n", [2, 3, 4])
def test_premise_round_trip_all_mecs(n):
    names = default_scheme(n)
    for mec in cluster_mecs(enumerate_dags(n)):
        text = verbalize_premise(mec.ci_set, n, names)
        parsed = parse_premise(text, n=n, names=names.names)
        assert parsed.ci_set == mec.ci_set
        assert parsed.names == names.names
        marginal = {(s.x, s.y) for s in mec.ci_set if not s.z}
        expected_corr = {(x, y) for x in range(n) for y in range(x + 1, n)
                         if (x, y) not in marginal}
        assert set(parsed.correlations) == expected_corr
