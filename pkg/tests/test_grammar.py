"""Grammar notation: parsing, printing, round trips, validation."""

import random

import pytest

from featflow import fs
from featflow.fs import atom, deref, node
from featflow.grammar import (
    GrammarSyntaxError,
    format_grammar,
    format_node,
    format_roots,
    instantiate,
    is_preterminal,
    label_of,
    parse_category,
    parse_category_sequence,
    parse_grammar,
    parse_restrictor,
    validate,
)
from cf_oracle import random_feature_grammar
from support import load_fixture

FIG1 = """
restrict slash.
S[] -> NP[agr=$1, slash=null] VP[agr=$1, slash=null].
S[] -> NP[slash=null] NP[agr=$1, slash=null] VP[agr=$1, slash=$2:NP[]].
VP[agr=$1, slash=$2] -> Vtra[agr=$1, ter=+] NP[slash=$2].
NP[agr=$1, slash=null] -> Det[ter=+] N[agr=$1, ter=+].
NP[slash=NP[]] -> .
"""


def test_fig1_parses_to_five_rules_with_final_epsilon():
    g = parse_grammar(FIG1)
    assert len(g.rules) == 5
    assert not g.rules[4].daughters
    assert label_of(g.rules[4].mother) == "np"
    assert label_of(deref(g.rules[4].mother).arcs["slash"]) == "np"
    assert g.restrictor == frozenset({("slash",)})
    assert [label_of(r.mother) for r in g.rules] == ["s", "s", "vp", "np", "np"]
    assert is_preterminal(g.rules[2].daughters[0])  # Vtra carries ter=+
    assert not is_preterminal(g.rules[2].mother)


def test_minimal_epsilon_grammar():
    g = parse_grammar("restrict slash. S -> .")
    assert len(g.rules) == 1
    assert g.rules[0].is_epsilon
    assert g.restrictor == frozenset({("slash",)})


def test_tag_shares_one_node_between_categories():
    g = parse_grammar("S -> NP[agr=$1] VP[agr=$1].")
    d1, d2 = g.rules[0].daughters
    assert deref(deref(d1).arcs["agr"]) is deref(deref(d2).arcs["agr"])


def test_tag_constraint_at_any_occurrence():
    g = parse_grammar("VP[agr=$1, slash=$2] -> Vtra[agr=$1] NP[slash=$2:NP[]].")
    mother = deref(g.rules[0].mother)
    assert label_of(deref(mother.arcs["slash"])) == "np"


def test_tag_scope_is_one_rule():
    g = parse_grammar("A -> B[f=$1:x]. C -> D[f=$1:y].")
    b = deref(g.rules[0].daughters[0])
    d = deref(g.rules[1].daughters[0])
    assert deref(b.arcs["f"]).atom == "x"
    assert deref(d.arcs["f"]).atom == "y"


def test_incompatible_tag_annotations_reported_with_position():
    with pytest.raises(GrammarSyntaxError) as err:
        parse_grammar("S -> NP[agr=$1:sg] VP[agr=$1:pl].")
    issues = err.value.issues
    assert any("incompatible" in i.message for i in issues)
    assert all(i.line >= 1 and i.col >= 1 for i in issues)


def test_duplicate_feature_in_one_avm():
    with pytest.raises(GrammarSyntaxError) as err:
        parse_grammar("S -> NP[agr=sg, agr=pl].")
    assert any("duplicate feature" in i.message for i in err.value.issues)


def test_malformed_restrictor_path():
    with pytest.raises(GrammarSyntaxError) as err:
        parse_grammar("restrict $1. S -> .")
    assert any("restrictor path malformed" in i.message for i in err.value.issues)


def test_unknown_syntax_has_line_and_column():
    with pytest.raises(GrammarSyntaxError) as err:
        parse_grammar("S -> ] .")
    issue = err.value.issues[0]
    assert issue.line == 1 and issue.col > 1
    assert "unknown syntax" in issue.message


def test_multiple_errors_collected_across_statements():
    bad = "S -> [agr=sg, agr=pl].\nX -> ] .\n"
    with pytest.raises(GrammarSyntaxError) as err:
        parse_grammar(bad)
    lines = {i.line for i in err.value.issues}
    assert {1, 2} <= lines


def test_cyclic_tag_structure_rejected():
    with pytest.raises(GrammarSyntaxError) as err:
        parse_grammar("X[f=$1:[g=$1]] -> .")
    assert any("cycl" in i.message or "cycle" in i.message for i in err.value.issues)


def test_comments_and_blank_lines():
    g = parse_grammar("% top comment\nS -> NP[].  % tail comment\nNP -> det[ter=+].\n")
    assert len(g.rules) == 2


def test_term_sugar_injects_preterminal_mark():
    g = parse_grammar("NP -> term Det[] term N[agr=$1].")
    assert all(is_preterminal(d) for d in g.rules[0].daughters)


def test_start_declaration_overrides_first_mother():
    g = parse_grammar("start VP. S -> VP[]. VP -> v[ter=+].")
    assert label_of(g.start) == "vp"
    default = parse_grammar("S -> VP[]. VP -> v[ter=+].")
    assert label_of(default.start) == "s"


def test_multi_segment_restrictor_paths():
    g = parse_grammar("restrict agr.num, slash. S -> .")
    assert g.restrictor == frozenset({("agr", "num"), ("slash",)})


def test_parse_restrictor_text():
    assert parse_restrictor("") == frozenset()
    assert parse_restrictor("slash, agr.num") == frozenset({("slash",), ("agr", "num")})
    with pytest.raises(ValueError):
        parse_restrictor("9bad")


def test_labels_lowercased_and_quoted_atoms():
    g = parse_grammar('S -> Np[orth="the Dog"].')
    d = deref(g.rules[0].daughters[0])
    assert label_of(d) == "np"
    assert deref(d.arcs["orth"]).atom == "the Dog"


def test_hash_tags_accepted_as_synonyms():
    a = parse_category("np[agr=#1, num=#1]")
    b = parse_category("np[agr=$1, num=$1]")
    assert fs.equivalent(a, b)
    n = deref(a)
    assert deref(n.arcs["agr"]) is deref(n.arcs["num"])


def test_parse_category_sequence_shares_tags():
    cats = parse_category_sequence("NP[agr=$1] VP[agr=$1]")
    assert deref(deref(cats[0]).arcs["agr"]) is deref(deref(cats[1]).arcs["agr"])


def test_end_marker_parses_only_standalone():
    cat = parse_category("$")
    assert label_of(cat) == "$"
    with pytest.raises(GrammarSyntaxError):
        parse_grammar("S -> $ .")


def test_instantiate_is_fresh_and_equivalent():
    g = parse_grammar(FIG1)
    r = g.rules[0]
    fresh = instantiate(r)
    assert fresh.mother is not r.mother
    assert fs.equivalent_many(fresh.roots(), r.roots())
    d1, d2 = fresh.daughters
    assert deref(deref(d1).arcs["agr"]) is deref(deref(d2).arcs["agr"])


# ---------------------------------------------------------------------------
# printing

def test_format_roots_tags_shared_nodes():
    shared = node(ter=atom("+"), cat=atom("det"))
    texts = format_roots([shared, shared])
    assert texts == ["#1:det[ter=+]", "#1"]
    back = parse_category_sequence(" ".join(texts))
    assert deref(back[0]) is deref(back[1])


def test_format_node_round_trips_quoted_and_empty():
    for text in ('np[orth="the dog"]', "np[]", "[f=[]]", "$"):
        reparsed = format_node(parse_category(text))
        assert fs.equivalent(parse_category(reparsed), parse_category(text))


def test_grammar_round_trip_fixtures():
    for name in ("fig1.gr", "cf-intro.gr", "agr.gr", "guard.gr", "bench13.gr", "bench21.gr"):
        g = load_fixture(name)
        again = parse_grammar(format_grammar(g), name=name)
        assert len(again.rules) == len(g.rules)
        assert again.restrictor == g.restrictor
        for r1, r2 in zip(g.rules, again.rules):
            assert fs.equivalent_many(r1.roots(), r2.roots())


def test_grammar_round_trip_random():
    rng = random.Random(7)
    for _ in range(25):
        g = parse_grammar(random_feature_grammar(rng))
        again = parse_grammar(format_grammar(g))
        for r1, r2 in zip(g.rules, again.rules):
            assert fs.equivalent_many(r1.roots(), r2.roots())


# ---------------------------------------------------------------------------
# validation

def test_validate_fig1_clean():
    assert validate(parse_grammar(FIG1)) == []


def test_validate_cf_intro_clean():
    assert validate(load_fixture("cf-intro.gr")) == []


def test_validate_missing_mother_names_rule_and_daughter():
    g = parse_grammar("S -> NP[] PP[]. NP -> det[ter=+].")
    diags = validate(g)
    errors = [d for d in diags if d.severity == "error"]
    assert len(errors) == 1
    assert errors[0].rule_id == 1
    assert "daughter 2" in errors[0].message


def test_validate_unreachable_rule_warns():
    g = parse_grammar("S -> det[ter=+]. X -> det[ter=+].")
    diags = validate(g)
    assert any(d.severity == "warning" and d.rule_id == 2 for d in diags)
    assert not any(d.severity == "error" for d in diags)


def test_validate_epsilon_rule_with_preterminal_mother_warns():
    g = parse_grammar("S -> X[]. X[ter=+] -> .")
    diags = validate(g)
    assert any("preterminal" in d.message and d.severity == "warning" for d in diags)


def test_validate_matches_direct_set_computation_on_feature_free_grammars():
    rng = random.Random(2024)
    for _ in range(30):
        nts = [f"a{i}" for i in range(rng.randint(2, 6))]
        with_rules = set(rng.sample(nts, rng.randint(1, len(nts))))
        lines, expected = [], set()
        rid = 0
        for nt in sorted(with_rules):
            rid += 1
            k = rng.randint(0, 3)
            rhs = []
            for idx in range(1, k + 1):
                if rng.random() < 0.4:
                    rhs.append("t[ter=+]")
                else:
                    sym = rng.choice(nts)
                    rhs.append(f"{sym}[]")
                    if sym not in with_rules:
                        expected.add((rid, idx))
            lines.append(f"{nt}[] -> {' '.join(rhs)}." if rhs else f"{nt}[] -> .")
        g = parse_grammar("\n".join(lines))
        got = {
            (d.rule_id, int(d.message.split()[1]))
            for d in validate(g)
            if d.severity == "error"
        }
        assert got == expected, "\n".join(lines)


def test_validate_respects_restriction():
    # without restriction the daughter cannot rewrite; with slash discarded
    # it unifies with the epsilon rule's mother
    text = "S -> NP[slash=null]. NP[slash=NP[]] -> ."
    g = parse_grammar(text)
    assert any(d.severity == "error" for d in validate(g))
    assert not any(d.severity == "error" for d in validate(g.with_restrictor(["slash"])))
