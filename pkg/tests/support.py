"""Shared helpers for the test suite."""

from featflow import label_of, parse_grammar
from featflow.cli import fixture_path
from cf_oracle import END, EPSILON


def load_fixture(name, restrictor=None):
    with open(fixture_path(name), encoding="utf-8") as fh:
        g = parse_grammar(fh.read(), name=name)
    if restrictor is not None:
        g = g.with_restrictor(restrictor)
    return g


def project(pairset):
    """Collapse a pair set onto bare labels: {lhs label: set of rhs labels,
    EPSILON for empty marks, END for the end-of-input category}."""
    out = {}
    for p in pairset:
        if len(p.lhs) != 1:
            continue
        lhs = label_of(p.lhs[0])
        if p.is_epsilon:
            rhs = EPSILON
        else:
            rhs = END if label_of(p.rhs) == "$" else label_of(p.rhs)
        out.setdefault(lhs, set()).add(rhs)
    return out
