"""Independent context-free FIRST/FOLLOW oracle and random CF grammars.

The oracle works on plain symbol tuples and never touches the package's
pair machinery, so it can cross-check the engine's projection onto bare
labels.  FIRST follows the textbook iterate-until-stable procedure;
FOLLOW applies the standard rules to every grammar symbol (terminals
included, since the pair engine computes those too).
"""

import random

EPSILON = "<eps>"
END = "$"


def cf_first(rules, terminals):
    symbols = set(terminals)
    for lhs, rhs in rules:
        symbols.add(lhs)
        symbols.update(rhs)
    first = {s: set() for s in symbols}
    for t in terminals:
        first[t].add(t)
    changed = True
    while changed:
        changed = False
        for lhs, rhs in rules:
            target = first[lhs]
            before = len(target)
            if not rhs:
                target.add(EPSILON)
            else:
                for sym in rhs:
                    target |= first[sym] - {EPSILON}
                    if EPSILON not in first[sym]:
                        break
                else:
                    target.add(EPSILON)
            changed |= len(target) != before
    return first


def cf_first_string(first, syms):
    out = set()
    for sym in syms:
        out |= first[sym] - {EPSILON}
        if EPSILON not in first[sym]:
            return out
    out.add(EPSILON)
    return out


def cf_follow(rules, start, first):
    symbols = set(first)
    follow = {s: set() for s in symbols}
    follow[start].add(END)
    changed = True
    while changed:
        changed = False
        for lhs, rhs in rules:
            for i, sym in enumerate(rhs):
                target = follow[sym]
                before = len(target)
                tail_first = cf_first_string(first, rhs[i + 1 :])
                target |= tail_first - {EPSILON}
                if EPSILON in tail_first:
                    target |= follow[lhs]
                changed |= len(target) != before
    return follow


def leftmost_terminals(rules, symbol, terminals, max_steps=50000):
    """Terminals (or EPSILON) derivable leftmost from ``symbol``, by
    breadth-first leftmost rewriting; short witnesses come first, so small
    grammars saturate well inside the step budget."""
    from collections import deque

    by_lhs = {}
    for lhs, rhs in rules:
        by_lhs.setdefault(lhs, []).append(tuple(rhs))
    out = set()
    seen = set()
    frontier = deque([(symbol,)])
    steps = 0
    while frontier and steps < max_steps:
        form = frontier.popleft()
        steps += 1
        if form in seen:
            continue
        seen.add(form)
        if not form:
            out.add(EPSILON)
            continue
        head = form[0]
        if head in terminals:
            out.add(head)
            continue
        for rhs in by_lhs.get(head, []):
            new = rhs + form[1:]
            if len(new) <= 24 and new not in seen:
                frontier.append(new)
    return out


# ---------------------------------------------------------------------------
# generators (emit both oracle rules and engine notation)

def random_cf_grammar(rng: random.Random):
    """A feature-free grammar: labels plus the preterminal mark only.

    Every nonterminal gets at least one rule, so the engine's validation
    is clean by construction; empty rules appear with fair probability.
    """
    nts = [f"n{i}" for i in range(rng.randint(2, 8))]
    ts = [f"t{i}" for i in range(rng.randint(1, 5))]
    rules = []
    for nt in nts:
        for _ in range(rng.randint(1, 2)):
            if rng.random() < 0.25:
                rules.append((nt, ()))
            else:
                k = rng.randint(1, 4)
                rhs = tuple(
                    rng.choice(ts) if rng.random() < 0.45 else rng.choice(nts)
                    for _ in range(k)
                )
                rules.append((nt, rhs))
    # keep within budget but preserve one rule per nonterminal
    while len(rules) > 15:
        haves = {}
        for r in rules:
            haves[r[0]] = haves.get(r[0], 0) + 1
        victim = next((i for i in range(len(rules) - 1, -1, -1) if haves[rules[i][0]] > 1), None)
        if victim is None:
            rules = rules[:15]
            break
        rules.pop(victim)
    terminals = {s for _, rhs in rules for s in rhs if s in set(ts)}
    lines = []
    for lhs, rhs in rules:
        if not rhs:
            lines.append(f"{lhs}[] -> .")
        else:
            parts = [f"{s}[ter=+]" if s in terminals else f"{s}[]" for s in rhs]
            lines.append(f"{lhs}[] -> {' '.join(parts)}.")
    return "\n".join(lines) + "\n", rules, terminals, nts[0]


def random_feature_grammar(rng: random.Random) -> str:
    """A small agreement-feature grammar, guaranteed to validate cleanly
    and to terminate (all feature values are atomic)."""
    labels = [f"x{i}" for i in range(rng.randint(2, 5))]
    terms = [f"t{i}" for i in range(rng.randint(1, 3))]
    lines = []
    for lab in labels:
        for _ in range(rng.randint(1, 2)):
            if rng.random() < 0.2:
                lines.append(f"{lab}[] -> .")
                continue
            k = rng.randint(1, 3)
            share_pos = rng.randrange(k) if rng.random() < 0.5 else -1
            rhs = []
            for j in range(k):
                if rng.random() < 0.45:
                    sym, is_term = rng.choice(terms), True
                else:
                    sym, is_term = rng.choice(labels), False
                feats = []
                if j == share_pos:
                    feats.append("agr=$1")
                elif rng.random() < 0.3:
                    feats.append(f"agr={rng.choice(('sg', 'pl'))}")
                if is_term:
                    feats.append("ter=+")
                rhs.append(f"{sym}[{', '.join(feats)}]")
            mother = f"{lab}[agr=$1]" if share_pos >= 0 else f"{lab}[]"
            lines.append(f"{mother} -> {' '.join(rhs)}.")
    return "\n".join(lines) + "\n"
