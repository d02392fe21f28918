"""FIRST and FOLLOW for unification grammars, as binding-preserving pairs.

Instead of sets of category symbols, both functions are computed as sets
of *pairs*: the left side is a category (or a category string), the right
side is a FIRST/FOLLOW value or an empty-string mark, and the two sides
live in one shared node space so that bindings between them survive.

Pairs are stored through the ``add_with_subsumption`` operator, which
keeps the set an antichain: an incoming pair subsumed by a stored one is
dropped, and an incoming pair that subsumes stored ones replaces them.
Every stored pair has the grammar's restrictor applied first; that is
what keeps the set finite for grammars whose raw category space is not.

Two evaluation modes produce equivalent fixpoints:

- ``naive``: every rule visit re-examines every stored pair.
- ``active``: each (pair, rule) combination is examined exactly once; a
  rule visit only enumerates combinations that involve at least one pair
  it has not seen, and skips entirely when there are none.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from . import fs
from .fs import Node, UnificationFailed, clone, clone_many
from .grammar import Grammar, end_category, format_roots, is_preterminal

MODES = ("naive", "active")


class LimitExceeded(Exception):
    """The iteration or pair-count guard fired before a fixpoint.

    Usually a sign that the restrictor does not collapse the category
    space into finitely many equivalence classes.
    """

    def __init__(self, kind: str, limit: int, stats: "RunStats"):
        self.kind = kind
        self.limit = limit
        self.stats = stats
        super().__init__(f"no fixpoint within {limit} {kind}")


class UnknownCategory(Exception):
    """A queried category is neither preterminal nor known to FIRST."""


class EpsilonMark:
    """Empty-string right-hand side of a pair.

    Carries the grammar's most general empty-string category; bindings
    between a pair's left side and the empty string are not kept.
    """

    __slots__ = ("category",)

    def __init__(self, category: Node):
        self.category = category

    def __repr__(self):
        return "EpsilonMark()"


_serials = itertools.count(1)


class Pair:
    """One element of a FIRST/FOLLOW solution.

    ``lhs`` is a tuple of category roots (length one except for string
    queries), ``rhs`` is a category root or an EpsilonMark, and all roots
    live in one shared space.  ``origin_rule`` and ``serial`` exist for
    agenda bookkeeping and deterministic output order.
    """

    __slots__ = ("serial", "lhs", "rhs", "origin_rule", "restricted", "events")

    def __init__(self, lhs, rhs, origin_rule=None, restricted=True):
        self.serial = next(_serials)
        self.lhs = tuple(lhs)
        self.rhs = rhs
        self.origin_rule = origin_rule
        self.restricted = restricted
        self.events = 0

    @property
    def is_epsilon(self) -> bool:
        return isinstance(self.rhs, EpsilonMark)

    def comparison_roots(self) -> tuple:
        # epsilon right-hand sides carry no bindings, so they do not compare
        return self.lhs if self.is_epsilon else (*self.lhs, self.rhs)

    def signature(self) -> tuple:
        return (len(self.lhs), self.is_epsilon)

    def __repr__(self):
        return f"Pair({format_pair(self)})"


def pair_subsumes(p: Pair, q: Pair) -> bool:
    """Joint subsumption over both sides, so cross-side sharing counts."""
    return p.signature() == q.signature() and fs.subsumes_many(
        p.comparison_roots(), q.comparison_roots()
    )


def pair_equivalent(p: Pair, q: Pair) -> bool:
    return pair_subsumes(p, q) and pair_subsumes(q, p)


class PairSet:
    """Subsumption antichain of pairs plus the active-pair registry."""

    def __init__(self):
        self.pairs = []
        self._tested = {}  # serial -> rule ids this pair was examined against
        self.added = 0
        self.rejected = 0
        self.removed = 0
        self.retired_events = 0

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def add(self, p: Pair) -> bool:
        """Antichain addition: drop a subsumed incomer, else replace what it
        subsumes.  Replacements enter fully active."""
        if not p.restricted:
            raise ValueError("only restricted pairs may be stored")
        for q in self.pairs:
            if pair_subsumes(q, p):
                self.rejected += 1
                return False
        doomed = [q for q in self.pairs if pair_subsumes(p, q)]
        if doomed:
            dead = {q.serial for q in doomed}
            self.pairs = [q for q in self.pairs if q.serial not in dead]
            for q in doomed:
                self._tested.pop(q.serial, None)
                self.retired_events += q.events
                self.removed += 1
        self.pairs.append(p)
        self._tested[p.serial] = set()
        self.added += 1
        return True

    def untested(self, rule_id: int) -> list:
        return [p for p in self.pairs if rule_id not in self._tested[p.serial]]

    def mark_tested(self, pairs, rule_id: int) -> None:
        for p in pairs:
            t = self._tested.get(p.serial)
            if t is not None:
                t.add(rule_id)


def add_with_subsumption(s: PairSet, p: Pair) -> bool:
    return s.add(p)


# ---------------------------------------------------------------------------
# instrumentation

@dataclass(frozen=True)
class IterationRow:
    iteration: int
    considered: float  # mean distinct pairs attempted per rule visit
    total: int  # pairs stored at iteration end
    attempts: int  # raw unification attempts during the iteration
    additions: int  # antichain additions during the iteration


@dataclass
class RunStats:
    mode: str
    rows: list = field(default_factory=list)
    attempts: int = 0
    events: int = 0  # (pair, rule) examination events
    wall_time: float = 0.0
    fixpoint: bool = False


class _Recorder:
    def __init__(self, mode):
        self.mode = mode
        self.rows = []
        self.attempts = 0
        self.events = 0
        self._participants = None
        self._considered = []
        self._iter_attempts = 0
        self._iter_additions = 0

    def begin_iteration(self):
        self._considered = []
        self._iter_attempts = 0
        self._iter_additions = 0

    def begin_visit(self, offered):
        self._participants = set()
        self.events += len(offered)
        for p in offered:
            p.events += 1

    def attempt(self, pair):
        self.attempts += 1
        self._iter_attempts += 1
        if self._participants is not None:
            self._participants.add(pair.serial)

    def addition(self):
        self._iter_additions += 1

    def end_visit(self):
        self._considered.append(len(self._participants))
        self._participants = None

    def end_iteration(self, total):
        visits = len(self._considered)
        mean = sum(self._considered) / visits if visits else 0.0
        self.rows.append(
            IterationRow(len(self.rows) + 1, mean, total, self._iter_attempts, self._iter_additions)
        )

    def finish(self, fixpoint, wall):
        if self._participants is not None:
            self.end_visit()
        return RunStats(self.mode, list(self.rows), self.attempts, self.events, wall, fixpoint)

    def abort(self, total):
        if self._participants is not None:
            self.end_visit()
        self.end_iteration(total)


# ---------------------------------------------------------------------------
# shared machinery

def epsilon_category(g: Grammar) -> Node | None:
    """Most general empty-string category: the generalization of all
    empty-rule mothers, restricted.  None when the grammar has none."""
    mothers = [fs.restrict(r.mother, g.restrictor) for r in g.rules if r.is_epsilon]
    if not mothers:
        return None
    out = mothers[0]
    for m in mothers[1:]:
        out = fs.generalize(out, m)
    return out


def _bind(roots, pos, pair, recorder):
    """Clone the working space jointly with a stored pair, then unify the
    root at ``pos`` with the pair's left side.

    Returns (new_roots, bound_rhs) or None on failure.  The inputs are
    never touched: all mutation happens inside the fresh clone.
    """
    extra = list(pair.lhs)
    if not pair.is_epsilon:
        extra.append(pair.rhs)
    allroots = clone_many(list(roots) + extra)
    space = allroots[: len(roots)]
    lhs = allroots[len(roots)]
    rhs = allroots[-1] if not pair.is_epsilon else None
    recorder.attempt(pair)
    try:
        fs.unify_in_place(space[pos], lhs)
    except UnificationFailed:
        return None
    return space, rhs


def _eps_bindings(roots, positions, eps_pairs, fresh, recorder):
    """Enumerate every way to bind all listed positions, simultaneously,
    to empty-string pairs.  Yields (space, used_fresh)."""

    def rec(space, k, used):
        if k == len(positions):
            yield space, used
            return
        pos = positions[k]
        for e in eps_pairs:
            got = _bind(space, pos, e, recorder)
            if got is None:
                continue
            yield from rec(got[0], k + 1, used or fresh is None or e.serial in fresh)

    yield from rec(list(roots), 0, False)


def _store(pset, lhs_roots, rhs, g, origin, recorder, eps_mark=None):
    """Restrict a product, canonicalize it, and add it through the
    antichain operator.  Canonicalization prunes vacuous leftovers from
    discarded rule context so equal claims collide under the operator."""
    roots = list(lhs_roots) + ([rhs] if rhs is not None else [])
    restricted = fs.prune_empty_leaves(fs.restrict_many(roots, g.restrictor))
    if rhs is not None:
        p = Pair(tuple(restricted[:-1]), restricted[-1], origin)
    else:
        p = Pair(tuple(restricted), eps_mark, origin)
    if pset.add(p):
        recorder.addition()
        return True
    return False


# ---------------------------------------------------------------------------
# FIRST

def compute_first(g: Grammar, mode: str = "active"):
    """Fixpoint of the FIRST pair set; returns (PairSet, RunStats).

    Preterminal daughter occurrences seed the set as fully shared
    (category, category) pairs.  Then rule passes run until one adds
    nothing: an empty rule contributes (mother, empty); a rule X -> Y1..Yk
    contributes (X', a) whenever position i's daughter unifies with the
    left side of a stored non-empty pair while every earlier daughter
    simultaneously unifies with left sides of empty pairs, and (X', empty)
    when all k daughters do.
    """
    _check_mode(mode)
    eps_cat = epsilon_category(g)
    eps_mark = EpsilonMark(eps_cat) if eps_cat is not None else None
    first = PairSet()
    rec = _Recorder(mode)
    started = time.perf_counter()
    for r in g.rules:
        for d in r.daughters:
            if is_preterminal(d):
                root = clone(d)
                _store(first, (root,), root, g, r.rule_id, rec)
    iteration = 0
    while True:
        iteration += 1
        if iteration > g.max_iterations:
            raise LimitExceeded(
                "iterations", g.max_iterations, rec.finish(False, time.perf_counter() - started)
            )
        rec.begin_iteration()
        changed = False
        for r in g.rules:
            offered = first.untested(r.rule_id) if mode == "active" else list(first.pairs)
            rec.begin_visit(offered)
            fresh = {p.serial for p in offered} if mode == "active" else None
            changed |= _first_visit(first, r, g, eps_mark, fresh, rec)
            if mode == "active":
                first.mark_tested(offered, r.rule_id)
            rec.end_visit()
            if len(first) > g.max_pairs:
                rec.abort(len(first))
                raise LimitExceeded(
                    "pairs", g.max_pairs, rec.finish(False, time.perf_counter() - started)
                )
        rec.end_iteration(len(first))
        if not changed:
            break
    return first, rec.finish(True, time.perf_counter() - started)


def _first_visit(first, rule, g, eps_mark, fresh, rec):
    if rule.is_epsilon:
        return _store(first, (rule.mother,), None, g, rule.rule_id, rec, eps_mark)
    if fresh is not None and not fresh:
        return False
    snapshot = list(first.pairs)
    eps_pairs = [p for p in snapshot if p.is_epsilon and len(p.lhs) == 1]
    drivers = [p for p in snapshot if not p.is_epsilon and len(p.lhs) == 1]
    base = rule.roots()
    k = len(rule.daughters)
    changed = False
    for i in range(k):
        prefix = list(range(1, 1 + i))
        for space, used_fresh in _eps_bindings(base, prefix, eps_pairs, fresh, rec):
            for drv in drivers:
                if fresh is not None and not used_fresh and drv.serial not in fresh:
                    continue
                got = _bind(space, 1 + i, drv, rec)
                if got is None:
                    continue
                changed |= _store(first, (got[0][0],), got[1], g, rule.rule_id, rec)
    if eps_pairs:
        for space, used_fresh in _eps_bindings(base, list(range(1, 1 + k)), eps_pairs, fresh, rec):
            if fresh is not None and not used_fresh:
                continue
            changed |= _store(first, (space[0],), None, g, rule.rule_id, rec, eps_mark)
    return changed


# ---------------------------------------------------------------------------
# FIRST of a category string (on demand)

def first_of_string(first: PairSet, g: Grammar, cats) -> PairSet:
    """FIRST for a category sequence, from an existing FIRST fixpoint.

    The sequence lives in one fresh space, so bindings across positions
    and into the result are preserved.  Results are restricted and
    antichain-combined; the left side of every result pair is the whole
    (possibly further bound) sequence.
    """
    cats = list(cats)
    if not cats:
        raise ValueError("empty category string")
    for idx, c in enumerate(cats):
        if is_preterminal(c):
            continue
        if not any(
            len(p.lhs) == 1 and fs.unifiable(c, p.lhs[0]) for p in first.pairs
        ):
            raise UnknownCategory(
                f"position {idx + 1}: {format_roots([c])[0]} is neither preterminal "
                "nor unifiable with any FIRST left side"
            )
    eps_cat = epsilon_category(g)
    eps_mark = EpsilonMark(eps_cat) if eps_cat is not None else None
    out = PairSet()
    rec = _Recorder("ondemand")
    snapshot = list(first.pairs)
    eps_pairs = [p for p in snapshot if p.is_epsilon and len(p.lhs) == 1]
    drivers = [p for p in snapshot if not p.is_epsilon and len(p.lhs) == 1]
    n = len(cats)
    for i in range(n):
        for space, _ in _eps_bindings(cats, list(range(i)), eps_pairs, None, rec):
            for drv in drivers:
                got = _bind(space, i, drv, rec)
                if got is None:
                    continue
                _store(out, tuple(got[0]), got[1], g, None, rec)
    if eps_pairs:
        for space, _ in _eps_bindings(cats, list(range(n)), eps_pairs, None, rec):
            _store(out, tuple(space), None, g, None, rec, eps_mark)
    return out


# ---------------------------------------------------------------------------
# FOLLOW

def compute_follow(g: Grammar, first: PairSet, mode: str = "active"):
    """Fixpoint of the FOLLOW pair set; returns (PairSet, RunStats).

    Seeds (start, end-marker).  For each rule X -> Y1..Yk and position i,
    the FIRST values of the suffix after i (computed inside the rule
    instance, so bindings thread through the mother) feed FOLLOW(Yi); and
    when that suffix is empty or wholly derives the empty string, every
    stored (M, f) whose M unifies with X' contributes (Y'i, f).
    """
    _check_mode(mode)
    follow = PairSet()
    rec = _Recorder(mode)
    started = time.perf_counter()
    _store(follow, (clone(g.start),), end_category(), g, None, rec)
    fsnap = list(first.pairs)
    eps_pairs = [p for p in fsnap if p.is_epsilon and len(p.lhs) == 1]
    fdrivers = [p for p in fsnap if not p.is_epsilon and len(p.lhs) == 1]
    suffix_done = set()
    iteration = 0
    while True:
        iteration += 1
        if iteration > g.max_iterations:
            raise LimitExceeded(
                "iterations", g.max_iterations, rec.finish(False, time.perf_counter() - started)
            )
        rec.begin_iteration()
        changed = False
        for r in g.rules:
            offered = follow.untested(r.rule_id) if mode == "active" else list(follow.pairs)
            rec.begin_visit(offered)
            changed |= _follow_visit(
                follow, r, g, eps_pairs, fdrivers, offered, rec, suffix_done, mode
            )
            if mode == "active":
                follow.mark_tested(offered, r.rule_id)
            rec.end_visit()
            if len(follow) > g.max_pairs:
                rec.abort(len(follow))
                raise LimitExceeded(
                    "pairs", g.max_pairs, rec.finish(False, time.perf_counter() - started)
                )
        rec.end_iteration(len(follow))
        if not changed:
            break
    return follow, rec.finish(True, time.perf_counter() - started)


def _follow_visit(follow, rule, g, eps_pairs, fdrivers, offered, rec, suffix_done, mode):
    k = len(rule.daughters)
    if k == 0:
        return False
    base = rule.roots()
    changed = False
    # FIRST of each proper suffix; its inputs never change, so the active
    # mode only runs this on the rule's first visit
    if mode == "naive" or rule.rule_id not in suffix_done:
        suffix_done.add(rule.rule_id)
        for i in range(k):
            for m in range(i + 1, k):
                between = list(range(2 + i, 1 + m))
                for space, _ in _eps_bindings(base, between, eps_pairs, None, rec):
                    for drv in fdrivers:
                        got = _bind(space, 1 + m, drv, rec)
                        if got is None:
                            continue
                        changed |= _store(
                            follow, (got[0][1 + i],), got[1], g, rule.rule_id, rec
                        )
    # the mother's FOLLOW flows to any daughter whose suffix is empty or
    # wholly derives the empty string
    drivers = offered
    if drivers:
        for i in range(k):
            tail = list(range(2 + i, 1 + k))
            if tail and not eps_pairs:
                continue
            for space, _ in _eps_bindings(base, tail, eps_pairs, None, rec):
                for fp in drivers:
                    got = _bind(space, 0, fp, rec)
                    if got is None:
                        continue
                    changed |= _store(
                        follow, (got[0][1 + i],), got[1], g, rule.rule_id, rec
                    )
    return changed


# ---------------------------------------------------------------------------
# lookup

def query(result: PairSet, cat: Node) -> list:
    """Right sides of every stored pair whose left side unifies with the
    category, with that unification's bindings applied; deduplicated up to
    equivalence, keeping the most specific of comparable values."""
    out = []
    have_eps = False
    for p in result.pairs:
        if len(p.lhs) != 1:
            continue
        if p.is_epsilon:
            if have_eps:
                continue
            roots = clone_many([cat, p.lhs[0]])
            try:
                fs.unify_in_place(roots[1], roots[0])
            except UnificationFailed:
                continue
            out.append(p.rhs)
            have_eps = True
            continue
        roots = clone_many([cat, p.lhs[0], p.rhs])
        try:
            fs.unify_in_place(roots[1], roots[0])
        except UnificationFailed:
            continue
        rhs = clone(roots[2])
        placed = False
        for idx, have in enumerate(out):
            if isinstance(have, EpsilonMark):
                continue
            if fs.subsumes(rhs, have):
                placed = True  # an equal or more specific value is kept
                break
            if fs.subsumes(have, rhs):
                out[idx] = rhs
                placed = True
                break
        if not placed:
            out.append(rhs)
    return out


# ---------------------------------------------------------------------------
# mode comparison

def pair_sets_equivalent(a: PairSet, b: PairSet) -> bool:
    """Pair-for-pair bijection up to equivalence (both are antichains, so
    matching is one-to-one whenever sizes agree)."""
    if len(a.pairs) != len(b.pairs):
        return False
    return all(any(pair_equivalent(p, q) for q in b.pairs) for p in a.pairs)


@dataclass
class ModeReport:
    grammar: str
    rules: int
    first_equivalent: bool
    follow_equivalent: bool
    first_stats: dict
    follow_stats: dict
    first_sets: dict
    follow_sets: dict

    @property
    def attempt_ratio(self) -> float:
        naive = self.first_stats["naive"].attempts + self.follow_stats["naive"].attempts
        active = self.first_stats["active"].attempts + self.follow_stats["active"].attempts
        return naive / active if active else float("inf")

    @property
    def event_ratio(self) -> float:
        naive = self.first_stats["naive"].events + self.follow_stats["naive"].events
        active = self.first_stats["active"].events + self.follow_stats["active"].events
        return naive / active if active else float("inf")


def compare_modes(g: Grammar) -> ModeReport:
    """Run both modes for FIRST and FOLLOW and check result equivalence."""
    first_sets, follow_sets = {}, {}
    first_stats, follow_stats = {}, {}
    for mode in MODES:
        fset, fstats = compute_first(g, mode)
        first_sets[mode], first_stats[mode] = fset, fstats
        oset, ostats = compute_follow(g, fset, mode)
        follow_sets[mode], follow_stats[mode] = oset, ostats
    return ModeReport(
        grammar=g.name,
        rules=len(g.rules),
        first_equivalent=pair_sets_equivalent(first_sets["naive"], first_sets["active"]),
        follow_equivalent=pair_sets_equivalent(follow_sets["naive"], follow_sets["active"]),
        first_stats=first_stats,
        follow_stats=follow_stats,
        first_sets=first_sets,
        follow_sets=follow_sets,
    )


# ---------------------------------------------------------------------------
# rendering

def format_pair(p: Pair) -> str:
    if p.is_epsilon:
        rendered = format_roots(p.lhs)
        return f"({' '.join(rendered)} , ε)"
    rendered = format_roots([*p.lhs, p.rhs])
    return f"({' '.join(rendered[:-1])} , {rendered[-1]})"


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, not {mode!r}")
