"""Feature structure algebra: attribute-value graphs with structure sharing.

A feature structure is a rooted, finite, acyclic graph.  Each node is
either an atom (a named leaf) or a complex node carrying a mapping from
feature names to child nodes.  An empty complex node is the most general
value.  Two paths that reach the same node form a reentrancy; reentrancy
is part of a structure's identity and matters for unification,
subsumption, generalization and copying.

Several operations work on *spaces*: collections of roots whose reachable
graphs may share nodes (a rule's mother and daughters, or the two sides of
a FIRST/FOLLOW pair).  Destructive unification propagates bindings through
the whole space; on failure the space is trash and must be discarded.
Fully built structures are treated as immutable and are safe to share.
"""

from __future__ import annotations

import re

FeaturePath = tuple  # tuple[str, ...]

_FEATURE_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class UnificationFailed(Exception):
    """No common extension exists (or one would have to be cyclic)."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class Node:
    """One graph node: ``atom`` set on leaves, ``arcs`` on complex nodes.

    After destructive unification a node may carry a forwarding pointer;
    ``deref`` must be applied before inspecting ``atom`` or ``arcs``.
    """

    __slots__ = ("atom", "arcs", "forward")

    def __init__(self, atom=None, arcs=None):
        self.atom = atom
        self.arcs = arcs if atom is None and arcs is not None else (None if atom else {})
        self.forward = None

    def __repr__(self):
        n = deref(self)
        if n.atom is not None:
            return f"Node(atom={n.atom!r})"
        return f"Node(arcs=[{', '.join(sorted(n.arcs))}])"


def atom(name: str) -> Node:
    return Node(atom=name)


def empty() -> Node:
    return Node()


def node(**arcs: Node) -> Node:
    """Complex node from keyword features (test and fixture convenience)."""
    return Node(arcs=dict(arcs))


def complex_node(arcs: dict) -> Node:
    return Node(arcs=dict(arcs))


def deref(n: Node) -> Node:
    while n.forward is not None:
        if n.forward.forward is not None:
            n.forward = n.forward.forward
        n = n.forward
    return n


def valid_feature(name: str) -> bool:
    return bool(_FEATURE_RE.match(name))


def make_path(text: str) -> FeaturePath:
    """Parse ``a.b.c`` into a feature path, validating each segment."""
    segments = tuple(text.split("."))
    if not segments or any(not valid_feature(s) for s in segments):
        raise ValueError(f"malformed feature path: {text!r}")
    return segments


def make_restrictor(paths) -> frozenset:
    """Build a restrictor from path tuples or dotted strings."""
    out = set()
    for p in paths:
        out.add(make_path(p) if isinstance(p, str) else tuple(p))
    for p in out:
        if not p or any(not valid_feature(s) for s in p):
            raise ValueError(f"malformed feature path: {p!r}")
    return frozenset(out)


# ---------------------------------------------------------------------------
# unification

def _union(a: Node, b: Node) -> None:
    a = deref(a)
    b = deref(b)
    if a is b:
        return
    if a.atom is not None and b.atom is not None:
        if a.atom != b.atom:
            raise UnificationFailed("clash", f"{a.atom} / {b.atom}")
        a.forward = b
        return
    if a.atom is not None:
        if b.arcs:
            raise UnificationFailed("kind", f"atom {a.atom} against complex node")
        b.forward = a
        return
    if b.atom is not None:
        if a.arcs:
            raise UnificationFailed("kind", f"atom {b.atom} against complex node")
        a.forward = b
        return
    a.forward = b
    pending = a.arcs
    a.arcs = {}
    for feat, child in pending.items():
        tgt = deref(b)
        if tgt.atom is not None:
            raise UnificationFailed("kind", f"atom {tgt.atom} against complex node")
        have = tgt.arcs.get(feat)
        if have is None:
            tgt.arcs[feat] = child
        else:
            _union(child, have)


def _cyclic(roots) -> bool:
    # iterative tri-color DFS; nodes may be revisited through sharing
    done = set()
    on_path = set()
    for root in roots:
        stack = [(deref(root), False)]
        while stack:
            n, leaving = stack.pop()
            if leaving:
                on_path.discard(id(n))
                done.add(id(n))
                continue
            if id(n) in done:
                continue
            if id(n) in on_path:
                return True
            on_path.add(id(n))
            stack.append((n, True))
            if n.atom is None:
                for child in n.arcs.values():
                    c = deref(child)
                    if id(c) in on_path:
                        return True
                    if id(c) not in done:
                        stack.append((c, False))
    return False


def unify_in_place(a: Node, b: Node) -> Node:
    """Destructively merge two nodes of one space; returns the merged node.

    Bindings propagate through everything reachable in the space.  On
    failure the space is left partially merged: discard it.
    """
    _union(a, b)
    merged = deref(a)
    if _cyclic([merged]):
        raise UnificationFailed("cycle", "unification produced a cyclic structure")
    return merged


def unify(a: Node, b: Node) -> Node:
    """Non-destructive unification; inputs are never mutated."""
    ca, cb = clone_many([a, b])
    return unify_in_place(ca, cb)


def unifiable(a: Node, b: Node) -> bool:
    try:
        unify(a, b)
        return True
    except UnificationFailed:
        return False


# ---------------------------------------------------------------------------
# copying

def clone_many(roots) -> list:
    """Copy a whole space: same internal sharing, fresh node identities.

    Cross-root sharing is preserved because all roots go through one memo.
    Forwarding pointers are resolved away, so clones are always clean.
    """
    memo = {}

    def cp(n):
        n = deref(n)
        got = memo.get(id(n))
        if got is not None:
            return got
        if n.atom is not None:
            new = Node(atom=n.atom)
            memo[id(n)] = new
            return new
        new = Node(arcs={})
        memo[id(n)] = new
        for feat, child in n.arcs.items():
            new.arcs[feat] = cp(child)
        return new

    return [cp(r) for r in roots]


def clone(root: Node) -> Node:
    return clone_many([root])[0]


# ---------------------------------------------------------------------------
# subsumption

def subsumes_many(gen_roots, spec_roots) -> bool:
    """True when the first space is at least as general as the second.

    Every path defined in the general space must be defined in the specific
    one with a matching atom or a recursively subsuming value, and every
    shared node must stay shared.  Two atoms with the same name count as a
    shared target: sharing of fully determined values adds no information.
    """
    gen_roots = list(gen_roots)
    spec_roots = list(spec_roots)
    if len(gen_roots) != len(spec_roots):
        return False
    image = {}

    def walk(x, y):
        x = deref(x)
        y = deref(y)
        prev = image.get(id(x))
        if prev is not None:
            if prev is y:
                return True
            return prev.atom is not None and prev.atom == y.atom
        image[id(x)] = y
        if x.atom is not None:
            return y.atom == x.atom
        if x.arcs:
            if y.atom is not None:
                return False
            for feat, child in x.arcs.items():
                other = y.arcs.get(feat)
                if other is None or not walk(child, other):
                    return False
        return True

    return all(walk(x, y) for x, y in zip(gen_roots, spec_roots))


def subsumes(a: Node, b: Node) -> bool:
    return subsumes_many([a], [b])


def equivalent_many(a_roots, b_roots) -> bool:
    return subsumes_many(a_roots, b_roots) and subsumes_many(b_roots, a_roots)


def equivalent(a: Node, b: Node) -> bool:
    return equivalent_many([a], [b])


# ---------------------------------------------------------------------------
# generalization (anti-unification)

def generalize(a: Node, b: Node) -> Node:
    """Most specific structure subsuming both inputs.

    Features survive only where both inputs agree; a result node is shared
    only where both inputs share.  Atoms key by name, since same-named
    atoms count as one shared target for subsumption.
    """
    memo = {}

    def key_of(n):
        return ("a", n.atom) if n.atom is not None else id(n)

    def g(x, y):
        x = deref(x)
        y = deref(y)
        key = (key_of(x), key_of(y))
        got = memo.get(key)
        if got is not None:
            return got
        if x.atom is not None:
            out = Node(atom=x.atom) if x.atom == y.atom else Node()
            memo[key] = out
            return out
        if y.atom is not None:
            out = Node()
            memo[key] = out
            return out
        out = Node(arcs={})
        memo[key] = out
        for feat, child in x.arcs.items():
            other = y.arcs.get(feat)
            if other is not None:
                out.arcs[feat] = g(child, other)
        return out

    return g(a, b)


# ---------------------------------------------------------------------------
# restriction

def restrict_many(roots, restrictor) -> list:
    """Copy a space, deleting the final arc of every restrictor path.

    Each path is resolved from each root; deletion happens at whatever node
    the prefix reaches, so values reached through reentrancies disappear
    from every route at once.  Paths that do not resolve are ignored.
    """
    out = clone_many(roots)
    for path in sorted(restrictor):
        for root in out:
            n = root
            for seg in path[:-1]:
                if n.atom is not None:
                    n = None
                    break
                n = n.arcs.get(seg)
                if n is None:
                    break
                n = deref(n)
            if n is not None and n.atom is None:
                n.arcs.pop(path[-1], None)
    return out


def restrict(root: Node, restrictor) -> Node:
    return restrict_many([root], restrictor)[0]


def prune_empty_leaves(roots) -> list:
    """Drop arcs to unshared, contentless nodes, in place; returns roots.

    A contentless node is a complex node with no arcs left after pruning.
    An arc to one is dropped unless the node is reachable more than once
    (a reentrancy) or is itself a root.  Vacuous leftovers from discarded
    context carry no information: they never affect a unification outcome,
    so stored results are canonicalized this way.
    """
    roots = [deref(r) for r in roots]
    refs = {}
    for r in roots:
        refs[id(r)] = refs.get(id(r), 0) + 1
    order = []
    visited = set()
    stack = [(r, False) for r in reversed(roots)]
    while stack:
        n, leaving = stack.pop()
        if leaving:
            order.append(n)
            continue
        if n.atom is not None or id(n) in visited:
            continue
        visited.add(id(n))
        stack.append((n, True))
        for child in n.arcs.values():
            c = deref(child)
            refs[id(c)] = refs.get(id(c), 0) + 1
            if c.atom is None and id(c) not in visited:
                stack.append((c, False))
    for n in order:  # children precede parents
        for feat in [f for f, c in n.arcs.items() if _vacuous(deref(c), refs)]:
            del n.arcs[feat]
    return roots


def _vacuous(n: Node, refs) -> bool:
    return n.atom is None and not n.arcs and refs.get(id(n), 0) == 1


def has_path(root: Node, path) -> bool:
    n = deref(root)
    for seg in path:
        if n.atom is not None:
            return False
        n = n.arcs.get(seg)
        if n is None:
            return False
        n = deref(n)
    return True


def reachable_nodes(roots) -> list:
    """All distinct nodes of a space, depth first from the given roots."""
    seen = {}
    stack = [deref(r) for r in reversed(list(roots))]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen[id(n)] = n
        if n.atom is None:
            for child in reversed(list(n.arcs.values())):
                stack.append(deref(child))
    return list(seen.values())
