"""Transition function of the streaming congruence-closure automaton.

Pure-Python implementation; ``axver._ckernel`` is a compiled drop-in
replacement selected at import time by ``axver.scc_automaton``.

A state is a tuple ``(cls, d, P, pos, neg, hist)``:

* ``cls[i]`` is the representative of variable ``i``'s class, the
  smallest variable index in it;
* ``d`` is a frozenset of ``(a, b)`` representative pairs with ``a < b``;
* ``P`` is a frozenset of ``((f, args), res)`` function entries;
* ``pos`` / ``neg`` are frozensets of ``(R, args)`` relational facts;
* ``hist`` is a frozenset of ``(f, args)`` applications seen while their
  argument classes stayed live, or ``None`` when coherence is not tracked.

The reject state is ``None``.  Letters are coded as tuples:
``(0, x, y)`` for ``x := y``, ``(1, x, f, args)`` for ``x := f(args)``,
``(2, x, y)`` / ``(3, x, y)`` for (dis)equality assumes and
``(4, R, args)`` / ``(5, R, args)`` for relational ones.
"""

ASSIGN, ASSIGN_FN, EQ, NEQ, REL, NEG_REL = range(6)
OK, MEMOIZING, EARLY_ASSUME = range(3)


def initial(n, track_hist):
    empty = frozenset()
    return (tuple(range(n)), empty, empty, empty, empty, empty if track_hist else None)


def _detach(cls, x):
    """Take ``x`` out of its class; return the new classes and the rep renaming."""
    old = cls[x]
    new = list(cls)
    mapping = {}
    if old == x:
        others = [i for i in range(len(cls)) if cls[i] == x and i != x]
        if others:
            r = others[0]
            for i in others:
                new[i] = r
            mapping[x] = r
        else:
            mapping[x] = -1
    else:
        # x was not the representative, so nothing else is renamed.
        new[x] = x
    new[x] = x
    return new, mapping


def _remap(state, cls, mapping):
    """Rename representatives in every fact; entries touching -1 are dropped."""
    _, d, P, pos, neg, hist = state
    if not mapping:
        return (tuple(cls), d, P, pos, neg, hist)
    g = mapping.get
    d2 = set()
    if pos and neg:
        for c, v in mapping.items():
            if v < 0:
                d = d | _implied_disequalities(pos, neg, c)
    for a, b in d:
        a = g(a, a)
        b = g(b, b)
        if a < 0 or b < 0:
            continue
        d2.add((a, b) if a < b else (b, a))
    P2 = set()
    for (f, args), res in P:
        res = g(res, res)
        if res < 0:
            continue
        args = tuple([g(c, c) for c in args])
        if min(args) < 0:
            continue
        P2.add(((f, args), res))
    pos2 = _remap_facts(pos, g)
    neg2 = _remap_facts(neg, g)
    hist2 = None
    if hist is not None:
        hist2 = set()
        for f, args in hist:
            args = tuple([g(c, c) for c in args])
            if min(args) >= 0:
                hist2.add((f, args))
        hist2 = frozenset(hist2)
    return (tuple(cls), frozenset(d2), frozenset(P2), pos2, neg2, hist2)


def _implied_disequalities(pos, neg, c):
    """Disequalities that facts about the vanishing class ``c`` still enforce.

    A dropped class never merges again, so a positive and a negative fact
    can only clash later if they agree wherever ``c`` occurs.  When they
    then differ in exactly one position, the two classes there must stay
    distinct.  This is what keeps R(c,a) and !R(c,b) from being forgotten
    as a != b.
    """
    out = set()
    for r, args in pos:
        if c not in args:
            continue
        for r2, args2 in neg:
            if r2 != r or len(args2) != len(args) or c not in args2:
                continue
            diff = None
            for a, b in zip(args, args2):
                if a == b:
                    continue
                if a == c or b == c or diff is not None:
                    diff = None
                    break
                diff = (a, b) if a < b else (b, a)
            else:
                if diff is not None:
                    out.add(diff)
    return out


def _remap_facts(facts, g):
    out = set()
    for r, args in facts:
        args = tuple([g(c, c) for c in args])
        if min(args) >= 0:
            out.add((r, args))
    return frozenset(out)


def _join(cls, x, y):
    """Move the singleton ``x`` into ``y``'s class (``cls`` is a mutable list)."""
    target = cls[y]
    mapping = {}
    if x < target:
        for i in range(len(cls)):
            if cls[i] == target:
                cls[i] = x
        mapping[target] = x
        cls[x] = x
    else:
        cls[x] = target
    return mapping


def _compose(first, second):
    out = {}
    for k, v in first.items():
        out[k] = second.get(v, v) if v >= 0 else v
    for k, v in second.items():
        if k not in first:
            out[k] = v
    return out


def _assign(state, x, y):
    cls = state[0]
    if cls[x] == cls[y]:
        return state
    new, m1 = _detach(cls, x)
    m2 = _join(new, x, y)
    return _remap(state, new, _compose(m1, m2))


def _transitive(pos, neg, trans):
    """Close every transitive relation; return None on a pos/neg clash."""
    if not trans:
        return pos, neg
    touched = {r for r, _ in pos if r in trans} | {r for r, _ in neg if r in trans}
    if not touched:
        return pos, neg
    pos_out = set(pos)
    neg_out = set(neg)
    for r in touched:
        succ = {}
        for rr, args in pos:
            if rr == r:
                succ.setdefault(args[0], set()).add(args[1])
        # transitive closure by repeated reachability
        closed = {}
        for a in succ:
            seen = set()
            stack = list(succ[a])
            while stack:
                b = stack.pop()
                if b not in seen:
                    seen.add(b)
                    stack.extend(succ.get(b, ()))
            closed[a] = seen
        pred = {}
        for a, bs in closed.items():
            for b in bs:
                pos_out.add((r, (a, b)))
                pred.setdefault(b, set()).add(a)
        work = [args for rr, args in neg if rr == r]
        seen_neg = set(work)
        while work:
            x, z = work.pop()
            for y in closed.get(x, ()):
                if (y, z) not in seen_neg:
                    seen_neg.add((y, z))
                    work.append((y, z))
            for y in pred.get(z, ()):
                if (x, y) not in seen_neg:
                    seen_neg.add((x, y))
                    work.append((x, y))
        for args in seen_neg:
            neg_out.add((r, args))
    return frozenset(pos_out), frozenset(neg_out)


def _with_relations(state, pos, neg, trans, close):
    if close:
        pos, neg = _transitive(pos, neg, trans)
    if not pos.isdisjoint(neg):
        return None
    cls, d, P, _, _, hist = state
    return (cls, d, P, pos, neg, hist)


def _merge(state, a, b, trans):
    """Merge classes ``a`` and ``b`` and close under congruence.

    Returns ``(state, violation)``; the state is None on reject.
    """
    cls, d, P, pos, neg, hist = state
    parent = {}

    def find(c):
        while c in parent:
            c = parent[c]
        return c

    def union(c1, c2):
        c1 = find(c1)
        c2 = find(c2)
        if c1 == c2:
            return False
        if c1 < c2:
            parent[c2] = c1
        else:
            parent[c1] = c2
        return True

    union(a, b)
    changed = True
    while changed:
        changed = False
        table = {}
        for (f, args), res in P:
            key = (f, tuple([find(c) for c in args]))
            other = table.get(key)
            if other is None:
                table[key] = res
            elif union(other, res):
                changed = True
    violation = OK
    if hist is not None:
        defined = {key for key, _ in P}
        groups = {}
        for f, args in hist:
            key = (f, tuple([find(c) for c in args]))
            groups.setdefault(key, []).append((f, args))
        for members in groups.values():
            if len(members) > 1 and any(m not in defined for m in members):
                violation = EARLY_ASSUME
                break
    mapping = {c: find(c) for c in parent}
    new_cls = [find(c) for c in cls]
    for x, y in d:
        if find(x) == find(y):
            return None, violation
    merged = _remap(state, new_cls, mapping)
    merged = _with_relations(merged, merged[3], merged[4], trans, True)
    return merged, violation


def _kill(state, x):
    new, mapping = _detach(state[0], x)
    return _remap(state, new, mapping)


def step(state, code, trans, aux=-1):
    """Advance ``state`` by one coded letter.

    Returns ``(new_state, violation)``; ``new_state`` is None for reject.
    """
    if state is None:
        return None, OK
    kind = code[0]
    violation = OK
    if kind == ASSIGN:
        return _assign(state, code[1], code[2]), OK
    if kind == ASSIGN_FN:
        x, f, zs = code[1], code[2], code[3]
        cls = state[0]
        key = (f, tuple([cls[z] for z in zs]))
        for k, res in state[2]:
            if k == key:
                return _assign(state, x, res), OK
        hist = state[5]
        if hist is not None and key in hist:
            violation = MEMOIZING
        new, mapping = _detach(cls, x)
        st = _remap(state, new, mapping)
        g = mapping.get
        args = tuple([g(c, c) for c in key[1]])
        if min(args) >= 0:
            cls2, d, P, pos, neg, hist2 = st
            P = P | {((f, args), x)}
            if hist2 is not None:
                hist2 = hist2 | {(f, args)}
            st = (cls2, d, P, pos, neg, hist2)
        return st, violation
    cls = state[0]
    if kind != EQ and state[5] is not None:
        # Coherence tracking ignores disequalities and relational facts.
        st = state
    elif kind == EQ:
        a, b = cls[code[1]], cls[code[2]]
        if a == b:
            st = state
        else:
            st, violation = _merge(state, a, b, trans)
    elif kind == NEQ:
        a, b = cls[code[1]], cls[code[2]]
        if a == b:
            return None, OK
        pair = (a, b) if a < b else (b, a)
        if pair in state[1]:
            st = state
        else:
            st = (cls, state[1] | {pair}, state[2], state[3], state[4], state[5])
    else:
        fact = (code[1], tuple([cls[z] for z in code[2]]))
        if kind == REL:
            if fact in state[3]:
                st = state
            else:
                st = _with_relations(state, state[3] | {fact}, state[4], trans, code[1] in trans)
        else:
            if fact in state[4]:
                st = state
            else:
                st = _with_relations(state, state[3], state[4] | {fact}, trans, code[1] in trans)
    if st is not None and aux >= 0 and _mentions(code, aux):
        st = _kill(st, aux)
    return st, violation


def _mentions(code, v):
    kind = code[0]
    if kind == EQ or kind == NEQ:
        return code[1] == v or code[2] == v
    return v in code[2]
