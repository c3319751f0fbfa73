# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled transition function of the streaming congruence-closure automaton.

Same state layout, letter codes and results as ``axver._kernel``; the
two are interchangeable and tested against each other.
"""

ASSIGN, ASSIGN_FN, EQ, NEQ, REL, NEG_REL = range(6)
OK, MEMOIZING, EARLY_ASSUME = range(3)

cdef frozenset EMPTY = frozenset()


def initial(Py_ssize_t n, bint track_hist):
    return (tuple(range(n)), EMPTY, EMPTY, EMPTY, EMPTY, EMPTY if track_hist else None)


cdef tuple _detach(tuple cls, Py_ssize_t x):
    cdef Py_ssize_t old = cls[x]
    cdef Py_ssize_t i, r = -1
    cdef Py_ssize_t n = len(cls)
    cdef list new = list(cls)
    cdef dict mapping = {}
    if old == x:
        for i in range(n):
            if i != x and <Py_ssize_t>cls[i] == x:
                if r < 0:
                    r = i
                new[i] = r
        mapping[x] = r
    new[x] = x
    return new, mapping


cdef set _implied_disequalities(frozenset pos, frozenset neg, Py_ssize_t c):
    cdef set out = set()
    cdef tuple args, args2, diff
    cdef Py_ssize_t a, b, i, k
    cdef bint ok
    for r, args in pos:
        if c not in args:
            continue
        k = len(args)
        for r2, args2 in neg:
            if r2 != r or len(args2) != k or c not in args2:
                continue
            diff = None
            ok = True
            for i in range(k):
                a = args[i]
                b = args2[i]
                if a == b:
                    continue
                if a == c or b == c or diff is not None:
                    ok = False
                    break
                diff = (a, b) if a < b else (b, a)
            if ok and diff is not None:
                out.add(diff)
    return out


cdef frozenset _remap_facts(frozenset facts, dict mapping):
    cdef set out = set()
    cdef tuple args
    cdef list mapped
    cdef Py_ssize_t c, m
    cdef bint keep
    for r, args in facts:
        mapped = []
        keep = True
        for c in args:
            m = mapping.get(c, c)
            if m < 0:
                keep = False
                break
            mapped.append(m)
        if keep:
            out.add((r, tuple(mapped)))
    return frozenset(out)


cdef tuple _remap(tuple state, list cls, dict mapping):
    cdef frozenset d = state[1]
    cdef frozenset P = state[2]
    cdef frozenset pos = state[3]
    cdef frozenset neg = state[4]
    hist = state[5]
    if not mapping:
        return (tuple(cls), d, P, pos, neg, hist)
    cdef Py_ssize_t a, b, c, v, res, m
    cdef set extra
    if pos and neg:
        for c, v in mapping.items():
            if v < 0:
                extra = _implied_disequalities(pos, neg, c)
                if extra:
                    d = d | extra
    cdef set d2 = set()
    for a, b in d:
        a = mapping.get(a, a)
        b = mapping.get(b, b)
        if a < 0 or b < 0:
            continue
        d2.add((a, b) if a < b else (b, a))
    cdef set P2 = set()
    cdef tuple key, args
    cdef list mapped
    cdef bint keep
    for key, res in P:
        res = mapping.get(res, res)
        if res < 0:
            continue
        args = key[1]
        mapped = []
        keep = True
        for c in args:
            m = mapping.get(c, c)
            if m < 0:
                keep = False
                break
            mapped.append(m)
        if keep:
            P2.add(((key[0], tuple(mapped)), res))
    hist2 = None
    if hist is not None:
        hist2 = _remap_facts(hist, mapping)
    return (tuple(cls), frozenset(d2), frozenset(P2), _remap_facts(pos, mapping),
            _remap_facts(neg, mapping), hist2)


cdef dict _join(list cls, Py_ssize_t x, Py_ssize_t y):
    cdef Py_ssize_t target = cls[y]
    cdef Py_ssize_t i
    cdef dict mapping = {}
    if x < target:
        for i in range(len(cls)):
            if <Py_ssize_t>cls[i] == target:
                cls[i] = x
        mapping[target] = x
        cls[x] = x
    else:
        cls[x] = target
    return mapping


cdef dict _compose(dict first, dict second):
    cdef dict out = {}
    cdef Py_ssize_t k, v
    for k, v in first.items():
        out[k] = second.get(v, v) if v >= 0 else v
    for k, v in second.items():
        if k not in first:
            out[k] = v
    return out


cdef tuple _assign(tuple state, Py_ssize_t x, Py_ssize_t y):
    cdef tuple cls = state[0]
    if cls[x] == cls[y]:
        return state
    new, m1 = _detach(cls, x)
    cdef dict m2 = _join(new, x, y)
    return _remap(state, new, _compose(m1, m2))


cdef tuple _transitive(frozenset pos, frozenset neg, trans):
    if not trans:
        return pos, neg
    cdef set touched = set()
    for r, _ in pos:
        if r in trans:
            touched.add(r)
    for r, _ in neg:
        if r in trans:
            touched.add(r)
    if not touched:
        return pos, neg
    cdef set pos_out = set(pos)
    cdef set neg_out = set(neg)
    cdef dict succ, closed, pred
    cdef set seen, seen_neg
    cdef list stack, work
    cdef tuple args
    for r in touched:
        succ = {}
        for rr, args in pos:
            if rr == r:
                succ.setdefault(args[0], set()).add(args[1])
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


cdef _with_relations(tuple state, frozenset pos, frozenset neg, trans, bint close):
    if close:
        pos, neg = _transitive(pos, neg, trans)
    if not pos.isdisjoint(neg):
        return None
    return (state[0], state[1], state[2], pos, neg, state[5])


cdef inline Py_ssize_t _find(dict parent, Py_ssize_t c):
    while c in parent:
        c = parent[c]
    return c


cdef bint _union(dict parent, Py_ssize_t c1, Py_ssize_t c2):
    c1 = _find(parent, c1)
    c2 = _find(parent, c2)
    if c1 == c2:
        return False
    if c1 < c2:
        parent[c2] = c1
    else:
        parent[c1] = c2
    return True


cdef tuple _key(dict parent, tuple key):
    return (key[0], tuple([_find(parent, c) for c in key[1]]))


cdef tuple _merge(tuple state, Py_ssize_t a, Py_ssize_t b, trans):
    cdef tuple cls = state[0]
    cdef frozenset d = state[1]
    cdef frozenset P = state[2]
    hist = state[5]
    cdef dict parent = {}
    cdef dict table
    cdef bint changed = True
    cdef Py_ssize_t res, x, y
    cdef int violation = OK
    _union(parent, a, b)
    while changed:
        changed = False
        table = {}
        for key, res in P:
            k = _key(parent, key)
            other = table.get(k)
            if other is None:
                table[k] = res
            elif _union(parent, other, res):
                changed = True
    cdef set defined
    cdef dict groups
    if hist is not None:
        defined = {key for key, _ in P}
        groups = {}
        for key in hist:
            groups.setdefault(_key(parent, key), []).append(key)
        for members in groups.values():
            if len(members) > 1:
                for m in members:
                    if m not in defined:
                        violation = EARLY_ASSUME
                        break
                if violation != OK:
                    break
    cdef dict mapping = {c: _find(parent, c) for c in parent}
    cdef list new_cls = [_find(parent, c) for c in cls]
    for x, y in d:
        if _find(parent, x) == _find(parent, y):
            return None, violation
    merged = _remap(state, new_cls, mapping)
    merged = _with_relations(merged, merged[3], merged[4], trans, True)
    return merged, violation


cdef tuple _kill(tuple state, Py_ssize_t x):
    new, mapping = _detach(state[0], x)
    return _remap(state, new, mapping)


cdef bint _mentions(tuple code, Py_ssize_t v):
    cdef int kind = code[0]
    if kind == EQ or kind == NEQ:
        return code[1] == v or code[2] == v
    return v in code[2]


def step(state, tuple code, trans, Py_ssize_t aux=-1):
    """Advance ``state`` by one coded letter; see ``axver._kernel.step``."""
    if state is None:
        return None, OK
    cdef int kind = code[0]
    cdef int violation = OK
    cdef tuple cls = state[0]
    cdef Py_ssize_t x, a, b
    cdef tuple key, args, pair, fact
    cdef list mapped
    if kind == ASSIGN:
        return _assign(state, code[1], code[2]), OK
    if kind == ASSIGN_FN:
        x = code[1]
        f = code[2]
        key = (f, tuple([cls[z] for z in code[3]]))
        for k, res in state[2]:
            if k == key:
                return _assign(state, x, res), OK
        hist = state[5]
        if hist is not None and key in hist:
            violation = MEMOIZING
        new, mapping = _detach(cls, x)
        st = _remap(state, new, mapping)
        mapped = [mapping.get(c, c) for c in key[1]]
        if min(mapped) >= 0:
            args = tuple(mapped)
            hist2 = st[5]
            if hist2 is not None:
                hist2 = hist2 | {(f, args)}
            st = (st[0], st[1], st[2] | {((f, args), x)}, st[3], st[4], hist2)
        return st, violation
    if kind != EQ and state[5] is not None:
        # Coherence tracking ignores disequalities and relational facts.
        st = state
    elif kind == EQ:
        a = cls[code[1]]
        b = cls[code[2]]
        if a == b:
            st = state
        else:
            st, violation = _merge(state, a, b, trans)
    elif kind == NEQ:
        a = cls[code[1]]
        b = cls[code[2]]
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
