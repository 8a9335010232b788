"""Reference implementations the engine is checked against.

These deliberately avoid the package's matching and graph code: they scan
plain lists, group with dictionaries keyed the way each pattern description
reads, and represent bindings as frozensets of (parameter, value) pairs.
"""

from itertools import product


def _ok(n, constraints):
    table = {">=": lambda a, b: a >= b, ">": lambda a, b: a > b, "=": lambda a, b: a == b,
             "<": lambda a, b: a < b, "<=": lambda a, b: a <= b}
    return all(table[c.op](n, c.count) for c in constraints)


def _end_ok(entity, end):
    if end.type != "*" and end.type not in entity.types:
        return False
    for cond in end.conditions:
        if cond.accessor.kind == "name" and cond.op == "=" and entity.name != cond.value:
            return False
    return True


def table1_oracle(term, model):
    """Enumerate every (s, r, t) triple, then group/filter per the term's query pattern.

    Returns a set of frozensets of (param, value) with aggregated values as
    sorted tuples.
    """
    triples = []
    for rel in model.relations.values():
        if term.type != "*" and term.type not in rel.types:
            continue
        s = model.entities[rel.source]
        t = model.entities[rel.target]
        if _end_ok(s, term.source) and _end_ok(t, term.target):
            triples.append((s.id, rel.id, t.id))

    S, R, T = term.source.param, term.param, term.target.param
    cs, cr, ct = term.source.constraints, term.constraints, term.target.constraints
    pattern = (int(bool(cs)), int(bool(cr)), int(bool(ct)))
    result = set()

    if pattern == (0, 0, 0):
        for s, r, t in triples:
            result.add(frozenset({(S, s), (R, r), (T, t)}))

    elif pattern == (0, 1, 1):
        for s in {tr[0] for tr in triples}:
            rels = sorted({tr[1] for tr in triples if tr[0] == s})
            tgts = sorted({tr[2] for tr in triples if tr[0] == s})
            if _ok(len(rels), cr) and _ok(len(tgts), ct):
                result.add(frozenset({(S, s), (R, tuple(rels)), (T, tuple(tgts))}))

    elif pattern == (1, 1, 0):
        for t in {tr[2] for tr in triples}:
            rels = sorted({tr[1] for tr in triples if tr[2] == t})
            srcs = sorted({tr[0] for tr in triples if tr[2] == t})
            if _ok(len(rels), cr) and _ok(len(srcs), cs):
                result.add(frozenset({(T, t), (R, tuple(rels)), (S, tuple(srcs))}))

    elif pattern == (0, 1, 0):
        for s, t in {(tr[0], tr[2]) for tr in triples}:
            rels = sorted({tr[1] for tr in triples if tr[0] == s and tr[2] == t})
            if _ok(len(rels), cr):
                result.add(frozenset({(S, s), (R, tuple(rels)), (T, t)}))

    elif pattern == (1, 1, 1):
        srcs = sorted({tr[0] for tr in triples})
        rels = sorted({tr[1] for tr in triples})
        tgts = sorted({tr[2] for tr in triples})
        if _ok(len(srcs), cs) and _ok(len(rels), cr) and _ok(len(tgts), ct):
            result.add(frozenset({(S, tuple(srcs)), (R, tuple(rels)), (T, tuple(tgts))}))
    else:
        raise ValueError(f"pattern {pattern} has no defined meaning")
    return result


def as_pairs(binding_set):
    return {frozenset(b.items()) for b in binding_set}


def _is_function(pairs):
    names = [k for k, _ in pairs]
    return len(names) == len(set(names))


def and_oracle(left, right):
    """Unions of one left and one right binding that stay functional."""
    return {lb | rb for lb, rb in product(left, right) if _is_function(lb | rb)}


def or_oracle(left, right):
    return set(left) | set(right)


def xor_oracle(left, right, left_params, right_params):
    shared = set(left_params) & set(right_params)
    if not shared:
        if bool(left) != bool(right):
            return set(left) | set(right)
        return set()

    def proj(b):
        return frozenset((k, v) for k, v in b if k in shared)

    lp = {proj(b) for b in left}
    rp = {proj(b) for b in right}
    return {b for b in left if proj(b) not in rp} | {b for b in right if proj(b) not in lp}


def brute_force_cycles(edges, nodes):
    """All elementary cycles via exhaustive simple-path enumeration, as sorted rotations."""
    adj = {n: sorted({b for a, b in edges if a == n}) for n in nodes}
    found = set()

    def extend(path):
        for nxt in adj[path[-1]]:
            if nxt == path[0]:
                k = path.index(min(path))
                found.add(tuple(path[k:] + path[:k]))
            elif nxt not in path:
                extend(path + [nxt])

    for n in nodes:
        extend([n])
    return sorted(list(c) for c in found)
