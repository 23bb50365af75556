"""Independent reference checks used by the unit and acceptance tests."""
from itertools import permutations

from tx10.syntax import Oid


def paths(g, root, limit):
    """Map every field path of length <= limit from ``root`` to the value it reaches."""
    out = {(): root}
    frontier = [((), root)]
    for _ in range(limit):
        nxt = []
        for path, v in frontier:
            if not isinstance(v, Oid):
                continue
            for f, w in g.lookup(v):
                out[path + (f,)] = w
                nxt.append((path + (f,), w))
        frontier = nxt
    return out


def path_isomorphic(g1, r1, g2, r2, limit=None):
    """Rooted graphs agree on every path, every non-oid leaf, and on which paths meet.

    Deterministic field edges make a node determined by any path to it, so
    this is equivalent to rooted isomorphism once ``limit`` covers every node.
    """
    if limit is None:
        limit = len(g1.all_oids()) + 1
    p1, p2 = paths(g1, r1, limit), paths(g2, r2, limit)
    if p1.keys() != p2.keys():
        return False
    meet1, meet2 = {}, {}
    for path in p1:
        a, b = p1[path], p2[path]
        if isinstance(a, Oid) != isinstance(b, Oid):
            return False
        if not isinstance(a, Oid):
            if a != b:
                return False
            continue
        meet1.setdefault(a, set()).add(path)
        meet2.setdefault(b, set()).add(path)
    classes = lambda m: {frozenset(v) for v in m.values()}
    return classes(meet1) == classes(meet2)


def brute_force_isomorphic(g1, r1, g2, r2):
    """Try every bijection between the two reachable oid sets (tiny graphs only)."""
    from tx10.heap import reachable
    n1 = sorted(o for o in reachable(g1, r1) if isinstance(o, Oid))
    n2 = sorted(o for o in reachable(g2, r2) if isinstance(o, Oid))
    if len(n1) != len(n2):
        return False
    if not n1:
        return r1 == r2
    for perm in permutations(n2):
        iota = dict(zip(n1, perm))
        if iota.get(r1, r1) != r2:
            continue
        ok = True
        for o in n1:
            ra, rb = g1.lookup(o), g2.lookup(iota[o])
            if [f for f, _ in ra] != [f for f, _ in rb]:
                ok = False
                break
            if any(iota.get(v, v) != w for (_, v), (_, w) in zip(ra, rb)):
                ok = False
                break
        if ok:
            return True
    return False


def copy_violations(g, root, q, v, g2):
    """Names of the copy-contract clauses that ``(v, g2) = copy(root, q, g)`` breaks."""
    from tx10.heap import fresh_oids, graph_isomorphic, is_place_local, reachable
    from tx10.syntax import GlobalRef
    bad = []
    fresh = set(g2[q].oids()) - set(g[q].oids())
    if not path_isomorphic(g, root, g2, v):
        bad.append("isomorphic-paths")
    if graph_isomorphic(g, root, g2, v) is None:
        bad.append("isomorphic-library")
    # only q changed, and only by adding the new objects
    if any(g2[p] != h for p, h in g.items() if p != q):
        bad.append("other-places-unchanged")
    if any(g2[q][o] != r for o, r in g[q].items()):
        bad.append("old-objects-unchanged")
    # closure: new objects point only at new objects, refs or exceptions
    if any(isinstance(w, Oid) and w not in fresh
           for o in fresh for _, w in g2[q][o]):
        bad.append("closure")
    originals = {w for w in reachable(g, root) if isinstance(w, GlobalRef)}
    copies = {w for w in reachable(g2, v) if isinstance(w, GlobalRef)}
    if originals != copies:
        bad.append("global-refs-fixed")
    if v not in fresh or len(fresh) != len([w for w in reachable(g, root)
                                            if isinstance(w, Oid)]):
        bad.append("fresh-count")
    if sorted(o.serial for o in fresh) != [o.serial for o in
                                           fresh_oids(g[q], q, len(fresh))]:
        bad.append("least-unused-serials")
    if is_place_local(g2) is not None:
        bad.append("place-local")
    return bad
