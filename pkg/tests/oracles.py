"""Reference implementations written independently of the package.

They work on plain Python values and favour obviousness over speed:
duplicate detection is a pairwise scan, not hashing.
"""


class KindConflict(Exception):
    pass


def kind(value):
    if isinstance(value, dict):
        return "mapping"
    if isinstance(value, list):
        return "sequence"
    return "scalar"


def same(a, b):
    """Deep equality that keeps 1, 1.0 and True apart."""
    if type(a) is not type(b):
        return False
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(same(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return a == b


def same_ordered(a, b):
    """``same`` that also requires mapping keys in the same order."""
    if isinstance(a, dict) and isinstance(b, dict):
        return list(a) == list(b) and all(same_ordered(a[k], b[k]) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(same_ordered(x, y) for x, y in zip(a, b))
    return same(a, b)


def brute_merge(parent, child, do_not_inherit=()):
    if kind(parent) != "mapping" or kind(child) != "mapping":
        raise KindConflict()
    out = {}
    for key in parent:
        if key not in child and key not in do_not_inherit:
            out[key] = parent[key]
    for key in child:
        if key not in parent or key in do_not_inherit:
            out[key] = child[key]
            continue
        p, c = parent[key], child[key]
        if kind(p) != kind(c):
            raise KindConflict()
        if kind(c) == "mapping":
            out[key] = brute_merge(p, c)
        elif kind(c) == "sequence":
            union = []
            for item in p + c:
                if not any(same(item, u) for u in union):
                    union.append(item)
            out[key] = union
        else:
            out[key] = c
    return out


def fold_resolve(docs_by_name, name):
    """Resolved properties: fold brute_merge from the root down to ``name``."""
    chain = []
    while name is not None:
        chain.append(docs_by_name[name])
        name = docs_by_name[name].get("parent")
    result = None
    for doc in reversed(chain):
        own = {k: v for k, v in doc.items() if k not in ("parent", "do_not_inherit")}
        result = own if result is None else brute_merge(result, own,
                                                        doc.get("do_not_inherit", ()))
    return result


def forest_facts(parents, roots, nodes):
    """(edge count, {node: its root}) by walking parent links with a step budget."""
    reach = {}
    for n in nodes:
        cur, steps = n, 0
        while cur in parents:
            cur = parents[cur]
            steps += 1
            assert steps <= len(nodes), "parent walk does not terminate"
        reach[n] = cur
    return len(parents), reach
