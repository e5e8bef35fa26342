"""Reference peeling decoder: rescan every received symbol until nothing changes."""


def peel_by_rescan(supports, k):
    decoded = set()
    changed = True
    while changed:
        changed = False
        for sup in supports:
            rest = [i for i in sup if i not in decoded]
            if len(rest) == 1:
                decoded.add(rest[0])
                changed = True
    return decoded


def random_instance(rng, k, n_symbols, max_degree=None):
    max_degree = max_degree or k
    out = []
    for _ in range(n_symbols):
        w = int(rng.integers(1, max_degree + 1))
        out.append(tuple(int(i) for i in rng.choice(k, size=w, replace=False)))
    return out
