"""Shared test helpers: seeded random bigraph generators and a
brute-force occurrence enumerator used as the matcher oracle.

The oracle enumerates every injective node map and every anchored link
assignment and checks the embedding conditions written out directly; it
shares no code with the search in bigengine.matching.
"""

from __future__ import annotations

from collections import Counter
from itertools import product

from bigengine.bigraph import Bigraph, Signature, _mk, close


def make_sig(controls):
    """controls: iterable of (name, arity, atomic)."""
    from bigengine.bigraph import Control
    return Signature([Control(n, a, atomic=at) for n, a, at in controls])


DEFAULT_CONTROLS = [
    ("A", 0, False), ("B", 1, False), ("C", 2, True), ("D", 0, True),
]


def random_ground(rng, sig, max_nodes=8, name_pool=("a", "b", "c"),
                  max_regions=2, close_prob=0.5):
    controls = sig.controls()
    n = rng.randint(1, max_nodes)
    r = rng.randint(1, max_regions)
    ctrl, parents, ports = [], [], []
    used = set()
    for i in range(n):
        c = rng.choice(controls)
        ctrl.append(c.name)
        cands = [("r", k) for k in range(r)]
        cands += [("n", j) for j in range(i) if not sig.get(ctrl[j]).atomic]
        parents.append(frozenset({rng.choice(cands)}))
        hs = []
        for _ in range(c.arity):
            x = rng.choice(name_pool)
            used.add(x)
            hs.append(("o", x))
        ports.append(tuple(hs))
    b = _mk(sig, r, 0, ctrl, ((),) * n, parents, (), ports, (),
            frozenset(used), 0)
    for x in sorted(used):
        if rng.random() < close_prob:
            b = close(x, b)
    return b


def random_solid_pattern(rng, sig, max_nodes=4, name_pool=("a", "b", "c"),
                         max_regions=2, max_sites=2, close_prob=0.4):
    controls = sig.controls()
    r = rng.randint(1, max_regions)
    n = rng.randint(r, max(r, max_nodes))
    ctrl, parents, ports = [], [], []
    used = set()
    for i in range(n):
        c = rng.choice(controls)
        ctrl.append(c.name)
        if i < r:
            parent = ("r", i)          # every region gets at least one node
        else:
            cands = [("r", k) for k in range(r)]
            cands += [("n", j) for j in range(i) if not sig.get(ctrl[j]).atomic]
            parent = rng.choice(cands)
        parents.append(frozenset({parent}))
        hs = []
        for _ in range(c.arity):
            x = rng.choice(name_pool)
            used.add(x)
            hs.append(("o", x))
        ports.append(tuple(hs))
    hosts = [i for i in range(n) if not sig.get(ctrl[i]).atomic]
    rng.shuffle(hosts)
    sites = hosts[:rng.randint(0, max_sites)]
    site_parents = tuple(frozenset({("n", i)}) for i in sorted(sites))
    b = _mk(sig, r, len(site_parents), ctrl, ((),) * n, parents, site_parents,
            ports, (), frozenset(used), 0)
    for x in sorted(used):
        if rng.random() < close_prob:
            b = close(x, b)
    assert b.is_solid()
    return b


# ---------------------------------------------------------------------------
# brute-force occurrence oracle
# ---------------------------------------------------------------------------


def _place_ok(target: Bigraph, pattern: Bigraph, f: dict) -> bool:
    image = set(f.values())
    inv = {t: u for u, t in f.items()}
    tk = target.children()
    pk = pattern.children()

    region_extra = {}
    for u in range(pattern.n):
        t = f[u]
        want = {("n", f[p[1]]) for p in pattern.node_parents[u] if p[0] == "n"}
        got = set(target.node_parents[t])
        if not want <= got:
            return False
        extra = got - want
        if any(p[0] == "n" and p[1] in image for p in extra):
            return False
        rs = sorted(p[1] for p in pattern.node_parents[u] if p[0] == "r")
        if not rs:
            if extra:
                return False
        else:
            if not extra:
                return False
            region_extra[u] = (tuple(rs), frozenset(extra))

    pos = {}
    multis = []
    for u, (rs, e) in region_extra.items():
        if len(rs) == 1:
            if rs[0] in pos and pos[rs[0]] != e:
                return False
            pos[rs[0]] = e
        else:
            multis.append((rs, e))
    for rs, e in multis:
        if any(r not in pos for r in rs):
            return False
        if frozenset().union(*(pos[r] for r in rs)) != e:
            return False
    if set(pos) != set(range(pattern.regions)):
        return False

    site_by_parents = {frozenset(pattern.site_parents[s]): s
                       for s in range(pattern.sites)}
    tops = {}
    for u in range(pattern.n):
        t = f[u]
        mapped = {("n", f[c[1]]) for c in pk[("n", u)] if c[0] == "n"}
        got = set(tk[("n", t)])
        if not mapped <= got:
            return False
        extra = got - mapped
        has_site = any(c[0] == "s" for c in pk[("n", u)])
        if extra and not has_site:
            return False
        for key in extra:
            w = key[1]
            if w in image:
                return False
            pars = target.node_parents[w]
            if any(p[0] != "n" or p[1] not in image for p in pars):
                return False
            pat_parents = frozenset(("n", inv[p[1]]) for p in pars)
            s = site_by_parents.get(pat_parents)
            if s is None:
                return False
            if tops.get(w, s) != s:
                return False
            tops[w] = s

    owner = {}
    for w in sorted(tops):
        s = tops[w]
        stack = [w]
        while stack:
            x = stack.pop()
            if x in owner:
                if owner[x] != s:
                    return False
                continue
            if x in image:
                return False
            owner[x] = s
            stack.extend(c[1] for c in tk[("n", x)])
    for x, s in owner.items():
        if x in tops:
            continue
        for p in target.node_parents[x]:
            if p[0] != "n" or owner.get(p[1]) != s:
                return False

    ctx = set(range(target.n)) - image - set(owner)
    for e in pos.values():
        for p in e:
            if p[0] == "n" and p[1] not in ctx:
                return False
    return True


def _links_ok(target, pattern, f, assign) -> bool:
    image = set(f.values())
    for u in range(pattern.n):
        want = Counter(assign[h] for h in pattern.ports[u])
        got = Counter(target.ports[f[u]])
        if want != got:
            return False
    edges_seen = set()
    for h in set(assign):
        if h[0] != "e":
            continue
        th = assign[h]
        if th[0] != "e" or th in edges_seen:
            return False
        edges_seen.add(th)
        if target.port_count(th) != pattern.port_count(h):
            return False
        for pt in target.link_points()[th]:
            if pt[0] != "p" or pt[1] not in image:
                return False
    return True


def brute_images(target: Bigraph, pattern: Bigraph) -> set:
    """All occurrence images as (frozenset of target nodes, frozenset of
    target links), by exhaustive enumeration."""
    out = set()
    pn = pattern.n
    cands = []
    for u in range(pn):
        cands.append([t for t in range(target.n)
                      if target.ctrl[t] == pattern.ctrl[u]
                      and target.params[t] == pattern.params[u]])
    p_handles = sorted({h for hs in pattern.ports for h in hs})
    for combo in product(*cands):
        if len(set(combo)) != pn:
            continue
        f = dict(zip(range(pn), combo))
        if not _place_ok(target, pattern, f):
            continue
        # anchored link candidates: a pattern link must land on a link that
        # carries the mapped ports of any node using it
        options = []
        for h in p_handles:
            anchor = next(u for u in range(pn) if h in pattern.ports[u])
            options.append(sorted(set(target.ports[f[anchor]])))
        for choice in product(*options):
            assign = dict(zip(p_handles, choice))
            if _links_ok(target, pattern, f, assign):
                out.add((frozenset(combo), frozenset(assign.values())))
    return out


def matcher_images(occurrences) -> set:
    return {(frozenset(o.node_map.values()), frozenset(o.link_map.values()))
            for o in occurrences}


# ---------------------------------------------------------------------------
# brute-force isomorphism oracle (exhaustive permutation search)
# ---------------------------------------------------------------------------


def brute_iso(a: Bigraph, b: Bigraph) -> bool:
    from itertools import permutations

    if (a.regions, a.sites, a.n, a.edges) != (b.regions, b.sites, b.n, b.edges):
        return False
    if a.outer != b.outer or dict(a.inner).keys() != dict(b.inner).keys():
        return False

    def edge_sigs(big, trans):
        sigs = []
        for k in range(big.edges):
            inc = []
            for pt in big.link_points()[("e", k)]:
                inc.append(("p", trans(pt[1])) if pt[0] == "p" else ("i", pt[1]))
            sigs.append(tuple(sorted(inc)))
        return sorted(sigs)

    for perm in permutations(range(b.n)):
        f = {i: perm[i] for i in range(a.n)}
        if any(a.ctrl[i] != b.ctrl[f[i]] or a.params[i] != b.params[f[i]]
               for i in range(a.n)):
            continue
        ok = True
        for i in range(a.n):
            mapped = frozenset(("n", f[p[1]]) if p[0] == "n" else p
                               for p in a.node_parents[i])
            if mapped != b.node_parents[f[i]]:
                ok = False
                break
            ca = Counter(h for h in a.ports[i] if h[0] == "o")
            cb = Counter(h for h in b.ports[f[i]] if h[0] == "o")
            if ca != cb:
                ok = False
                break
        if not ok:
            continue
        for k in range(a.sites):
            mapped = frozenset(("n", f[p[1]]) if p[0] == "n" else p
                               for p in a.site_parents[k])
            if mapped != b.site_parents[k]:
                ok = False
                break
        if not ok:
            continue
        for x, h in a.inner:
            hb = dict(b.inner)[x]
            if (h[0] == "o") != (hb[0] == "o") or (h[0] == "o" and h != hb):
                ok = False
                break
        if not ok:
            continue
        if edge_sigs(a, lambda i: f[i]) == edge_sigs(b, lambda j: j):
            return True
    return False
