"""Exhaustive enumeration of small instances for the property sweeps.

Everything here is deterministic: fixed label sets, fixed iteration
orders.  Posets are generated by repeatedly attaching a new maximal
element over a down-closed subset; this hits every isomorphism class
(labels follow a linear extension) and labeled duplicates are removed
by canonical form when requested.
"""

from __future__ import annotations

from itertools import combinations, permutations

from .lattice import FinitePoset, FiniteSpace


def _down_closed_subsets(down_masks):
    n = len(down_masks)
    out = []
    for mask in range(1 << n):
        ok = True
        m = mask
        while m:
            k = (m & -m).bit_length() - 1
            m &= m - 1
            if down_masks[k] & ~mask:
                ok = False
                break
        if ok:
            out.append(mask)
    return out


def _poset_canonical_form(down_masks):
    n = len(down_masks)
    best = None
    for perm in permutations(range(n)):
        rows = []
        for i in range(n):
            row = 0
            for j in range(n):
                if down_masks[perm[i]] >> perm[j] & 1:
                    row |= 1 << j
            rows.append(row)
        sig = tuple(rows)
        if best is None or sig < best:
            best = sig
    return best


def all_posets(n: int) -> list:
    """All posets on elements 0..n-1, one per isomorphism class.

    The predicates this feeds are relabeling-equivariant, so iso-class
    representatives exhaust the behaviours.
    """
    masks_by_size = {0: [()]}
    for size in range(1, n + 1):
        nxt = []
        for down in masks_by_size[size - 1]:
            for sub in _down_closed_subsets(down):
                nxt.append(down + (sub | (1 << (size - 1)),))
        masks_by_size[size] = nxt
    result = []
    seen = set()
    for down in masks_by_size[n]:
        sig = _poset_canonical_form(down)
        if sig in seen:
            continue
        seen.add(sig)
        pairs = [
            (i, j)
            for j in range(n)
            for i in range(n)
            if i != j and down[j] >> i & 1
        ]
        result.append(FinitePoset(tuple(range(n)), pairs))
    return result


def all_posets_up_to(max_n: int, include_empty: bool = False) -> list:
    out = []
    lo = 0 if include_empty else 1
    for n in range(lo, max_n + 1):
        out.extend(all_posets(n))
    return out


def all_topologies(n: int) -> list:
    """All topologies on the labeled point set 0..n-1 (n <= 4)."""
    if n > 4:
        raise ValueError("exhaustive topology census only supported for n <= 4")
    points = tuple(range(n))
    full = (1 << n) - 1
    middles = [m for m in range(1 << n) if m not in (0, full)]
    spaces = []
    for pick in range(1 << len(middles)):
        fam = {0, full}
        for k, m in enumerate(middles):
            if pick >> k & 1:
                fam.add(m)
        ok = True
        for a in fam:
            for b in fam:
                if (a & b) not in fam or (a | b) not in fam:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            spaces.append(
                FiniteSpace(points, [[p for p in points if m >> p & 1] for m in fam])
            )
    spaces.sort(key=lambda s: (len(s.opens), sorted(tuple(sorted(o)) for o in s.opens)))
    return spaces


def sampled_topologies(n_points: int, max_opens: int = 8, count: int = 12, seed: int = 17) -> list:
    """Deterministic sample of topologies on a larger point set, generated
    by closing seeded subbases under intersection and union."""
    import random

    rng = random.Random(seed + n_points)
    points = tuple(range(n_points))
    full = frozenset(points)
    seen = set()
    out = []
    attempts = 0
    while len(out) < count and attempts < 400:
        attempts += 1
        k = rng.randint(1, 3)
        subbase = []
        for _ in range(k):
            mask = rng.randint(1, (1 << n_points) - 1)
            subbase.append(frozenset(p for p in points if mask >> p & 1))
        fam = {frozenset(), full, *subbase}
        changed = True
        while changed:
            changed = False
            for a in list(fam):
                for b in list(fam):
                    for c in (a & b, a | b):
                        if c not in fam:
                            fam.add(c)
                            changed = True
        if len(fam) > max_opens:
            continue
        key = frozenset(fam)
        if key in seen:
            continue
        seen.add(key)
        out.append(FiniteSpace(points, fam))
    return out


def monotone_assignments(index: FinitePoset, space: FiniteSpace):
    """All monotone maps from the index poset into the frame of the space."""
    opens = space.opens_sorted()
    elems = list(index.elements)
    # process elements in a linear extension so predecessors are assigned first
    order = sorted(elems, key=lambda e: bin(index.down_mask(e)).count("1"))

    def rec(k, chosen):
        if k == len(order):
            yield dict(chosen)
            return
        e = order[k]
        for o in opens:
            ok = True
            for f, v in chosen.items():
                if index.leq(f, e) and not (v <= o):
                    ok = False
                    break
                if index.leq(e, f) and not (o <= v):
                    ok = False
                    break
            if ok:
                chosen[e] = o
                yield from rec(k + 1, chosen)
                del chosen[e]

    yield from rec(0, {})


def enumerate_presheaves(space: FiniteSpace, max_card: int = 2, cap: int | None = None) -> list:
    """Presheaves with canonical section sets of size <= max_card.

    Section sets are prefixes of s0, s1, ...; restriction maps are chosen
    on frame cover relations and extended by composition, with
    path-independence enforced during the search.  Deterministic DFS
    order; a cap truncates the output for large frames.
    """
    from .sheaf import Presheaf

    universe = [f"s{k}" for k in range(max_card)]
    opens = sorted(space.opens, key=lambda o: (-len(o), sorted(map(repr, o))))
    parents = {
        o: [p for p in opens if o < p and not any(o < q < p for q in opens)]
        for o in opens
    }
    out = []

    def close_tables(sets, hasse):
        # transitive tables for all comparable pairs; None on path conflict
        tables = {}
        for big in opens:
            tables[(big, big)] = {s: s for s in sets[big]}
        for o in opens:  # opens are in decreasing linear order
            for big in opens:
                if not (o < big):
                    continue
                candidate = None
                for p in parents[o]:
                    if not (p <= big):
                        continue
                    upper = tables.get((big, p))
                    if upper is None:
                        return None
                    composed = {s: hasse[(p, o)][upper[s]] for s in sets[big]}
                    if candidate is None:
                        candidate = composed
                    elif candidate != composed:
                        return None
                if candidate is not None:
                    tables[(big, o)] = candidate
        return tables

    def rec(k, sets, hasse):
        if cap is not None and len(out) >= cap:
            return
        if k == len(opens):
            tables = close_tables(sets, hasse)
            if tables is not None:
                out.append(Presheaf(space, dict(sets), tables))
            return
        o = opens[k]
        for size in range(max_card + 1):
            secs = tuple(universe[:size])
            maps_per_parent = []
            for p in parents[o]:
                choices = _all_maps(sets[p], secs)
                maps_per_parent.append((p, choices))
            sets[o] = secs

            def assign(idx):
                if cap is not None and len(out) >= cap:
                    return
                if idx == len(maps_per_parent):
                    rec(k + 1, sets, hasse)
                    return
                p, choices = maps_per_parent[idx]
                for table in choices:
                    hasse[(p, o)] = table
                    assign(idx + 1)
                    del hasse[(p, o)]

            assign(0)
            del sets[o]

    rec(0, {}, {})
    return out


def _all_maps(domain, codomain):
    if not domain:
        return [{}]
    if not codomain:
        return []
    out = [{}]
    for d in domain:
        out = [dict(m, **{d: c}) for m in out for c in codomain]
    return out


def covering_antichains(space: FiniteSpace) -> list:
    """Covers of the space by inclusion-incomparable opens (no duplicates)."""
    opens = [o for o in space.opens_sorted() if o]
    out = []
    full = space.full
    for r in range(1, len(opens) + 1):
        for combo in combinations(opens, r):
            if any(a < b or b < a for a, b in combinations(combo, 2)):
                continue
            u = frozenset().union(*combo)
            if u == full:
                out.append(list(combo))
    return out
