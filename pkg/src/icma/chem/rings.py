"""Ring perception: components, ring membership, SSSR, small-cycle enumeration."""

from __future__ import annotations


def connected_components(n_atoms: int, edges: list[tuple[int, int]]) -> list[list[int]]:
    """Connected components as sorted atom-index lists, ordered by first atom."""
    adj: list[list[int]] = [[] for _ in range(n_atoms)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n_atoms
    components = []
    for start in range(n_atoms):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        components.append(sorted(comp))
    return components


def ring_bond_flags(n_atoms: int, edges: list[tuple[int, int]]) -> list[bool]:
    """True for every bond that lies on some cycle (i.e. is not a bridge).

    Iterative Tarjan bridge finding on the multigraph of bond indices.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for bidx, (a, b) in enumerate(edges):
        adj[a].append((b, bidx))
        adj[b].append((a, bidx))

    disc = [-1] * n_atoms
    low = [0] * n_atoms
    is_bridge = [False] * len(edges)
    timer = 0
    for root in range(n_atoms):
        if disc[root] != -1:
            continue
        # stack entries: (vertex, incoming bond index, iterator position)
        stack = [(root, -1, 0)]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            v, in_bond, i = stack.pop()
            if i < len(adj[v]):
                stack.append((v, in_bond, i + 1))
                w, bidx = adj[v][i]
                if bidx == in_bond:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, bidx, 0))
                else:
                    low[v] = min(low[v], disc[w])
            else:
                if in_bond != -1:
                    # retreat edge: propagate low to parent
                    parent = edges[in_bond][0] if edges[in_bond][1] == v else edges[in_bond][1]
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        is_bridge[in_bond] = True
    return [not b for b in is_bridge]


def _shortest_path(adj: list[list[tuple[int, int]]], src: int, dst: int,
                   banned_bond: int) -> list[int] | None:
    """BFS shortest path src -> dst avoiding one bond; returns bond-index path."""
    if src == dst:
        return []
    prev: dict[int, tuple[int, int]] = {src: (-1, -1)}
    frontier = [src]
    while frontier:
        nxt = []
        for v in frontier:
            for w, bidx in adj[v]:
                if bidx == banned_bond or w in prev:
                    continue
                prev[w] = (v, bidx)
                if w == dst:
                    path = []
                    cur = w
                    while cur != src:
                        pv, pb = prev[cur]
                        path.append(pb)
                        cur = pv
                    return path
                nxt.append(w)
        frontier = nxt
    return None


def sssr(n_atoms: int, edges: list[tuple[int, int]]) -> list[list[int]]:
    """Smallest set of smallest rings, as atom-index cycles.

    Candidate cycles are the shortest cycles through each ring bond; a
    GF(2)-greedy pass over them (shortest first, deterministic tie-break)
    picks exactly bonds - atoms + components independent cycles.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for bidx, (a, b) in enumerate(edges):
        adj[a].append((b, bidx))
        adj[b].append((a, bidx))

    components = connected_components(n_atoms, edges)
    n_rings = len(edges) - n_atoms + len(components)
    if n_rings <= 0:
        return []

    ring_flags = ring_bond_flags(n_atoms, edges)
    candidates: dict[int, tuple[int, ...]] = {}
    for bidx, (a, b) in enumerate(edges):
        if not ring_flags[bidx]:
            continue
        path = _shortest_path(adj, a, b, banned_bond=bidx)
        if path is None:
            continue
        cycle_bonds = tuple(sorted(path + [bidx]))
        mask = 0
        for pb in cycle_bonds:
            mask |= 1 << pb
        candidates[mask] = cycle_bonds

    chosen = _greedy_independent(candidates, n_rings)
    if len(chosen) < n_rings:
        # Per-bond shortest cycles failed to span the cycle space; fall back
        # to the full Horton candidate set (cycles through every vertex/edge).
        candidates.update(_horton_candidates(n_atoms, edges, adj))
        chosen = _greedy_independent(candidates, n_rings)

    rings = []
    for cycle_bonds in chosen:
        rings.append(_bonds_to_atom_cycle(cycle_bonds, edges))
    rings.sort(key=lambda r: (len(r), r))
    return rings


def _greedy_independent(candidates: dict[int, tuple[int, ...]],
                        n_rings: int) -> list[tuple[int, ...]]:
    """Shortest-first GF(2)-greedy selection of independent cycles."""
    ordered = sorted(candidates.items(), key=lambda kv: (len(kv[1]), kv[1]))
    basis: list[int] = []
    chosen: list[tuple[int, ...]] = []
    for mask, cycle_bonds in ordered:
        reduced = mask
        for bv in basis:
            reduced = min(reduced, reduced ^ bv)
        if reduced:
            basis.append(reduced)
            chosen.append(cycle_bonds)
            if len(chosen) == n_rings:
                break
    return chosen


def _horton_candidates(n_atoms: int, edges: list[tuple[int, int]],
                       adj: list[list[tuple[int, int]]]) -> dict[int, tuple[int, ...]]:
    """Horton's candidate cycles: SP(v,x) + SP(v,y) + (x,y) for all v, (x,y)."""
    candidates: dict[int, tuple[int, ...]] = {}
    for v in range(n_atoms):
        # BFS tree from v with bond-path reconstruction
        prev: dict[int, tuple[int, int]] = {v: (-1, -1)}
        frontier = [v]
        while frontier:
            nxt = []
            for u in frontier:
                for w, bidx in adj[u]:
                    if w not in prev:
                        prev[w] = (u, bidx)
                        nxt.append(w)
            frontier = nxt

        def path_to(t: int) -> tuple[list[int], set[int]] | None:
            if t not in prev:
                return None
            bonds, nodes = [], {t}
            cur = t
            while cur != v:
                pu, pb = prev[cur]
                bonds.append(pb)
                nodes.add(pu)
                cur = pu
            return bonds, nodes

        for bidx, (x, y) in enumerate(edges):
            px = path_to(x)
            py = path_to(y)
            if px is None or py is None:
                continue
            if px[1] & py[1] != {v}:
                continue
            cycle_bonds = tuple(sorted(px[0] + py[0] + [bidx]))
            if len(cycle_bonds) < 3:
                continue
            mask = 0
            for pb in cycle_bonds:
                mask |= 1 << pb
            if mask.bit_count() == len(cycle_bonds):  # simple cycle only
                candidates[mask] = cycle_bonds
    return candidates


def _bonds_to_atom_cycle(cycle_bonds: tuple[int, ...], edges: list[tuple[int, int]]) -> list[int]:
    """Order a cycle's atoms by walking its bonds; starts at the lowest atom."""
    nbr: dict[int, list[int]] = {}
    for bidx in cycle_bonds:
        a, b = edges[bidx]
        nbr.setdefault(a, []).append(b)
        nbr.setdefault(b, []).append(a)
    start = min(nbr)
    cycle = [start]
    prev = -1
    cur = start
    while True:
        nxt = nbr[cur][0] if nbr[cur][0] != prev else nbr[cur][1]
        if nxt == start:
            break
        cycle.append(nxt)
        prev, cur = cur, nxt
    # canonical direction: second atom is the smaller of the two neighbors
    if len(cycle) > 2 and cycle[-1] < cycle[1]:
        cycle = [cycle[0]] + cycle[:0:-1]
    return cycle


def simple_cycles_upto(n_atoms: int, edges: list[tuple[int, int]],
                       max_len: int = 8) -> list[tuple[int, ...]]:
    """All simple cycles of length <= max_len, as canonical atom tuples.

    The result is a set determined by the graph alone (independent of atom
    numbering up to relabeling), which keeps aromaticity perception stable
    under permutations.
    """
    adj: list[list[int]] = [[] for _ in range(n_atoms)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)

    found: set[tuple[int, ...]] = set()

    def extend(path: list[int], on_path: set[int]) -> None:
        head = path[-1]
        for w in adj[head]:
            if w == path[0] and len(path) >= 3:
                found.add(_canonical_cycle(path))
            elif w not in on_path and w > path[0] and len(path) < max_len:
                path.append(w)
                on_path.add(w)
                extend(path, on_path)
                on_path.discard(w)
                path.pop()

    for start in range(n_atoms):
        extend([start], {start})
    return sorted(found)


def _canonical_cycle(path: list[int]) -> tuple[int, ...]:
    """Rotate/reflect a cycle so it starts at its minimum atom, smaller side first."""
    k = path.index(min(path))
    rotated = path[k:] + path[:k]
    fwd = tuple(rotated)
    rev = tuple([rotated[0]] + rotated[:0:-1])
    return min(fwd, rev)
