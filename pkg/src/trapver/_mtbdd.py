"""Hash-consed multi-terminal BDDs over a fixed variable order.

Used by the automaton layer for three jobs: canonical transition
signatures during minimization, set-valued transition functions during
determinization, and merging cube lists into canonical disjoint covers.
Terminals are arbitrary hashable values.  Variables are the track bit
positions, ordered ascending.
"""

from __future__ import annotations


class Table:
    """One shared node store.  Callers create a fresh table per
    operation batch, so ids stay small and memos stay relevant."""

    def __init__(self):
        self.nodes = []     # id -> ("T", value) or ("N", var, lo, hi)
        self._terms = {}
        self._interned = {}

    def const(self, value) -> int:
        i = self._terms.get(value)
        if i is None:
            i = len(self.nodes)
            self.nodes.append(("T", value))
            self._terms[value] = i
        return i

    def mk(self, var: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (var, lo, hi)
        i = self._interned.get(key)
        if i is None:
            i = len(self.nodes)
            self.nodes.append(("N", var, lo, hi))
            self._interned[key] = i
        return i

    def value(self, i: int):
        node = self.nodes[i]
        if node[0] != "T":
            raise ValueError("not a terminal")
        return node[1]

    def apply1(self, fn, a: int) -> int:
        memo = {}

        def rec(x):
            hit = memo.get(x)
            if hit is not None:
                return hit
            node = self.nodes[x]
            if node[0] == "T":
                out = self.const(fn(node[1]))
            else:
                out = self.mk(node[1], rec(node[2]), rec(node[3]))
            memo[x] = out
            return out

        return rec(a)

    def apply2(self, fn, a: int, b: int) -> int:
        memo = {}

        def rec(x, y):
            key = (x, y)
            hit = memo.get(key)
            if hit is not None:
                return hit
            nx, ny = self.nodes[x], self.nodes[y]
            if nx[0] == "T" and ny[0] == "T":
                out = self.const(fn(nx[1], ny[1]))
            else:
                vx = nx[1] if nx[0] == "N" else None
                vy = ny[1] if ny[0] == "N" else None
                if vy is None or (vx is not None and vx < vy):
                    out = self.mk(vx, rec(nx[2], y), rec(nx[3], y))
                elif vx is None or vy < vx:
                    out = self.mk(vy, rec(x, ny[2]), rec(x, ny[3]))
                else:
                    out = self.mk(vx, rec(nx[2], ny[2]), rec(nx[3], ny[3]))
            memo[key] = out
            return out

        return rec(a, b)

    def from_cubes(self, nvars: int, items, default) -> int:
        """Build the function mapping each letter to the value of the
        cube covering it.  items: iterable of ((mask, bits), value).
        Overlapping cubes must agree on the overlap; uncovered letters
        map to `default`."""
        items = tuple(items)
        memo = {}

        def build(var: int, live) -> int:
            key = (var, live)
            hit = memo.get(key)
            if hit is not None:
                return hit
            if not live:
                out = self.const(default)
            elif var == nvars:
                vals = {items[i][1] for i in live}
                if len(vals) != 1:
                    raise ValueError("overlapping cubes disagree")
                out = self.const(vals.pop())
            else:
                bit = 1 << var
                lo = tuple(i for i in live
                           if not (items[i][0][0] & bit) or
                           not (items[i][0][1] & bit))
                hi = tuple(i for i in live
                           if not (items[i][0][0] & bit) or
                           (items[i][0][1] & bit))
                out = self.mk(var, build(var + 1, lo), build(var + 1, hi))
            memo[key] = out
            return out

        return build(0, tuple(range(len(items))))

    def paths(self, root: int, skip=None):
        """Canonical disjoint cubes of the function: yields
        (mask, bits, value) in variable-order DFS (low side first).
        Terminals equal to `skip` are omitted."""
        out = []

        def rec(x, mask, bits):
            node = self.nodes[x]
            if node[0] == "T":
                if skip is None or node[1] != skip:
                    out.append((mask, bits, node[1]))
                return
            bit = 1 << node[1]
            rec(node[2], mask | bit, bits)
            rec(node[3], mask | bit, bits | bit)

        rec(root, 0, 0)
        return out
