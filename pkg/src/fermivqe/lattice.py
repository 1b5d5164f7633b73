"""Lattice geometries, register maps and bond scheduling.

Sites are numbered row-major from the top-left corner. Bonds are unordered
pairs stored with ``a < b``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

KINDS = ("chain", "ladder", "rectangle", "custom")
ORDERINGS = ("row_major", "snake", "spin_blocked")

UP, DOWN = 0, 1


class GeometryError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Bond:
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise GeometryError(f"self-loop bond on site {self.a}")
        if self.a > self.b:
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)

    def sites(self) -> tuple[int, int]:
        return (self.a, self.b)


@dataclass(frozen=True)
class Geometry:
    kind: str
    rows: int
    cols: int
    bonds: tuple[Bond, ...]

    @property
    def num_sites(self) -> int:
        return self.rows * self.cols

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    def degree(self, site: int) -> int:
        return sum(1 for bond in self.bonds if site in (bond.a, bond.b))

    @property
    def max_degree(self) -> int:
        return max((self.degree(s) for s in range(self.num_sites)), default=0)

    def coords(self, site: int) -> tuple[int, int]:
        return divmod(site, self.cols)

    def label(self) -> str:
        if self.kind == "custom":
            return f"custom{self.num_sites}"
        return f"{self.kind}_{self.rows}x{self.cols}"

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "rows": self.rows, "cols": self.cols}
        if self.kind == "custom":
            out["bonds"] = [[b.a, b.b] for b in self.bonds]
        return out


def _grid_bonds(rows: int, cols: int) -> list[Bond]:
    bonds = []
    for r in range(rows):
        for c in range(cols):
            s = r * cols + c
            if c + 1 < cols:
                bonds.append(Bond(s, s + 1))
            if r + 1 < rows:
                bonds.append(Bond(s, s + cols))
    return sorted(bonds)


def build_geometry(
    kind: str,
    rows: int = 1,
    cols: int = 1,
    bonds: Iterable[Sequence[int]] | None = None,
    num_sites: int | None = None,
) -> Geometry:
    """Build a geometry with its canonical bond set.

    ``custom`` geometries take an explicit bond list and are laid out as a
    single row of ``num_sites`` sites (inferred from the bonds when omitted).
    """
    if kind not in KINDS:
        raise GeometryError(f"unknown geometry kind {kind!r}")

    if kind == "custom":
        if bonds is None:
            raise GeometryError("custom geometry needs a bond list")
        pairs = [tuple(int(x) for x in pair) for pair in bonds]
        if any(len(p) != 2 for p in pairs):
            raise GeometryError("bonds must be [a, b] pairs")
        if num_sites is None:
            num_sites = max((max(p) for p in pairs), default=-1) + 1
        if num_sites < 2:
            raise GeometryError("geometry needs at least two sites")
        canon = []
        seen = set()
        for a, b in pairs:
            if a < 0 or b < 0 or a >= num_sites or b >= num_sites:
                raise GeometryError(f"bond ({a}, {b}) references a site outside [0, {num_sites})")
            bond = Bond(a, b)
            if bond in seen:
                raise GeometryError(f"duplicate bond ({bond.a}, {bond.b})")
            seen.add(bond)
            canon.append(bond)
        return Geometry("custom", 1, num_sites, tuple(sorted(canon)))

    if rows < 1 or cols < 1:
        raise GeometryError("rows and cols must be positive")
    if rows * cols < 2:
        raise GeometryError("geometry needs at least two sites")
    if kind == "chain" and rows != 1:
        raise GeometryError("a chain has exactly one row")
    if kind == "ladder" and rows != 2:
        raise GeometryError("a ladder has exactly two rows")
    return Geometry(kind, rows, cols, tuple(_grid_bonds(rows, cols)))


def geometry_from_dict(spec: dict) -> Geometry:
    kind = spec.get("kind", "custom" if "bonds" in spec else "chain")
    if kind == "custom":
        return build_geometry("custom", bonds=spec["bonds"], num_sites=spec.get("num_sites", spec.get("cols")))
    return build_geometry(kind, int(spec.get("rows", 1)), int(spec["cols"]))


# --- edge colouring ---------------------------------------------------------


@dataclass(frozen=True)
class GateSchedule:
    steps: tuple[tuple[Bond, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.steps)

    def bonds(self) -> list[Bond]:
        return [b for step in self.steps for b in step]


def is_bipartite(geometry: Geometry) -> bool:
    adj = _adjacency(geometry)
    side: dict[int, int] = {}
    for start in range(geometry.num_sites):
        if start in side:
            continue
        side[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in side:
                    side[w] = 1 - side[u]
                    queue.append(w)
                elif side[w] == side[u]:
                    return False
    return True


def _adjacency(geometry: Geometry) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(geometry.num_sites)]
    for bond in geometry.bonds:
        adj[bond.a].append(bond.b)
        adj[bond.b].append(bond.a)
    return adj


def _konig_coloring(geometry: Geometry) -> dict[Bond, int]:
    # at[v][c] = neighbour reached from v along the edge of colour c
    at: list[dict[int, int]] = [{} for _ in range(geometry.num_sites)]

    def free(v: int) -> int:
        c = 0
        while c in at[v]:
            c += 1
        return c

    for bond in geometry.bonds:
        u, v = bond.a, bond.b
        a, b = free(u), free(v)
        if a in at[v]:
            # swap colours a/b along the alternating path leaving v on colour a;
            # in a bipartite graph this path never reaches u
            path = [v]
            colour = a
            while colour in at[path[-1]]:
                path.append(at[path[-1]][colour])
                colour = b if colour == a else a
            edges = [(path[i], path[i + 1], a if i % 2 == 0 else b) for i in range(len(path) - 1)]
            for x, y, c in edges:
                del at[x][c]
                del at[y][c]
            for x, y, c in edges:
                swapped = b if c == a else a
                at[x][swapped] = y
                at[y][swapped] = x
        at[u][a] = v
        at[v][a] = u

    colours = {}
    for bond in geometry.bonds:
        for c, w in at[bond.a].items():
            if w == bond.b:
                colours[bond] = c
                break
    return colours


def _misra_gries(geometry: Geometry) -> dict[Bond, int]:
    """Proper edge colouring with at most max_degree + 1 colours."""
    adj = _adjacency(geometry)
    colour: dict[tuple[int, int], int] = {}

    def get(x: int, y: int) -> int | None:
        return colour.get((min(x, y), max(x, y)))

    def put(x: int, y: int, c: int | None) -> None:
        key = (min(x, y), max(x, y))
        if c is None:
            colour.pop(key, None)
        else:
            colour[key] = c

    def used(x: int) -> set[int]:
        return {c for w in adj[x] if (c := get(x, w)) is not None}

    def free_on(x: int) -> int:
        u = used(x)
        c = 0
        while c in u:
            c += 1
        return c

    for bond in geometry.bonds:
        x, v = bond.a, bond.b
        fan = [v]
        in_fan = {v}
        while True:
            last_free = used(fan[-1])
            nxt = None
            for w in adj[x]:
                if w in in_fan:
                    continue
                c = get(x, w)
                if c is not None and c not in last_free:
                    nxt = w
                    break
            if nxt is None:
                break
            fan.append(nxt)
            in_fan.add(nxt)
        c = free_on(x)
        d = free_on(fan[-1])
        if c != d:
            # invert the cd-path starting at x
            path = [x]
            want = d
            while True:
                cur = path[-1]
                step = next((w for w in adj[cur] if get(cur, w) == want and (len(path) < 2 or w != path[-2])), None)
                if step is None:
                    break
                path.append(step)
                want = c if want == d else d
            for y, z in zip(path, path[1:]):
                put(y, z, c if get(y, z) == d else d)
        # rotate the shortest fan prefix ending at a vertex where d is free
        w_idx = 0
        for i, w in enumerate(fan):
            if d not in used(w) and all(
                get(x, fan[k + 1]) is not None and get(x, fan[k + 1]) not in used(fan[k])
                for k in range(i)
            ):
                w_idx = i
                break
        for k in range(w_idx):
            put(x, fan[k], get(x, fan[k + 1]))
        put(x, fan[w_idx], d)

    return {Bond(a, b): c for (a, b), c in colour.items()}


def edge_color(geometry: Geometry) -> GateSchedule:
    """Split the bonds into parallel steps (a proper edge colouring).

    Bipartite geometries get exactly ``max_degree`` steps; anything else falls
    back to Misra-Gries with at most ``max_degree + 1``.
    """
    if not geometry.bonds:
        return GateSchedule(())
    if is_bipartite(geometry):
        colours = _konig_coloring(geometry)
    else:
        colours = _misra_gries(geometry)
    ncol = max(colours.values()) + 1
    steps = [sorted(b for b in geometry.bonds if colours[b] == c) for c in range(ncol)]
    return GateSchedule(tuple(tuple(s) for s in steps if s))


# --- registers ---------------------------------------------------------------


@dataclass(frozen=True)
class RegisterMap:
    num_sites: int
    spinful: bool
    ordering: str
    _site_pos: tuple[int, ...] = field(repr=False)

    @property
    def num_modes(self) -> int:
        return self.num_sites * (2 if self.spinful else 1)

    def mode_of(self, site: int, spin: int = UP) -> int:
        pos = self._site_pos[site]
        if not self.spinful:
            return pos
        if self.ordering == "spin_blocked":
            return pos + spin * self.num_sites
        return 2 * pos + spin

    def modes(self) -> list[tuple[int, int]]:
        spins = (UP, DOWN) if self.spinful else (UP,)
        return [(s, sp) for s in range(self.num_sites) for sp in spins]


def register_map(geometry: Geometry, spinful: bool = False, ordering: str = "row_major") -> RegisterMap:
    if ordering not in ORDERINGS:
        raise GeometryError(f"unknown ordering {ordering!r}")
    if ordering == "spin_blocked" and not spinful:
        raise GeometryError("spin_blocked ordering needs a spinful register")
    pos = list(range(geometry.num_sites))
    if ordering == "snake":
        for site in range(geometry.num_sites):
            r, c = geometry.coords(site)
            pos[site] = r * geometry.cols + (c if r % 2 == 0 else geometry.cols - 1 - c)
    return RegisterMap(geometry.num_sites, spinful, ordering, tuple(pos))
