#!/usr/bin/env python3
"""Regenerates the shipped environment files (layered ASCII voxel worlds).

Usage: python3 scenarios/generate.py [outdir]
"""
import random
import sys
from pathlib import Path

E = 0.1


class World:
    def __init__(self, nx, ny, nz):
        self.nx, self.ny, self.nz = nx, ny, nz
        # columns: set of occupied layers per (x, y)
        self.solid = [[bytearray(nz) for _ in range(nx)] for _ in range(ny)]

    def box(self, x0, y0, x1, y1, z0=0, z1=None):
        """Fills voxels with x0 <= x < x1 etc. (indices)."""
        z1 = self.nz if z1 is None else z1
        for y in range(max(0, y0), min(self.ny, y1)):
            row = self.solid[y]
            for x in range(max(0, x0), min(self.nx, x1)):
                for z in range(max(0, z0), min(self.nz, z1)):
                    row[x][z] = 1

    def carve(self, x0, y0, x1, y1, z0=1, z1=None):
        z1 = self.nz - 1 if z1 is None else z1
        for y in range(max(0, y0), min(self.ny, y1)):
            for x in range(max(0, x0), min(self.nx, x1)):
                for z in range(z0, z1):
                    self.solid[y][x][z] = 0

    def shell(self, wall=2):
        self.box(0, 0, self.nx, self.ny, 0, 1)
        self.box(0, 0, self.nx, self.ny, self.nz - 1, self.nz)
        self.box(0, 0, self.nx, wall)
        self.box(0, self.ny - wall, self.nx, self.ny)
        self.box(0, 0, wall, self.ny)
        self.box(self.nx - wall, 0, self.nx, self.ny)

    def write(self, path):
        out = [f"voxelworld {self.nx} {self.ny} {self.nz} {E}"]
        for z in range(self.nz):
            if z:
                out.append("--")
            for y in range(self.ny):
                out.append("".join("#" if self.solid[y][x][z] else "." for x in range(self.nx)))
        Path(path).write_text("\n".join(out) + "\n")


def small_room():
    w = World(60, 50, 25)
    w.shell()
    w.box(28, 20, 32, 24)  # pillar
    w.box(44, 34, 52, 38, 0, 8)  # low table-height block
    return w


def maze(cells=4, cell=30, wall=2, door=12, seed=7):
    n = cells * cell + wall
    w = World(n, n, 25)
    w.shell(wall)
    rng = random.Random(seed)
    # interior wall grid
    for c in range(1, cells):
        w.box(c * cell, 0, c * cell + wall, n)
        w.box(0, c * cell, n, c * cell + wall)
    # spanning tree over cells, then a few extra openings
    seen = {(0, 0)}
    stack = [(0, 0)]
    links = set()
    while stack:
        cx, cy = stack[-1]
        nbrs = [(cx + dx, cy + dy) for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
                if 0 <= cx + dx < cells and 0 <= cy + dy < cells and (cx + dx, cy + dy) not in seen]
        if not nbrs:
            stack.pop()
            continue
        nxt = rng.choice(nbrs)
        seen.add(nxt)
        links.add(tuple(sorted([(cx, cy), nxt])))
        stack.append(nxt)
    all_links = [tuple(sorted([(x, y), (x + dx, y + dy)])) for x in range(cells) for y in range(cells)
                 for dx, dy in ((1, 0), (0, 1)) if x + dx < cells and y + dy < cells]
    extra = [l for l in all_links if l not in links]
    rng.shuffle(extra)
    links.update(extra[:3])
    for (ax, ay), (bx, by) in sorted(links):
        off = rng.randint(4, cell - door - 2)
        if ax != bx:  # vertical wall at x = bx * cell
            x = bx * cell
            y = ay * cell + wall + off
            w.carve(x, y, x + wall, y + door)
        else:
            y = by * cell
            x = ax * cell + wall + off
            w.carve(x, y, x + door, y + wall)
    return w


def indoor():
    w = World(250, 250, 25)
    w.shell()
    # central corridor along x and y
    w.box(2, 110, 248, 112)
    w.box(2, 138, 248, 140)
    w.box(110, 2, 112, 110)
    w.box(138, 140, 140, 248)
    w.box(60, 2, 62, 110)
    w.box(190, 2, 192, 110)
    w.box(70, 140, 72, 248)
    w.box(190, 140, 192, 248)
    w.box(2, 60, 60, 62)
    w.box(192, 55, 248, 57)
    w.box(2, 195, 70, 197)
    w.box(192, 200, 248, 202)
    doors = [
        (30, 110, 42, 112), (85, 110, 97, 112), (150, 110, 162, 112), (215, 110, 227, 112),
        (30, 138, 42, 140), (100, 138, 112, 140), (160, 138, 172, 140), (215, 138, 227, 140),
        (60, 80, 62, 92), (110, 40, 112, 52), (190, 80, 192, 92), (70, 170, 72, 182),
        (138, 200, 140, 212), (190, 170, 192, 182), (25, 60, 37, 62), (215, 55, 227, 57),
        (25, 195, 37, 197), (215, 200, 227, 202), (240, 110, 248, 140),
    ]
    for x0, y0, x1, y1 in doors:
        w.carve(x0, y0, x1, y1)
    # furniture
    for x0, y0, x1, y1, h in [(20, 20, 40, 30, 8), (140, 30, 160, 45, 8), (210, 20, 225, 40, 10),
                              (20, 160, 35, 175, 8), (100, 200, 120, 215, 9), (220, 220, 235, 235, 25),
                              (160, 70, 170, 80, 25), (30, 80, 40, 90, 25)]:
        w.box(x0, y0, x1, y1, 0, h)
    return w


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
    small_room().write(out / "small_room.vw")
    maze().write(out / "medium_maze.vw")
    indoor().write(out / "indoor_25m.vw")


if __name__ == "__main__":
    main()
