#!/usr/bin/env python3
"""Independent checks of the bundled fixtures (stdlib only)."""
import csv
import json
import sys
from collections import deque
from pathlib import Path


def check_radial(net):
    ids = [b["id"] for b in net["buses"]]
    adj = {i: [] for i in ids}
    for line in net["lines"]:
        adj[line["from_bus"]].append(line["to_bus"])
        adj[line["to_bus"]].append(line["from_bus"])
    seen = {net["source"]["bus_id"]}
    todo = deque(seen)
    while todo:
        b = todo.popleft()
        for n in adj[b]:
            if n not in seen:
                seen.add(n)
                todo.append(n)
    return len(seen) == len(ids) and len(net["lines"]) == len(ids) - 1


def census(path):
    counts = [0, 0, 0, 0]
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            kw = float(row["rated_kw"])
            counts[0 if kw < 50 else 1 if kw < 150 else 2 if kw < 350 else 3] += 1
    return counts


def main():
    data = Path(sys.argv[1])
    failures = []

    def expect(cond, what):
        print(("ok   " if cond else "FAIL ") + what)
        if not cond:
            failures.append(what)

    expected = {"feeder20.json": 20, "feeder40.json": 40, "feeder200.json": 200}
    for name, n in expected.items():
        net = json.loads((data / name).read_text())
        expect(len(net["buses"]) == n, f"{name}: {n} buses")
        expect(len(net["lines"]) == n - 1, f"{name}: {n - 1} lines")
        expect(check_radial(net), f"{name}: connected and radial")
        ids = sorted(b["id"] for b in net["buses"])
        expect(len(set(ids)) == n, f"{name}: unique bus ids")

    loop = json.loads((data / "feeder_loop.json").read_text())
    expect(not check_radial(loop), "feeder_loop.json: not radial")

    expect(census(data / "stations951.csv") == [895, 24, 18, 14], "stations951.csv: census 895/24/18/14")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
