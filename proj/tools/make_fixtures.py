#!/usr/bin/env python3
"""Generates the bundled test feeders and station registry.

Output is deterministic (fixed seeds); the files under tests/data/ were
produced by running this script from the repository root:

    python3 tools/make_fixtures.py tests/data
"""
import json
import math
import random
import sys
from pathlib import Path


def tree_feeder(seed, n, base_kv, origin, step_deg, r_ohm_km, x_ohm_km, load_kw, pf,
                ampacity, depth_bias, tag_every=0):
    rng = random.Random(seed)
    buses = [{"id": "b00" if n <= 100 else "b000", "lat": origin[0], "lon": origin[1],
              "base_kv": base_kv}]
    width = 2 if n <= 100 else 3
    lines, loads = [], []
    for i in range(1, n):
        # depth_bias near 1 favours recent buses (long laterals), 0 is uniform
        if rng.random() < depth_bias:
            parent = max(0, i - 1 - int(rng.random() * 3))
        else:
            parent = rng.randrange(0, i)
        p = buses[parent]
        ang = rng.uniform(0, 2 * math.pi)
        d = rng.uniform(0.4, 1.0) * step_deg
        lat = round(p["lat"] + d * math.sin(ang), 6)
        lon = round(p["lon"] + d * math.cos(ang), 6)
        bid = f"b{i:0{width}d}"
        bus = {"id": bid, "lat": lat, "lon": lon, "base_kv": base_kv}
        if tag_every and i % tag_every == 0:
            bus["tags"] = ["transformer"]
        buses.append(bus)
        km = haversine_km(p["lat"], p["lon"], lat, lon)
        lines.append({
            "id": f"l{i:0{width}d}",
            "from_bus": p["id"],
            "to_bus": bid,
            "resistance_ohm": round(r_ohm_km * km, 5),
            "reactance_ohm": round(x_ohm_km * km, 5),
            "ampacity_a": rng.choice(ampacity),
        })
        kw = round(rng.uniform(*load_kw), 1)
        kvar = round(kw * math.tan(math.acos(pf)), 1)
        loads.append({"id": f"ld{i:0{width}d}", "bus_id": bid, "kw": kw, "kvar": kvar})
    return {"buses": buses, "lines": lines, "loads": loads,
            "source": {"bus_id": buses[0]["id"], "voltage_pu": 1.0}}


def haversine_km(lat1, lon1, lat2, lon2):
    r = 6371.0
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * r * math.asin(math.sqrt(h))


def stations(seed, net, census):
    rng = random.Random(seed)
    lats = [b["lat"] for b in net["buses"]]
    lons = [b["lon"] for b in net["buses"]]
    ranges = [(3.3, 49.0), (50.0, 149.0), (150.0, 349.0), (350.0, 600.0)]
    rows = []
    k = 0
    for level, count in enumerate(census):
        lo, hi = ranges[level]
        for _ in range(count):
            k += 1
            rated = round(rng.uniform(lo, hi), 1)
            if level == 0 and k % 7 == 0:
                rated = 7.2
            rows.append((f"s{k:04d}", f"Station {k}", round(rng.uniform(min(lats), max(lats)), 6),
                         round(rng.uniform(min(lons), max(lons)), 6), rated))
    rng.shuffle(rows)
    out = ["id,name,lat,lon,rated_kw"]
    for r in rows:
        out.append(f"{r[0]},{r[1]},{r[2]:.6f},{r[3]:.6f},{r[4]}")
    return "\n".join(out) + "\n"


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
    out.mkdir(parents=True, exist_ok=True)
    sj = (37.335, -121.893)

    feeder20 = tree_feeder(20, 20, 12.47, sj, 0.006, 0.30, 0.45, (50, 400), 0.9,
                           [200, 300, 400, 600], 0.5)
    feeder40 = tree_feeder(40, 40, 115.0, sj, 0.03, 0.06, 0.30, (1000, 6000), 0.95,
                           [800, 1200, 1600, 2000], 0.4, tag_every=3)
    feeder200 = tree_feeder(200, 200, 12.47, sj, 0.002, 0.25, 0.40, (10, 60), 0.9,
                            [200, 300, 400, 600], 0.2)
    for name, net in [("feeder20.json", feeder20), ("feeder40.json", feeder40),
                      ("feeder200.json", feeder200)]:
        (out / name).write_text(json.dumps(net, indent=1) + "\n")
    (out / "stations951.csv").write_text(stations(951, feeder40, (895, 24, 18, 14)))


if __name__ == "__main__":
    main()
