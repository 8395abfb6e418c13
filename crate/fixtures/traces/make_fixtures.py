"""Generates the trace-shaped stand-in fixtures used by the trace presets.

Neither the cluster task trace nor the base-station/user location dataset
cited by the paper ships with this repository, so these files imitate their
shape only:

* tasks.csv: cluster-trace-like task events. Nanosecond timestamps, a bursty
  Poisson arrival process, heavy-tailed (lognormal) durations and a deadline
  column a + p * U(1.2, 3).
* locations.csv: longitude/latitude records around Melbourne's CBD. The first
  150 rows are spread-out base-station sites. The remaining rows are users
  clustered around hotspots.
* golden_tasks.csv / golden_locations.csv: ten-record files for the ingestion
  golden test.

Running `python3 make_fixtures.py` regenerates byte-identical files.
"""

import math
import random

NS = 1_000_000_000
N_TASKS = 20_000
RATE_PER_S = 360.0         # mean arrivals per second
MEDIAN_S, SIGMA = 18.0, 0.8
MAX_S = 90.0
T0_NS = 600 * NS           # trace clock offset
CBD = (144.9631, -37.8136)  # lon, lat
N_SITES, N_USERS = 150, 1_200


def tasks(rng):
    rows = []
    t = float(T0_NS)
    for job in range(N_TASKS):
        # rate modulated by a slow wave for burstiness
        phase = (t - T0_NS) / NS / 90.0
        rate = RATE_PER_S * (1.0 + 0.35 * math.sin(2 * math.pi * phase))
        t += rng.expovariate(rate) * NS
        dur = min(MAX_S, max(0.2, rng.lognormvariate(math.log(MEDIAN_S), SIGMA)))
        a = int(t)
        p = int(dur * NS)
        d = a + int(p * rng.uniform(1.2, 3.0))
        rows.append((job, a, p, d))
    return rows


def locations(rng):
    rows = []
    half_lon, half_lat = 0.030, 0.024
    for _ in range(N_SITES):
        rows.append((CBD[0] + rng.uniform(-half_lon, half_lon),
                     CBD[1] + rng.uniform(-half_lat, half_lat)))
    hotspots = [(CBD[0] + rng.uniform(-0.8, 0.8) * half_lon,
                 CBD[1] + rng.uniform(-0.8, 0.8) * half_lat,
                 rng.uniform(0.002, 0.006)) for _ in range(12)]
    for _ in range(N_USERS):
        if rng.random() < 0.8:
            lon, lat, s = rng.choice(hotspots)
            rows.append((rng.gauss(lon, s), rng.gauss(lat, s)))
        else:
            rows.append((CBD[0] + rng.uniform(-half_lon, half_lon),
                         CBD[1] + rng.uniform(-half_lat, half_lat)))
    return rows


def main():
    rng = random.Random(20240601)
    with open("tasks.csv", "w") as f:
        f.write("job_id,arrival_ns,duration_ns,deadline_ns\n")
        for r in tasks(rng):
            f.write("%d,%d,%d,%d\n" % r)
    with open("locations.csv", "w") as f:
        f.write("site,longitude,latitude\n")
        for i, (lon, lat) in enumerate(locations(rng)):
            f.write("%d,%.6f,%.6f\n" % (i, lon, lat))
    with open("golden_tasks.csv", "w") as f:
        f.write("job_id,arrival_ns,duration_ns,deadline_ns,class\n")
        golden = [
            (0, 1_000_000_000, 4_000_000_000, 12_000_000_000, "H"),
            (1, 2_500_000_000, 2_000_000_000, 9_000_000_000, "S"),
            (2, 3_000_000_000, 6_000_000_000, 20_000_000_000, "H"),
            (3, 5_000_000_000, 1_000_000_000, 7_000_000_000, "S"),
            (4, 5_000_000_000, 3_000_000_000, 16_000_000_000, "S"),
            (5, 8_000_000_000, 5_000_000_000, 21_000_000_000, "H"),
            (6, 9_500_000_000, 500_000_000, 11_000_000_000, "S"),
            (7, 12_000_000_000, 7_000_000_000, 31_000_000_000, "H"),
            (8, 15_000_000_000, 2_000_000_000, 19_000_000_000, "S"),
            (9, 20_000_000_000, 4_000_000_000, 41_000_000_000, "H"),
        ]
        for r in golden:
            f.write("%d,%d,%d,%d,%s\n" % r)
    with open("golden_locations.csv", "w") as f:
        f.write("site,longitude,latitude\n")
        pts = [(144.9500, -37.8200), (144.9700, -37.8050), (144.9600, -37.8130),
               (144.9550, -37.8160), (144.9650, -37.8100), (144.9580, -37.8180),
               (144.9690, -37.8070), (144.9520, -37.8120), (144.9610, -37.8090),
               (144.9640, -37.8150)]
        for i, (lon, lat) in enumerate(pts):
            f.write("%d,%.4f,%.4f\n" % (i, lon, lat))


if __name__ == "__main__":
    main()
