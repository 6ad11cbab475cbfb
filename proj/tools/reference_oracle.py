#!/usr/bin/env python3
"""Independent enumeration oracle using SciPy's HiGHS backend.

Enumerates every candidate combination of the extendable lines, fixes
capacities and susceptances, solves the dispatch LP and prints the best
combination as JSON. Shares no code with the C++ library.

usage: reference_oracle.py network.json [config.json]
"""

import itertools
import json
import sys

import numpy as np
from scipy.optimize import linprog

DEFAULTS = {
    "renewable_share": 0.70,
    "volume_cap": 0.25,
    "line_loading_factor": 0.70,
    "charge_existing": True,
}


def solve_fixed(net, cfg, gamma):
    buses = [b["id"] for b in net["buses"]]
    bidx = {b: i for i, b in enumerate(buses)}
    T = len(net["snapshots"])
    w = [s["weight"] for s in net["snapshots"]]
    gens, lines, links = net["generators"], net["lines"], net.get("links", [])
    nb, ng, nl, nk = len(buses), len(gens), len(lines), len(links)

    # Columns: G[g], p[g,t], H[k], h[k,t], f[l,t], theta[i,t]
    cols = []
    bounds = []
    cost = []

    def add(c, lo, hi):
        cols.append(None)
        cost.append(c)
        bounds.append((lo, hi))
        return len(cols) - 1

    G = []
    for g in gens:
        cap_max = g.get("capacity_max")
        hi = None if cap_max is None else cap_max
        if g.get("extendable", True):
            G.append(add(g["capital_cost"], 0.0, hi))
        else:
            G.append(add(g["capital_cost"], g.get("capacity", 0.0), g.get("capacity", 0.0)))
    P = [[add(w[t] * g["marginal_cost"], 0.0, None) for t in range(T)] for g in gens]
    H = [add(k["capital_cost"], k.get("capacity", 0.0), k.get("capacity_max", 8000.0)) for k in links]
    Hf = [[add(0.0, None, None) for _ in range(T)] for _ in links]
    Fl = [[add(0.0, None, None) for _ in range(T)] for _ in lines]

    # Reference bus per AC component: lowest index.
    parent = list(range(nb))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for l in lines:
        a, b = find(bidx[l["from"]]), find(bidx[l["to"]])
        parent[max(a, b)] = min(a, b)
    refs = {i for i in range(nb) if find(i) == i}
    TH = [[add(0.0, 0.0, 0.0) if i in refs else add(0.0, None, None) for _ in range(T)] for i in range(nb)]

    n = len(cols)
    A_eq, b_eq, A_ub, b_ub = [], [], [], []

    def row():
        return np.zeros(n)

    # Dispatch limits.
    for gi, g in enumerate(gens):
        for t in range(T):
            r = row()
            r[P[gi][t]] = 1.0
            r[G[gi]] = -g["availability"][t]
            A_ub.append(r)
            b_ub.append(0.0)
    for ki in range(nk):
        for t in range(T):
            for s in (1.0, -1.0):
                r = row()
                r[Hf[ki][t]] = s
                r[H[ki]] = -1.0
                A_ub.append(r)
                b_ub.append(0.0)

    factor = []
    for li, l in enumerate(lines):
        factor.append(1.0 + gamma[li] / l["init_circuits"])
    # Flow limits and KVL.
    for li, l in enumerate(lines):
        F = factor[li] * l["init_capacity"]
        b = factor[li] * l["init_susceptance"]
        i, j = bidx[l["from"]], bidx[l["to"]]
        for t in range(T):
            bounds[Fl[li][t]] = (-cfg["line_loading_factor"] * F, cfg["line_loading_factor"] * F)
            r = row()
            r[Fl[li][t]] = 1.0
            r[TH[i][t]] -= b
            r[TH[j][t]] += b
            A_eq.append(r)
            b_eq.append(0.0)
    # KCL.
    for i, bus in enumerate(net["buses"]):
        for t in range(T):
            r = row()
            for gi, g in enumerate(gens):
                if bidx[g["bus"]] == i:
                    r[P[gi][t]] += 1.0
            for li, l in enumerate(lines):
                if bidx[l["from"]] == i:
                    r[Fl[li][t]] -= 1.0
                if bidx[l["to"]] == i:
                    r[Fl[li][t]] += 1.0
            for ki, k in enumerate(links):
                if bidx[k["from"]] == i:
                    r[Hf[ki][t]] -= 1.0
                if bidx[k["to"]] == i:
                    r[Hf[ki][t]] += 1.0
            A_eq.append(r)
            b_eq.append(bus["load"][t])
    # Renewable share.
    demand = sum(w[t] * bus["load"][t] for bus in net["buses"] for t in range(T))
    r = row()
    for gi, g in enumerate(gens):
        if g.get("renewable", False):
            for t in range(T):
                r[P[gi][t]] = -w[t]
    A_ub.append(r)
    b_ub.append(-cfg["renewable_share"] * demand)

    res = linprog(
        cost,
        A_ub=np.array(A_ub),
        b_ub=b_ub,
        A_eq=np.array(A_eq),
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": 1e-9, "dual_feasibility_tolerance": 1e-9},
    )
    if res.status != 0:
        return None
    line_cost = sum(l["capital_cost"] * factor[li] * l["init_capacity"] for li, l in enumerate(lines))
    if not cfg["charge_existing"]:
        line_cost -= sum(l["capital_cost"] * l["init_capacity"] for l in lines)
        line_cost -= sum(k["capital_cost"] * k.get("capacity", 0.0) for k in links)
    return res.fun + line_cost


def main():
    net = json.load(open(sys.argv[1]))
    cfg = dict(DEFAULTS)
    if len(sys.argv) > 2:
        cfg.update(json.load(open(sys.argv[2])))
    lines = net["lines"]
    ext = [li for li, l in enumerate(lines) if l.get("extendable", False)]
    base_volume = sum(l["init_capacity"] * l["length"] for l in lines)
    best = None
    table = []
    for combo in itertools.product(*[lines[li].get("candidates", [0, 1, 2]) for li in ext]):
        gamma = [0.0] * len(lines)
        for li, c in zip(ext, combo):
            gamma[li] = float(c)
        added = sum(gamma[li] / l["init_circuits"] * l["init_capacity"] * l["length"] for li, l in enumerate(lines))
        if added > cfg["volume_cap"] * base_volume + 1e-12 * base_volume:
            table.append({"gamma": list(combo), "objective": None, "skipped": "volume_cap"})
            continue
        obj = solve_fixed(net, cfg, gamma)
        table.append({"gamma": list(combo), "objective": obj})
        if obj is not None and (best is None or obj < best[1]):
            best = (list(combo), obj)
    out = {
        "network": net.get("name"),
        "extendable": [lines[li]["id"] for li in ext],
        "optimum": None if best is None else {"gamma": best[0], "objective": best[1]},
        "combinations": table,
    }
    json.dump(out, sys.stdout, indent=1)
    print()


if __name__ == "__main__":
    main()
