#!/usr/bin/env python3
"""Regenerates the fixture networks and the supply-chain-style table.

Outputs are committed; rerunning this script reproduces them byte for byte.

  asia-like.json       8 nodes, hand-written CPTs
  child-like.json      20 nodes, seeded CPTs
  insurance-like.json  27 nodes, seeded CPTs
  supply-chain.csv     100 rows x 23 columns, planted dependencies
  supply-chain.roles   role per supply-chain column
"""

import csv
import itertools
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))


def node(name, outcomes, parents, cpt, role):
    return {"name": name, "role": role, "outcomes": outcomes, "parents": parents, "cpt": cpt}


def asia_like():
    yn = ["yes", "no"]
    nodes = [
        node("asia", yn, [], [[0.3, 0.7]], "Parameter"),
        node("smoke", yn, [], [[0.5, 0.5]], "Parameter"),
        node("tub", yn, ["asia"], [[0.6, 0.4], [0.15, 0.85]], "Observed"),
        node("lung", yn, ["smoke"], [[0.55, 0.45], [0.1, 0.9]], "Observed"),
        node("bronc", yn, ["smoke"], [[0.7, 0.3], [0.25, 0.75]], "Observed"),
        node("either", yn, ["lung", "tub"], [[0.98, 0.02], [0.95, 0.05], [0.95, 0.05], [0.05, 0.95]], "Observed"),
        node("xray", yn, ["either"], [[0.9, 0.1], [0.1, 0.9]], "Observed"),
        node("dysp", yn, ["bronc", "either"], [[0.9, 0.1], [0.75, 0.25], [0.7, 0.3], [0.1, 0.9]], "Unobserved"),
    ]
    return {"format": "tmbn-network", "version": 1, "name": "asia_like", "nodes": nodes}


def seeded_network(name, spec, seed):
    """spec: list of (node, cardinality, parents, role) in topological order.

    Each parent configuration favours one outcome, chosen from a weighted sum
    of parent levels, with probability 0.7-0.85; the rest is spread evenly.
    """
    rng = random.Random(seed)
    card = {}
    nodes = []
    for n, k, parents, role in spec:
        card[n] = k
        outcomes = ["s%d" % i for i in range(k)]
        coef = [rng.randint(1, 3) for _ in parents]
        shift = rng.randint(0, k - 1)
        rows = []
        for combo in itertools.product(*[range(card[p]) for p in parents]):
            fav = (shift + sum(c * v for c, v in zip(coef, combo))) % k
            peak = round(rng.uniform(0.7, 0.85), 3)
            if not parents:
                peak = round(rng.uniform(0.45, 0.65), 3)
            rest = round((1.0 - peak) / (k - 1), 6)
            row = [rest] * k
            row[fav] = round(1.0 - rest * (k - 1), 6)
            rows.append(row)
        nodes.append(node(n, outcomes, parents, rows, role))
    return {"format": "tmbn-network", "version": 1, "name": name, "nodes": nodes}


CHILD = [
    ("BirthAsphyxia", 2, [], "Parameter"),
    ("Disease", 3, ["BirthAsphyxia"], "Unobserved"),
    ("Sick", 2, ["Disease"], "Observed"),
    ("Age", 3, ["Disease", "Sick"], "Observed"),
    ("LVH", 2, ["Disease"], "Observed"),
    ("DuctFlow", 3, ["Disease"], "Observed"),
    ("CardiacMixing", 3, ["Disease"], "Observed"),
    ("LungParench", 3, ["Disease"], "Observed"),
    ("LungFlow", 3, ["Disease"], "Observed"),
    ("LVHreport", 2, ["LVH"], "Observed"),
    ("HypDistrib", 2, ["DuctFlow", "CardiacMixing"], "Observed"),
    ("HypoxiaInO2", 3, ["CardiacMixing", "LungParench"], "Observed"),
    ("CO2", 3, ["LungParench"], "Observed"),
    ("ChestXray", 3, ["LungParench", "LungFlow"], "Observed"),
    ("Grunting", 2, ["LungParench", "Sick"], "Observed"),
    ("LowerBodyO2", 3, ["HypDistrib", "HypoxiaInO2"], "Observed"),
    ("RUQO2", 3, ["HypoxiaInO2"], "Observed"),
    ("CO2Report", 2, ["CO2"], "Observed"),
    ("XrayReport", 3, ["ChestXray"], "Observed"),
    ("GruntingReport", 2, ["Grunting"], "Observed"),
]

INSURANCE = [
    ("Age", 3, [], "Parameter"),
    ("Mileage", 3, [], "Parameter"),
    ("SocioEcon", 3, ["Age"], "Observed"),
    ("GoodStudent", 2, ["Age", "SocioEcon"], "Observed"),
    ("OtherCar", 2, ["SocioEcon"], "Observed"),
    ("RiskAversion", 3, ["Age", "SocioEcon"], "Observed"),
    ("SeniorTrain", 2, ["Age", "RiskAversion"], "Observed"),
    ("HomeBase", 3, ["SocioEcon", "RiskAversion"], "Observed"),
    ("AntiTheft", 2, ["SocioEcon", "RiskAversion"], "Observed"),
    ("VehicleYear", 2, ["SocioEcon", "RiskAversion"], "Observed"),
    ("MakeModel", 3, ["SocioEcon", "RiskAversion"], "Observed"),
    ("DrivingSkill", 3, ["Age", "SeniorTrain"], "Observed"),
    ("DrivHist", 3, ["DrivingSkill", "RiskAversion"], "Observed"),
    ("DrivQuality", 3, ["DrivingSkill", "RiskAversion"], "Observed"),
    ("Antilock", 2, ["VehicleYear", "MakeModel"], "Observed"),
    ("Airbag", 2, ["VehicleYear", "MakeModel"], "Observed"),
    ("RuggedAuto", 3, ["VehicleYear", "MakeModel"], "Observed"),
    ("CarValue", 3, ["VehicleYear", "MakeModel", "Mileage"], "Observed"),
    ("Cushioning", 3, ["RuggedAuto", "Airbag"], "Observed"),
    ("Accident", 3, ["DrivQuality", "Antilock", "Mileage"], "Unobserved"),
    ("Theft", 2, ["CarValue", "HomeBase", "AntiTheft"], "Observed"),
    ("ThisCarDam", 3, ["Accident", "RuggedAuto"], "Observed"),
    ("OtherCarCost", 3, ["Accident", "RuggedAuto"], "Observed"),
    ("ILiCost", 3, ["Accident"], "Observed"),
    ("MedCost", 3, ["Accident", "Age", "Cushioning"], "Observed"),
    ("ThisCarCost", 3, ["ThisCarDam", "CarValue", "Theft"], "Observed"),
    ("PropCost", 3, ["ThisCarCost", "OtherCarCost"], "Unobserved"),
]


def supply_chain(seed=2023, rows=100):
    """Synthetic stand-in for a small supply-chain table: 23 columns mixing
    categorical and continuous fields with a handful of planted links."""
    rng = random.Random(seed)
    product_types = ["haircare", "skincare", "cosmetics"]
    suppliers = ["Supplier 1", "Supplier 2", "Supplier 3", "Supplier 4", "Supplier 5"]
    locations = ["Mumbai", "Kolkata", "Delhi", "Bangalore", "Chennai"]
    carriers = ["Carrier A", "Carrier B", "Carrier C"]
    modes = ["Road", "Air", "Rail", "Sea"]
    routes = ["Route A", "Route B", "Route C"]
    inspections = ["Pass", "Fail", "Pending"]
    genders = ["Female", "Male", "Non-binary", "Unknown"]
    header = [
        "product_type", "sku_group", "price", "availability", "products_sold", "revenue", "customer_gender",
        "stock_levels", "lead_times", "order_quantities", "shipping_times", "shipping_carrier", "shipping_costs",
        "supplier", "location", "lead_time", "production_volumes", "manufacturing_lead_time",
        "manufacturing_costs", "inspection_results", "defect_rates", "transportation_mode", "routes",
    ]
    out = []
    for i in range(rows):
        pt = rng.choice(product_types)
        sup = rng.choice(suppliers)
        loc = rng.choice(locations)
        base_price = {"haircare": 30, "skincare": 50, "cosmetics": 70}[pt]
        price = round(base_price + rng.gauss(0, 8), 2)
        defect = round(max(0.05, (1.0 + suppliers.index(sup) * 0.9) + rng.gauss(0, 0.4)), 3)
        availability = int(max(1, min(100, 90 - defect * 12 + rng.gauss(0, 8))))
        sold = int(max(5, availability * 9 + rng.gauss(0, 60)))
        revenue = round(sold * price * 0.1 + rng.gauss(0, 150), 2)
        stock = int(max(0, rng.gauss(50, 25)))
        lead_times = int(max(1, rng.gauss(15, 7)))
        order_q = int(max(1, stock * 0.8 + rng.gauss(10, 10)))
        mode = rng.choice(modes)
        ship_time = int(max(1, {"Air": 2, "Road": 5, "Rail": 6, "Sea": 9}[mode] + rng.gauss(0, 1.2)))
        carrier = rng.choice(carriers)
        ship_cost = round({"Air": 9, "Road": 4, "Rail": 3, "Sea": 2}[mode] + rng.gauss(0, 1), 3)
        lead_time = int(max(1, rng.gauss(17, 8)))
        prod_vol = int(max(10, sold * 0.9 + rng.gauss(0, 80)))
        mfg_lead = int(max(1, rng.gauss(15, 8)))
        mfg_cost = round(max(1.0, 20 + defect * 10 + rng.gauss(0, 6)), 3)
        insp = inspections[0] if defect < 2.0 else (inspections[1] if defect > 3.5 else rng.choice(inspections))
        route = rng.choice(routes)
        out.append([
            pt, "SKU-" + str(i % 4), price, availability, sold, revenue, rng.choice(genders), stock, lead_times,
            order_q, ship_time, carrier, ship_cost, sup, loc, lead_time, prod_vol, mfg_lead, mfg_cost, insp,
            defect, mode, route,
        ])
    roles = {h: "Observed" for h in header}
    for h in ("product_type", "supplier", "location", "customer_gender"):
        roles[h] = "Parameter"
    for h in ("revenue", "defect_rates"):
        roles[h] = "Unobserved"
    return header, out, roles


def write_json(name, doc):
    with open(os.path.join(HERE, name), "w", newline="\n") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")


def main():
    write_json("asia-like.json", asia_like())
    write_json("child-like.json", seeded_network("child_like", CHILD, 11))
    write_json("insurance-like.json", seeded_network("insurance_like", INSURANCE, 27))
    header, rows, roles = supply_chain()
    with open(os.path.join(HERE, "supply-chain.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    with open(os.path.join(HERE, "supply-chain.roles"), "w", newline="\n") as f:
        f.write("column,role\n")
        for h in header:
            f.write("%s,%s\n" % (h, roles[h]))


if __name__ == "__main__":
    main()
