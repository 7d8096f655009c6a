"""Generate the shipped PC catalog (src/setmargin/data/pc.json).

Attribute values, per-component prices (in thousands of USD) and the 16
compatibility clauses are authored here; run this script after editing to
refresh the data file. Clauses are Horn implications: a single antecedent
feature forces the consequent attribute into a subset of its values.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from setmargin.problem import (Attribute, CostMatrix, LinearConstraint, ProblemSpec,
                               WeightBounds, dump_problem, horn_clause)

TYPES = [("Laptop", 0.45), ("Desktop", 0.25), ("Tower", 0.35)]

MANUFACTURERS = [
    ("Apple", 0.40), ("Compaq", 0.12), ("Dell", 0.10), ("Fujitsu", 0.15),
    ("Gateway", 0.08), ("HP", 0.10), ("Sony", 0.30), ("Toshiba", 0.18),
]

CPUS = [
    # AMD Athlon XP (0-4)
    ("AMD Athlon XP 1500+", 0.16), ("AMD Athlon XP 1800+", 0.19),
    ("AMD Athlon XP 2100+", 0.23), ("AMD Athlon XP 2400+", 0.28),
    ("AMD Athlon XP 2700+", 0.34),
    # AMD Duron (5-7)
    ("AMD Duron 900", 0.07), ("AMD Duron 1100", 0.08), ("AMD Duron 1300", 0.10),
    # Intel Celeron (8-12)
    ("Intel Celeron 1.0GHz", 0.06), ("Intel Celeron 1.3GHz", 0.07),
    ("Intel Celeron 1.7GHz", 0.09), ("Intel Celeron 2.0GHz", 0.11),
    ("Intel Celeron 2.4GHz", 0.13),
    # Intel Pentium III (13-16)
    ("Intel Pentium III 800", 0.14), ("Intel Pentium III 933", 0.16),
    ("Intel Pentium III 1000", 0.18), ("Intel Pentium III 1133", 0.20),
    # Intel Pentium 4 (17-24)
    ("Intel Pentium 4 1.6GHz", 0.22), ("Intel Pentium 4 1.8GHz", 0.24),
    ("Intel Pentium 4 2.0GHz", 0.27), ("Intel Pentium 4 2.26GHz", 0.31),
    ("Intel Pentium 4 2.4GHz", 0.35), ("Intel Pentium 4 2.53GHz", 0.40),
    ("Intel Pentium 4 2.8GHz", 0.48), ("Intel Pentium 4 3.06GHz", 0.60),
    # Intel Pentium M (25-28)
    ("Intel Pentium M 1.3GHz", 0.28), ("Intel Pentium M 1.4GHz", 0.32),
    ("Intel Pentium M 1.5GHz", 0.37), ("Intel Pentium M 1.6GHz", 0.42),
    # PowerPC G3 (29-31)
    ("PowerPC G3 600", 0.12), ("PowerPC G3 700", 0.14), ("PowerPC G3 800", 0.16),
    # PowerPC G4 (32-35)
    ("PowerPC G4 800", 0.25), ("PowerPC G4 1.0GHz", 0.33),
    ("PowerPC G4 1.25GHz", 0.42), ("PowerPC G4 1.42GHz", 0.52),
    # Intel Xeon (36)
    ("Intel Xeon 2.4GHz", 0.70),
]

MONITORS = [
    ('14" LCD', 0.25), ('15" LCD', 0.32), ('15" CRT', 0.12), ('17" LCD', 0.45),
    ('17" CRT', 0.18), ('19" LCD', 0.65), ('19" CRT', 0.25), ('21" CRT', 0.40),
]

RAM = [
    ("128 MB", 0.03), ("192 MB", 0.045), ("256 MB", 0.06), ("384 MB", 0.09),
    ("512 MB", 0.12), ("768 MB", 0.17), ("1 GB", 0.22), ("1.5 GB", 0.32),
    ("2 GB", 0.42), ("3 GB", 0.60),
]

STORAGE = [
    ("20 GB", 0.05), ("30 GB", 0.06), ("40 GB", 0.07), ("60 GB", 0.09),
    ("80 GB", 0.11), ("100 GB", 0.13), ("120 GB", 0.16), ("160 GB", 0.20),
    ("200 GB", 0.25), ("250 GB", 0.31),
]

# cpu index groups
ATHLON = list(range(0, 5))
DURON = list(range(5, 8))
CELERON = list(range(8, 13))
PIII = list(range(13, 17))
P4 = list(range(17, 25))
PENTIUM_M = list(range(25, 29))
G3 = list(range(29, 32))
G4 = list(range(32, 36))
XEON = [36]

LAPTOP_CPUS = sorted(DURON + CELERON + PIII + PENTIUM_M + G3 + G4[:2])
TOWER_CPUS = sorted(ATHLON + P4 + G4 + XEON)

# (antecedent attribute, antecedent value, consequent attribute, consequent values)
CLAUSES = [
    ("manufacturer", 0, "cpu", sorted(G3 + G4)),                       # Apple builds PowerPC
    ("manufacturer", 1, "cpu", sorted(ATHLON + DURON + CELERON + P4)),  # Compaq
    ("manufacturer", 2, "cpu", sorted(CELERON + PIII + P4 + PENTIUM_M + XEON)),  # Dell
    ("manufacturer", 3, "cpu", sorted(CELERON + PIII + P4 + PENTIUM_M)),  # Fujitsu
    ("manufacturer", 4, "cpu", sorted(ATHLON + DURON + CELERON + PIII + P4)),  # Gateway
    ("manufacturer", 5, "cpu", sorted(ATHLON + DURON + CELERON + PIII + P4 + XEON)),  # HP
    ("manufacturer", 6, "cpu", sorted(CELERON + PIII + P4 + PENTIUM_M)),  # Sony
    ("manufacturer", 7, "cpu", sorted(CELERON + PIII + PENTIUM_M)),     # Toshiba
    ("type", 0, "cpu", LAPTOP_CPUS),
    ("type", 2, "cpu", TOWER_CPUS),
    ("type", 0, "monitor", [0, 1, 3]),          # laptops ship LCD panels
    ("type", 2, "monitor", [3, 4, 5, 6, 7]),    # towers pair with 17"+
    ("type", 0, "ram", list(range(0, 7))),      # laptop boards top out at 1 GB
    ("type", 2, "ram", list(range(2, 10))),     # towers start at 256 MB
    ("type", 0, "storage", list(range(0, 6))),  # laptop disks top out at 100 GB
    ("type", 2, "storage", list(range(3, 10))),  # towers start at 60 GB
]


def build_spec() -> ProblemSpec:
    tables = {
        "type": TYPES, "manufacturer": MANUFACTURERS, "cpu": CPUS,
        "monitor": MONITORS, "ram": RAM, "storage": STORAGE,
    }
    attrs = [Attribute(name, len(rows), tuple(v for v, _ in rows))
             for name, rows in tables.items()]
    spec_probe = ProblemSpec(attrs, (), name="pc", check_feasible=False)
    attr_index = {a.name: i for i, a in enumerate(attrs)}

    constraints = []
    for ant_attr, ant_val, con_attr, con_vals in CLAUSES:
        ant = [spec_probe.feature_index(attr_index[ant_attr], ant_val)]
        cons = [spec_probe.feature_index(attr_index[con_attr], v) for v in con_vals]
        constraints.append(horn_clause(ant, cons))
    assert len(constraints) == 16

    price_row = [p for _, rows in tables.items() for _, p in rows]
    m = len(price_row)
    cost = CostMatrix([price_row], real_names=("price",))
    bounds = WeightBounds([0.0] * m, [100.0] * m, [0.0], [10.0])
    return ProblemSpec(attrs, constraints, cost, bounds, name="pc")


def main():
    spec = build_spec()
    out = Path(__file__).resolve().parents[1] / "src" / "setmargin" / "data" / "pc.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(dump_problem(spec), indent=1, sort_keys=True) + "\n")
    from setmargin.problem import count_feasible
    import math
    raw = math.prod(spec.cardinalities)
    print(f"wrote {out}")
    print(f"raw assignments: {raw}")
    print(f"feasible count:  {count_feasible(spec)}")


if __name__ == "__main__":
    main()
