#!/usr/bin/env python3
"""Write the reference benchmark tables shipped in src/zksha256/data.

Cycle columns hold the reference figures as printed; they are consistent with
total cycles at a 4.7 GHz clock, not cycles per byte.
"""
from pathlib import Path

from zksha256.bench import REFERENCE_CLOCK_HZ, BenchRecord, emit_csv
from zksha256.sha256 import block_count

OUT = Path(__file__).resolve().parents[1] / "src" / "zksha256" / "data"

# label, bytes, native (cyc, s), circuit gen (cyc, s), prove (cyc, s), verify (cyc, s), gates, proof bytes, tx
RANDOM = [
    ("reference-10", 10, 196, 0.00000004, 197_896_186, 0.04, 255_670_545, 0.05, 11_826_688, 0.0028, 1_419, 121_752, None),
    ("reference-100", 100, 250, 0.00000005, 432_109_936, 0.09, 465_505_001, 0.10, 12_459_491, 0.0029, 2_842, 127_256, None),
    ("reference-1000", 1000, 1_752, 0.00000003, 5_653_509_584, 1.23, 3_730_111_317, 0.82, 15_544_539, 0.0037, 22_739, 152_756, None),
    ("reference-10000", 10000, 17_022, 0.0000003, 58_641_652_143, 12.70, 38_720_856_965, 8.58, 19_610_437, 0.0044, 223_148, 180_112, None),
]
NEAR = [
    ("reference-121114606", 5677, 9_368, 0.000001, 27_010_322_753, 5.87, 18_633_537_207, 4.18, 17_173_339, 0.004, 126_498, 165_684, 52),
    ("reference-121136789", 5092, 8_424, 0.000001, 26_380_158_107, 5.71, 19_172_519_712, 4.10, 17_197_238, 0.004, 113_704, 165_684, 78),
    ("reference-121117653", 4897, 8_366, 0.000001, 26_791_174_445, 5.80, 18_015_459_404, 4.03, 17_034_388, 0.004, 109_442, 165_684, 102),
    ("reference-121089333", 6262, 10_318, 0.000002, 56_830_642_601, 12.18, 38_191_422_267, 8.32, 19_024_157, 0.004, 139_289, 180_112, 169),
]


def records(rows):
    out = []
    for label, nbytes, nc, ns, gc, gs, pc, ps, vc, vs, gates, proof, tx in rows:
        out.append(BenchRecord(label, nbytes, block_count(nbytes), float(nc), ns, float(gc), gs, float(pc), ps,
                               float(vc), vs, gates, proof, 1, REFERENCE_CLOCK_HZ, "reference", 0, tx))
    return out


if __name__ == "__main__":
    emit_csv(records(RANDOM), OUT / "reference_random_inputs.csv")
    emit_csv(records(NEAR), OUT / "reference_near_blocks.csv")
    print("wrote", OUT / "reference_random_inputs.csv", OUT / "reference_near_blocks.csv")
