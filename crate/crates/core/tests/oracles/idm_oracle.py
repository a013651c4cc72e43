"""Independent high-precision IDM oracle.

Draws random in-bounds parameter/state tuples in double precision, evaluates
the desired gap and acceleration laws with 50-digit mpmath arithmetic and
writes the frozen fixture consumed by the Rust tests. Inputs are printed with
repr() so they round-trip exactly into f64.

    python3 idm_oracle.py > idm_oracle.csv
"""
import random
from mpmath import mp, mpf, sqrt, power

mp.dps = 50
rng = random.Random(20240716)

def desired_gap(p, vf, vl, conv):
    dv = (vl - vf) if conv == "reversed" else (vf - vl)
    g = p["d"] + p["c2"] * sqrt(vf / p["v_d"]) + vf * p["tau"] + vf * dv / (2 * sqrt(p["a_max"] * abs(p["b_d"])))
    return max(g, mpf("0.01"))

def accel(p, vf, vl, s, conv):
    ds = desired_gap(p, vf, vl, conv)
    a = p["a_max"] * (1 - power(vf / p["v_d"], p["c0"]) - power(ds / s, p["c1"]))
    return min(max(a, mpf(-10)), mpf(10))

cols = ["a_max", "v_d", "c0", "c1", "c2", "d", "tau", "b_d", "v_f", "v_l", "spacing"]
print(",".join(cols + ["gap_treiber", "gap_reversed", "acc_treiber", "acc_reversed"]))
n = 0
while n < 100:
    raw = {
        "a_max": rng.uniform(0.73, 5.0),
        "v_d": rng.uniform(25.0, 45.0),
        "c0": rng.uniform(0.2, 20.0),
        "c1": 2.0,
        "c2": rng.uniform(0.0, 10.0),
        "d": rng.uniform(0.0, 17.0),
        "tau": rng.uniform(1.0, 2.5),
        "b_d": rng.uniform(2.0, 9.0),
        "v_f": rng.uniform(0.0, 40.0),
        "v_l": rng.uniform(0.0, 40.0),
        "spacing": rng.uniform(5.0, 400.0),
    }
    hp = {k: mpf(v) for k, v in raw.items()}
    out = [
        desired_gap(hp, hp["v_f"], hp["v_l"], "treiber2000"),
        desired_gap(hp, hp["v_f"], hp["v_l"], "reversed"),
        accel(hp, hp["v_f"], hp["v_l"], hp["spacing"], "treiber2000"),
        accel(hp, hp["v_f"], hp["v_l"], hp["spacing"], "reversed"),
    ]
    print(",".join([repr(raw[c]) for c in cols] + [mp.nstr(x, 30) for x in out]))
    n += 1
