"""Smoke test for the redblue Python module.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import json
from fractions import Fraction

import redblue


def check_gap():
    inst, local, glob = redblue.gap_instance(1, 2)
    assert inst.exact
    assert inst.cost(local) == 11
    assert inst.cost(glob) == 3
    assert redblue.exact(inst)["cost"] == 3
    assert redblue.is_local_opt(inst, local, p=1)["locally_optimal"]

    res = redblue.solve(inst, p=1, initial=local)
    assert res["cost"] == 11 and res["iterations"] == 0
    res = redblue.solve(inst, p=2, initial=local)
    assert res["cost"] < 11

    report = redblue.verify_gap(1, 10)
    assert report["passed"]
    assert Fraction(report["ratio"]) == Fraction(67, 11)


def check_random():
    inst = redblue.Instance.euclidean(12, 5, 5, 2, 2, box_size=50.0, seed=3)
    assert not inst.exact and inst.n == 22
    back = redblue.Instance.from_json(inst.to_json())
    assert json.loads(back.to_json()) == json.loads(inst.to_json())

    res = redblue.solve(inst, p=2, seed=1)
    opt = redblue.exact(inst)
    assert res["cost"] == opt["cost"], (res, opt)
    ev = inst.evaluate(tuple(res["solution"]))
    assert abs(ev["cost"] - res["cost"]) < 1e-9
    for j, f, d in zip(ev["clients"], ev["facility"], ev["distance"]):
        assert inst.distance(j, f) == d

    s = tuple(res["solution"])
    o = tuple(opt["solution"])
    dec = redblue.decompose(inst, s, o, disjointify=True)
    assert dec["ok"], dec


def check_errors():
    inst = redblue.Instance.grid(10, 6, 6, 3, 3, seed=2)
    try:
        redblue.exact(inst, cap=10)
    except redblue.CapExceeded:
        pass
    else:
        raise AssertionError("cap not enforced")
    try:
        redblue.Instance.from_json("{}")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed instance accepted")


if __name__ == "__main__":
    check_gap()
    check_random()
    check_errors()
    print("smoke test passed")
