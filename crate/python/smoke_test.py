"""Smoke test for the opencover Python extension.

Build first:  pip install maturin && maturin develop -m crates/python/Cargo.toml
"""

import json

import opencover


def main():
    s = opencover.PrefixFreeSet(["0", "10"])
    assert s.measure() == "3/4"
    assert s.power(2).measure() == "9/16"
    assert s.condition("1").elements() == ["0"]
    assert s.covers(opencover.PrefixFreeSet(["00", "101"]))
    assert s.contains_point(opencover.PeriodicPoint("1", "0"))

    try:
        opencover.PrefixFreeSet(["0", "01"])
    except ValueError as e:
        assert str(e).startswith("NotPrefixFree")
    else:
        raise AssertionError("expected NotPrefixFree")

    x = opencover.PeriodicPoint("1", "01")
    assert x.prefix(5) == "10101"

    d = opencover.Strategy(json.dumps({"kind": "doubler"}))
    assert d.value("00") == "4" and d.value("01") == "0"
    assert d.winning_set("2", 4).elements() == ["0"]

    code = opencover.kc_build([(1, "a"), (2, "b"), (2, "c")])
    assert sorted(len(k) for k in code) == [1, 2, 2]

    report, passed = opencover.run_job("measure", json.dumps(["0", "10"]))
    assert passed and json.loads(report)["output"]["measure"] == "3/4"
    report, passed = opencover.run_job("b-set", json.dumps({"n": 0, "alpha": "1/3"}))
    assert not passed and json.loads(report)["error"]["name"] == "NonDyadicAlpha"

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
