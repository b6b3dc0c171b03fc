"""Smoke test for the Python bindings. Run after `pip install --no-build-isolation -e crates/python`."""

import json

import nusec


def main():
    p = nusec.Permutation.from_arrival_order([3, 1, 2])
    assert p.positions() == [2, 3, 1]
    assert p.arrival_order() == [3, 1, 2]
    assert p.position(3) == 1 and len(p) == 3

    two = nusec.Distribution.two_point_reverse(6)
    assert two.support_size == 2
    assert nusec.check_uiop(two, 2)["implied_delta"] == 0.0
    again = nusec.Distribution.from_text(two.to_text())
    assert again.n == 6 and again.kind == "explicit"

    est, se = nusec.pcs(nusec.Distribution.uniform(1000), "classic", 100_000, 7)
    assert abs(est - 0.368) < 0.01, est
    assert 0 < se < 0.01

    d = nusec.Distribution.explicit([([1, 2, 3], 0.5), ([3, 2, 1], 0.5)])
    assert nusec.check_bip(d, 1, 3)["implied_delta"] > 0.0
    assert abs(nusec.random_threshold_bound(0.0) - 1 / 6) < 1e-12

    passed, summary, blob = nusec.run_criterion(6)
    assert passed, summary
    assert json.loads(blob)["id"] == 6

    try:
        nusec.Permutation([1, 1, 2])
    except ValueError:
        pass
    else:
        raise AssertionError("duplicate positions accepted")
    print("python smoke test ok")


if __name__ == "__main__":
    main()
