"""Smoke test for the Python bindings: python python/smoke_test.py"""

from fractions import Fraction

import linext


def main():
    p = linext.Poset(4, [(1, 2), (3, 4)])
    assert p.n == 4
    exts = p.linear_extensions()
    assert len(exts) == 6 and exts[0] == [1, 2, 3, 4]

    assert linext.apply_t(p, [3, 4, 1, 2], 4, 1) == [1, 3, 4, 2]
    assert linext.apply_tau(p, [1, 3, 2, 4], 2) == [1, 2, 3, 4]

    m = linext.transition_matrix(p)
    assert Fraction(m["num"][0][0], m["den"]) == Fraction(1, 2)
    assert all(sum(row) == m["den"] for row in m["num"])

    report = linext.conjecture_check(linext.Poset.family("antichain:4"))
    assert abs(report["lambda2"] - 0.625) < 1e-9
    assert report["verdict"]["is_tight"]
    assert linext.conjectured_bound(5) == (18, 25)

    cert = linext.nshape_certificate(4, 2)
    assert cert["verified"] and cert["tau"] == "1/128"

    mix = linext.mixing_report(linext.Poset.family("antichain:2"), "r2r", 0.1)
    assert mix["t_mix"] == 1 and mix["sandwich_holds"]
    assert linext.diameter(linext.Poset.family("antichain:3")) <= 3

    samples = linext.sample_extensions(p, 600, seed=7)
    assert samples == linext.sample_extensions(p, 600, seed=7)
    assert all(s in exts for s in samples)

    summary = linext.verify_all(4)
    assert summary["checked"] == 20 and summary["bound_violations"] == 0
    assert len(linext.enumerate_posets(4)) == 16

    q = linext.Poset.from_json(p.to_json())
    assert q == p and q.dual().dual() == p

    try:
        linext.Poset(2, [(1, 2), (2, 1)])
    except ValueError:
        pass
    else:
        raise AssertionError("cycle accepted")

    print(f"linext {linext.__version__}: python smoke test passed")


if __name__ == "__main__":
    main()
