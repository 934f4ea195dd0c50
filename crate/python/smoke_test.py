"""Quick check that the compiled extension loads and agrees with known values."""

import math

import lossbell


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    env = lossbell.envelope(3, "mermin")
    assert env.vertices == [((0, 1), (0, 1)), ((1, 8), (1, 1)), ((1, 2), (2, 1)), ((1, 1), (2, 1))]
    assert env.query("5/16") == (3, 2)
    assert close(env.query(0.25), 4 / 3)
    assert len(lossbell.moment_points(3)) == 17

    assert close(lossbell.mabk_bound(2, "chsh"), 2.0)
    assert close(lossbell.holder_bound(4, 0.25, "ardehali"), 2 * math.sqrt(2))
    assert lossbell.classify_region(3, "1/2") == "MABK"

    value, a, b = lossbell.optimal_settings(3, "mermin")
    assert close(value, 4.0, 1e-9) and len(a) == len(b) == 3
    q = lossbell.quantum_prediction(3, [0.9], "mermin")
    assert close(q.value, 4.0 * 0.9**3, 1e-9)

    w_star, eta = lossbell.threshold_crossing(3, "mermin", "envelope")
    assert abs(eta - 2 ** (-1 / 3)) < 1e-4, eta

    report = lossbell.simulate(3, [0.95], 20000, seed=1)
    assert report.violates, report
    assert env.probe(2000, seed=3) <= 0.0

    try:
        lossbell.envelope(1)
    except ValueError:
        pass
    else:
        raise AssertionError("n = 1 should be rejected")

    print("smoke test passed:", report)


if __name__ == "__main__":
    main()
