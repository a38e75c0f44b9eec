"""Smoke test of the Python bindings: norms, transform, atoms and one check."""

import json
import math

import varbesov_py as vb


def wave(grid):
    w = 2 * math.pi / grid.side()
    return [complex(0.6 * math.cos(w * x) + 0.3 * math.sin(2 * w * x), 0.0) for (x,) in grid.coords()]


def close(a, b, tol):
    assert abs(a - b) <= tol * max(abs(a), abs(b), 1.0), (a, b)


def main():
    g = vb.Grid(1, 1, 4)
    n = len(g)
    one = [1 + 0j] * n

    # ‖1‖_p on a domain of length 2
    for p in (1.0, 2.0, 3.0):
        close(vb.luxemburg_norm(g, one, [p] * n), 2 ** (1 / p), 1e-9)
    close(vb.modular(g, one, [2.0] * n), 2.0, 1e-12)
    assert vb.conjugate_exponent(g, [2.0] * n) == [2.0] * n
    assert vb.mixed_norm(g, [one, one], [2.0] * n, [2.0] * n) > 0
    assert vb.tilde_norm(g, one, [2.0] * n, [0.1] * n) > 0

    f = wave(g)
    space = vb.Space.constant(g, 0.7, 0.2, 2.0, 2.0)
    base = vb.besov_norm(g, f, space)
    sharp = vb.besov_norm(g, f, space, "sharp")
    peetre = vb.besov_norm(g, f, space, "peetre")
    assert sharp <= base * (1 + 1e-9) <= peetre * (1 + 1e-9) + 1e-12

    phi = vb.PhiTransform(g)
    assert phi.calderon_residual() <= 1e-12
    lam = phi.analyze(f)
    back = phi.synthesize(vb.Sequence.from_json(lam.to_json()))
    err = math.sqrt(sum(abs(a - b) ** 2 for a, b in zip(back, f)))
    assert err <= 1e-8 * math.sqrt(sum(abs(a) ** 2 for a in f)), err
    assert vb.b_norm(lam, space) > 0

    coeffs, atomization, valid = vb.atomize(g, f, space)
    assert valid
    assert len(vb.synthesize_atoms(coeffs, atomization)) == n

    config = json.dumps({"grid": {"dim": 1, "jmax": 1, "jfine": 4}, "corpus": {"seed": 1, "size": 3, "sequences": 6}})
    report = json.loads(vb.run_check("lamda_equi", config))[0]
    assert report["pass"], report["conditions"]
    report = json.loads(vb.run_embedding("elem_q", config))[0]
    assert report["pass"]

    try:
        vb.run_check("no_such_check", config)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown id accepted")
    print("smoke test ok")


if __name__ == "__main__":
    main()
