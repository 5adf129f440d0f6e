"""Smoke test for the pycinterp extension module."""

import cmath
import math

import pycinterp


def main():
    m = 128
    u = [math.cos(2 * math.pi * j / m) for j in range(m)]
    data = pycinterp.BoundaryData.hilbert_weight(u, 2.0)
    assert data.kind == "hilbert_weight"
    assert len(data.points()) == m

    t, w = 0.3 + 0.2j, 1.0 - 0.5j
    cert = pycinterp.interpolate(data, t, w, k=8)
    expected = pycinterp.hilbert_oracle(u, 2.0, t, w)
    assert cert.converged
    assert abs(cert.value - expected) < 1e-8, (cert, expected)
    assert cert.gap < 1e-8
    assert abs(pycinterp.poisson_extend(u, t) - t.real) < 1e-10

    rows = pycinterp.leaf(data, t, w, [0.3 * cmath.exp(1j * k) for k in range(6)], k=8)
    assert max(abs(r[4]) for r in rows) < 1e-6

    semicircle = pycinterp.BoundaryData.from_json(
        '{"kind": "norm_power", "p": 2, "grid_M": 64, "norms": {"semicircle": {'
        '"upper": {"type": "polygon", "dual_vectors": [[1, 1], [1, -1]]},'
        '"lower": {"type": "polygon", "dual_vectors": [[1, 0], [0, 1]]}}}}'
    )
    c = pycinterp.interpolate(semicircle, 0j, 1 + 0j, k=4)
    assert abs(c.value - 0.5) < 1e-8

    try:
        pycinterp.interpolate(data, 1 + 0j, w)
    except ValueError:
        pass
    else:
        raise AssertionError("boundary point accepted")
    print("pycinterp smoke test passed")


if __name__ == "__main__":
    main()
