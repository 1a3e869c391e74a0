"""Smoke test for the pywavecorr extension.

Build first, for example with `maturin develop -m crates/py/Cargo.toml`,
then run `python python/smoke.py`.
"""

import math

import pywavecorr as wc


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


# Haar detail of a step is a half difference
d = wc.decompose([0.0] * 8 + [1.0] * 8, levels=1, filter_name="haar")
assert close(d.detail(1)[8], 0.5, 1e-14), d.detail(1)
assert d.boundary_width == [2]

rows = wc.generate_synthetic("equicorrelated", 6, 4000, seed=1, rho=0.4)
c = wc.raw_correlation(rows)
assert all(close(c[i][i], 1.0) for i in range(6))
vals, _ = wc.spectrum(c)
assert vals == sorted(vals) and close(sum(vals), 6.0, 1e-9)
assert 2.5 < vals[-1] < 3.5, vals[-1]

epps = wc.epps_summary(rows, levels=3)
assert [r[0] for r in epps] == ["raw", "1", "2", "3"]

dyn = wc.run_dynamics(rows, window=500, levels=2, stride=250)
assert len(dyn) == len(dyn.window_starts) == 15
assert dyn.scales == ["raw", "1", "2"]
assert all(2.0 < lam < 4.0 for lam in dyn.lambda_max("raw"))

sdu = wc.to_sdu(dyn.lambda_max("raw"), 0, len(dyn))
assert close(sum(sdu), 0.0, 1e-9)

cov = wc.build_covariance([[1.0, 0.0], [0.0, 1.0]], [0.1, 0.1])
f = wc.min_variance_frontier(cov, [0.01, 0.02], [0.012, 0.018])
assert all(close(w, 0.5) for w in f.gmv[2])
assert close(f.variance_at(0.012), f.points[0][1] ** 2, 1e-14)

try:
    wc.decompose([1.0] * 10, levels=9)
except wc.ConfigError as e:
    assert "max_level" in str(e), e
else:
    raise AssertionError("expected ConfigError")

try:
    wc.min_variance_frontier([[1.0, 1.0], [1.0, 1.0]], [0.01, 0.02], [0.01])
except wc.NumericalError:
    pass
else:
    raise AssertionError("expected NumericalError")

assert math.isfinite(dyn.q_ratio)
print("pywavecorr smoke test passed")
