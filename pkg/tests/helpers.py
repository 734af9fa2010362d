"""Shared generators for the test modules."""

import numpy as np
from hypothesis import strategies as st

from angtri.types import RelativeGeometry


def random_geometry(rng, noise=None):
    """A generic two-view correspondence.

    With ``noise`` (radians) the rays start from a common forward point and
    are perturbed; otherwise all four vectors are arbitrary.
    """
    if noise is None:
        return RelativeGeometry(*rng.normal(size=(4, 3)))
    c0, c1 = rng.normal(size=(2, 3))
    X = rng.normal(size=3) * 3 + np.array([0, 0, 8.0])
    m = []
    for c in (c0, c1):
        d = X - c
        d /= np.linalg.norm(d)
        m.append(d + noise * rng.normal(size=3))
    return RelativeGeometry(c0, c1, m[0], m[1])


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)
nonzero_vec3 = vec3.filter(lambda v: np.linalg.norm(v) > 1e-2)
