import numpy as np
from hypothesis import strategies as st

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


def ball_points(n, rmax=0.95):
    """Points of B_n with |z| <= rmax."""
    def build(xs):
        z = np.array([complex(xs[2 * k], xs[2 * k + 1]) for k in range(n)])
        r = np.linalg.norm(z)
        return z if r <= rmax else z * (rmax / r)
    return st.lists(finite, min_size=2 * n, max_size=2 * n).map(build)


def sphere_points(n):
    def build(xs):
        z = np.array([complex(xs[2 * k], xs[2 * k + 1]) for k in range(n)])
        return z / np.linalg.norm(z)
    return (st.lists(finite, min_size=2 * n, max_size=2 * n)
            .filter(lambda xs: np.linalg.norm(xs) > 1e-3).map(build))
