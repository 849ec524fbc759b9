import numpy as np
import pytest

from splinemat import BSplineCurve, prepare_curve, project_prepared


@pytest.fixture(scope="session")
def kernels_warm():
    """Trigger jit compilation once so timed tests measure the algorithm."""
    curve = BSplineCurve(3, [0, 0, 0, 0, 1, 1, 1, 1],
                         [[0.0, 0.0], [0.3, 0.9], [0.7, 0.8], [1.0, 0.1]])
    prep = prepare_curve(curve, 1e-4)
    project_prepared(prep, np.array([[0.5, 0.5]]), workers=2,
                     with_stats=True, soundness_samples=8)
    return True
