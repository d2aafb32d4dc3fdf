from __future__ import annotations

import numpy as np
import pytest

from pact import (
    CostCurve,
    TypeSet,
    ValuationSpec,
    bundled_scenario_path,
    load_scenario,
)


@pytest.fixture(scope="session")
def table1_scenario():
    return load_scenario(bundled_scenario_path("table1"))


@pytest.fixture
def vlog():
    return ValuationSpec("log", 1.0)


@pytest.fixture
def quad_curve():
    # C(q) = q^2
    return CostCurve("quadratic", 1.0, 0.0, 0.0)


@pytest.fixture
def worked_types():
    # uniform two-type instance with the closed-form solution used across tests
    return TypeSet((1.0, 2.0), (0.5, 0.5))


def random_instance(rng: np.random.Generator, k_choices=(2, 3, 4, 5, 6)):
    """One random screening instance: ascending types, a distribution,
    a concave valuation, and an increasing convex quadratic cost."""
    k = int(rng.choice(k_choices))
    thetas = tuple(np.cumsum(rng.uniform(0.05, 1.2, size=k)) + rng.uniform(0.2, 2.0))
    pmf_raw = rng.uniform(0.05, 1.0, size=k)
    pmf = tuple(pmf_raw / pmf_raw.sum())
    family = rng.choice(["log", "sqrt", "power"])
    scale = float(rng.uniform(0.5, 3.0))
    if family == "power":
        valuation = ValuationSpec("power", scale, float(rng.uniform(0.2, 0.9)))
    else:
        valuation = ValuationSpec(str(family), scale)
    curve = CostCurve(
        "quadratic",
        float(rng.uniform(0.0, 2.0)),
        float(rng.uniform(0.05, 1.5)),
        float(rng.uniform(0.0, 0.3)),
    )
    return TypeSet(thetas, pmf), valuation, curve
