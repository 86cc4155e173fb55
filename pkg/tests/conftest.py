from __future__ import annotations

import numpy as np
import pytest

from conetorsion.crosssection import build_cross_section, coclosed_spectrum
from conetorsion.zeta import cutoff_for_tolerance


@pytest.fixture(scope="session")
def unit_t2():
    return build_cross_section(
        {"family": "flat_torus", "dim_n": 2, "lattice_basis": [[1, 0], [0, 1]]}
    )


@pytest.fixture(scope="session")
def unit_t4():
    return build_cross_section(
        {"family": "flat_torus", "dim_n": 4, "lattice_basis": np.eye(4).tolist()}
    )


@pytest.fixture(scope="session")
def t2_slices(unit_t2):
    return {
        k: coclosed_spectrum(unit_t2, k, cutoff_for_tolerance(unit_t2, k, 1e-12))
        for k in range(2)
    }
