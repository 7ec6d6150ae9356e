import pytest

from lanrisk.catalog import load_shipped_catalog

import helpers


@pytest.fixture(scope="session")
def catalog():
    return load_shipped_catalog()


@pytest.fixture
def register(catalog):
    return helpers.fresh_register(catalog)
