import pytest

from hedgebandits.ingest import bundled_wdbc_path, load_wdbc


@pytest.fixture(scope="session")
def wdbc():
    return load_wdbc(bundled_wdbc_path())


@pytest.fixture(scope="session")
def wdbc_rank():
    return load_wdbc(bundled_wdbc_path(), scheme="rank")
