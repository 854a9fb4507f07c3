import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

FIXTURES = ROOT / "fixtures"


def _ensure_fixtures() -> None:
    if not (FIXTURES / "endpoint_store.json").exists():
        sys.path.insert(0, str(ROOT / "scripts"))
        import make_fixtures

        make_fixtures.main()


_ensure_fixtures()


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return FIXTURES / "toy"


@pytest.fixture(scope="session")
def qald9plus_train(fixtures_dir):
    from kgqa.datasets import Source, load_qald

    return load_qald(fixtures_dir / "qald9plus-train.json", Source.QALD9PLUS)


@pytest.fixture(scope="session")
def qald9plus_test(fixtures_dir):
    from kgqa.datasets import Source, load_qald

    return load_qald(fixtures_dir / "qald9plus-test.json", Source.QALD9PLUS)


@pytest.fixture(scope="session")
def qald10_test(fixtures_dir):
    from kgqa.datasets import Source, load_qald

    return load_qald(fixtures_dir / "qald10-test.json", Source.QALD10)


@pytest.fixture(scope="session")
def endpoint_cfg(fixtures_dir):
    from kgqa.endpoint import EndpointConfig

    return EndpointConfig(url=f"fixture:{fixtures_dir / 'endpoint_store.json'}")


@pytest.fixture()
def all_gold_queries(qald9plus_train, qald9plus_test, qald10_test):
    return [
        item.gold_sparql
        for bench in (qald9plus_train, qald9plus_test, qald10_test)
        for item in bench.items
    ]
