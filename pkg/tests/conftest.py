from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def reference_source() -> str:
    return (FIXTURES / "reference.minioo").read_text(encoding="utf-8")


@pytest.fixture
def cyclic_source() -> str:
    return (FIXTURES / "cyclic.minioo").read_text(encoding="utf-8")
