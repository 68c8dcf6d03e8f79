import numpy as np
import pytest
from hypothesis import strategies as st

from app.constructions import block_cyclic, monochromatic
from app.core import Coloring


@pytest.fixture(autouse=True)
def _isolated_store(monkeypatch):
    """Tests never see a results store configured in the developer's shell"""
    monkeypatch.delenv("RBL_STORE", raising=False)


@pytest.fixture
def mono3() -> Coloring:
    return monochromatic(3)


@pytest.fixture
def block4() -> Coloring:
    """Two 2x2 blocks per side, color (i + j + 1) mod 2 by block"""
    return block_cyclic(4, [2, 2], [2, 2])


@pytest.fixture
def block6() -> Coloring:
    return block_cyclic(6, [2, 2, 2], [2, 2, 2])


@pytest.fixture
def write_coloring(tmp_path):
    def write(coloring: Coloring, name: str = "coloring.json") -> str:
        path = tmp_path / name
        path.write_text(coloring.to_json(), encoding="utf-8")
        return str(path)
    return write


@pytest.fixture
def store_path(tmp_path):
    return tmp_path / "store" / "results.jsonl"


@st.composite
def colorings(draw, min_n: int = 1, max_n: int = 4, max_colors: int = 4) -> Coloring:
    """Small random colorings, compacted to a dense palette"""
    n = draw(st.integers(min_n, max_n))
    cells = draw(st.lists(st.integers(0, max_colors - 1), min_size=n * n, max_size=n * n))
    return Coloring.from_matrix(np.array(cells).reshape(n, n))
