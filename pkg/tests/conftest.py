import numpy as np
import pytest
import pytest_asyncio
from httpx import ASGITransport, AsyncClient

from app.main import app
from app.schemas.geometry import GroupShape1D, GroupShape2D, GroupWeights


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit3():
    return GroupWeights.ones(GroupShape1D(s=3))


@pytest.fixture
def unit3x3():
    return GroupWeights.ones(GroupShape2D(k1=3, k2=3))


@pytest_asyncio.fixture
async def client():
    transport = ASGITransport(app=app)
    async with AsyncClient(transport=transport, base_url="http://test") as ac:
        yield ac
