"""
DCLED - Test Configuration
Pytest fixtures and configuration for all tests.
"""

import random
from collections.abc import AsyncGenerator
from pathlib import Path

import pytest
import pytest_asyncio

from app.api.client import DelegationClient, Endpoint
from app.api.server import ShareDaemon
from app.core.field import SchemeParams
from app.services.store_service import ShareStore


# =============================================================================
# FIELD FIXTURES
# =============================================================================


@pytest.fixture(scope="session")
def params() -> SchemeParams:
    """Default 128-bit field."""
    return SchemeParams.for_lambda()


@pytest.fixture(scope="session")
def params97() -> SchemeParams:
    return SchemeParams.create(97)


@pytest.fixture(scope="session")
def params5() -> SchemeParams:
    """Tiny field for exhaustive enumeration."""
    return SchemeParams.create(5)


@pytest.fixture
def rng(request: pytest.FixtureRequest) -> random.Random:
    """Seeded per test so failures replay."""
    return random.Random(request.node.nodeid)


# =============================================================================
# DAEMON FIXTURES
# =============================================================================


async def start_daemon(
    data_dir: Path, server_index: int, params: SchemeParams, fsync: bool = False
) -> tuple[ShareDaemon, Endpoint]:
    """One daemon on an ephemeral loopback port."""
    store = ShareStore(data_dir / f"server{server_index}.log", server_index, params, fsync).open()
    daemon = ShareDaemon(store, params, server_index)
    host, port = await daemon.start("127.0.0.1", 0)
    return daemon, Endpoint(host, port)


@pytest_asyncio.fixture
async def daemons(
    tmp_path: Path, params: SchemeParams
) -> AsyncGenerator[list[tuple[ShareDaemon, Endpoint]], None]:
    """Two independent daemons (roles 1 and 2) with their own logs."""
    started = [await start_daemon(tmp_path, k, params) for k in (1, 2)]
    yield started
    for daemon, _ in started:
        await daemon.stop()


@pytest_asyncio.fixture
async def client(
    daemons: list[tuple[ShareDaemon, Endpoint]], params: SchemeParams
) -> DelegationClient:
    return DelegationClient([ep for _, ep in daemons], params, timeout=10.0)
