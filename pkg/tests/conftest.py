import socket
import threading
import time

import pytest
from fastapi.testclient import TestClient

from arbohub.db import Database
from arbohub.registry import Registry
from arbohub.server import ServerConfig, create_app


@pytest.fixture()
def db():
    database = Database()
    yield database
    database.close()


@pytest.fixture()
def registry(db):
    return Registry(db)


@pytest.fixture()
def account_token(registry):
    return registry.create_account("tester")


@pytest.fixture()
def client(db):
    app = create_app(ServerConfig(), db=db)
    with TestClient(app) as test_client:
        yield test_client


MODEL_META = {
    "name": "BB-M",
    "description": "baseline weekly state-level model",
    "repository": "https://github.com/example/bbm",
    "implementation_language": "R",
    "disease": "dengue",
    "temporal": True,
    "spatial": False,
    "categorical": False,
    "adm_level": 1,
    "time_resolution": "week",
    "sprint": True,
}


@pytest.fixture()
def model_meta():
    return dict(MODEL_META)


@pytest.fixture(scope="module")
def live_server():
    """A real uvicorn server in a thread, for client/CLI end-to-end tests."""
    import uvicorn

    database = Database()
    registry = Registry(database)
    account, token = registry.create_account("cli-tester")
    app = create_app(ServerConfig(), db=database)

    hits = {"count": 0}

    @app.middleware("http")
    async def count_requests(request, call_next):
        hits["count"] += 1
        return await call_next(request)

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()

    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("test server did not start")
        time.sleep(0.01)

    yield {
        "url": f"http://127.0.0.1:{port}",
        "db": database,
        "registry": registry,
        "account": account,
        "token": token,
        "hits": hits,
    }

    server.should_exit = True
    thread.join(timeout=5)
    database.close()
