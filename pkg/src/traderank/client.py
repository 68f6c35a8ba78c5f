"""Thin async client for the ranking service.

By default requests run in-process against the ASGI app (no socket, no
server); pass a base URL to talk to a remote instance instead.
"""

from __future__ import annotations

from typing import Any

import httpx

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_FAILURE = 1


class ClientError(Exception):
    """Request failed; carries the CLI exit code."""

    def __init__(self, message: str, exit_code: int = EXIT_FAILURE) -> None:
        super().__init__(message)
        self.exit_code = exit_code


class ServiceClient:
    def __init__(self, server: str | None = None) -> None:
        if server is None:
            from .service.app import app  # deferred so remote use stays light

            self._client = httpx.AsyncClient(
                transport=httpx.ASGITransport(app=app),
                base_url="http://traderank.internal",
                timeout=None,
            )
        else:
            self._client = httpx.AsyncClient(base_url=server, timeout=None)

    async def __aenter__(self) -> "ServiceClient":
        return self

    async def __aexit__(self, *exc_info: object) -> None:
        await self._client.aclose()

    async def call(self, endpoint: str, payload: dict[str, Any]) -> dict[str, Any]:
        try:
            response = await self._client.post(endpoint, json=payload)
        except httpx.HTTPError as exc:
            raise ClientError(f"request to {endpoint} failed: {exc}") from exc
        if response.status_code >= 400:
            raise ClientError(_describe(response), _exit_code(response))
        return response.json()


def _body(response: httpx.Response) -> dict[str, Any]:
    try:
        body = response.json()
    except ValueError:
        return {}
    return body if isinstance(body, dict) else {}


def _exit_code(response: httpx.Response) -> int:
    if response.status_code in (400, 422):
        return EXIT_INPUT
    if _body(response).get("error") == "non_convergence":
        return EXIT_NO_CONVERGENCE
    return EXIT_FAILURE


def _describe(response: httpx.Response) -> str:
    detail = _body(response).get("detail")
    if detail is None:
        return f"HTTP {response.status_code}"
    return f"HTTP {response.status_code}: {detail}"
