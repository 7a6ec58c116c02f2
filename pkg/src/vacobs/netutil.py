"""Shared client-side politeness: token-bucket rate limiting and retries."""

from __future__ import annotations

import threading
import time
from typing import Callable, TypeVar

T = TypeVar("T")


class TransientFailure(RuntimeError):
    """A failure worth retrying (connection error, 5xx, 429)."""


class TokenBucket:
    """Thread-safe token bucket; acquire() blocks until a token is free."""

    def __init__(self, rate_per_second: float, capacity: float | None = None,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        if rate_per_second <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate_per_second
        self.capacity = capacity if capacity is not None else max(1.0, rate_per_second)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self, tokens: float = 1.0) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= tokens:
                    self._tokens -= tokens
                    return
                wait = (tokens - self._tokens) / self.rate
            self._sleep(wait)


def retry_call(fn: Callable[[], T], *, attempts: int = 3, base_delay: float = 1.0,
               sleep: Callable[[float], None] = time.sleep) -> T:
    """Call fn, retrying TransientFailure with exponential backoff.

    Delays are base_delay, 2*base_delay, 4*base_delay, ... between attempts.
    The last failure is re-raised once attempts are exhausted.
    """
    if attempts < 1:
        raise ValueError("attempts must be at least 1")
    delay = base_delay
    for attempt in range(attempts):
        try:
            return fn()
        except TransientFailure:
            if attempt == attempts - 1:
                raise
            if delay > 0:
                sleep(delay)
            delay *= 2
    raise AssertionError("unreachable")
