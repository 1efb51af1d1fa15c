"""Cooperative cancellation for long-running solves."""

from __future__ import annotations

import threading
import time


class CancelToken:
    """Checked by solvers once per pivot or iteration.

    Trips when :meth:`cancel` is called or when ``timeout`` seconds have
    elapsed since construction.
    """

    def __init__(self, timeout=None):
        self._event = threading.Event()
        self.start = time.monotonic()
        self.deadline = None if timeout is None else self.start + float(timeout)

    def cancel(self):
        self._event.set()

    @property
    def cancelled(self) -> bool:
        if self._event.is_set():
            return True
        if self.deadline is not None and time.monotonic() >= self.deadline:
            self._event.set()
            return True
        return False

    def elapsed(self) -> float:
        return time.monotonic() - self.start


def as_token(cancel=None, timeout=None) -> CancelToken:
    if cancel is not None:
        return cancel
    return CancelToken(timeout)
