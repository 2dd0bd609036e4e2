# Copyright (C) 2025 The biharm developers
# License: GNU General Public License version 3, or any later version
# See top-level LICENSE file for more information

"""Progress reporting for sweeps over grids, solves and field points.

Library code never talks to a terminal. It receives a callable following
:py:class:`ProgressBarInit` and wraps its loops with it; the command line
interface hands over ``click.progressbar``, everything else gets
:py:func:`no_progressbar`.
"""

import logging
from types import TracebackType
from typing import Generic, Iterable, Iterator, Protocol, TypeVar

V = TypeVar("V")

logger = logging.getLogger(__name__)


class ProgressBar(Protocol, Generic[V]):
    """The subset of click's progress bar used by biharm."""

    def __enter__(self) -> "ProgressBar[V]": ...

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_value: BaseException | None,
        tb: TracebackType | None,
    ) -> None: ...

    def __iter__(self) -> Iterator[V]: ...


class ProgressBarInit(Protocol):
    """A protocol abstracting the ``click.progressbar()`` function."""

    def __call__(
        self,
        iterable: Iterable[V],
        label: str | None = None,
    ) -> ProgressBar[V]: ...


class NoProgressBar(Generic[V]):
    """Iterates silently, logging the label once and each step at debug level."""

    def __init__(self, iterable: Iterable[V], label: str | None = None):
        self.iterable = iterable
        self.label = label
        if label:
            logger.info(label)

    def __enter__(self) -> "NoProgressBar[V]":
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_value: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        pass

    def __iter__(self) -> Iterator[V]:
        for step, item in enumerate(self.iterable, start=1):
            logger.debug("%s: step %d", self.label or "progress", step)
            yield item


def no_progressbar(
    iterable: Iterable[V],
    label: str | None = None,
) -> ProgressBar[V]:
    """Returns a :py:class:`ProgressBar` that displays nothing."""
    return NoProgressBar(iterable, label=label)
