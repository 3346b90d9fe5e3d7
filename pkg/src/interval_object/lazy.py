"""Memoized total sequences over the natural numbers.

Every infinite object in the package (digit streams, normal-form levels,
level sequences of weights) is a function index -> value that is computed
on demand and remembered. Concurrent queries are safe and always agree:
the memo table only ever grows, under a lock.
"""

import threading
from itertools import count
from typing import Callable, Generic, Iterable, Iterator, TypeVar, Union

T = TypeVar("T")


class LazySequence(Generic[T]):
    """A total sequence backed either by an iterator or by an index function.

    Iterator-backed sequences are forced in order; index-backed sequences
    may be queried in any order. Either way a value, once computed, is
    returned unchanged forever.
    """

    def __init__(self, source: Union[Iterable[T], Callable[[int], T]]) -> None:
        self._lock = threading.Lock()
        self._values: list[T] = []
        self._table: dict[int, T] = {}
        self._function: Callable[[int], T] | None = None
        self._iterator: Iterator[T] | None = None
        if callable(source) and not hasattr(source, "__iter__"):
            self._function = source
        else:
            self._iterator = iter(source)  # type: ignore[arg-type]

    def __getitem__(self, index: int) -> T:
        if index < 0:
            raise IndexError(f"Sequences are indexed by naturals, got {index}")
        if self._function is not None:
            with self._lock:
                if index in self._table:
                    return self._table[index]
            # Compute outside the lock: index functions may recurse into
            # other entries of this same sequence.
            value = self._function(index)
            with self._lock:
                return self._table.setdefault(index, value)
        with self._lock:
            while len(self._values) <= index:
                assert self._iterator is not None
                try:
                    self._values.append(next(self._iterator))
                except StopIteration:
                    raise IndexError(
                        f"Sequence source ended before index {index}"
                    ) from None
            return self._values[index]

    def __iter__(self) -> Iterator[T]:
        for i in count():
            yield self[i]

    def take(self, n: int) -> list[T]:
        """The first n entries."""
        return [self[i] for i in range(n)]

    @property
    def forced(self) -> int:
        """How many entries have been materialized so far."""
        if self._function is not None:
            return len(self._table)
        return len(self._values)


def as_lazy(source: Union["LazySequence[T]", Iterable[T], Callable[[int], T]]) -> LazySequence[T]:
    """Wrap any sequence description as a LazySequence (identity on LazySequence)."""
    if isinstance(source, LazySequence):
        return source
    return LazySequence(source)
