"""Chunked map-reduce over dump lines with order-independent merging.

One sequential reader slices the stream into fixed-size line chunks and
feeds them to a worker pool. Each chunk maps to a partial result; the
caller's merge must be commutative and associative so the final value is
identical for any worker count. Chunk boundaries depend only on
chunk_size, never on the number of workers.
"""

from __future__ import annotations

from concurrent.futures import Future, ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

from .dump import open_dump

T = TypeVar("T")

CHUNK_LINES = 2000


def as_line_source(source: str | Path | Iterable[str]) -> Callable[[], Iterator[str]]:
    """Normalize a dump argument into a factory of fresh line iterators.

    Paths reopen the file per pass; in-memory line sequences are reused.
    A one-shot iterator is materialized once so multi-pass scans see the
    same data every time.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)

        def from_path() -> Iterator[str]:
            with open_dump(path) as stream:
                yield from stream

        return from_path
    lines: Sequence[str] = source if isinstance(source, Sequence) else list(source)
    return lambda: iter(lines)


def _chunks(lines: Iterator[str], size: int) -> Iterator[list[str]]:
    batch: list[str] = []
    for line in lines:
        batch.append(line)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


def scan_chunks(
    lines: Iterator[str],
    chunk_fn: Callable[[list[str]], T],
    merge_fn: Callable[[T, T], T],
    initial: T,
    workers: int = 1,
    chunk_size: int = CHUNK_LINES,
) -> T:
    """Fold chunk_fn over the stream, merging partials into `initial`."""
    if workers <= 1:
        result = initial
        for batch in _chunks(lines, chunk_size):
            result = merge_fn(result, chunk_fn(batch))
        return result

    result = initial
    # bounded in-flight window keeps memory at O(workers * chunk)
    pending: list[Future[T]] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for batch in _chunks(lines, chunk_size):
            pending.append(pool.submit(chunk_fn, batch))
            if len(pending) >= workers * 2:
                result = merge_fn(result, pending.pop(0).result())
        for future in pending:
            result = merge_fn(result, future.result())
    return result
