from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor

from loguru import logger


def map_cells[T, R](
    func: Callable[[T], R], items: Iterable[T], *, workers: int = 1
) -> Sequence[R]:
    """Apply `func` to every item, preserving input order.

    With `workers > 1` the calls run on a thread pool; numpy and scipy release the GIL
    inside their dense kernels. The result order never depends on scheduling.
    """
    if workers <= 1:
        return [func(item) for item in items]
    logger.debug(f"Mapping over cells with {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
