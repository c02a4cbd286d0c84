from __future__ import annotations

import datetime
import enum
import functools
import json
import traceback
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Self

import numpy as np
from loguru import logger
from pydantic import BaseModel

__all__ = ["RunLogger", "log_and_reraise", "logger", "tlog"]

type JsonCompatible = Mapping | Sequence | str | float | int | bool | None
type Loggable = BaseModel | np.ndarray | np.generic | JsonCompatible


class _Unset(enum.Enum):
    UNSET = enum.auto()


UNSET = _Unset.UNSET


def loggable_to_json_compatible(x: Loggable) -> JsonCompatible:
    if isinstance(x, BaseModel):
        return x.model_dump(mode="json")
    if isinstance(x, np.ndarray | np.generic):
        return x.tolist()
    if isinstance(x, Mapping):
        return {str(k): loggable_to_json_compatible(v) for k, v in x.items()}
    if isinstance(x, list | tuple):
        return [loggable_to_json_compatible(v) for v in x]
    return x


@dataclass
class RunLogger:
    """Structured event log: every event is appended as one JSON line to each active log file."""

    log_files: list[Path] = field(default_factory=list)

    def log(
        self,
        name: str,
        /,
        content: Loggable | _Unset = UNSET,
        *,
        type: str = "event",
        metadata: Mapping[str, Loggable] = {},
    ) -> None:
        logger.debug(f"{type}:{name}: {repr(content) if content is not UNSET else ''}")
        if not self.log_files:
            return
        record: dict = dict(
            time=datetime.datetime.now().strftime("%H:%M:%S"),
            type=type,
            name=name,
        )
        if content is not UNSET:
            record["content"] = loggable_to_json_compatible(content)
        record["metadata"] = loggable_to_json_compatible(metadata)
        message = json.dumps(record) + "\n"
        for log_file in self.log_files:
            with open(log_file, "a") as f:
                f.write(message)

    __call__ = log

    def fn[**P, R](
        self,
        func: Callable[P, R],
        /,
        *,
        log_result: bool = False,
        map_result: Callable[[R], Loggable] = lambda x: x,  # type: ignore
        name: str | None = None,
    ) -> Callable[P, R]:
        """Wrap a function in a context that logs its start and end."""

        @functools.wraps(func)
        def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
            with self.context(name or func.__name__) as ctx:
                result = func(*args, **kwargs)
                if log_result:
                    ctx.content = map_result(result)
                return result

        return wrapper

    def context(
        self, name: str, /, content: Loggable | _Unset = UNSET, **metadata: Loggable
    ) -> RunLogger.Context:
        """Context manager that logs the start and end of an event."""
        return self.Context(self, name, content=content, **metadata)

    class Context:
        def __init__(
            self,
            logger: RunLogger,
            name: str,
            content: Loggable | _Unset = UNSET,
            **metadata: Loggable,
        ):
            self.logger = logger
            self.name = name
            self.enter_content = content
            self.enter_metadata = metadata
            self.content: Loggable | _Unset = UNSET
            self.metadata: dict[str, Loggable] = {}
            self._started = 0.0

        def __enter__(self) -> Self:
            self._started = datetime.datetime.now().timestamp()
            self.logger.log(
                self.name,
                type="start",
                content=self.enter_content,
                metadata=self.enter_metadata,
            )
            return self

        def __exit__(self, exc_type, exc_value, tb):
            self.metadata["seconds"] = datetime.datetime.now().timestamp() - self._started
            if exc_type is not None:
                self.metadata["error"] = f"{exc_type.__name__}: {exc_value}"
            self.logger.log(
                self.name,
                type="end",
                content=self.content,
                metadata=self.metadata,
            )

        def update(self, **kwargs: Loggable) -> None:
            self.metadata.update(kwargs)

    def log_to(self, file: Path) -> RunLogger.LogFileContext:
        return self.LogFileContext(self, file)

    class LogFileContext:
        def __init__(self, logger: RunLogger, file: Path):
            self.logger = logger
            self.file = file

        def __enter__(self) -> Self:
            self.file.parent.mkdir(parents=True, exist_ok=True)
            self.logger.log_files.append(self.file)
            return self

        def __exit__(self, exc_type, exc_value, tb):
            if exc_type is not None:
                self.logger.log(
                    "exception",
                    content=traceback.format_exception(exc_type, exc_value, tb),
                    type="error",
                )
            self.logger.log_files.remove(self.file)


def log_and_reraise[**P, R](func: Callable[P, R]) -> Callable[P, R]:
    @functools.wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        try:
            return func(*args, **kwargs)
        except Exception:
            tlog("error", traceback.format_exc(), type="error")
            raise

    return wrapper


tlog = RunLogger()
