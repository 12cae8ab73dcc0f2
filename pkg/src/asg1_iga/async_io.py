"""Async wrappers for CPU-bound work.

Basis construction, mass assembly and table writes run in a thread pool so the
MCP server's event loop stays responsive.
"""
import asyncio
import functools
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, TypeVar

import pandas as pd

from .cli_io import FLOAT_FORMAT
from .validation import validate_output_format

T = TypeVar("T")

# Thread pool for CPU-bound operations
_executor = ThreadPoolExecutor(max_workers=4)


async def run_blocking(fn: Callable[..., T], *args: Any, **kwargs: Any) -> T:
    """
    Run a blocking callable in the shared executor.

    Exceptions raised by ``fn`` propagate to the awaiting caller.
    """
    loop = asyncio.get_running_loop()
    return await loop.run_in_executor(_executor, functools.partial(fn, *args, **kwargs))


async def write_table_async(df: pd.DataFrame, file_path: Path, fmt: str = "csv") -> int:
    """
    Write a table asynchronously.

    Args:
        df: DataFrame to write
        file_path: Output path; the suffix is replaced to match fmt
        fmt: "csv" or "parquet"

    Returns:
        File size in bytes
    """
    validate_output_format(fmt)
    file_path = Path(file_path).with_suffix(".parquet" if fmt == "parquet" else ".csv")

    def _write():
        if fmt == "parquet":
            df.to_parquet(str(file_path), index=False)
        else:
            df.to_csv(str(file_path), index=False, float_format=FLOAT_FORMAT)
        return file_path.stat().st_size

    return await run_blocking(_write)
