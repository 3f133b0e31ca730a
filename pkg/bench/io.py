"""Sequential read/write benchmark.

Direct I/O (O_DIRECT) is requested where the platform and file system allow it.
Otherwise the file is written through the page cache, synced, dropped from the
cache with POSIX_FADV_DONTNEED and then read back.
"""

import contextlib
import errno
import mmap
import os
import shutil
import tempfile
from pathlib import Path
from typing import NamedTuple, Optional, Tuple, Union

from bench.run_token import run_token
from bench.settings import bench_settings
from utils.dttm import clock, elapsed_since
from utils.errors import BenchmarkError
from utils.log import logger

DIRECT_ALIGNMENT = 4096


class IoScores(NamedTuple):
    read_iops: float
    write_iops: float
    direct: bool


def _drop_cache(fd: int) -> None:
    if hasattr(os, "posix_fadvise"):
        os.posix_fadvise(fd, 0, 0, os.POSIX_FADV_DONTNEED)


def _open(path: str, flags: int, direct: bool) -> Tuple[int, bool]:
    """Open with O_DIRECT when asked and supported, falling back to buffered I/O."""
    if direct and hasattr(os, "O_DIRECT"):
        try:
            return os.open(path, flags | os.O_DIRECT), True
        except OSError as e:
            if e.errno != errno.EINVAL:
                raise
            logger.debug("O_DIRECT not supported here, using the cache-bypass fallback")
    return os.open(path, flags), False


def _write_pass(path: str, buffer: mmap.mmap, blocks: int, direct: bool) -> Tuple[float, bool]:
    fd, direct = _open(path, os.O_WRONLY | os.O_TRUNC, direct)
    try:
        start = clock()
        for _ in range(blocks):
            os.write(fd, buffer)
        os.fsync(fd)
        elapsed = elapsed_since(start)
        if not direct:
            _drop_cache(fd)
    finally:
        os.close(fd)
    return elapsed, direct


def _read_pass(path: str, buffer: mmap.mmap, blocks: int, direct: bool) -> float:
    fd, direct = _open(path, os.O_RDONLY, direct)
    try:
        if not direct:
            _drop_cache(fd)
        start = clock()
        done = 0
        while done < blocks and os.readv(fd, [buffer]) > 0:
            done += 1
        return elapsed_since(start)
    finally:
        os.close(fd)


def bench_io_sequential(
    file_size: Optional[int] = None,
    block: Optional[int] = None,
    path: Union[str, Path, None] = None,
) -> IoScores:
    """Blocks per second for a sequential write and then a sequential read of a fresh file."""
    file_size = bench_settings.io_file_size if file_size is None else file_size
    block = bench_settings.io_block if block is None else block
    directory = Path(path) if path is not None else Path(tempfile.gettempdir())

    if file_size <= 0:
        raise BenchmarkError(f"I/O file size must be > 0, got {file_size}")
    if block <= 0:
        raise BenchmarkError(f"I/O block must be > 0, got {block}")
    if not directory.is_dir() or not os.access(directory, os.W_OK):
        raise BenchmarkError(f"I/O path is not a writable directory: {directory}")

    blocks = -(-file_size // block)
    if shutil.disk_usage(directory).free < blocks * block:
        raise BenchmarkError(f"not enough free space in {directory} for {blocks * block} bytes")

    want_direct = block % DIRECT_ALIGNMENT == 0
    buffer = mmap.mmap(-1, block)
    buffer.write(bytes(range(256)) * (block // 256) + bytes(block % 256))

    with run_token("I/O benchmark"):
        fd, name = tempfile.mkstemp(prefix=".lotaru-io-", dir=directory)
        os.close(fd)
        try:
            write_secs, direct = _write_pass(name, buffer, blocks, want_direct)
            read_secs = _read_pass(name, buffer, blocks, direct)
        except OSError as e:
            raise BenchmarkError(f"I/O benchmark failed in {directory}: {e.strerror or e}")
        finally:
            with contextlib.suppress(FileNotFoundError):
                os.unlink(name)
            buffer.close()

    scores = IoScores(
        read_iops=blocks / max(read_secs, 1e-9),
        write_iops=blocks / max(write_secs, 1e-9),
        direct=direct,
    )
    logger.info(
        f"I/O: read {scores.read_iops:,.0f} IOPS, write {scores.write_iops:,.0f} IOPS "
        f"({blocks} x {block} bytes, {'direct' if direct else 'cache-bypass fallback'})"
    )
    return scores
