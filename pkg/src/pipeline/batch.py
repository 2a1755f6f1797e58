"""
Batch conversion

Collects input files from directories and manifests and converts them
independently. Conversions are pure per file, so they run concurrently in a
process pool; one file's failure never aborts the batch.
"""

import asyncio
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from src.errors import ConversionError
from src.monitoring.run_report import RunStats
from src.openscenario.parser import is_catalog
from src.pipeline.converter import EXIT_FAILURE, ConversionResult, convert_file
from src.settings import ConverterSettings

logger = logging.getLogger("osc2cr.pipeline")


class NoInputs(ConversionError):
    code = "no_inputs"


def _read_manifest(path: Path) -> List[Path]:
    entries = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            entry = Path(line)
            entries.append(entry if entry.is_absolute() else path.parent / entry)
    return entries


def collect_inputs(inputs: Iterable[Union[str, Path]]) -> List[Path]:
    """
    Expand directories (recursively, `*.xosc`, catalogs skipped) and manifest
    files (one path per line, `#` comments) into a sorted, de-duplicated list.

    Raises:
        NoInputs: nothing to convert
    """
    found = set()
    for item in inputs:
        item = Path(item)
        if item.is_dir():
            for path in item.rglob("*.xosc"):
                if not is_catalog(path.read_bytes()):
                    found.add(path)
        elif item.suffix.lower() == ".xosc":
            # missing files are reported per file by the converter
            found.add(item)
        elif item.is_file():
            found.update(_read_manifest(item))
        else:
            raise NoInputs(f"input '{item}' does not exist")
    if not found:
        raise NoInputs("no OpenSCENARIO files found in " + ", ".join(str(i) for i in inputs))
    return sorted(found)


def _output_dir(path: Path, output_dir: Optional[Path]) -> Path:
    return output_dir if output_dir is not None else path.parent


async def _convert_all(paths: Sequence[Path], output_dir: Optional[Path],
                       settings: ConverterSettings, jobs: int) -> List:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        tasks = [
            loop.run_in_executor(pool, convert_file, path, _output_dir(path, output_dir), settings)
            for path in paths
        ]
        return await asyncio.gather(*tasks, return_exceptions=True)


def run_batch(inputs: Iterable[Union[str, Path]], output_dir: Optional[Union[str, Path]] = None,
              settings: Optional[ConverterSettings] = None, jobs: Optional[int] = None) -> RunStats:
    """
    Convert every collected input and gather the statistics.

    Args:
        inputs: files, directories or manifests
        output_dir: common output directory (default: next to each input)
        settings: conversion settings, shared by every file
        jobs: worker processes; 1 converts in-process, None uses every CPU

    Returns:
        RunStats with one entry per input
    """
    settings = settings or ConverterSettings()
    paths = collect_inputs(inputs)
    out = Path(output_dir) if output_dir is not None else None
    jobs = jobs or os.cpu_count() or 1
    jobs = min(jobs, len(paths))
    logger.info(f"Converting {len(paths)} file(s) with {jobs} job(s)")

    stats = RunStats()
    if jobs == 1:
        for path in paths:
            stats.add(convert_file(path, _output_dir(path, out), settings))
        return stats

    results = asyncio.run(_convert_all(paths, out, settings, jobs))
    for path, result in zip(paths, results):
        if isinstance(result, BaseException):
            # worker crashed outside the converter's own error handling
            logger.error(f"Worker failed on {path}: {result!r}")
            result = ConversionResult(input_path=str(path), success=False, exit_code=EXIT_FAILURE,
                                      error=f"{path}: worker failed: {result!r}", error_code="worker_failed")
        stats.add(result)
    return stats
