# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import configparser
import subprocess
from pathlib import Path
from typing import Optional

_ROOT = Path(__file__).resolve().parent.parent


def __from_git() -> Optional[str]:
    """
    ``git describe`` of the checkout the package is imported from, when it is one.

    This is the common case when running experiments from a clone, and it is what
    reports embed for provenance.
    """
    try:
        completed = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=_ROOT,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if completed.returncode != 0:
            return None
        described = completed.stdout.strip()
        return described or None
    except BaseException:
        return None


def __from_distribution() -> Optional[str]:
    """
    The version of the installed distribution, the common case when dms was installed
    with pip.
    """
    try:
        from importlib.metadata import version

        return version("dms")
    except BaseException:
        return None


def __from_filesystem(setup_config: Path = _ROOT / "setup.cfg") -> Optional[str]:
    """
    The ``setup.cfg`` version, marked as a development build. No timestamp is
    attached, so reports stay identical across runs.
    """
    try:
        cfg_parser = configparser.RawConfigParser()
        cfg_parser.read(setup_config)
        base_version = cfg_parser.get("metadata", "version")
        return f"{base_version}.dev0"
    except BaseException:
        return None


def __version() -> str:
    """
    git takes precedence, then the installed distribution, then the filesystem.

    If all else fails, we have no way of knowing what version we are
    """
    possible_version = __from_git() or __from_distribution() or __from_filesystem()
    return possible_version if possible_version is not None else "unknown"
