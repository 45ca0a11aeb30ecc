# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import dms.lattice
import dms.matweight
import dms.growth
import dms.seqspace
import dms.almostdiag
import dms.wavelets
import dms.molecules
import dms.operators
import dms.cli
import dms.utils

from dms.version import __version

__version__ = __version()
