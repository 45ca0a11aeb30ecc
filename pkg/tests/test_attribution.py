# Copyright (c) Microsoft Corporation and contributors.
# Licensed under the MIT License.

import os
import re
import unittest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def _read(*parts):
    with open(os.path.join(ROOT, *parts)) as f:
        return f.read()


class TestAttribution(unittest.TestCase):
    def test_docs_name_the_source_copyright_holder(self):
        conf = _read("docs", "reference", "conf.py")
        authors = re.search(r'^authors = "(.*)"$', conf, re.MULTILINE).group(1)
        copyright = re.search(r'^copyright = "(.*)"$', conf, re.MULTILINE).group(1)
        header = _read("dms", "__init__.py").splitlines()[0]
        self.assertEqual(header, f"# Copyright (c) {authors}.")
        self.assertTrue(copyright.endswith(authors))
