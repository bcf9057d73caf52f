#!/usr/bin/env python3
"""Run the acceptance suite and print its PASS/FAIL summary."""
import os
import sys

import pytest

here = os.path.dirname(os.path.abspath(__file__))
sys.exit(pytest.main([os.path.join(here, os.pardir, "tests", "test_acceptance.py"), "-q", "-rx"]))
