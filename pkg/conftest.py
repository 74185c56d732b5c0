"""
Pytest configuration and fixtures for the tdasum tests.
"""

import os

import django
import numpy as np
import pytest

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'tdasum.test_settings')
django.setup()


@pytest.fixture
def ring_field():
    """5x5 field: a ring of ones around a zero centre on a zero background."""
    from core.testing import ring_field
    return ring_field()


@pytest.fixture
def circle_cloud():
    """400 points on a circle of radius 0.3 around (0.5, 0.5)."""
    from core.domain import PointCloud
    angle = np.linspace(0.0, 2.0 * np.pi, 400, endpoint=False)
    return PointCloud(np.column_stack([0.5 + 0.3 * np.cos(angle), 0.5 + 0.3 * np.sin(angle)]))


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Run a test inside an empty temporary directory."""
    monkeypatch.chdir(tmp_path)
    return tmp_path
