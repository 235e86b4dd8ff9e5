"""Setup script for backward compatibility with pip install."""

from setuptools import setup

setup()

