"""
Setup script for auto-noise
"""

from setuptools import find_packages, setup

setup(
    name="auto-noise",
    version="0.1.0",
    packages=find_packages(include=["auto_noise*"]),
    python_requires=">=3.10",
    install_requires=["numpy>=1.24", "pydantic>=2.0"],
    entry_points={"console_scripts": ["auto-noise=auto_noise.cli:main"]},
)
