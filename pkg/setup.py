"""Setup script for the NV heterodyne magnetometer digital twin."""
from setuptools import setup, find_packages

setup(
    name="nv-heterodyne-twin",
    version="0.1.0",
    description="Digital twin of an NV-ensemble heterodyne microwave magnetometer",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pydantic>=2.5.0",
        "python-dotenv>=1.0.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.3",
            "pytest-cov>=4.1.0",
            "black>=23.11.0",
            "flake8>=6.1.0",
        ]
    },
    entry_points={
        "console_scripts": [
            "nvhet=src.cli.main:main",
        ]
    },
)
