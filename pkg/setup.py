"""
openff-adiabatic
A numerical laboratory for the adiabatic limit of finite-level quantum systems.
"""
import re
import sys

from setuptools import find_namespace_packages, setup

short_description = __doc__.split("\n")

# from https://github.com/pytest-dev/pytest-runner#conditional-requirement
needs_pytest = {"pytest", "test", "ptr"}.intersection(sys.argv)
pytest_runner = ["pytest-runner"] if needs_pytest else []

try:
    with open("README.md", "r") as handle:
        long_description = handle.read()
except IOError:
    long_description = "\n".join(short_description[2:])

with open("openff/adiabatic/__init__.py", "r") as handle:
    version = re.search(r'__version__ = "(.+)"', handle.read()).group(1)


setup(
    name="openff-adiabatic",
    description=short_description[0],
    long_description=long_description,
    long_description_content_type="text/markdown",
    version=version,
    license="MIT",
    packages=find_namespace_packages(include=["openff.*"]),
    include_package_data=True,
    setup_requires=[] + pytest_runner,
    install_requires=[
        # Core dependencies
        "click",
        "numpy",
        "pydantic",
        "tqdm",
        # Root finding, interpolation, polar decomposition and fitting
        "scipy",
        # Experiment configurations
        "tomli; python_version<'3.11'",
    ],
    entry_points={
        "console_scripts": [
            "openff-adiabatic=openff.adiabatic.cli:cli",
        ],
    },
    python_requires=">=3.8",
)
