"""
Setup script for quantum-decision-lib
"""
from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="quantum-decision-lib",
    version="0.1.0",
    author="Your Name",
    author_email="your.email@example.com",
    description="Quantum probability models of decisions under ambiguity",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="https://github.com/yourusername/quantum-decision-lib",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    package_data={
        "quantum_decision_lib": ["schema/*.json", "specs/*.json"],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.9",
        "jsonschema>=4.0",
        "python-dotenv",
    ],
    extras_require={
        "dev": [
            "pytest>=6.0",
            "pytest-cov",
            "python-dotenv",
            "black",
            "flake8",
        ]
    },
    entry_points={
        "console_scripts": [
            "qdu=quantum_decision_lib.cli:main",
        ],
    },
)
