from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="minkpoly",
    version="0.1.0",
    description="Hyperpolygon spaces, their circle-action involution and closed polygons in Minkowski 3-space",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=("tests",)),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Environment :: Console",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.7",
        "rich>=12.0.0",
        "toml>=0.10.2",
        "python-dotenv",
        "psutil",
    ],
    extras_require={
        "test": ["pytest", "hypothesis>=6.0"],
    },
    entry_points={
        "console_scripts": [
            "minkpoly=minkpoly.main:main",
        ],
    },
)
