from setuptools import setup, find_packages

setup(
    name="symuniv",
    version="0.1.0",
    packages=find_packages(exclude=["tests"]),
    install_requires=[
        "numpy",
        "scipy",
        "mpmath",
        "pandas",
        "joblib",
        "tqdm"
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        "console_scripts": [
            "symuniv=symuniv.cli:main",
        ],
    },
    description="Symmetric power L-functions of level-one eigenforms: coefficients, "
                "prime sums, value distribution and universality experiments",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
)
