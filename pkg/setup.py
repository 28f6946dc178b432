from setuptools import find_packages, setup

setup(
    name="satprobe",
    version="1.0.0",
    description="Precision limits of absorption estimation with saturable samples",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.11",
    install_requires=[
        "numpy>=2.2",
        "scipy>=1.16",
        "qutip>=5.1",
        "pydantic>=2.12",
        "pydantic-settings>=2.12",
        "python-dotenv>=1.2",
        "tqdm>=4.67",
    ],
    extras_require={
        "dev": [
            "pytest==8.4.2",
            "pre-commit==4.0.1",
            "isort==5.13.2",
            "black==24.10.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "satprobe = satprobe.cli:main",
        ],
    },
)
