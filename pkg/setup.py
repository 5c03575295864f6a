from setuptools import setup, find_packages

setup(
    name="nwidth",
    version="0.1.0",
    packages=find_packages(include=["src", "src.*"]),
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.10.0",
        "scikit-learn>=1.3.0",
        "matplotlib>=3.3.0",
        "setuptools>=42.0.0"
    ],
    extras_require={
        "test": ["pytest>=7.0"]
    },
    entry_points={
        "console_scripts": [
            "nwidth = src.cli:main"
        ]
    },
    description="Kolmogorov n-widths, kernel metric and effective dimensions of point sets",
    keywords="kernel methods, n-widths, pivoted cholesky, fractal dimension, kernel ridge regression",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.9",
)
