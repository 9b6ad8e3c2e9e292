from setuptools import setup

setup(
    name="resonance-wrangler",
    version="0.1",
    author="MathSquared",
    description="Periodic solutions of semilinear parabolic equations at resonance: spectral splitting, averaging and degree checks",
    license="MIT",
    packages=[
        "resonancewrangler",
        "resonancewrangler.command",
        "resonancewrangler.experiment",
        "resonancewrangler.nonlinearity",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.6",
        "pandas>=1.5",
    ],
    entry_points={
        "console_scripts": [
            "rw = resonancewrangler:main",
        ],
    },
    test_suite="tests",
)
