from setuptools import find_packages, setup

setup(
    name="realfloor",
    version="0.1.0",
    description="Floor-diagram counts of real and complex rational curves on toric surfaces",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.9",
    install_requires=["numpy", "scipy", "pandas", "networkx", "typer"],
    extras_require={"test": ["pytest", "sympy"]},
    entry_points={"console_scripts": ["realfloor=app.main:run"]},
)
