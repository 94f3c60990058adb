#!/usr/bin/env python3
"""
System diagnostic tool for the concealed-attack toolkit
Checks the interpreter, packages, project layout, output root and runs a gradient self-check
"""

import os
import platform
import sys
import tempfile
import time
from pathlib import Path


# Colors for terminal output
class Colors:
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    BLUE = '\033[94m'
    END = '\033[0m'

    @staticmethod
    def disable():
        Colors.GREEN = ''
        Colors.YELLOW = ''
        Colors.RED = ''
        Colors.BLUE = ''
        Colors.END = ''


if platform.system() == 'Windows' or not sys.stdout.isatty():
    Colors.disable()

REQUIRED_PACKAGES = {
    "numpy": "Tensors",
    "scipy": "Softmax / special functions",
    "sklearn": "F1 score, stratified splits",
    "pandas": "TSV / CSV files",
    "matplotlib": "SVG overlays",
    "pydantic": "Configuration models",
    "yaml": "Config value parsing",
    "dotenv": "Environment variables",
    "loguru": "Logging",
    "tqdm": "Grid progress",
}

PROJECT_FILES = [
    "main.py",
    "app/cli.py",
    "diffcore/graph.py",
    "attacks/gradient.py",
    "discriminator/curriculum.py",
    "configs/smoke.cfg",
]


def print_header():
    print("=" * 60)
    print("   Concealed Attacks - System Diagnostics")
    print("=" * 60)


def print_section(title):
    print(f"\n{Colors.BLUE}{title}{Colors.END}")
    print("-" * 40)


def print_check(name, status, details=""):
    mark = f"{Colors.GREEN}✓{Colors.END}" if status else f"{Colors.RED}✗{Colors.END}"
    print(f"{mark} {name}: {'OK' if status else 'FAILED'}")
    if details:
        print(f"  {Colors.YELLOW}{details}{Colors.END}")


def check_python():
    print_section("1. Python Environment")
    version = sys.version_info
    ok = version >= (3, 10)
    print_check("Python Version", ok, f"Found: {version.major}.{version.minor}.{version.micro} (Required: 3.10+)")
    in_venv = sys.base_prefix != sys.prefix
    print_check("Virtual Environment", in_venv, "" if in_venv else "Recommended to use virtual environment")
    return ok


def check_required_packages():
    print_section("2. Required Python Packages")
    all_installed = True
    for package, description in REQUIRED_PACKAGES.items():
        try:
            module = __import__(package)
            print_check(package, True, f"{description} ({getattr(module, '__version__', '?')})")
        except ImportError:
            print_check(package, False, f"Missing - {description}")
            all_installed = False
    return all_installed


def check_project_files():
    print_section("3. Project Files")
    all_exist = True
    for file in PROJECT_FILES:
        exists = Path(file).exists()
        print_check(file, exists)
        all_exist = all_exist and exists
    return all_exist


def check_output_root():
    print_section("4. Output Root and Data Directory")
    root = Path(os.getenv("CONCEAL_OUTPUT_ROOT", "."))
    try:
        root.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=root):
            pass
        print_check("CONCEAL_OUTPUT_ROOT", True, f"Writable: {root.resolve()}")
        writable = True
    except OSError as e:
        print_check("CONCEAL_OUTPUT_ROOT", False, f"{root}: {e}")
        writable = False
    data_dir = os.getenv("CONCEAL_DATA_DIR")
    if data_dir:
        print_check("CONCEAL_DATA_DIR", Path(data_dir).is_dir(), data_dir)
    else:
        print(f"  {Colors.YELLOW}CONCEAL_DATA_DIR not set (only needed for UCR datasets){Colors.END}")
    return writable


def check_gradients():
    """Backprop against central differences on a small dense + softmax graph"""
    print_section("5. Gradient Self-Check")
    try:
        sys.path.insert(0, os.getcwd())
        import numpy as np
        from diffcore import GraphBuilder, backpropagate, evaluate, finite_difference_gradient

        start = time.perf_counter()
        rng = np.random.default_rng(0)
        g = GraphBuilder()
        x, w, b = g.leaf("x"), g.leaf("w"), g.leaf("b")
        graph = g.build(g.softmax_cross_entropy(g.dense(g.tanh(x), w, b), g.constant("y")))
        bindings = {"x": rng.normal(size=(3, 4)), "w": rng.normal(size=(4, 2)), "b": rng.normal(size=2),
                    "y": np.array([0, 1, 1])}
        evaluate(graph, bindings)
        worst = 0.0
        for leaf, analytic in backpropagate(graph).items():
            numeric = finite_difference_gradient(graph, bindings, leaf, h=1e-5)
            worst = max(worst, float(np.max(np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-6))))
        ok = worst <= 1e-4
        print_check("backprop vs finite differences", ok,
                    f"max relative error {worst:.2e} in {time.perf_counter() - start:.2f}s")
        return ok
    except Exception as e:
        print_check("backprop vs finite differences", False, str(e))
        return False


def check_environment():
    print_section("6. Environment Configuration")
    if Path(".env").exists():
        print_check(".env file", True, "Found")
        try:
            from dotenv import dotenv_values
            for var, value in dotenv_values(".env").items():
                if var in ("CONCEAL_OUTPUT_ROOT", "CONCEAL_DATA_DIR", "LOG_LEVEL"):
                    print(f"  • {var}: {value}")
        except ImportError:
            pass
    else:
        print_check(".env file", False, "Not found (optional; run setup.py to create one)")


def main():
    print_header()
    python_ok = check_python()
    packages_ok = check_required_packages()
    files_ok = check_project_files()
    output_ok = check_output_root()
    check_environment()
    gradients_ok = packages_ok and files_ok and check_gradients()

    print_section("Overall Status")
    ready = python_ok and packages_ok and files_ok and output_ok and gradients_ok
    if ready:
        print(f"{Colors.GREEN}✓ System is ready!{Colors.END}")
        print("\nTry the smoke run:")
        print("  python main.py attack --config configs/smoke.cfg")
    else:
        print(f"{Colors.RED}✗ Some issues need to be fixed before running.{Colors.END}")
        if not packages_ok:
            print("\n  pip install -r requirements.txt")
    print("\n" + "=" * 60)
    return 0 if ready else 1


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\nDiagnostics interrupted.")
        sys.exit(1)
