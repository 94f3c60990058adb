#!/usr/bin/env python3
"""
Setup script for the concealed-attack toolkit
Creates a virtual environment, installs requirements.txt and writes a default .env
"""

import platform
import subprocess
import sys
from pathlib import Path

IMPORT_CHECK = '''
import importlib
for module in ["numpy", "scipy", "sklearn", "pandas", "matplotlib", "pydantic", "yaml", "dotenv",
               "loguru", "tqdm", "pytest"]:
    try:
        importlib.import_module(module)
        print(f"  ok      {module}")
    except ImportError:
        print(f"  missing {module}")
'''

ENV_TEMPLATE = """# Concealed attack toolkit configuration

# Base directory for relative [output] directories
CONCEAL_OUTPUT_ROOT=.

# Base directory for relative UCR paths (e.g. the UCRArchive_2018 folder)
# CONCEAL_DATA_DIR=/data/UCRArchive_2018

# Console log level (run directories always get a DEBUG run.log)
LOG_LEVEL=INFO
"""


class ConcealSetup:
    def __init__(self, venv: str = "venv"):
        self.windows = platform.system().lower() == "windows"
        self.venv_path = Path(venv)

    def print_header(self):
        print("=" * 60)
        print("   Concealed Attacks - Setup")
        print("=" * 60)
        print(f"Detected OS: {platform.system()}\n")

    def check_python_version(self):
        version = sys.version_info
        if version < (3, 10):
            print(f"❌ Python 3.10+ required (found {version.major}.{version.minor})")
            sys.exit(1)
        print(f"✅ Python {version.major}.{version.minor}.{version.micro} detected")

    def setup_venv(self):
        """Create the virtual environment and return its python"""
        if self.venv_path.exists():
            print("→ Virtual environment already exists")
        else:
            print("→ Creating virtual environment...")
            subprocess.run([sys.executable, "-m", "venv", str(self.venv_path)], check=True)
        bin_dir = self.venv_path / ("Scripts" if self.windows else "bin")
        python_path = bin_dir / "python"
        print("→ Upgrading pip...")
        subprocess.run([str(python_path), "-m", "pip", "install", "--upgrade", "pip", "wheel"], check=True)
        return python_path

    def install_python_deps(self, python_path):
        print("📚 Installing requirements.txt...")
        subprocess.run([str(python_path), "-m", "pip", "install", "-r", "requirements.txt"], check=True)

    def create_env_file(self):
        env_path = Path(".env")
        if env_path.exists():
            print("→ .env file already exists, skipping...")
            return
        env_path.write_text(ENV_TEMPLATE)
        print("✅ Configuration file created")

    def test_installation(self, python_path):
        print("🧪 Testing installation...")
        subprocess.run([str(python_path), "-c", IMPORT_CHECK])

    def print_completion_message(self):
        activate = "venv\\Scripts\\activate" if self.windows else "source venv/bin/activate"
        print()
        print("Setup complete. Next steps:")
        print(f"  1. {activate}")
        print("  2. python diagnose.py")
        print("  3. python main.py attack --config configs/smoke.cfg")
        print("  4. pytest tests            (add -m slow for the acceptance runs)")

    def run_setup(self):
        try:
            self.print_header()
            self.check_python_version()
            python_path = self.setup_venv()
            self.install_python_deps(python_path)
            self.create_env_file()
            self.test_installation(python_path)
            self.print_completion_message()
        except KeyboardInterrupt:
            print("\n❌ Setup interrupted by user")
            sys.exit(1)
        except subprocess.CalledProcessError as e:
            print(f"\n❌ Setup failed: {e}")
            sys.exit(1)


def main():
    ConcealSetup().run_setup()


if __name__ == "__main__":
    main()
