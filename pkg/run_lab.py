#!/usr/bin/env python3
"""
derivlab - Launcher
Checks the environment, prepares the output directories and hands the
remaining arguments to the command-line front end.
"""

import sys


def check_python_version():
    """Check if Python version is compatible"""
    if sys.version_info < (3, 9):
        print("❌ Error: Python 3.9 or higher is required")
        sys.exit(1)
    print(f"✅ Python version: {sys.version.split()[0]}")


def check_dependencies():
    """Check if required dependencies are installed"""
    try:
        import numpy
        import scipy
        import sqlalchemy
        import pydantic_settings
        print("✅ All dependencies are installed")
    except ImportError as e:
        print(f"❌ Missing dependency: {e}")
        print("Please run: pip install -r requirements.txt")
        sys.exit(1)


def initialize_directories():
    """Create output and log directories"""
    from derivlab.config import settings

    settings.create_directories()
    print(f"✅ Output directory: {settings.OUTPUT_DIR}")
    print(f"✅ Log directory: {settings.LOGS_DIR}")


def main():
    """Main function"""
    print("🔧 derivlab - Startup")
    print("=" * 50)

    check_python_version()
    check_dependencies()
    initialize_directories()

    argv = sys.argv[1:]
    if not argv:
        print("\nUsage: python run_lab.py <command> [flags]  (see --help)")
        sys.exit(64)

    print(f"\n🚀 Running: {' '.join(argv)}\n")
    from derivlab.cli import run

    try:
        code = run(argv)
    except KeyboardInterrupt:
        print("\n🛑 Run stopped by user")
        code = 130
    print("✅ Done" if code == 0 else f"❌ Exit code {code} (see failure.json in the run directory)")
    sys.exit(code)


if __name__ == "__main__":
    main()
