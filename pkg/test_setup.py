#!/usr/bin/env python3
"""
Test script to verify the derivlab package imports, configures and opens its
run ledger correctly. Also collected by pytest.
"""

import sys


def test_imports():
    """Test if all modules can be imported"""
    import numpy
    import scipy
    import sqlalchemy
    import pydantic_settings
    print("✅ Basic dependencies OK")

    from derivlab.config import settings
    print("✅ Config module OK")

    from derivlab.database import init_database
    print("✅ Database module OK")

    from derivlab.models import RunRecord
    print("✅ Models module OK")

    from derivlab.utils import RunLedger, SeedPartitioner
    print("✅ Utils module OK")

    from derivlab.lab import (conditioned_mc, contour, ensembles, expansions,
                              polyderiv, stats_io, zeta_lab)
    print("✅ Lab modules OK")

    from derivlab.cli import run
    print("✅ CLI module OK")


def test_config():
    """Test configuration"""
    from derivlab.config import settings

    print(f"✅ Project: {settings.PROJECT_NAME}")
    print(f"✅ Version: {settings.VERSION}")
    print(f"✅ Database: {settings.DATABASE_URL}")
    print(f"✅ Output: {settings.OUTPUT_DIR}")
    assert settings.PROJECT_NAME == "derivlab"
    assert len(settings.s_hist_edges) == settings.S_HIST_BINS + 1


def test_database():
    """Test ledger initialization on an in-memory database"""
    from derivlab.database import make_session
    from derivlab.models import RunRecord

    db = make_session()
    try:
        assert db.query(RunRecord).count() == 0
        print("✅ Ledger session OK")
    finally:
        db.close()


def main():
    """Main test function"""
    print("🧪 derivlab - Setup Test")
    print("=" * 40)

    success = True
    for check in (test_imports, test_config, test_database):
        try:
            check()
        except ImportError as e:
            print(f"❌ Import error: {e}")
            success = False
        except Exception as e:
            print(f"❌ {check.__name__} failed: {e}")
            success = False
        print("\n" + "=" * 40)

    if success:
        print("🎉 All checks passed! The lab is ready to run.")
        print("\nYou can now run an experiment with:")
        print("  python run_lab.py tables")
        print("  or")
        print("  python -m derivlab deriv-dist --ensemble cue --n 40 --samples 10000")
    else:
        print("❌ Some checks failed. Please fix the issues above.")
        sys.exit(1)


if __name__ == "__main__":
    main()
