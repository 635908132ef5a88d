#!/usr/bin/env python3
"""
Setup script for the Common2 queue verifier
Checks Python version, installs required packages, and verifies installations
"""
import subprocess
import sys

# Define minimum Python version
REQUIRED_PYTHON = (3, 8, 0)

# Define required packages with minimum versions
REQUIRED_PACKAGES = [
    ("pandas", "1.5.0"),
    ("plyer", "2.0.0"),
    ("openpyxl", "3.1.0"),
    ("packaging", "21.0"),
    ("pytest", "7.4.0"),
    ("hypothesis", "6.80.0"),
]


def check_python_version():
    """Check if Python version meets requirements."""
    print("=" * 60)
    print("Checking Python version...")
    print(f"Current Python version: {sys.version}")

    current_version = sys.version_info[:3]

    if current_version < REQUIRED_PYTHON:
        print(f"❌ Error: Python {REQUIRED_PYTHON[0]}.{REQUIRED_PYTHON[1]}+ is required.")
        print(f"   You have Python {current_version[0]}.{current_version[1]}.{current_version[2]}")
        return False
    print(f"✅ Python version check passed ({current_version[0]}.{current_version[1]}.{current_version[2]})")
    return True


def check_package(package_name, min_version=None):
    """Check if a package is installed and meets minimum version requirement."""
    try:
        module = __import__(package_name)
        current_version = getattr(module, '__version__', None)
        if min_version and current_version:
            from packaging import version
            if version.parse(current_version) < version.parse(min_version):
                print(f"⚠️  {package_name} version {current_version} is below required {min_version}")
                return False
            print(f"✅ {package_name} {current_version} (minimum: {min_version})")
        elif current_version:
            print(f"✅ {package_name} {current_version} is installed")
        else:
            print(f"✅ {package_name} is installed")
        return True

    except ImportError:
        print(f"❌ {package_name} is not installed")
        return False
    except Exception as e:
        print(f"⚠️  Error checking {package_name}: {e}")
        return False


def install_package(package_name, version=None):
    """Install or upgrade a package using pip."""
    package_spec = f"{package_name}>={version}" if version else package_name
    print(f"Installing {package_spec}...")
    try:
        subprocess.run([sys.executable, "-m", "pip", "install", package_spec],
                       capture_output=True, text=True, check=True)
        print(f"✅ Successfully installed {package_spec}")
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed to install {package_spec}")
        print(f"   Error: {e.stderr[:200] if e.stderr else str(e)}")
        return False


def create_requirements_file():
    """Create a requirements.txt file for future use."""
    with open("requirements.txt", "w") as f:
        for package, version in REQUIRED_PACKAGES:
            f.write(f"{package}>={version}\n" if version else f"{package}\n")
    print("✅ Created requirements.txt file")


def setup_environment():
    """Main setup function."""
    print("=" * 60)
    print("COMMON2 QUEUE VERIFIER - SETUP")
    print("=" * 60)

    if not check_python_version():
        return False

    print("\n" + "=" * 60)
    print("Checking required packages...")
    packages_to_install = [(name, v) for name, v in REQUIRED_PACKAGES if not check_package(name, v)]

    if packages_to_install:
        print("\n" + "=" * 60)
        print("Installing missing packages...")
        try:
            import packaging  # noqa: F401
        except ImportError:
            print("Installing packaging module for version checks...")
            install_package("packaging", "21.0")

        failed_installs = [name for name, v in packages_to_install if not install_package(name, v)]
        if failed_installs:
            print(f"\n❌ Failed to install: {', '.join(failed_installs)}")
            print("   Please install them manually with:")
            for package in failed_installs:
                print(f"     pip install {package}")
            return False

    create_requirements_file()
    return True


if __name__ == "__main__":
    try:
        success = setup_environment()
    except KeyboardInterrupt:
        print("\n\nSetup interrupted by user.")
        sys.exit(1)

    print("\n" + "=" * 60)
    print("SETUP SUCCESSFUL!" if success else "SETUP FAILED!")
    print("=" * 60)
    if success:
        print("\nTo run the verifier, use:")
        print("  • python cli.py verify")
        print("  • python -m pytest tests")
    sys.exit(0 if success else 1)
