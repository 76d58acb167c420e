"""Kernel registry and import-time selection."""

import os
import subprocess
import sys

import pytest

from bloomsig import kernels


def test_pure_kernel_always_available():
    assert "pure" in kernels.available_kernels()
    assert kernels.ACTIVE_KERNEL in kernels.available_kernels()


def test_unknown_kernel_name_rejected():
    with pytest.raises(ValueError):
        kernels.get_kernel("gpu")


@pytest.mark.parametrize("name", ["pure", "compiled"])
def test_forced_selection_via_env(name):
    if name not in kernels.available_kernels():
        pytest.skip(f"{name} kernel not built")
    code = (
        "from bloomsig import kernels; "
        f"assert kernels.ACTIVE_KERNEL == {name!r}, kernels.ACTIVE_KERNEL"
    )
    env = dict(os.environ, BLOOMSIG_KERNEL=name)
    subprocess.run([sys.executable, "-c", code], check=True, env=env)


def test_bogus_env_value_fails_import():
    code = "import bloomsig.kernels"
    env = dict(os.environ, BLOOMSIG_KERNEL="turbo")
    proc = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert proc.returncode != 0
    assert "BLOOMSIG_KERNEL" in proc.stderr
