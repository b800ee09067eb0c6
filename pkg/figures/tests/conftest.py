import subprocess
import sys
from pathlib import Path

import pytest

# Small scenario in the simulator's documented config format; everything here
# goes through the CLI so these tests exercise only the public artifacts.
TINY_CONFIG = """\
K = 2
user_pos = -25.0,8.0,0.0; 30.0,35.0,0.0
ris_pos = 0.0,0.0,30.0
ris_dims = 2,2
element_spacing = 0.5
N_t = 2
z_F = 50.0
q0 = -60.0,15.0
qF = 60.0,15.0
N = 6
delta_t = 1.0
v_max = 25.0
alpha = 2.2
gamma = 2.4
kappa = 3.5
rho_db = -25.0
beta_ur_db = 5.0
beta_rg_db = 5.0
beta_ug = 0.0
sigma2_dbm = -80.0
P = 0.01
I = 4
seed = 3
ssca_max_iters = 15
alt_rounds = 1
"""


def run_cli(args, cwd):
    proc = subprocess.run([sys.executable, "-m", "risuav.cli", *args],
                          capture_output=True, text=True, cwd=cwd)
    if proc.returncode != 0:
        raise RuntimeError(f"CLI failed ({proc.returncode}): {proc.stderr}")
    return proc


@pytest.fixture(scope="session")
def campaigns(tmp_path_factory):
    """One beta sweep and one duration sweep generated through the CLI."""
    root = tmp_path_factory.mktemp("campaigns")
    cfg = root / "tiny.cfg"
    cfg.write_text(TINY_CONFIG)
    beta_dir = root / "beta"
    t_dir = root / "duration"
    run_cli(["sweep", "--config", str(cfg), "--param", "beta_db", "--values=3,6",
             "--schemes", "hybrid,random_phase", "--reps", "3",
             "--out-dir", str(beta_dir)], cwd=root)
    run_cli(["sweep", "--config", str(cfg), "--param", "T_seconds", "--values=6,8",
             "--schemes", "random_phase", "--reps", "3",
             "--out-dir", str(t_dir)], cwd=root)
    return {"beta": beta_dir / "manifest.json", "T": t_dir / "manifest.json"}
